#pragma once

#include "overcrit/propagation.hpp"

#include <json.hpp>

#include <vector>

namespace overcrit {

enum class Side { plus, minus };
enum class SMatrixKind { adiabatic, static_approximant };

struct SMatrix {
    Matrix matrix; // in the H0 eigenbasis, ordered like free_spectrum().eigenvalues
    SMatrixKind kind = SMatrixKind::adiabatic;
    double lambda = 0.0;
    double eps1 = std::numeric_limits<double>::quiet_NaN();
    double eps2 = std::numeric_limits<double>::quiet_NaN();
    double horizon = std::numeric_limits<double>::quiet_NaN();
    double unitarity_defect = 0.0;
    double commutator_diagnostic = std::numeric_limits<double>::quiet_NaN(); // ||[S,H0]|| / ||H0||
};

// W(T) = U(0,T) exp(-i T H0), position basis.
Matrix adiabatic_moller_at(const Dynamics& dyn, double horizon);
// For |T| past the support edge the generator is H0 on the remaining stretch, so the factor
// exp(-i(T - T_edge)H0) from the propagator cancels against exp(-iTH0) and W(T) = W(T_edge):
// the strong limit is reached at T = 2/eps2 (plus) or T = -2/eps1 (minus).
Matrix adiabatic_moller(const Dynamics& dyn, Side side);

// S = exp(-i(2/eps1)H0) U(-2/eps1, 2/eps2) exp(-i(2/eps2)H0), one backward pass.
SMatrix adiabatic_s(const Dynamics& dyn, EvolutionStats* stats = nullptr);
// Same operator assembled as (W-)^dagger W+ from the two Moller operators.
SMatrix adiabatic_s_from_moller(const Dynamics& dyn);

struct BlockNorm {
    double value = 0.0;
    bool empty_window = false;
};

// Largest singular value of the block of S mapping the from-window states into the to-window.
BlockNorm transition_norm(const SMatrix& s, const Interval& from, const Interval& to, const SpectralDecomposition& h0);

struct ScatteringRecord {
    double lambda;
    double eps1;
    double eps2;
    double norm_mp; // ||P- S P+||
    double norm_pm; // ||P+ S P-||
    double unitarity_defect;
    SMatrixKind kind;
};
ScatteringRecord summarize(const SMatrix& s, const SpectralDecomposition& h0, const BandWindows& bands);
void to_json(nlohmann::json& j, const ScatteringRecord& r);
std::string_view to_string(SMatrixKind k);

double reflection_time(const TwoBandModel& model);

// Gaussian packets centred on the well, half of them projected onto each band.
std::vector<Vector> probe_wavepackets(const TwoBandModel& model, const SpectralDecomposition& h0,
    const BandWindows& bands, int n_probes = 8);

struct MollerApproximant {
    Matrix matrix; // position basis
    double horizon = 0.0;
    double plateau_residual = 0.0;
    Side side = Side::plus;
};

// Static Moller operators at finite horizon. The plain product exp(iTH)exp(-iTH0) only
// converges strongly, so its cross-band leakage does not shrink with T at a fixed lattice.
// We use the time average over [T/2, T] with a smooth weight w,
//     W(T) = int w(u) exp(iuT H_lambda) exp(-iuT H0) du,
// which has the same strong limit and suppresses the oscillating terms. In the mixed
// eigenbases W(T) = U (O o F) U0^dagger with O = U^dagger U0 and F_ab = w^(T(E_a - E0_b)).
class StaticScattering {
public:
    static constexpr double plateau_tolerance = 0.05;

    StaticScattering(const TwoBandModel& model, double lambda, int n_probes = 8);
    explicit StaticScattering(const Dynamics& dyn, int n_probes = 8);

    double max_horizon() const { return t_max_; }
    // time for the fastest packet to cross the well
    double min_horizon() const;
    const std::vector<Vector>& probes() const { return probes_; }
    const SpectralDecomposition& free_spectrum() const { return h0_; }
    const BandWindows& bands() const { return bands_; }

    MollerApproximant moller(double horizon, Side side) const;
    SMatrix s(double horizon) const;
    // Smallest horizon on the ladder t_max * {1/4, 1/2, 3/4, 1} whose residuals pass.
    double converged_horizon() const;

private:
    Matrix window_factors(double horizon, Side side) const;
    double residual(double horizon, Side side, const Matrix& factors) const;

    TwoBandModel model_;
    double lambda_;
    SpectralDecomposition h0_;
    SpectralDecomposition hl_;
    BandWindows bands_;
    Matrix overlap_; // U^dagger U0
    std::vector<Vector> probes_;
    double t_max_;
};

MollerApproximant static_moller(const TwoBandModel& model, double lambda, double horizon, Side side, int n_probes = 8);
SMatrix static_s(const TwoBandModel& model, double lambda, double horizon);

// Bound on the cross-band blocks implied by the commutator: ||P-SP+|| <= ||[S,H0]|| / gap.
double commutator_bound(const SMatrix& s, const SpectralDecomposition& h0, const BandWindows& bands);

} // namespace overcrit
