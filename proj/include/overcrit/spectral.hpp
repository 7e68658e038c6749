#pragma once

#include "overcrit/model.hpp"

#include <json.hpp>

#include <vector>

namespace overcrit {

struct SpectralDecomposition {
    RealVector eigenvalues; // ascending
    Matrix eigenvectors;    // orthonormal columns
    Eigen::Index source_dim = 0;

    std::span<const double> values() const { return as_span(eigenvalues); }
    // Indices [first, last) of eigenvalues inside the closed window.
    std::pair<Eigen::Index, Eigen::Index> index_range(const Interval& window) const;
};

SpectralDecomposition decompose(const HermitianOperator& h);
SpectralDecomposition decompose(const Matrix& h); // checks Hermiticity first
RealVector eigenvalues_only(const HermitianOperator& h);

struct Projector {
    Matrix matrix;
    Eigen::Index rank = 0;
    Interval window;
};

Projector spectral_projector(const SpectralDecomposition& dec, const Interval& window);

// Three windows covering the whole spectrum of dec: below the gap, the gap itself, above it.
// The outer windows reach past the band edges of H0 so eigenvalues of H_lambda that left
// the bands are still classified.
struct SpectralPartition {
    Interval lower, gap, upper;
};
SpectralPartition partition(const SpectralDecomposition& dec, const BandWindows& bands);

struct GapState {
    double energy;
    Vector state;
};
std::vector<GapState> gap_states(const SpectralDecomposition& dec, const BandWindows& bands);

double edge_margin(const BandWindows& bands);

struct DiveCurve {
    std::vector<double> lambdas;
    std::vector<double> energies;
    std::vector<double> overlaps;
    bool detached = false; // false: the whole grid lies below detachment, curve is empty
    bool dived = false;    // the tracked level reached the lower band edge

    bool empty() const { return lambdas.empty(); }
};

DiveCurve dive_curve(const TwoBandModel& model, std::span<const double> lambda_grid);
void write_csv(std::ostream& out, const DiveCurve& curve);

struct CriticalCoupling {
    double lambda_c = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double tolerance = 0.0;
    double edge_margin = 0.0;
    double lower_edge = 0.0; // b-
};

CriticalCoupling find_lambda_c(const TwoBandModel& model, double tol = 1e-3);
void to_json(nlohmann::json& j, const CriticalCoupling& c);

} // namespace overcrit
