#include "overcrit/scattering.hpp"

#include "overcrit/errors.hpp"
#include "overcrit/text.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace overcrit {

namespace {

    // beyond this frequency the Fourier transform of the averaging weight is below 1e-13
    constexpr double weight_bandwidth = 3000.0;

    double averaging_weight(double u)
    {
        const double y = (u - 0.75) / 0.25;
        return std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
    }

    Matrix to_eigenbasis(const SpectralDecomposition& h0, const Matrix& op)
    {
        return h0.eigenvectors.adjoint() * op * h0.eigenvectors;
    }

    Eigen::VectorXcd free_phases(const SpectralDecomposition& h0, double t)
    {
        return (Complex(0.0, -t) * h0.eigenvalues.cast<Complex>()).array().exp();
    }

} // namespace

Matrix adiabatic_moller_at(const Dynamics& dyn, double horizon)
{
    const Matrix start = dyn.free_evolve(Matrix::Identity(dyn.model().dim(), dyn.model().dim()), horizon);
    return dyn.evolve_block(start, horizon, 0.0);
}

Matrix adiabatic_moller(const Dynamics& dyn, Side side)
{
    const auto& sch = dyn.schedule();
    return adiabatic_moller_at(dyn, side == Side::plus ? sch.support_end() : sch.support_begin());
}

SMatrix adiabatic_s(const Dynamics& dyn, EvolutionStats* stats)
{
    const auto& sch = dyn.schedule();
    const auto& h0 = dyn.free_spectrum();
    // columns are H0 eigenvectors, so the trailing exp(-i(2/eps2)H0) is a column phase
    Matrix x = dyn.evolve_block(h0.eigenvectors, sch.support_end(), sch.support_begin(), stats);
    Matrix s = h0.eigenvectors.adjoint() * x;
    s = free_phases(h0, -sch.support_begin()).asDiagonal() * s;
    s = s * free_phases(h0, sch.support_end()).asDiagonal();

    SMatrix out;
    out.unitarity_defect = unitarity_defect(s);
    out.matrix = std::move(s);
    out.kind = SMatrixKind::adiabatic;
    out.lambda = dyn.lambda();
    out.eps1 = sch.eps1;
    out.eps2 = sch.eps2;
    return out;
}

SMatrix adiabatic_s_from_moller(const Dynamics& dyn)
{
    const Matrix wp = adiabatic_moller(dyn, Side::plus);
    const Matrix wm = adiabatic_moller(dyn, Side::minus);
    SMatrix out;
    out.matrix = to_eigenbasis(dyn.free_spectrum(), wm.adjoint() * wp);
    out.unitarity_defect = unitarity_defect(out.matrix);
    out.kind = SMatrixKind::adiabatic;
    out.lambda = dyn.lambda();
    out.eps1 = dyn.schedule().eps1;
    out.eps2 = dyn.schedule().eps2;
    return out;
}

BlockNorm transition_norm(const SMatrix& s, const Interval& from, const Interval& to, const SpectralDecomposition& h0)
{
    require(s.matrix.rows() == h0.eigenvalues.size() && s.matrix.cols() == h0.eigenvalues.size(),
        ErrorCode::invalid_argument, "S and the H0 spectrum differ in dimension");
    const auto [c0, c1] = h0.index_range(from);
    const auto [r0, r1] = h0.index_range(to);
    if (c1 == c0 || r1 == r0)
        return { 0.0, true };
    return { operator_norm(s.matrix.block(r0, c0, r1 - r0, c1 - c0)), false };
}

ScatteringRecord summarize(const SMatrix& s, const SpectralDecomposition& h0, const BandWindows& bands)
{
    return {
        s.lambda,
        s.eps1,
        s.eps2,
        transition_norm(s, bands.sigma_plus, bands.sigma_minus, h0).value,
        transition_norm(s, bands.sigma_minus, bands.sigma_plus, h0).value,
        s.unitarity_defect,
        s.kind,
    };
}

std::string_view to_string(SMatrixKind k)
{
    return k == SMatrixKind::adiabatic ? "adiabatic" : "static_approximant";
}

void to_json(nlohmann::json& j, const ScatteringRecord& r)
{
    j = nlohmann::json {
        { "lambda", r.lambda },
        { "eps1", r.eps1 },
        { "eps2", r.eps2 },
        { "norm_mp", r.norm_mp },
        { "norm_pm", r.norm_pm },
        { "unitarity_defect", r.unitarity_defect },
        { "kind", std::string(to_string(r.kind)) },
    };
}

double reflection_time(const TwoBandModel& model)
{
    const double v = max_group_velocity(model);
    return v > 0.0 ? model.n_sites / (2.0 * v) : std::numeric_limits<double>::infinity();
}

std::vector<Vector> probe_wavepackets(const TwoBandModel& model, const SpectralDecomposition& h0,
    const BandWindows& bands, int n_probes)
{
    require(n_probes >= 2 && n_probes % 2 == 0, ErrorCode::invalid_argument, "n_probes must be even and positive");
    const int n = model.n_sites;
    const int per_band = n_probes / 2;
    const double width = n / 16.0;
    const double pi = std::numbers::pi;
    const auto [m0, m1] = h0.index_range(bands.sigma_minus);
    const auto [p0, p1] = h0.index_range(bands.sigma_plus);

    std::vector<Vector> probes;
    for (int band = 0; band < 2; ++band) {
        const auto cols = band == 0 ? h0.eigenvectors.middleCols(p0, p1 - p0) : h0.eigenvectors.middleCols(m0, m1 - m0);
        for (int p = 0; p < per_band; ++p) {
            const double k = -pi + (2 * p + 1) * pi / per_band;
            Vector psi(model.dim());
            for (int s = 0; s < n; ++s) {
                double d = s - model.well_center;
                if (model.boundary == Boundary::periodic)
                    d -= n * std::round(d / n);
                const Complex amp = std::exp(-d * d / (2.0 * width * width)) * std::polar(1.0, k * s);
                psi(2 * s) = amp;
                psi(2 * s + 1) = amp;
            }
            Vector projected = cols * (cols.adjoint() * psi);
            probes.push_back(projected / projected.norm());
        }
    }
    return probes;
}

StaticScattering::StaticScattering(const TwoBandModel& model, double lambda, int n_probes)
    : model_(model)
    , lambda_(lambda)
    , h0_(decompose(build_h0(model)))
    , hl_(lambda == 0.0 ? h0_ : decompose(h_of(model, lambda)))
    , bands_(band_edges(h0_.values(), model))
    , overlap_(hl_.eigenvectors.adjoint() * h0_.eigenvectors)
    , probes_(probe_wavepackets(model, h0_, bands_, n_probes))
    , t_max_(reflection_time(model))
{
    require(std::isfinite(lambda), ErrorCode::invalid_argument, "coupling must be finite");
}

StaticScattering::StaticScattering(const Dynamics& dyn, int n_probes)
    : model_(dyn.model())
    , lambda_(dyn.lambda())
    , h0_(dyn.free_spectrum())
    , hl_(dyn.coupled_spectrum())
    , bands_(dyn.bands())
    , overlap_(hl_.eigenvectors.adjoint() * h0_.eigenvectors)
    , probes_(probe_wavepackets(model_, h0_, bands_, n_probes))
    , t_max_(reflection_time(model_))
{
}

// F_ab = sum_j c_j exp(i s T u_j (E_a - E0_b)) on a uniform grid over [1/2, 1]. The weight
// and all its derivatives vanish at both ends, so the trapezoid rule is spectrally accurate
// once the alias frequency 4 pi N clears T * max|E_a - E0_b| by the weight's bandwidth.
Matrix StaticScattering::window_factors(double horizon, Side side) const
{
    const Eigen::Index na = hl_.eigenvalues.size();
    const Eigen::Index nb = h0_.eigenvalues.size();
    if (horizon == 0.0)
        return Matrix::Ones(na, nb);

    const Eigen::ArrayXXd omega = hl_.eigenvalues.array().replicate(1, nb)
        - h0_.eigenvalues.transpose().array().replicate(na, 1);
    const double reach = std::abs(horizon) * omega.abs().maxCoeff();
    const int nodes = int(std::ceil((reach + weight_bandwidth) / (4.0 * std::numbers::pi))) + 8;
    const double du = 0.5 / nodes;

    std::vector<double> c(nodes + 1, 0.0);
    double total = 0.0;
    for (int j = 1; j < nodes; ++j)
        total += c[j] = averaging_weight(0.5 + j * du);

    const double sign = side == Side::plus ? 1.0 : -1.0;
    const Eigen::ArrayXXd scaled = (sign * horizon) * omega;
    const Eigen::ArrayXXcd step = (Complex(0.0, du) * scaled.cast<Complex>()).exp();
    Eigen::ArrayXXcd current = (Complex(0.0, 0.5 + du) * scaled.cast<Complex>()).exp();
    Eigen::ArrayXXcd sum = Eigen::ArrayXXcd::Zero(na, nb);
    for (int j = 1; j < nodes; ++j) {
        sum += (c[j] / total) * current;
        current *= step;
    }
    return sum.matrix();
}

double StaticScattering::residual(double horizon, Side side, const Matrix& factors) const
{
    const Matrix earlier = overlap_.cwiseProduct(window_factors(0.9 * horizon, side));
    const Matrix now = overlap_.cwiseProduct(factors);
    double worst = 0.0;
    for (const auto& psi : probes_) {
        const Vector c = h0_.eigenvectors.adjoint() * psi;
        worst = std::max(worst, ((now - earlier) * c).norm());
    }
    return worst;
}

MollerApproximant StaticScattering::moller(double horizon, Side side) const
{
    require(std::isfinite(horizon) && horizon >= 0.0, ErrorCode::invalid_argument, "horizon must be non-negative");
    require(horizon <= t_max_ * (1.0 + 1e-12), ErrorCode::invalid_argument,
        strfmt("horizon %.6g exceeds the reflection time %.6g", horizon, t_max_));
    const Matrix f = window_factors(horizon, side);
    MollerApproximant w;
    w.horizon = horizon;
    w.side = side;
    w.plateau_residual = lambda_ == 0.0 ? 0.0 : residual(horizon, side, f);
    w.matrix = hl_.eigenvectors * overlap_.cwiseProduct(f) * h0_.eigenvectors.adjoint();
    require(!(w.plateau_residual > plateau_tolerance && horizon >= t_max_ * (1.0 - 1e-12)), ErrorCode::no_plateau,
        strfmt("plateau residual %.4g at the largest admissible horizon", w.plateau_residual));
    return w;
}

double StaticScattering::min_horizon() const
{
    return model_.well_sites() / max_group_velocity(model_);
}

SMatrix StaticScattering::s(double horizon) const
{
    require(std::isfinite(horizon) && horizon >= 0.0 && horizon <= t_max_ * (1.0 + 1e-12),
        ErrorCode::invalid_argument, "horizon outside [0, reflection time]");
    const Matrix fp = window_factors(horizon, Side::plus);
    const Matrix fm = window_factors(horizon, Side::minus);
    if (lambda_ != 0.0) {
        // W(T) - W(0.9T) vanishes as T -> 0, so short horizons need a separate guard
        require(horizon >= min_horizon(), ErrorCode::no_plateau,
            strfmt("horizon %.6g is shorter than the well crossing time %.6g", horizon, min_horizon()));
        const double rp = residual(horizon, Side::plus, fp);
        const double rm = residual(horizon, Side::minus, fm);
        require(std::max(rp, rm) <= plateau_tolerance, ErrorCode::no_plateau,
            strfmt("plateau residuals %.4g / %.4g exceed %.2g at horizon %.6g", rp, rm, plateau_tolerance, horizon));
    }
    // U0^dagger W-^dagger W+ U0 = (O o F-)^dagger (O o F+)
    SMatrix out;
    out.matrix = overlap_.cwiseProduct(fm).adjoint() * overlap_.cwiseProduct(fp);
    out.kind = SMatrixKind::static_approximant;
    out.lambda = lambda_;
    out.horizon = horizon;
    out.unitarity_defect = unitarity_defect(out.matrix);
    const Eigen::Index n = h0_.eigenvalues.size();
    const Eigen::ArrayXXd spread = h0_.eigenvalues.transpose().array().replicate(n, 1)
        - h0_.eigenvalues.array().replicate(1, n);
    const double h0_norm = h0_.eigenvalues.cwiseAbs().maxCoeff();
    out.commutator_diagnostic = operator_norm(out.matrix.cwiseProduct(spread.cast<Complex>().matrix())) / h0_norm;
    return out;
}

double StaticScattering::converged_horizon() const
{
    for (double f : { 0.25, 0.5, 0.75, 1.0 }) {
        const double t = f * t_max_;
        const double rp = residual(t, Side::plus, window_factors(t, Side::plus));
        const double rm = residual(t, Side::minus, window_factors(t, Side::minus));
        if (std::max(rp, rm) <= plateau_tolerance)
            return t;
    }
    fail(ErrorCode::no_plateau, "no horizon up to the reflection time passes the plateau check");
}

MollerApproximant static_moller(const TwoBandModel& model, double lambda, double horizon, Side side, int n_probes)
{
    return StaticScattering(model, lambda, n_probes).moller(horizon, side);
}

SMatrix static_s(const TwoBandModel& model, double lambda, double horizon)
{
    return StaticScattering(model, lambda).s(horizon);
}

double commutator_bound(const SMatrix& s, const SpectralDecomposition& h0, const BandWindows& bands)
{
    // S_-+ E_+ - E_- S_-+ = [S,H0]_-+ with the two spectra on opposite sides of the gap,
    // which gives ||S_-+|| <= ||[S,H0]|| / gap.
    return s.commutator_diagnostic * h0.eigenvalues.cwiseAbs().maxCoeff() / bands.gap_width();
}

} // namespace overcrit
