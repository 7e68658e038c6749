#include "overcrit/propagation.hpp"

#include "overcrit/errors.hpp"
#include "overcrit/text.hpp"

#include <algorithm>
#include <cmath>

namespace overcrit {

namespace {

    constexpr double stability_factor = 0.1; // dt * ||H|| must stay below this
    constexpr double taylor_substep = 0.5;    // bound on |h| ||H|| per Taylor substep
    constexpr int taylor_max_terms = 40;

    Matrix phase_apply(const SpectralDecomposition& dec, const Matrix& x, double t)
    {
        const Eigen::VectorXcd phase = (Complex(0.0, -t) * dec.eigenvalues.cast<Complex>()).array().exp();
        Matrix coeff = dec.eigenvectors.adjoint() * x;
        coeff = phase.asDiagonal() * coeff;
        return dec.eigenvectors * coeff;
    }

    Eigen::SparseMatrix<Complex, Eigen::RowMajor> sparse_of(const Matrix& dense)
    {
        std::vector<Eigen::Triplet<Complex>> entries;
        for (Eigen::Index c = 0; c < dense.cols(); ++c)
            for (Eigen::Index r = 0; r < dense.rows(); ++r)
                if (dense(r, c) != Complex(0.0))
                    entries.emplace_back(int(r), int(c), dense(r, c));
        Eigen::SparseMatrix<Complex, Eigen::RowMajor> s(dense.rows(), dense.cols());
        s.setFromTriplets(entries.begin(), entries.end());
        return s;
    }

} // namespace

void EvolutionConfig::validate() const
{
    require(std::isfinite(dt_max) && dt_max > 0.0, ErrorCode::invalid_argument, "dt_max must be positive");
    require(std::isfinite(rate_cap) && rate_cap > 0.0, ErrorCode::invalid_argument, "rate_cap must be positive");
}

Dynamics::Dynamics(const TwoBandModel& model, double lambda, const SwitchingSchedule& schedule,
    const EvolutionConfig& config)
    : model_(model)
    , lambda_(lambda)
    , schedule_(schedule)
    , config_(config)
{
    require(std::isfinite(lambda), ErrorCode::invalid_argument, "coupling must be finite");
    schedule.validate();
    config.validate();
    auto h0 = build_h0(model);
    SpectralDecomposition dec = decompose(h0);
    BandWindows bands = band_edges(dec.values(), model);
    auto sparse = sparse_of(h0.matrix());
    double norm1 = 0.0;
    for (int r = 0; r < sparse.outerSize(); ++r) {
        double row = 0.0;
        for (decltype(sparse)::InnerIterator it(sparse, r); it; ++it)
            row += std::abs(it.value());
        norm1 = std::max(norm1, row); // Hermitian: row sums equal column sums
    }
    auto shared = std::make_shared<Shared>(Shared { model, std::move(h0), std::move(dec), bands, std::move(sparse),
        potential_diagonal(model), norm1 });
    if (lambda == 0.0) {
        coupled_ = std::shared_ptr<const SpectralDecomposition>(shared, &shared->h0);
    } else {
        Matrix hl = shared->h0_dense.matrix();
        hl.diagonal() += lambda * shared->v.cast<Complex>();
        coupled_ = std::make_shared<const SpectralDecomposition>(decompose(HermitianOperator(std::move(hl))));
    }
    shared_ = std::move(shared);
    build_grids();
}

Dynamics::Dynamics(std::shared_ptr<const Shared> shared, std::shared_ptr<const SpectralDecomposition> coupled,
    double lambda, const SwitchingSchedule& schedule, const EvolutionConfig& config)
    : shared_(std::move(shared))
    , coupled_(std::move(coupled))
    , model_(shared_->model)
    , lambda_(lambda)
    , schedule_(schedule)
    , config_(config)
{
    schedule.validate();
    config.validate();
    build_grids();
}

Dynamics Dynamics::with_schedule(const SwitchingSchedule& schedule) const
{
    return Dynamics(shared_, coupled_, lambda_, schedule, config_);
}

void Dynamics::build_grids()
{
    const double radius = std::max(std::abs(shared_->h0.eigenvalues(0)),
                              std::abs(shared_->h0.eigenvalues(shared_->h0.eigenvalues.size() - 1)))
        + std::abs(lambda_) * shared_->v.cwiseAbs().maxCoeff();
    dt_ = radius > 0.0 ? std::min(config_.dt_max, stability_factor / radius) : config_.dt_max;
    ramp_on_ = ramp_grid(schedule_.support_begin(), schedule_.plateau_begin());
    ramp_off_ = ramp_grid(schedule_.support_end(), schedule_.plateau_end());
}

// Grid from the outer edge of a ramp to its inner edge, returned ascending. The local
// step honours dt <= c / |phi_eps'|; when that cap never binds the grid is uniform.
std::vector<double> Dynamics::ramp_grid(double outer, double inner) const
{
    const double length = std::abs(inner - outer);
    const double dir = inner > outer ? 1.0 : -1.0;
    const double eps = dir > 0.0 ? schedule_.eps1 : schedule_.eps2;
    std::vector<double> grid;

    if (lambda_ == 0.0 || std::abs(lambda_) * eps * schedule_.profile.max_slope() * dt_ <= config_.rate_cap) {
        const long n = std::max(1L, long(std::ceil(length / dt_ - 1e-9)));
        grid.reserve(n + 1);
        for (long k = 0; k <= n; ++k)
            grid.push_back(k == n ? inner : outer + dir * length * double(k) / double(n));
    } else {
        // the cap is on the rate of the generator, |lambda phi_eps'|
        auto rate = [&](double t) { return std::abs(lambda_ * phi_eps_rate(schedule_, t)); };
        double t = outer;
        grid.push_back(t);
        while (dir * (inner - t) > 0.0) {
            double h = dt_;
            for (int it = 0; it < 50; ++it) {
                const double r = std::max({ rate(t), rate(t + dir * 0.5 * h), rate(t + dir * h) });
                if (h * r <= config_.rate_cap)
                    break;
                h = std::min(h, 0.999 * config_.rate_cap / r);
            }
            require(h > 1e-12 * length, ErrorCode::step_failure,
                strfmt("ramp step underflow at t = %.6g", t));
            t = dir * (inner - t) <= h * (1.0 + 1e-9) ? inner : t + dir * h;
            grid.push_back(t);
        }
    }
    if (dir < 0.0)
        std::reverse(grid.begin(), grid.end());
    return grid;
}

void Dynamics::constant_step(Matrix& x, const SpectralDecomposition& dec, double h) const
{
    x = phase_apply(dec, x, h);
}

Matrix Dynamics::free_evolve(const Matrix& block, double t) const
{
    return phase_apply(shared_->h0, block, t);
}

Matrix Dynamics::coupled_evolve(const Matrix& block, double t) const
{
    return phase_apply(*coupled_, block, t);
}

// Taylor series of exp(-i h (H0 + mu V)) applied to x with the sparse H0, split into
// substeps short enough that the series converges in a handful of terms.
void Dynamics::taylor_step(Matrix& x, double h, double mu) const
{
    const RealVector muv = mu * shared_->v;
    const double bound = std::abs(h) * (shared_->h0_norm1 + muv.cwiseAbs().maxCoeff());
    const int substeps = std::max(1, int(std::ceil(bound / taylor_substep)));
    const double hs = h / substeps;
    Matrix term(x.rows(), x.cols());
    Matrix next(x.rows(), x.cols());
    for (int s = 0; s < substeps; ++s) {
        term = x;
        const double scale = x.norm();
        for (int k = 1; k <= taylor_max_terms; ++k) {
            next.noalias() = shared_->h0_sparse * term;
            next += muv.cast<Complex>().asDiagonal() * term;
            term = next * Complex(0.0, -hs / k);
            x += term;
            if (term.norm() <= 1e-17 * scale)
                break;
        }
    }
}

void Dynamics::ramp_step(Matrix& x, double h, double mu) const
{
    if (config_.integrator == Integrator::split_step) {
        const Eigen::VectorXcd half = (Complex(0.0, -0.5 * h * mu) * shared_->v.cast<Complex>()).array().exp();
        x = half.asDiagonal() * x;
        x = phase_apply(shared_->h0, x, h);
        x = half.asDiagonal() * x;
        return;
    }
    if (config_.step_exponential == StepExponential::taylor) {
        taylor_step(x, h, mu);
        return;
    }
    Matrix hm = shared_->h0_dense.matrix();
    hm.diagonal() += mu * shared_->v.cast<Complex>();
    x = phase_apply(decompose(HermitianOperator(std::move(hm))), x, h);
}

void Dynamics::ramp_segment(Matrix& x, const std::vector<double>& grid, double from, double to, long& steps) const
{
    const double lo = std::min(from, to);
    const double hi = std::max(from, to);
    std::vector<double> pts { from };
    auto first = std::upper_bound(grid.begin(), grid.end(), lo);
    auto last = std::lower_bound(grid.begin(), grid.end(), hi);
    if (from < to)
        pts.insert(pts.end(), first, last);
    else
        pts.insert(pts.end(), std::make_reverse_iterator(last), std::make_reverse_iterator(first));
    pts.push_back(to);
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const double h = pts[k + 1] - pts[k];
        if (h == 0.0)
            continue;
        const double mid = 0.5 * (pts[k] + pts[k + 1]);
        ramp_step(x, h, lambda_ * phi_eps(schedule_, mid));
        ++steps;
    }
}

Matrix Dynamics::evolve_block(Matrix x, double t_from, double t_to, EvolutionStats* stats) const
{
    require(std::isfinite(t_from) && std::isfinite(t_to), ErrorCode::invalid_argument, "times must be finite");
    require(x.rows() == model_.dim(), ErrorCode::invalid_argument, "state dimension does not match the model");
    const RealVector norms_in = x.colwise().norm();
    long steps = 0;

    if (t_from != t_to && lambda_ == 0.0) {
        x = free_evolve(x, t_to - t_from);
    } else if (t_from != t_to) {
        const double a = schedule_.support_begin();
        const double b = schedule_.plateau_begin();
        const double c = schedule_.plateau_end();
        const double d = schedule_.support_end();
        std::vector<double> cuts { t_from };
        for (double p : { a, b, c, d })
            if (p > std::min(t_from, t_to) && p < std::max(t_from, t_to))
                cuts.push_back(p);
        if (t_to < t_from)
            std::sort(cuts.begin() + 1, cuts.end(), std::greater<>());
        cuts.push_back(t_to);

        for (size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double p = cuts[k];
            const double q = cuts[k + 1];
            const double mid = 0.5 * (p + q);
            if (mid <= a || mid >= d)
                x = free_evolve(x, q - p);
            else if (mid >= b && mid <= c)
                x = coupled_evolve(x, q - p);
            else
                ramp_segment(x, mid < 0.0 ? ramp_on_ : ramp_off_, p, q, steps);
        }
    }

    if (stats) {
        stats->steps += steps;
        const RealVector norms_out = x.colwise().norm();
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (norms_in(j) > 0.0)
                stats->norm_drift = std::max(stats->norm_drift, std::abs(norms_out(j) - norms_in(j)) / norms_in(j));
    }
    return x;
}

Vector Dynamics::evolve(const Vector& state, double t_from, double t_to, EvolutionStats* stats) const
{
    require(std::abs(state.norm() - 1.0) <= 1e-8, ErrorCode::invalid_argument, "state must be normalized");
    return evolve_block(Matrix(state), t_from, t_to, stats).col(0);
}

Matrix Dynamics::propagator(double t_from, double t_to, EvolutionStats* stats) const
{
    return evolve_block(Matrix::Identity(model_.dim(), model_.dim()), t_from, t_to, stats);
}

Vector evolve(const Vector& state, double t_from, double t_to, const TwoBandModel& model, double lambda,
    const SwitchingSchedule& schedule, const EvolutionConfig& config)
{
    return Dynamics(model, lambda, schedule, config).evolve(state, t_from, t_to);
}

Matrix propagator(double t_from, double t_to, const TwoBandModel& model, double lambda,
    const SwitchingSchedule& schedule, const EvolutionConfig& config)
{
    return Dynamics(model, lambda, schedule, config).propagator(t_from, t_to);
}

std::string_view to_string(Integrator i)
{
    return i == Integrator::midpoint_exponential ? "midpoint_exponential" : "split_step";
}

std::string_view to_string(StepExponential k)
{
    return k == StepExponential::taylor ? "taylor" : "eigen";
}

void to_json(nlohmann::json& j, const EvolutionConfig& c)
{
    j = nlohmann::json {
        { "dt_max", c.dt_max },
        { "rate_cap", c.rate_cap },
        { "integrator", std::string(to_string(c.integrator)) },
        { "step_exponential", std::string(to_string(c.step_exponential)) },
    };
}

void from_json(const nlohmann::json& j, EvolutionConfig& c)
{
    require(j.is_object(), ErrorCode::invalid_argument, "evolution config must be a JSON object");
    EvolutionConfig out;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "dt_max")
                out.dt_max = value.get<double>();
            else if (key == "rate_cap")
                out.rate_cap = value.get<double>();
            else if (key == "integrator") {
                const auto s = value.get<std::string>();
                require(s == "midpoint_exponential" || s == "split_step", ErrorCode::invalid_argument,
                    "unknown integrator '" + s + "'");
                out.integrator = s == "split_step" ? Integrator::split_step : Integrator::midpoint_exponential;
            } else if (key == "step_exponential") {
                const auto s = value.get<std::string>();
                require(s == "taylor" || s == "eigen", ErrorCode::invalid_argument,
                    "unknown step_exponential '" + s + "'");
                out.step_exponential = s == "eigen" ? StepExponential::eigen : StepExponential::taylor;
            } else
                fail(ErrorCode::invalid_argument, "unknown evolution key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::invalid_argument, "bad evolution value for '" + key + "': " + e.what());
        }
    }
    out.validate();
    c = out;
}

} // namespace overcrit
