#include "overcrit/witness.hpp"

#include "overcrit/errors.hpp"
#include "overcrit/text.hpp"

#include <cmath>
#include <ostream>

namespace overcrit {

namespace {

    double band_weight(const SpectralDecomposition& dec, const Interval& window, const Vector& x)
    {
        const auto [first, last] = dec.index_range(window);
        return (dec.eigenvectors.middleCols(first, last - first).adjoint() * x).norm();
    }

    Vector band_part(const SpectralDecomposition& dec, const Interval& window, const Vector& x)
    {
        const auto [first, last] = dec.index_range(window);
        const auto cols = dec.eigenvectors.middleCols(first, last - first);
        return cols * (cols.adjoint() * x);
    }

} // namespace

GapLevel ground_gap_vector(const SpectralDecomposition& dec, const BandWindows& bands)
{
    const auto levels = gap_states(dec, bands);
    require(!levels.empty(), ErrorCode::no_gap_state, "no eigenvalue inside the gap");
    GapLevel g { levels.front().energy, levels.front().state };
    Eigen::Index k = 0;
    g.state.cwiseAbs().maxCoeff(&k);
    g.state *= std::conj(g.state(k)) / std::abs(g.state(k));
    return g;
}

GapLevel ground_gap_vector(const TwoBandModel& model, double lambda_eff)
{
    const BandWindows bands = band_edges(as_span(eigenvalues_only(build_h0(model))), model);
    return ground_gap_vector(decompose(h_of(model, lambda_eff)), bands);
}

WitnessBundle build_witness(const Dynamics& dyn, double lambda_c, double delta)
{
    require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument,
        "delta must lie in (0, 1)");
    const auto& sch = dyn.schedule();
    const auto& h0 = dyn.free_spectrum();
    const auto& bands = dyn.bands();

    WitnessBundle w;
    w.lambda = dyn.lambda();
    w.lambda_c = lambda_c;
    w.eps1 = sch.eps1;
    w.eps2 = sch.eps2;
    w.delta = delta;
    w.s0 = find_s0(sch.profile, w.lambda, lambda_c);
    w.start_time = -(w.s0 + delta) / sch.eps1;
    w.start_coupling = w.lambda * phi_eps(sch, w.start_time);

    Matrix hs = build_h0(dyn.model()).matrix();
    hs.diagonal() += w.start_coupling * dyn.potential().cast<Complex>();
    const GapLevel g = ground_gap_vector(decompose(HermitianOperator(std::move(hs))), bands);
    w.psi_energy = g.energy;
    w.psi_g = g.state;

    EvolutionStats stats;
    w.phi_prime = dyn.evolve(w.psi_g, w.start_time, sch.support_begin(), &stats);
    w.in1 = band_weight(h0, bands.sigma_plus, w.phi_prime);
    w.phi = dyn.free_evolve(w.phi_prime, -sch.support_begin()).col(0);
    w.chi = dyn.evolve_block(w.phi_prime, sch.support_begin(), 0.0, &stats).col(0);
    w.in2 = band_weight(dyn.coupled_spectrum(), bands.sigma_minus, w.chi);
    w.outgoing = dyn.evolve_block(w.chi, 0.0, sch.support_end(), &stats).col(0);
    w.transition = band_weight(h0, bands.sigma_minus, w.outgoing);
    w.unitarity_defect = std::abs(w.outgoing.norm() - 1.0);
    return w;
}

void to_json(nlohmann::json& j, const WitnessBundle& w)
{
    j = nlohmann::json {
        { "lambda", w.lambda },
        { "eps1", w.eps1 },
        { "eps2", w.eps2 },
        { "delta", w.delta },
        { "s0", w.s0 },
        { "in1", w.in1 },
        { "in2", w.in2 },
        { "transition", w.transition },
        { "unitarity_defect", w.unitarity_defect },
    };
}

Vector tilde_phi(const Dynamics& dyn, const WitnessBundle& w, const MollerApproximant& w_plus)
{
    require(w_plus.side == Side::plus, ErrorCode::invalid_argument, "tilde_phi needs the plus-side approximant");
    require(w_plus.plateau_residual <= StaticScattering::plateau_tolerance, ErrorCode::no_plateau,
        strfmt("approximant residual %.4g exceeds the plateau tolerance", w_plus.plateau_residual));
    return band_part(dyn.free_spectrum(), dyn.bands().sigma_minus, w_plus.matrix.adjoint() * w.chi);
}

double moller_probe_distance(const Dynamics& dyn, const StaticScattering& stat, const MollerApproximant& w_plus)
{
    const double t_end = dyn.schedule().support_end();
    double worst = 0.0;
    for (const auto& psi : stat.probes()) {
        const Matrix in = dyn.free_evolve(psi, t_end);
        const Vector adiabatic = dyn.evolve_block(in, t_end, 0.0).col(0);
        worst = std::max(worst, (adiabatic - w_plus.matrix * psi).norm());
    }
    return worst;
}

ProofChain proof_chain(const Dynamics& dyn, const WitnessBundle& w, const StaticScattering& stat, double horizon)
{
    const MollerApproximant wp = stat.moller(horizon, Side::plus);
    const Vector t = tilde_phi(dyn, w, wp);
    ProofChain c;
    c.horizon = horizon;
    c.tilde_norm = t.norm();
    c.inner_product = std::abs((wp.matrix * t).dot(w.chi));
    c.in2_squared = w.in2 * w.in2;
    c.probe_distance = moller_probe_distance(dyn, stat, wp);
    c.lower_bound = c.in2_squared - 2.0 * c.probe_distance - 0.05;
    c.holds = w.transition >= c.lower_bound;
    return c;
}

CookCurve cook_integral(const TwoBandModel& model, const SpectralDecomposition& h0, const Vector& state,
    double t_max, double dt)
{
    require(std::isfinite(dt) && dt > 0.0, ErrorCode::invalid_argument, "dt must be positive");
    require(std::isfinite(t_max) && t_max >= 0.0, ErrorCode::invalid_argument, "t_max must be non-negative");
    const double guard = reflection_time(model);
    require(t_max <= guard, ErrorCode::invalid_argument,
        strfmt("t_max %.6g exceeds the reflection time %.6g", t_max, guard));
    require(state.size() == model.dim(), ErrorCode::invalid_argument, "state dimension does not match the model");

    const RealVector v = potential_diagonal(model);
    const Vector coeff = h0.eigenvectors.adjoint() * state;
    const long n = long(std::ceil(t_max / dt - 1e-9));

    CookCurve c;
    for (long k = 0; k <= n; ++k) {
        const double t = k == n ? t_max : k * dt;
        const Eigen::VectorXcd phase = (Complex(0.0, -t) * h0.eigenvalues.cast<Complex>()).array().exp();
        const Vector psi = h0.eigenvectors * phase.cwiseProduct(coeff);
        const double f = v.cast<Complex>().cwiseProduct(psi).norm();
        c.partial_integrals.push_back(
            k == 0 ? 0.0 : c.partial_integrals.back() + 0.5 * (t - c.t_grid.back()) * (f + c.integrand.back()));
        c.t_grid.push_back(t);
        c.integrand.push_back(f);
    }
    return c;
}

CookCurve cook_integral(const TwoBandModel& model, const Vector& state, double t_max, double dt)
{
    return cook_integral(model, decompose(build_h0(model)), state, t_max, dt);
}

void write_csv(std::ostream& out, const CookCurve& curve)
{
    out << "t,integrand,partial_integral\n";
    for (size_t i = 0; i < curve.t_grid.size(); ++i)
        out << strfmt("%.17g,%.17g,%.17g\n", curve.t_grid[i], curve.integrand[i], curve.partial_integrals[i]);
}

} // namespace overcrit
