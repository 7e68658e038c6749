#include "overcrit/errors.hpp"
#include "overcrit/scattering.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace overcrit;

namespace {

TwoBandModel small(int n)
{
    TwoBandModel m;
    m.n_sites = n;
    m.well_center = n / 2;
    m.well_halfwidth = 3;
    return m;
}

Matrix identity(const TwoBandModel& m)
{
    return Matrix::Identity(m.dim(), m.dim());
}

} // namespace

TEST_CASE("no coupling: Moller operators and S are the identity")
{
    const TwoBandModel m = small(24);
    const Dynamics dyn(m, 0.0, { 0.5, 0.25, {} });
    CHECK((adiabatic_moller(dyn, Side::plus) - identity(m)).norm() <= 1e-10);
    CHECK((adiabatic_moller(dyn, Side::minus) - identity(m)).norm() <= 1e-10);
    const SMatrix s = adiabatic_s(dyn);
    CHECK((s.matrix - identity(m)).norm() <= 1e-10);
    CHECK(s.kind == SMatrixKind::adiabatic);
    const ScatteringRecord r = summarize(s, dyn.free_spectrum(), dyn.bands());
    CHECK(r.norm_mp <= 1e-10);
    CHECK(r.norm_pm <= 1e-10);
}

TEST_CASE("the Moller limit is reached at the support edge")
{
    const TwoBandModel m = small(24);
    const SwitchingSchedule sch { 0.5, 0.5, {} };
    const Dynamics dyn(m, 1.4, sch);
    const Matrix w2 = adiabatic_moller(dyn, Side::plus);
    CHECK((adiabatic_moller_at(dyn, 3.0 / sch.eps2) - w2).norm() <= 1e-8);
    CHECK((adiabatic_moller_at(dyn, 4.0 / sch.eps2) - w2).norm() <= 1e-8);
    const Matrix wm = adiabatic_moller(dyn, Side::minus);
    CHECK((adiabatic_moller_at(dyn, -3.0 / sch.eps1) - wm).norm() <= 1e-8);
    CHECK(unitarity_defect(w2) <= 1e-8);
    // inside the support the finite-T operator is still moving
    CHECK((adiabatic_moller_at(dyn, 1.5 / sch.eps2) - w2).norm() > 1e-3);
}

TEST_CASE("S from one backward pass equals (W-)^dagger W+")
{
    const TwoBandModel m = small(24);
    const Dynamics dyn(m, 1.4, { 0.5, 0.25, {} });
    const SMatrix a = adiabatic_s(dyn);
    const SMatrix b = adiabatic_s_from_moller(dyn);
    CHECK((a.matrix - b.matrix).norm() <= 1e-7);
    CHECK(a.unitarity_defect <= 1e-7);
}

TEST_CASE("transition norm on simple operators")
{
    const TwoBandModel m = small(16);
    const Dynamics dyn(m, 0.0, { 0.5, 0.5, {} });
    const auto& h0 = dyn.free_spectrum();
    const auto& w = dyn.bands();

    SMatrix id;
    id.matrix = identity(m);
    CHECK(transition_norm(id, w.sigma_plus, w.sigma_minus, h0).value == 0.0);

    SMatrix u;
    for (unsigned seed : { 1u, 2u, 3u }) {
        u.matrix = oracle::random_unitary(m.dim(), seed);
        const BlockNorm mp = transition_norm(u, w.sigma_plus, w.sigma_minus, h0);
        const BlockNorm pm = transition_norm(u, w.sigma_minus, w.sigma_plus, h0);
        CHECK(mp.value <= 1.0 + 1e-10);
        CHECK(!mp.empty_window);
        // equal-size band blocks of a unitary share singular values
        CHECK(std::abs(mp.value - pm.value) <= 1e-10);
        SMatrix adj;
        adj.matrix = u.matrix.adjoint();
        CHECK(std::abs(mp.value - transition_norm(adj, w.sigma_minus, w.sigma_plus, h0).value) <= 1e-10);
    }

    const BlockNorm none = transition_norm(id, { 50.0, 60.0 }, w.sigma_minus, h0);
    CHECK(none.empty_window);
    CHECK(none.value == 0.0);
}

TEST_CASE("coupled S is unitary with block norms in [0,1]")
{
    const TwoBandModel m = small(32);
    const Dynamics dyn(m, 1.6, { 0.5, 0.5, {} });
    const SMatrix s = adiabatic_s(dyn);
    CHECK(s.unitarity_defect <= 1e-7);
    const ScatteringRecord r = summarize(s, dyn.free_spectrum(), dyn.bands());
    CHECK(r.norm_mp >= 0.0);
    CHECK(r.norm_mp <= 1.0 + 1e-10);
    CHECK(std::abs(r.norm_mp - r.norm_pm) <= 1e-10);
    const nlohmann::json j = r;
    for (const char* key : { "lambda", "eps1", "eps2", "norm_mp", "norm_pm", "unitarity_defect", "kind" })
        CHECK(j.contains(key));
}

TEST_CASE("probe packets are deterministic, normalized and band-resolved")
{
    const TwoBandModel m = TwoBandModel::reference();
    const SpectralDecomposition h0 = decompose(build_h0(m));
    const BandWindows w = band_edges(h0.values(), m);
    const auto probes = probe_wavepackets(m, h0, w);
    REQUIRE(probes.size() == 8);
    const auto [p0, p1] = h0.index_range(w.sigma_plus);
    const auto [m0, m1] = h0.index_range(w.sigma_minus);
    for (size_t i = 0; i < probes.size(); ++i) {
        CHECK(probes[i].norm() == doctest::Approx(1.0));
        const Vector c = h0.eigenvectors.adjoint() * probes[i];
        const double plus = c.segment(p0, p1 - p0).norm();
        const double minus = c.segment(m0, m1 - m0).norm();
        CHECK((i < 4 ? minus : plus) <= 1e-12);
    }
    const auto again = probe_wavepackets(m, h0, w);
    for (size_t i = 0; i < probes.size(); ++i)
        CHECK((again[i] - probes[i]).norm() == 0.0);
    CHECK(reflection_time(m) == doctest::Approx(256.0 / (2.0 * max_group_velocity(m))));
}

TEST_CASE("static approximants without coupling or at zero horizon")
{
    const TwoBandModel m = small(32);
    const StaticScattering free(m, 0.0);
    for (double t : { 0.0, 3.0, free.max_horizon() }) {
        const MollerApproximant w = free.moller(t, Side::plus);
        CHECK((w.matrix - identity(m)).norm() <= 1e-10);
        CHECK(w.plateau_residual == 0.0);
    }
    const SMatrix s = free.s(5.0);
    CHECK((s.matrix - identity(m)).norm() <= 1e-10);
    CHECK(s.commutator_diagnostic <= 1e-12);
    CHECK(s.kind == SMatrixKind::static_approximant);

    const StaticScattering coupled(m, 1.0);
    CHECK((coupled.moller(0.0, Side::minus).matrix - identity(m)).norm() <= 1e-10);
    CHECK_THROWS_AS(coupled.moller(coupled.max_horizon() * 1.01, Side::plus), Error);
}

TEST_CASE("static Moller plateau on the reference model")
{
    const TwoBandModel m = TwoBandModel::reference();
    const double lc = find_lambda_c(m, 1e-4).lambda_c;
    const StaticScattering stat(m, 0.5 * lc);
    const double tmax = stat.max_horizon();
    double last = 1.0;
    for (double t : { 10.0, 0.5 * tmax, tmax }) {
        const MollerApproximant w = stat.moller(t, Side::plus);
        CHECK(w.plateau_residual < last);
        last = w.plateau_residual;
        // isometric on the probes up to the residual scale
        for (const auto& psi : stat.probes())
            CHECK(std::abs((w.matrix * psi).norm() - 1.0) <= std::max(0.05, w.plateau_residual));
    }
    CHECK(last <= StaticScattering::plateau_tolerance);

    const SMatrix s = stat.s(tmax);
    const BlockNorm pm = transition_norm(s, stat.bands().sigma_minus, stat.bands().sigma_plus, stat.free_spectrum());
    CHECK(pm.value <= 0.05);
    CHECK(pm.value <= commutator_bound(s, stat.free_spectrum(), stat.bands()) + 1e-12);
    CHECK(s.commutator_diagnostic < 0.05);
}

TEST_CASE("static S refuses horizons that have not reached a plateau")
{
    const TwoBandModel m = TwoBandModel::reference();
    const StaticScattering stat(m, 0.6);
    try {
        stat.s(2.0);
        FAIL("expected NoPlateau");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_plateau);
    }
}
