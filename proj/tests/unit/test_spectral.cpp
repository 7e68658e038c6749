#include "overcrit/errors.hpp"
#include "overcrit/spectral.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace overcrit;

namespace {

TwoBandModel small(int n)
{
    TwoBandModel m;
    m.n_sites = n;
    m.well_center = n / 2;
    return m;
}

BandWindows bands_of(const TwoBandModel& m)
{
    return band_edges(as_span(eigenvalues_only(build_h0(m))), m);
}

// lambda_c of the reference model, computed once per test binary
const CriticalCoupling& reference_lambda_c()
{
    static const CriticalCoupling cc = find_lambda_c(TwoBandModel::reference(), 1e-6);
    return cc;
}

} // namespace

TEST_CASE("diagonal matrix decomposes onto coordinate axes")
{
    RealVector d(5);
    d << 3.0, -1.0, 2.0, 0.5, -4.0;
    const SpectralDecomposition dec = decompose(Matrix(d.cast<Complex>().asDiagonal()));
    const std::vector<double> sorted { -4.0, -1.0, 0.5, 2.0, 3.0 };
    const std::vector<int> axis { 4, 1, 3, 2, 0 };
    for (int j = 0; j < 5; ++j) {
        CHECK(dec.eigenvalues(j) == sorted[j]);
        CHECK(std::abs(dec.eigenvectors(axis[j], j)) == doctest::Approx(1.0));
    }
    CHECK(dec.source_dim == 5);
}

TEST_CASE("decoupled chain decomposes into +-m")
{
    TwoBandModel m = small(10);
    m.hopping = 0.0;
    m.wilson = 0.0;
    const SpectralDecomposition dec = decompose(build_h0(m));
    CHECK(dec.eigenvalues.head(10).isConstant(-0.5, 1e-14));
    CHECK(dec.eigenvalues.tail(10).isConstant(0.5, 1e-14));
}

TEST_CASE("random Hermitian matrix built from a known eigensystem")
{
    for (unsigned seed : { 1u, 2u, 3u }) {
        const Matrix u = oracle::random_unitary(8, seed);
        RealVector lambda(8);
        lambda << -3.0, -1.5, -0.25, 0.0, 0.4, 1.0, 2.2, 5.0;
        const Matrix h = u * lambda.cast<Complex>().asDiagonal() * u.adjoint();
        const SpectralDecomposition dec = decompose(Matrix(0.5 * (h + h.adjoint())));
        CHECK((dec.eigenvalues - lambda).cwiseAbs().maxCoeff() <= 1e-12);
        const Matrix rebuilt = dec.eigenvectors * dec.eigenvalues.cast<Complex>().asDiagonal() * dec.eigenvectors.adjoint();
        CHECK((rebuilt - h).norm() <= 1e-12 * h.norm());
        CHECK(unitarity_defect(dec.eigenvectors) <= 1e-12);
    }
}

TEST_CASE("non-Hermitian input is rejected")
{
    Matrix a = Matrix::Identity(3, 3);
    a(0, 2) = Complex(0.0, 1.0);
    CHECK_THROWS_AS(decompose(a), Error);
}

TEST_CASE("projector algebra")
{
    const TwoBandModel m = TwoBandModel::reference();
    const SpectralDecomposition h0 = decompose(build_h0(m));
    const BandWindows w = band_edges(h0.values(), m);

    const Projector all = spectral_projector(h0, { -10.0, 10.0 });
    CHECK((all.matrix - Matrix::Identity(m.dim(), m.dim())).norm() <= 1e-10);

    const Projector minus = spectral_projector(h0, w.sigma_minus);
    const auto expected = oracle::periodic_spectrum(m);
    const long negatives = std::count_if(expected.begin(), expected.end(), [](double e) { return e < 0.0; });
    CHECK(minus.rank == negatives);
    CHECK(minus.rank == m.n_sites);
    CHECK((minus.matrix * minus.matrix - minus.matrix).norm() <= 1e-10);
    CHECK(hermiticity_defect(minus.matrix) <= 1e-12);
    CHECK(std::abs(minus.matrix.trace().real() - double(minus.rank)) <= 1e-8);

    const Projector empty = spectral_projector(h0, { 10.0, 11.0 });
    CHECK(empty.rank == 0);
    CHECK(empty.matrix.norm() == 0.0);

    CHECK_THROWS_AS(spectral_projector(h0, { -INFINITY, 0.0 }), Error);
}

TEST_CASE("resolution of identity for coupled Hamiltonians")
{
    const TwoBandModel m = small(64);
    const BandWindows w = bands_of(m);
    for (double lambda : { 0.0, 0.6, 1.3, 2.5 }) {
        const SpectralDecomposition dec = decompose(h_of(m, lambda));
        const SpectralPartition part = partition(dec, w);
        const Projector lo = spectral_projector(dec, part.lower);
        const Projector gap = spectral_projector(dec, part.gap);
        const Projector hi = spectral_projector(dec, part.upper);
        CHECK((lo.matrix + gap.matrix + hi.matrix - Matrix::Identity(m.dim(), m.dim())).norm() <= 1e-10);
        CHECK((lo.matrix * gap.matrix).norm() <= 1e-10);
        CHECK((lo.matrix * hi.matrix).norm() <= 1e-10);
        CHECK((gap.matrix * hi.matrix).norm() <= 1e-10);
        CHECK(lo.rank + gap.rank + hi.rank == m.dim());
    }
}

TEST_CASE("projectors and gap energies do not depend on eigenvector phases")
{
    const TwoBandModel m = small(32);
    const BandWindows w = bands_of(m);
    SpectralDecomposition dec = decompose(h_of(m, 1.0));
    const Projector before = spectral_projector(dec, w.sigma_minus);
    const auto states_before = gap_states(dec, w);

    std::mt19937 gen(7);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (Eigen::Index j = 0; j < dec.eigenvectors.cols(); ++j)
        dec.eigenvectors.col(j) *= std::polar(1.0, angle(gen));

    const Projector after = spectral_projector(dec, w.sigma_minus);
    CHECK(after.rank == before.rank);
    CHECK((after.matrix - before.matrix).norm() <= 1e-12);
    const auto states_after = gap_states(dec, w);
    REQUIRE(states_after.size() == states_before.size());
    for (size_t i = 0; i < states_after.size(); ++i)
        CHECK(states_after[i].energy == states_before[i].energy);
}

TEST_CASE("gap states across the coupling range")
{
    const TwoBandModel m = TwoBandModel::reference();
    const BandWindows w = bands_of(m);
    const double lc = reference_lambda_c().lambda_c;

    CHECK(gap_states(decompose(build_h0(m)), w).empty());

    // Just below lambda_c the lowest gap level sits near the lower band.
    const auto near = gap_states(decompose(h_of(m, 0.98 * lc)), w);
    REQUIRE(!near.empty());
    CHECK(near.front().energy > w.lower_edge());
    CHECK(near.front().energy < w.lower_edge() + 0.1 * w.gap_width());

    // At 0.1 lambda_c the well already binds a level in the upper part of the gap
    // (dense diagonalization gives 0.43550 for this lattice).
    const auto weak = gap_states(decompose(h_of(m, 0.1 * lc)), w);
    REQUIRE(weak.size() == 1);
    CHECK(weak.front().energy == doctest::Approx(0.4355).epsilon(2e-4));
    CHECK(weak.front().energy > 0.5 * (w.lower_edge() + w.upper_edge()));

    for (size_t i = 1; i < near.size(); ++i)
        CHECK(near[i].energy > near[i - 1].energy);
}

TEST_CASE("critical coupling: no dive without a potential")
{
    TwoBandModel m = small(64);
    m.well_depth = 0.0;
    try {
        find_lambda_c(m, 1e-3);
        FAIL("expected NoDive");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_dive);
    }
}

TEST_CASE("critical coupling agrees with a dense scan on a small lattice")
{
    const TwoBandModel m = small(64);
    const CriticalCoupling cc = find_lambda_c(m, 1e-3);
    CHECK(cc.hi - cc.lo <= 1e-3);
    CHECK(cc.lo <= cc.lambda_c);
    CHECK(cc.lambda_c <= cc.hi);
    const auto spectrum = oracle::periodic_spectrum(m);
    const double b = spectrum[m.n_sites - 1];
    const double gap = spectrum[m.n_sites] - b;
    const double scan = oracle::scanned_lambda_c(m, build_h0(m).matrix(), potential_diagonal(m), b, gap, 1e-4);
    CHECK(std::abs(scan - cc.lambda_c) <= 1e-3);
    CHECK(cc.edge_margin == doctest::Approx(1e-3 * gap));
}

TEST_CASE("coupling enters only through lambda * v")
{
    TwoBandModel m = small(64);
    const double base = find_lambda_c(m, 1e-5).lambda_c;
    m.well_depth = 2.0;
    CHECK(find_lambda_c(m, 1e-5).lambda_c == doctest::Approx(base / 2.0).epsilon(1e-4));
}

TEST_CASE("dive curve below detachment is empty")
{
    const TwoBandModel m = small(64);
    const std::vector<double> grid { 0.0, 1e-4, 2e-4 };
    const DiveCurve c = dive_curve(m, grid);
    CHECK(c.empty());
    CHECK_FALSE(c.detached);
}

TEST_CASE("reference dive curve runs from the upper edge into the lower band")
{
    const TwoBandModel m = TwoBandModel::reference();
    const BandWindows w = bands_of(m);
    const double lc = reference_lambda_c().lambda_c;
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k)
        grid.push_back(2.0 * lc * k / 100.0);
    const DiveCurve c = dive_curve(m, grid);
    REQUIRE(c.detached);
    REQUIRE(c.dived);
    CHECK(c.energies.front() > w.upper_edge() - 0.05 * w.gap_width());
    CHECK(c.energies.back() <= w.lower_edge() + edge_margin(w));
    for (size_t i = 0; i < c.energies.size(); ++i) {
        CHECK(c.overlaps[i] >= 0.8);
        CHECK(c.overlaps[i] <= 1.0 + 1e-12);
        if (i > 0)
            CHECK(c.energies[i] <= c.energies[i - 1] + 1e-12);
    }

    // every in-gap point equals the level a dense diagonalization finds there
    const Matrix h0 = build_h0(m).matrix();
    const RealVector v = potential_diagonal(m);
    for (size_t i = 0; i < c.energies.size(); i += 7) {
        if (!w.in_gap(c.energies[i]))
            continue;
        const RealVector e = oracle::coupled_eigenvalues(h0, v, c.lambdas[i]);
        CHECK(e(m.n_sites) == doctest::Approx(c.energies[i]).epsilon(1e-10));
    }

    std::ostringstream csv;
    write_csv(csv, c);
    CHECK(csv.str().rfind("lambda,energy,overlap\n", 0) == 0);
}

TEST_CASE("refining the dive grid leaves common points unchanged")
{
    const TwoBandModel m = small(64);
    const double lc = find_lambda_c(m, 1e-6).lambda_c;
    std::vector<double> coarse, fine;
    for (int k = 0; k <= 40; ++k)
        coarse.push_back(2.0 * lc * k / 40.0);
    for (int k = 0; k <= 80; ++k)
        fine.push_back(2.0 * lc * k / 80.0);
    const DiveCurve a = dive_curve(m, coarse);
    const DiveCurve b = dive_curve(m, fine);
    REQUIRE(a.detached);
    REQUIRE(b.detached);
    const BandWindows w = bands_of(m);
    int compared = 0;
    for (size_t i = 0; i < a.lambdas.size(); ++i) {
        if (!w.in_gap(a.energies[i]))
            continue;
        const auto it = std::find(b.lambdas.begin(), b.lambdas.end(), a.lambdas[i]);
        if (it == b.lambdas.end())
            continue;
        CHECK(std::abs(b.energies[it - b.lambdas.begin()] - a.energies[i]) < 1e-6);
        ++compared;
    }
    CHECK(compared >= 5);
}

TEST_CASE("a grid too coarse to follow the level fails loudly")
{
    const TwoBandModel m = TwoBandModel::reference();
    const double lc = reference_lambda_c().lambda_c;
    const std::vector<double> grid { 0.02 * lc, 0.9 * lc, 2.0 * lc };
    try {
        dive_curve(m, grid);
        FAIL("expected TrackingLost");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::tracking_lost);
    }
}
