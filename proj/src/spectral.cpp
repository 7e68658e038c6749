#include "overcrit/spectral.hpp"

#include "overcrit/errors.hpp"
#include "overcrit/text.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace overcrit {

namespace {

    constexpr double min_overlap = 0.8;
    constexpr double margin_fraction = 1e-3;
    // once the tracked level is this close (in gap widths) to b-, losing it into the
    // band-edge cluster counts as the end of the dive rather than a tracking failure
    constexpr double edge_zone_fraction = 0.1;

    Eigen::Index count_at_most(const RealVector& ev, double e)
    {
        return std::upper_bound(ev.data(), ev.data() + ev.size(), e) - ev.data();
    }

} // namespace

std::pair<Eigen::Index, Eigen::Index> SpectralDecomposition::index_range(const Interval& window) const
{
    const double* b = eigenvalues.data();
    const double* e = b + eigenvalues.size();
    const auto first = std::lower_bound(b, e, window.lo) - b;
    const auto last = std::upper_bound(b, e, window.hi) - b;
    return { first, std::max(first, last) };
}

SpectralDecomposition decompose(const HermitianOperator& h)
{
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
    require(solver.info() == Eigen::Success, ErrorCode::invalid_argument, "eigensolver did not converge");
    return { solver.eigenvalues(), solver.eigenvectors(), h.dim() };
}

SpectralDecomposition decompose(const Matrix& h)
{
    return decompose(HermitianOperator(h));
}

RealVector eigenvalues_only(const HermitianOperator& h)
{
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, ErrorCode::invalid_argument, "eigensolver did not converge");
    return solver.eigenvalues();
}

Projector spectral_projector(const SpectralDecomposition& dec, const Interval& window)
{
    require(std::isfinite(window.lo) && std::isfinite(window.hi), ErrorCode::invalid_argument,
        "projector window must have finite endpoints");
    const auto [first, last] = dec.index_range(window);
    const auto cols = dec.eigenvectors.middleCols(first, last - first);
    Projector p;
    p.matrix = cols * cols.adjoint();
    p.rank = last - first;
    p.window = window;
    return p;
}

SpectralPartition partition(const SpectralDecomposition& dec, const BandWindows& bands)
{
    const double lo = std::min(dec.eigenvalues.minCoeff(), bands.sigma_minus.lo) - 1.0;
    const double hi = std::max(dec.eigenvalues.maxCoeff(), bands.sigma_plus.hi) + 1.0;
    const double b = bands.lower_edge();
    const double a = bands.upper_edge();
    return {
        { lo, b },
        { std::nextafter(b, a), std::nextafter(a, b) },
        { a, hi },
    };
}

std::vector<GapState> gap_states(const SpectralDecomposition& dec, const BandWindows& bands)
{
    std::vector<GapState> out;
    for (Eigen::Index j = 0; j < dec.eigenvalues.size(); ++j)
        if (bands.in_gap(dec.eigenvalues(j)))
            out.push_back({ dec.eigenvalues(j), dec.eigenvectors.col(j) });
    return out;
}

double edge_margin(const BandWindows& bands)
{
    return margin_fraction * bands.gap_width();
}

DiveCurve dive_curve(const TwoBandModel& model, std::span<const double> lambda_grid)
{
    require(!lambda_grid.empty(), ErrorCode::invalid_argument, "empty coupling grid");
    require(std::is_sorted(lambda_grid.begin(), lambda_grid.end()), ErrorCode::invalid_argument,
        "coupling grid must be ascending");

    const auto h0 = build_h0(model);
    const auto v = build_potential(model);
    const BandWindows bands = band_edges(as_span(eigenvalues_only(h0)), model);
    const double margin = edge_margin(bands);
    const double b = bands.lower_edge();
    const double a = bands.upper_edge();

    DiveCurve curve;
    Vector tracked;
    for (double lambda : lambda_grid) {
        const SpectralDecomposition dec = decompose(h_of(h0, v, lambda));
        const RealVector& ev = dec.eigenvalues;

        if (!curve.detached) {
            // The level that will dive is the lowest one not yet counted in the lower band.
            const Eigen::Index j = count_at_most(ev, b + margin);
            if (j >= ev.size() || ev(j) >= a - margin)
                continue;
            curve.detached = true;
            tracked = dec.eigenvectors.col(j);
            curve.lambdas.push_back(lambda);
            curve.energies.push_back(ev(j));
            curve.overlaps.push_back(1.0);
            continue;
        }

        const RealVector ov = (dec.eigenvectors.adjoint() * tracked).cwiseAbs();
        Eigen::Index j = 0;
        const double best = ov.maxCoeff(&j);
        const double previous = curve.energies.back();

        if (best < min_overlap) {
            require(previous <= b + edge_zone_fraction * bands.gap_width(), ErrorCode::tracking_lost,
                strfmt("overlap %.3f at lambda %.6g; refine the grid", best, lambda));
            // Finite-volume merge into the band-edge cluster: follow the weight of the
            // tracked state inside a window just below b- instead of a single level.
            const Interval edge { b - edge_zone_fraction * bands.gap_width(), b + margin };
            const auto [first, last] = dec.index_range(edge);
            const RealVector w = ov.segment(first, last - first).cwiseAbs2();
            const double fidelity = std::sqrt(w.sum());
            require(fidelity >= min_overlap, ErrorCode::tracking_lost,
                strfmt("tracked level lost at lambda %.6g (edge fidelity %.3f)", lambda, fidelity));
            curve.lambdas.push_back(lambda);
            curve.energies.push_back(w.dot(ev.segment(first, last - first)) / w.sum());
            curve.overlaps.push_back(fidelity);
            curve.dived = true;
            break;
        }

        if (bands.in_gap(ev(j))) {
            const bool degenerate = (j > 0 && ev(j) - ev(j - 1) < 1e-9) || (j + 1 < ev.size() && ev(j + 1) - ev(j) < 1e-9);
            require(!degenerate, ErrorCode::tracking_lost,
                strfmt("degenerate gap level at lambda %.6g", lambda));
        }
        tracked = dec.eigenvectors.col(j);
        curve.lambdas.push_back(lambda);
        curve.energies.push_back(ev(j));
        curve.overlaps.push_back(best);
        if (ev(j) <= b + margin) {
            curve.dived = true;
            break;
        }
    }
    return curve;
}

void write_csv(std::ostream& out, const DiveCurve& curve)
{
    out << "lambda,energy,overlap\n";
    for (size_t i = 0; i < curve.lambdas.size(); ++i)
        out << strfmt("%.17g,%.17g,%.17g\n", curve.lambdas[i], curve.energies[i], curve.overlaps[i]);
}

CriticalCoupling find_lambda_c(const TwoBandModel& model, double tol)
{
    require(std::isfinite(tol) && tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
    const auto h0 = build_h0(model);
    const auto v = build_potential(model);
    const BandWindows bands = band_edges(as_span(eigenvalues_only(h0)), model);
    const double margin = edge_margin(bands);
    const double threshold = bands.lower_edge() + margin;

    // V <= 0, so every level moves down monotonically with lambda and the lower band keeps
    // its n_sites members below threshold. An extra level below threshold is therefore the
    // lowest gap level having reached b- + margin.
    auto dived = [&](double lambda) {
        return count_at_most(eigenvalues_only(h_of(h0, v, lambda)), threshold) > model.n_sites;
    };

    require(model.well_depth > 0.0, ErrorCode::no_dive, "potential vanishes; no level can dive");
    const double start = bands.gap_width() / model.well_depth;
    double lo = 0.0;
    double hi = start;
    while (!dived(hi)) {
        lo = hi;
        hi *= 2.0;
        require(hi <= 64.0 * start, ErrorCode::no_dive,
            strfmt("no level reaches the lower band up to lambda = %.6g", lo));
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (dived(mid) ? hi : lo) = mid;
    }
    return { 0.5 * (lo + hi), lo, hi, tol, margin, bands.lower_edge() };
}

void to_json(nlohmann::json& j, const CriticalCoupling& c)
{
    j = nlohmann::json {
        { "lambda_c", c.lambda_c },
        { "bracket", { c.lo, c.hi } },
        { "tolerance", c.tolerance },
        { "edge_margin", c.edge_margin },
        { "lower_edge", c.lower_edge },
    };
}

} // namespace overcrit
