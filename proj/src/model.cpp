#include "overcrit/model.hpp"

#include "overcrit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace overcrit {

namespace {

    constexpr double hermitian_tolerance = 1e-12;

    void put_block(Matrix& h, int row_site, int col_site, const Eigen::Matrix2cd& block)
    {
        h.block<2, 2>(2 * row_site, 2 * col_site) += block;
    }

} // namespace

TwoBandModel TwoBandModel::reference()
{
    TwoBandModel m;
    m.well_center = m.n_sites / 2;
    return m;
}

bool TwoBandModel::in_well(int site) const
{
    return std::abs(site - well_center) <= well_halfwidth;
}

void TwoBandModel::validate() const
{
    require(n_sites >= 4, ErrorCode::invalid_argument, "n_sites must be at least 4");
    require(std::isfinite(mass) && mass > 0.0, ErrorCode::invalid_argument, "mass must be positive");
    require(std::isfinite(hopping) && hopping >= 0.0, ErrorCode::invalid_argument, "hopping must be non-negative");
    require(std::isfinite(wilson) && wilson >= 0.0, ErrorCode::invalid_argument, "wilson must be non-negative");
    require(std::isfinite(well_depth) && well_depth >= 0.0, ErrorCode::invalid_argument,
        "well_depth must be non-negative");
    require(well_halfwidth >= 0, ErrorCode::invalid_argument, "well_halfwidth must be non-negative");
    const int first = well_center - well_halfwidth;
    const int last = well_center + well_halfwidth;
    if (boundary == Boundary::box)
        require(first >= 1 && last <= n_sites - 2, ErrorCode::invalid_argument,
            "well must sit strictly inside a box lattice");
    else
        require(first >= 0 && last <= n_sites - 1, ErrorCode::invalid_argument, "well outside lattice");
}

HermitianOperator::HermitianOperator(Matrix entries)
    : entries_(std::move(entries))
{
    require(entries_.rows() == entries_.cols() && entries_.rows() > 0, ErrorCode::invalid_argument,
        "operator must be square and non-empty");
    require(hermiticity_defect(entries_) <= hermitian_tolerance, ErrorCode::invalid_argument,
        "operator is not Hermitian");
}

HermitianOperator build_h0(const TwoBandModel& model)
{
    model.validate();
    const int n = model.n_sites;
    const Complex i(0.0, 1.0);
    Eigen::Matrix2cd sz, sx;
    sz << 1.0, 0.0, 0.0, -1.0;
    sx << 0.0, 1.0, 1.0, 0.0;

    const Eigen::Matrix2cd onsite = (model.mass + 2.0 * model.wilson) * sz;
    // coefficient of psi_{n+1} in (H psi)_n, and its adjoint for psi_{n-1}
    const Eigen::Matrix2cd forward = -model.wilson * sz - i * (model.hopping / 2.0) * sx;
    const Eigen::Matrix2cd backward = forward.adjoint();

    Matrix h = Matrix::Zero(2 * n, 2 * n);
    for (int s = 0; s < n; ++s) {
        put_block(h, s, s, onsite);
        if (s + 1 < n)
            put_block(h, s, s + 1, forward);
        else if (model.boundary == Boundary::periodic)
            put_block(h, s, 0, forward);
        if (s > 0)
            put_block(h, s, s - 1, backward);
        else if (model.boundary == Boundary::periodic)
            put_block(h, s, n - 1, backward);
    }
    return HermitianOperator(std::move(h));
}

RealVector potential_diagonal(const TwoBandModel& model)
{
    model.validate();
    RealVector d = RealVector::Zero(model.dim());
    for (int s = 0; s < model.n_sites; ++s)
        if (model.in_well(s))
            d.segment<2>(2 * s).setConstant(-model.well_depth);
    return d;
}

HermitianOperator build_potential(const TwoBandModel& model)
{
    return HermitianOperator(potential_diagonal(model).cast<Complex>().asDiagonal());
}

HermitianOperator h_of(const HermitianOperator& h0, const HermitianOperator& v, double lambda_eff)
{
    require(h0.dim() == v.dim(), ErrorCode::invalid_argument, "dimension mismatch between H0 and V");
    require(std::isfinite(lambda_eff), ErrorCode::invalid_argument, "coupling must be finite");
    if (lambda_eff == 0.0)
        return h0;
    return HermitianOperator(h0.matrix() + lambda_eff * v.matrix());
}

HermitianOperator h_of(const TwoBandModel& model, double lambda_eff)
{
    return h_of(build_h0(model), build_potential(model), lambda_eff);
}

BandWindows band_edges(std::span<const double> spectrum, const TwoBandModel& model)
{
    require(static_cast<int>(spectrum.size()) == model.dim(), ErrorCode::invalid_argument,
        "spectrum size does not match the model");
    require(std::is_sorted(spectrum.begin(), spectrum.end()), ErrorCode::invalid_argument,
        "spectrum must be sorted");
    const auto split = std::partition_point(spectrum.begin(), spectrum.end(), [](double e) { return e < 0.0; });
    require(split != spectrum.begin() && split != spectrum.end(), ErrorCode::no_gap,
        "spectrum lacks one of the two bands");

    BandWindows w;
    w.sigma_minus = { spectrum.front(), *(split - 1) };
    w.sigma_plus = { *split, spectrum.back() };
    // The chiral partner of each state sits at -E, so both clusters hold n_sites levels.
    require(split - spectrum.begin() == model.n_sites, ErrorCode::no_gap,
        "negative cluster does not hold n_sites levels");
    require(w.gap_width() >= model.mass, ErrorCode::no_gap, "band gap narrower than the mass");
    return w;
}

double band_energy(const TwoBandModel& model, double k)
{
    const double d = model.mass + 2.0 * model.wilson * (1.0 - std::cos(k));
    const double h = model.hopping * std::sin(k);
    return std::hypot(d, h);
}

double max_group_velocity(const TwoBandModel& model)
{
    constexpr int samples = 8192;
    double best = 0.0;
    for (int j = 0; j <= samples; ++j) {
        const double k = std::numbers::pi * j / samples;
        const double d = model.mass + 2.0 * model.wilson * (1.0 - std::cos(k));
        const double e = band_energy(model, k);
        const double slope = (d * 2.0 * model.wilson * std::sin(k)
                                 + model.hopping * model.hopping * std::sin(k) * std::cos(k))
            / e;
        best = std::max(best, std::abs(slope));
    }
    return best;
}

std::string_view to_string(Boundary b)
{
    return b == Boundary::periodic ? "periodic" : "box";
}

Boundary boundary_from_string(std::string_view s)
{
    if (s == "periodic")
        return Boundary::periodic;
    if (s == "box")
        return Boundary::box;
    fail(ErrorCode::invalid_argument, "unknown boundary '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const TwoBandModel& m)
{
    j = nlohmann::json {
        { "n_sites", m.n_sites },
        { "mass", m.mass },
        { "hopping", m.hopping },
        { "wilson", m.wilson },
        { "boundary", std::string(to_string(m.boundary)) },
        { "well_depth", m.well_depth },
        { "well_halfwidth", m.well_halfwidth },
        { "well_center", m.well_center },
    };
}

void from_json(const nlohmann::json& j, TwoBandModel& m)
{
    require(j.is_object(), ErrorCode::invalid_argument, "model config must be a JSON object");
    static const std::array<std::string_view, 8> keys = { "n_sites", "mass", "hopping", "wilson", "boundary",
        "well_depth", "well_halfwidth", "well_center" };
    for (const auto& [key, value] : j.items())
        require(std::find(keys.begin(), keys.end(), key) != keys.end(), ErrorCode::invalid_argument,
            "unknown model key '" + key + "'");

    TwoBandModel out = TwoBandModel::reference();
    try {
        out.n_sites = j.value("n_sites", out.n_sites);
        // the default center follows n_sites unless given explicitly
        out.well_center = j.value("well_center", out.n_sites / 2);
        out.mass = j.value("mass", out.mass);
        out.hopping = j.value("hopping", out.hopping);
        out.wilson = j.value("wilson", out.wilson);
        out.boundary = boundary_from_string(j.value("boundary", std::string("periodic")));
        out.well_depth = j.value("well_depth", out.well_depth);
        out.well_halfwidth = j.value("well_halfwidth", out.well_halfwidth);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::invalid_argument, std::string("bad model config: ") + e.what());
    }
    out.validate();
    m = out;
}

} // namespace overcrit
