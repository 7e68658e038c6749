#include "overcrit/experiments.hpp"

#include "overcrit/errors.hpp"
#include "overcrit/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace overcrit {

namespace {

    const char* const csv_header
        = "lambda,eps1,eps2,norm_mp,norm_pm,witness_transition,in1,in2,unitarity_defect,regime,status";

    bool same(double a, double b)
    {
        return (std::isnan(a) && std::isnan(b)) || a == b;
    }

    std::string csv_safe(std::string s)
    {
        std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
        return s;
    }

    std::vector<std::pair<double, double>> eps_pairs(const SweepSpec& spec)
    {
        std::vector<std::pair<double, double>> out;
        if (spec.pairing == EpsPairing::diagonal) {
            for (size_t i = 0; i < spec.eps1_list.size(); ++i)
                out.emplace_back(spec.eps1_list[i], spec.eps2_list[i]);
        } else {
            for (double e1 : spec.eps1_list)
                for (double e2 : spec.eps2_list)
                    out.emplace_back(e1, e2);
        }
        return out;
    }

    double max_finite(double a, double b)
    {
        if (std::isnan(a))
            return b;
        if (std::isnan(b))
            return a;
        return std::max(a, b);
    }

    void check_eps_list(const std::vector<double>& list, const char* name)
    {
        require(!list.empty(), ErrorCode::invalid_argument, std::string(name) + " must be nonempty");
        for (double e : list)
            require(std::isfinite(e) && e > 0.0 && e <= 1.0, ErrorCode::invalid_argument,
                std::string(name) + " entries must lie in (0, 1]");
    }

    std::vector<double> doubles(const nlohmann::json& j, const std::string& key)
    {
        require(j.is_array(), ErrorCode::invalid_argument, "'" + key + "' must be an array");
        return j.get<std::vector<double>>();
    }

} // namespace

void SweepSpec::validate() const
{
    model.validate();
    profile.validate();
    evolution.validate();
    require(!lambda_multiples.empty(), ErrorCode::invalid_argument, "lambda_multiples must be nonempty");
    check_eps_list(eps1_list, "eps1");
    check_eps_list(eps2_list, "eps2");
    if (pairing == EpsPairing::diagonal)
        require(eps1_list.size() == eps2_list.size(), ErrorCode::invalid_argument,
            "diagonal pairing needs eps1 and eps2 lists of equal length");
    for (double m : lambda_multiples) {
        require(std::isfinite(m) && m >= 0.0, ErrorCode::invalid_argument, "lambda multiples must be non-negative");
        require(m != 1.0, ErrorCode::invalid_argument, "lambda = lambda_c is neither under- nor over-critical");
        require(allow_near_critical || m < near_critical_lo || m > near_critical_hi, ErrorCode::invalid_argument,
            strfmt("lambda multiple %.6g lies in the excluded near-critical band", m));
    }
    require(std::isfinite(stabilization) && stabilization > 0.0, ErrorCode::invalid_argument,
        "stabilization must be positive");
    require(max_halvings >= 0, ErrorCode::invalid_argument, "max_halvings must be non-negative");
    require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, ErrorCode::invalid_argument, "delta must lie in (0,1)");
    require(std::isfinite(lambda_c_tol) && lambda_c_tol > 0.0, ErrorCode::invalid_argument,
        "lambda_c_tol must be positive");
    require(cost_budget >= 0.0, ErrorCode::invalid_argument, "cost_budget must be non-negative");
    require(near_critical_lo <= 1.0 && near_critical_hi >= 1.0, ErrorCode::invalid_argument,
        "near-critical band must contain 1");
}

void to_json(nlohmann::json& j, const SweepSpec& s)
{
    j = nlohmann::json {
        { "lambda_multiples", s.lambda_multiples },
        { "eps1", s.eps1_list },
        { "eps2", s.eps2_list },
        { "pairing", s.pairing == EpsPairing::diagonal ? "diagonal" : "grid" },
        { "iterated_limit", s.iterated_limit },
        { "stabilization", s.stabilization },
        { "max_halvings", s.max_halvings },
        { "delta", s.delta },
        { "lambda_c_tol", s.lambda_c_tol },
        { "cost_budget", s.cost_budget },
        { "near_critical_band", { s.near_critical_lo, s.near_critical_hi } },
        { "allow_near_critical", s.allow_near_critical },
        { "output_dir", s.output_dir },
    };
}

// Only the sweep keys; model, profile and evolution live in their own sections.
void from_json(const nlohmann::json& j, SweepSpec& s)
{
    require(j.is_object(), ErrorCode::invalid_argument, "sweep config must be a JSON object");
    SweepSpec out = s;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "lambda_multiples")
                out.lambda_multiples = doubles(value, key);
            else if (key == "eps1")
                out.eps1_list = doubles(value, key);
            else if (key == "eps2")
                out.eps2_list = doubles(value, key);
            else if (key == "pairing") {
                const auto p = value.get<std::string>();
                require(p == "diagonal" || p == "grid", ErrorCode::invalid_argument, "pairing must be diagonal or grid");
                out.pairing = p == "grid" ? EpsPairing::grid : EpsPairing::diagonal;
            } else if (key == "iterated_limit")
                out.iterated_limit = value.get<bool>();
            else if (key == "stabilization")
                out.stabilization = value.get<double>();
            else if (key == "max_halvings")
                out.max_halvings = value.get<int>();
            else if (key == "delta")
                out.delta = value.get<double>();
            else if (key == "lambda_c_tol")
                out.lambda_c_tol = value.get<double>();
            else if (key == "cost_budget")
                out.cost_budget = value.get<double>();
            else if (key == "near_critical_band") {
                const auto band = doubles(value, key);
                require(band.size() == 2, ErrorCode::invalid_argument, "near_critical_band needs two entries");
                out.near_critical_lo = band[0];
                out.near_critical_hi = band[1];
            } else if (key == "allow_near_critical")
                out.allow_near_critical = value.get<bool>();
            else if (key == "output_dir")
                out.output_dir = value.get<std::string>();
            else
                fail(ErrorCode::invalid_argument, "unknown sweep key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::invalid_argument, "bad sweep value for '" + key + "': " + e.what());
        }
    }
    s = out;
}

bool SweepRecord::operator==(const SweepRecord& o) const
{
    return same(lambda, o.lambda) && same(eps1, o.eps1) && same(eps2, o.eps2) && same(norm_mp, o.norm_mp)
        && same(norm_pm, o.norm_pm) && same(witness_transition, o.witness_transition) && same(in1, o.in1)
        && same(in2, o.in2) && same(unitarity_defect, o.unitarity_defect) && regime == o.regime
        && status == o.status;
}

std::string_view to_string(Regime r)
{
    return r == Regime::under ? "under" : "over";
}

SweepResult run_sweep(const SweepSpec& spec, const Progress& progress)
{
    spec.validate();
    const auto started = std::chrono::steady_clock::now();
    const CriticalCoupling cc = find_lambda_c(spec.model, spec.lambda_c_tol);
    const double dim2 = double(spec.model.dim()) * spec.model.dim();

    SweepResult result;
    nlohmann::json points = nlohmann::json::array();

    for (double multiple : spec.lambda_multiples) {
        const double lambda = multiple * cc.lambda_c;
        const Regime regime = multiple < 1.0 ? Regime::under : Regime::over;
        SwitchingSchedule first { spec.eps1_list.front(), spec.eps2_list.front(), spec.profile };
        std::optional<Dynamics> base;
        std::string setup_error;
        try {
            base.emplace(spec.model, lambda, first, spec.evolution);
        } catch (const Error& e) {
            setup_error = e.what();
        }

        auto run_point = [&](double e1, double e2) {
            SweepRecord r;
            r.lambda = lambda;
            r.eps1 = e1;
            r.eps2 = e2;
            r.regime = regime;
            nlohmann::json diag { { "lambda_multiple", multiple }, { "eps1", e1 }, { "eps2", e2 } };
            if (!base) {
                r.status = csv_safe("error: " + setup_error);
            } else {
                try {
                    const Dynamics dyn = base->with_schedule({ e1, e2, spec.profile });
                    const double cost = double(dyn.ramp_steps()) * dim2;
                    diag["ramp_steps"] = dyn.ramp_steps();
                    diag["dt"] = dyn.step_size();
                    if (cost <= spec.cost_budget) {
                        EvolutionStats stats;
                        const SMatrix s = adiabatic_s(dyn, &stats);
                        const ScatteringRecord sr = summarize(s, dyn.free_spectrum(), dyn.bands());
                        r.norm_mp = sr.norm_mp;
                        r.norm_pm = sr.norm_pm;
                        r.unitarity_defect = sr.unitarity_defect;
                        diag["s_norm_drift"] = stats.norm_drift;
                    } else {
                        r.status = "s_skipped";
                    }
                    if (regime == Regime::over) {
                        const WitnessBundle w = build_witness(dyn, cc.lambda_c, spec.delta);
                        r.witness_transition = w.transition;
                        r.in1 = w.in1;
                        r.in2 = w.in2;
                        r.unitarity_defect = max_finite(r.unitarity_defect, w.unitarity_defect);
                        diag["s0"] = w.s0;
                        diag["psi_energy"] = w.psi_energy;
                    }
                } catch (const Error& e) {
                    r.status = csv_safe(std::string("error: ") + e.what());
                }
            }
            diag["status"] = r.status;
            points.push_back(diag);
            result.records.push_back(r);
            if (progress)
                progress(r);
            return r;
        };

        if (regime == Regime::over && spec.iterated_limit) {
            for (double e1 : spec.eps1_list) {
                double e2 = e1;
                double previous = std::numeric_limits<double>::quiet_NaN();
                for (int k = 0; k <= spec.max_halvings; ++k, e2 *= 0.5) {
                    const SweepRecord r = run_point(e1, e2);
                    if (std::isnan(r.witness_transition))
                        break;
                    if (!std::isnan(previous) && std::abs(r.witness_transition - previous) < spec.stabilization)
                        break;
                    previous = r.witness_transition;
                }
            }
        } else {
            for (const auto& [e1, e2] : eps_pairs(spec))
                run_point(e1, e2);
        }
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    nlohmann::json model_json = spec.model;
    nlohmann::json profile_json = spec.profile;
    nlohmann::json evolution_json = spec.evolution;
    nlohmann::json sweep_json = spec;
    result.manifest = {
        { "tool", "overcrit" },
        { "version", "1.0.0" },
        { "eigen_version", strfmt("%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION) },
        { "config", { { "model", model_json }, { "profile", profile_json }, { "evolution", evolution_json }, { "sweep", sweep_json } } },
        { "lambda_c", cc },
        { "plateau_tolerance", StaticScattering::plateau_tolerance },
        { "record_count", result.records.size() },
        { "points", points },
        { "wall_time_seconds", wall },
    };
    return result;
}

Report dichotomy_report(const std::vector<SweepRecord>& records)
{
    // group by lambda, keeping first-seen order
    std::vector<double> order;
    std::map<double, std::vector<const SweepRecord*>> groups;
    for (const auto& r : records) {
        if (!groups.count(r.lambda))
            order.push_back(r.lambda);
        groups[r.lambda].push_back(&r);
    }

    Report rep;
    bool have_under = false;
    bool have_over = false;
    rep.max_under = -std::numeric_limits<double>::infinity();
    rep.min_over = std::numeric_limits<double>::infinity();

    for (double lambda : order) {
        std::vector<const SweepRecord*> valid;
        Regime regime = groups[lambda].front()->regime;
        for (const SweepRecord* r : groups[lambda]) {
            const double v = regime == Regime::under ? r->norm_mp : r->witness_transition;
            if (!std::isnan(v))
                valid.push_back(r);
        }
        if (valid.empty())
            continue;
        // coarse to fine: larger eps1 first, then larger eps2
        std::stable_sort(valid.begin(), valid.end(), [](const SweepRecord* a, const SweepRecord* b) {
            return a->eps1 != b->eps1 ? a->eps1 > b->eps1 : a->eps2 > b->eps2;
        });
        auto value = [regime](const SweepRecord* r) { return regime == Regime::under ? r->norm_mp : r->witness_transition; };
        const double coarse = value(valid.front());
        const double fine = value(valid.back());
        std::string trend = "single";
        if (valid.size() > 1)
            trend = fine < coarse ? "decreasing" : (fine > coarse ? "increasing" : "flat");
        rep.rows.push_back({ lambda, regime, valid.back()->eps1, valid.back()->eps2, fine, trend });
        if (regime == Regime::under) {
            have_under = true;
            rep.max_under = std::max(rep.max_under, fine);
        } else {
            have_over = true;
            rep.min_over = std::min(rep.min_over, fine);
        }
    }
    require(have_under && have_over, ErrorCode::insufficient_grid,
        "the report needs at least one under-critical and one over-critical coupling with results");
    rep.separation = rep.min_over - rep.max_under;
    return rep;
}

Report dichotomy_report(const SweepResult& result)
{
    return dichotomy_report(result.records);
}

std::string Report::text() const
{
    std::string out = "lambda regime finest_eps1 finest_eps2 value trend\n";
    for (const auto& r : rows)
        out += strfmt("%.10g %s %.6g %.6g %.6f %s\n", r.lambda, std::string(to_string(r.regime)).c_str(),
            r.finest_eps1, r.finest_eps2, r.finest_value, r.trend.c_str());
    out += strfmt("max undercritical block norm at finest eps: %.6f\n", max_under);
    out += strfmt("min overcritical witness transition at finest eps: %.6f\n", min_over);
    out += strfmt("separation: %.6f\n", separation);
    return out;
}

void write_records_csv(std::ostream& out, const std::vector<SweepRecord>& records)
{
    out << csv_header << '\n';
    for (const auto& r : records)
        out << strfmt("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%s\n", r.lambda, r.eps1, r.eps2,
            r.norm_mp, r.norm_pm, r.witness_transition, r.in1, r.in2, r.unitarity_defect,
            std::string(to_string(r.regime)).c_str(), csv_safe(r.status).c_str());
}

std::vector<SweepRecord> read_records_csv(std::istream& in)
{
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line == csv_header, ErrorCode::io_failure,
        "records.csv header mismatch");
    std::vector<SweepRecord> out;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (!line.empty() && line.back() == ',')
            f.emplace_back();
        require(f.size() == 11, ErrorCode::io_failure, strfmt("records.csv row %d has %zu fields", row, f.size()));
        auto num = [&](int i) {
            char* end = nullptr;
            const double v = std::strtod(f[i].c_str(), &end);
            require(end && *end == '\0' && !f[i].empty(), ErrorCode::io_failure,
                strfmt("records.csv row %d: bad number '%s'", row, f[i].c_str()));
            return v;
        };
        SweepRecord r;
        r.lambda = num(0);
        r.eps1 = num(1);
        r.eps2 = num(2);
        r.norm_mp = num(3);
        r.norm_pm = num(4);
        r.witness_transition = num(5);
        r.in1 = num(6);
        r.in2 = num(7);
        r.unitarity_defect = num(8);
        require(f[9] == "under" || f[9] == "over", ErrorCode::io_failure, strfmt("records.csv row %d: bad regime", row));
        r.regime = f[9] == "under" ? Regime::under : Regime::over;
        r.status = f[10];
        out.push_back(r);
    }
    return out;
}

void emit_outputs(const SweepResult& result, const std::filesystem::path& directory)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(directory, ec);
    require(!ec, ErrorCode::io_failure, "cannot create " + directory.string() + ": " + ec.message());

    auto open = [](const fs::path& p) {
        std::ofstream f(p, std::ios::binary);
        require(f.good(), ErrorCode::io_failure, "cannot open " + p.string() + " for writing");
        return f;
    };
    auto close = [](std::ofstream& f, const fs::path& p) {
        f.close();
        require(!f.fail(), ErrorCode::io_failure, "write failed for " + p.string());
    };

    const fs::path records = directory / "records.csv";
    auto rf = open(records);
    write_records_csv(rf, result.records);
    close(rf, records);

    const fs::path manifest = directory / "manifest.json";
    auto mf = open(manifest);
    mf << (result.manifest.is_null() ? nlohmann::json::object() : result.manifest).dump(2) << '\n';
    close(mf, manifest);

    const fs::path report = directory / "report.txt";
    auto tf = open(report);
    try {
        tf << dichotomy_report(result.records).text();
    } catch (const Error& e) {
        tf << "no dichotomy report: " << e.what() << '\n';
    }
    close(tf, report);

    std::vector<double> lambdas;
    for (const auto& r : result.records)
        if (std::find(lambdas.begin(), lambdas.end(), r.lambda) == lambdas.end())
            lambdas.push_back(r.lambda);
    for (size_t i = 0; i < lambdas.size(); ++i) {
        const fs::path plot = directory / strfmt("plot_%02zu_lambda_%.6g.csv", i, lambdas[i]);
        auto pf = open(plot);
        pf << "eps1,eps2,norm_mp,witness_transition\n";
        for (const auto& r : result.records)
            if (r.lambda == lambdas[i])
                pf << strfmt("%.17g,%.17g,%.17g,%.17g\n", r.eps1, r.eps2, r.norm_mp, r.witness_transition);
        close(pf, plot);
    }
}

std::filesystem::path resolve_output_dir(const SweepSpec& spec)
{
    if (const char* env = std::getenv("OVERCRIT_OUT"); env && *env)
        return env;
    return spec.output_dir;
}

} // namespace overcrit
