#include "overcrit/cli.hpp"

#include "overcrit/config.hpp"
#include "overcrit/errors.hpp"
#include "overcrit/text.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace overcrit {

namespace {

    struct Coupling {
        std::optional<double> absolute;
        std::optional<double> multiple;

        void attach(CLI::App* cmd)
        {
            auto* a = cmd->add_option("--lambda", absolute, "absolute coupling");
            auto* m = cmd->add_option("--multiple", multiple, "coupling in units of lambda_c");
            a->excludes(m);
        }

        bool needs_lambda_c() const { return multiple.has_value(); }

        double resolve(const std::optional<CriticalCoupling>& cc) const
        {
            if (multiple)
                return *multiple * cc->lambda_c;
            require(absolute.has_value(), ErrorCode::invalid_argument, "give --lambda or --multiple");
            return *absolute;
        }
    };

    void write_to(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body)
    {
        if (path.empty() || path == "-") {
            body(fallback);
            return;
        }
        std::ofstream f(path);
        require(f.good(), ErrorCode::io_failure, "cannot open " + path + " for writing");
        body(f);
        f.close();
        require(!f.fail(), ErrorCode::io_failure, "write failed for " + path);
    }

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app { "Adiabatic switching and inter-band transitions in a two-band lattice model" };
    app.name("overcrit");
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration overriding the reference defaults")
        ->check(CLI::ExistingFile);

    auto* bands = app.add_subcommand("bands", "band edges of H0");

    auto* dive = app.add_subcommand("dive", "tracked gap level E_g(lambda) as CSV");
    int dive_points = 101;
    double dive_max = 2.0;
    std::string dive_out;
    dive->add_option("--points", dive_points, "grid points on [0, max-multiple * lambda_c]")->check(CLI::Range(2, 100000));
    dive->add_option("--max-multiple", dive_max, "upper end of the grid in units of lambda_c")->check(CLI::PositiveNumber);
    dive->add_option("--out", dive_out, "output file (stdout if omitted)");

    auto* lc = app.add_subcommand("lambda-c", "critical coupling by bisection");
    double tol = 1e-3;
    lc->add_option("--tol", tol, "bracket width")->check(CLI::PositiveNumber);

    auto* sm = app.add_subcommand("smatrix", "adiabatic S matrix block norms");
    Coupling sm_coupling;
    sm_coupling.attach(sm);
    double sm_eps1 = 0.25, sm_eps2 = 0.25;
    sm->add_option("--eps1", sm_eps1, "switch-on rate")->check(CLI::PositiveNumber);
    sm->add_option("--eps2", sm_eps2, "switch-off rate")->check(CLI::PositiveNumber);

    auto* wit = app.add_subcommand("witness", "witness vector diagnostics (lambda > lambda_c)");
    Coupling wit_coupling;
    wit_coupling.attach(wit);
    double wit_eps1 = 0.125, wit_eps2 = 0.125, wit_delta = 0.1;
    bool wit_chain = false;
    wit->add_option("--eps1", wit_eps1, "switch-on rate")->check(CLI::PositiveNumber);
    wit->add_option("--eps2", wit_eps2, "switch-off rate")->check(CLI::PositiveNumber);
    wit->add_option("--delta", wit_delta, "offset past s0 where the gap level is taken");
    wit->add_flag("--chain", wit_chain, "also evaluate the static-Moller consistency chain");

    auto* cook = app.add_subcommand("cook", "Cook integrand of the auxiliary witness vector as CSV");
    Coupling cook_coupling;
    cook_coupling.attach(cook);
    double cook_eps1 = 0.125, cook_tmax = 0.0, cook_dt = 0.5, cook_delta = 0.1;
    std::string cook_out;
    cook->add_option("--eps1", cook_eps1, "switch-on rate (eps2 = eps1)")->check(CLI::PositiveNumber);
    cook->add_option("--tmax", cook_tmax, "upper time (default: reflection time)")->check(CLI::NonNegativeNumber);
    cook->add_option("--dt", cook_dt, "time spacing")->check(CLI::PositiveNumber);
    cook->add_option("--delta", cook_delta, "offset past s0");
    cook->add_option("--out", cook_out, "output file (stdout if omitted)");

    auto* sw = app.add_subcommand("sweep", "parameter sweep with records, manifest and report");
    std::string sweep_out;
    sw->add_option("--out", sweep_out, "output directory (OVERCRIT_OUT and the config are used otherwise)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig {} : load_config(config_path);
        const TwoBandModel& model = cfg.model;
        auto critical = [&](double t) { return find_lambda_c(model, t); };

        if (*bands) {
            const auto h0 = decompose(build_h0(model));
            const BandWindows w = band_edges(h0.values(), model);
            out << nlohmann::json {
                { "sigma_minus", { w.sigma_minus.lo, w.sigma_minus.hi } },
                { "sigma_plus", { w.sigma_plus.lo, w.sigma_plus.hi } },
                { "gap", { w.lower_edge(), w.upper_edge() } },
                { "gap_width", w.gap_width() },
            }.dump(2) << '\n';
        } else if (*dive) {
            const CriticalCoupling cc = critical(1e-3);
            std::vector<double> grid(dive_points);
            for (int k = 0; k < dive_points; ++k)
                grid[k] = dive_max * cc.lambda_c * k / (dive_points - 1);
            const DiveCurve curve = dive_curve(model, grid);
            write_to(dive_out, out, [&](std::ostream& o) { write_csv(o, curve); });
            if (!curve.detached)
                err << "no level detached from the upper band on this grid\n";
        } else if (*lc) {
            out << nlohmann::json(critical(tol)).dump(2) << '\n';
        } else if (*sm) {
            std::optional<CriticalCoupling> cc;
            if (sm_coupling.needs_lambda_c())
                cc = critical(1e-3);
            const Dynamics dyn(model, sm_coupling.resolve(cc), { sm_eps1, sm_eps2, cfg.profile }, cfg.evolution);
            const SMatrix s = adiabatic_s(dyn);
            out << nlohmann::json(summarize(s, dyn.free_spectrum(), dyn.bands())).dump(2) << '\n';
        } else if (*wit) {
            const CriticalCoupling cc = critical(1e-3);
            const Dynamics dyn(model, wit_coupling.resolve(cc), { wit_eps1, wit_eps2, cfg.profile }, cfg.evolution);
            const WitnessBundle w = build_witness(dyn, cc.lambda_c, wit_delta);
            nlohmann::json j = w;
            j["psi_energy"] = w.psi_energy;
            j["lambda_c"] = cc.lambda_c;
            if (wit_chain) {
                const StaticScattering stat(dyn);
                const ProofChain c = proof_chain(dyn, w, stat, stat.converged_horizon());
                j["chain"] = {
                    { "horizon", c.horizon },
                    { "tilde_norm", c.tilde_norm },
                    { "inner_product", c.inner_product },
                    { "in2_squared", c.in2_squared },
                    { "probe_distance", c.probe_distance },
                    { "lower_bound", c.lower_bound },
                    { "holds", c.holds },
                };
            }
            out << j.dump(2) << '\n';
        } else if (*cook) {
            const CriticalCoupling cc = critical(1e-3);
            const Dynamics dyn(model, cook_coupling.resolve(cc), { cook_eps1, cook_eps1, cfg.profile }, cfg.evolution);
            const WitnessBundle w = build_witness(dyn, cc.lambda_c, cook_delta);
            const StaticScattering stat(dyn);
            const MollerApproximant wp = stat.moller(stat.converged_horizon(), Side::plus);
            const Vector t = tilde_phi(dyn, w, wp);
            const double t_max = cook_tmax > 0.0 ? cook_tmax : reflection_time(model);
            CookCurve curve = cook_integral(model, dyn.free_spectrum(), t, t_max, cook_dt);
            curve.eps1 = cook_eps1;
            write_to(cook_out, out, [&](std::ostream& o) { write_csv(o, curve); });
        } else if (*sw) {
            const SweepSpec& spec = cfg.sweep;
            const auto dir = sweep_out.empty() ? resolve_output_dir(spec) : std::filesystem::path(sweep_out);
            const SweepResult result = run_sweep(spec, [&](const SweepRecord& r) {
                err << strfmt("lambda=%.6g eps1=%.6g eps2=%.6g norm_mp=%.6g transition=%.6g %s\n", r.lambda, r.eps1,
                    r.eps2, r.norm_mp, r.witness_transition, r.status.c_str());
            });
            emit_outputs(result, dir);
            out << "wrote " << dir.string() << '\n';
        }
    } catch (const nlohmann::json::parse_error& e) {
        err << "configuration parse error at byte " << e.byte << ": " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int cli_main(int argc, const char* const* argv)
{
    return cli_main(argc, argv, std::cout, std::cerr);
}

} // namespace overcrit
