#pragma once

#include "overcrit/scattering.hpp"
#include "overcrit/witness.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace overcrit {

enum class EpsPairing {
    diagonal, // eps1_list[i] with eps2_list[i]
    grid,     // every combination
};

struct SweepSpec {
    TwoBandModel model = TwoBandModel::reference();
    BumpProfile profile;
    EvolutionConfig evolution;

    std::vector<double> lambda_multiples { 0.5, 1.2 }; // in units of lambda_c
    std::vector<double> eps1_list { 0.25, 0.125 };
    std::vector<double> eps2_list { 0.25, 0.125 };
    EpsPairing pairing = EpsPairing::diagonal;

    // Over-critical points: for each eps1, start eps2 at eps1 and halve it until the
    // witness transition moves by less than `stabilization` (or max_halvings is hit).
    bool iterated_limit = true;
    double stabilization = 0.01;
    int max_halvings = 6;

    double delta = 0.1;
    double lambda_c_tol = 1e-3;
    double cost_budget = 1.5e9; // ramp steps x dim^2 above which the full S is skipped
    double near_critical_lo = 0.95;
    double near_critical_hi = 1.05;
    bool allow_near_critical = false;
    std::string output_dir = "overcrit_out";

    void validate() const;
};

void to_json(nlohmann::json& j, const SweepSpec& s);
void from_json(const nlohmann::json& j, SweepSpec& s);

enum class Regime { under, over };

struct SweepRecord {
    double lambda = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double norm_mp = std::numeric_limits<double>::quiet_NaN();
    double norm_pm = std::numeric_limits<double>::quiet_NaN();
    double witness_transition = std::numeric_limits<double>::quiet_NaN();
    double in1 = std::numeric_limits<double>::quiet_NaN();
    double in2 = std::numeric_limits<double>::quiet_NaN();
    double unitarity_defect = std::numeric_limits<double>::quiet_NaN();
    Regime regime = Regime::under;
    std::string status = "ok";

    bool operator==(const SweepRecord& o) const;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    nlohmann::json manifest;
};

using Progress = std::function<void(const SweepRecord&)>;

SweepResult run_sweep(const SweepSpec& spec, const Progress& progress = {});

struct ReportRow {
    double lambda;
    Regime regime;
    double finest_eps1;
    double finest_eps2;
    double finest_value; // norm_mp below lambda_c, witness transition above
    std::string trend;   // along the records, coarsest to finest eps
};

struct Report {
    std::vector<ReportRow> rows;
    double max_under = 0.0;
    double min_over = 0.0;
    double separation = 0.0;

    std::string text() const;
};

Report dichotomy_report(const std::vector<SweepRecord>& records);
Report dichotomy_report(const SweepResult& result);

void write_records_csv(std::ostream& out, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_records_csv(std::istream& in);

// records.csv, manifest.json, report.txt and one plot table per lambda
void emit_outputs(const SweepResult& result, const std::filesystem::path& directory);

// OVERCRIT_OUT wins over the configured directory
std::filesystem::path resolve_output_dir(const SweepSpec& spec);

std::string_view to_string(Regime r);

} // namespace overcrit
