#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adarep/decision.hpp"
#include "adarep/sim.hpp"
#include "adarep/workloads.hpp"

namespace adarep::experiment {

enum class WorkloadKind { Ratio, Ycsb, Distribution, TraceFile };

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::Ratio;
    workloads::RatioSpec ratio;
    workloads::MixPhaseSpec mix;
    std::string table = "eth";  // eth | btc | path to reads,probability CSV
    std::uint64_t writes = 1000;
    std::uint32_t assets = 1;
    std::uint32_t batch = 1;
    Words record_words = 1;
    std::filesystem::path trace_path;
};

struct NamedPolicy {
    std::string name;
    decision::PolicySpec spec;
};

struct ExperimentSpec {
    std::string name = "experiment";
    WorkloadSpec workload;
    sim::SimConfig sim;
    std::vector<NamedPolicy> policies;
    std::filesystem::path output;

    void validate() const;
};

/// Flat `key = value` lines; `[workload]`, `[sim]`, `[gas]` and `[policy.<name>]`
/// sections; `#` starts a comment. Relative paths resolve against `base_dir`.
ExperimentSpec parse_spec(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentSpec parse_spec_file(const std::filesystem::path& path);

/// Policy by CLI name: memoryless, memorizing, adaptive-k1, adaptive-k2, bl1, bl2, offline.
NamedPolicy policy_by_name(const std::string& name, const GasSchedule& schedule);

Trace make_workload(const WorkloadSpec& w, std::uint64_t seed);

struct SummaryRow {
    std::string policy;
    Gas total_gas = 0;
    double per_op_gas = 0;
    double savings_vs_bl1 = 0;
    double savings_vs_bl2 = 0;
};

struct RunOutput {
    std::vector<std::pair<std::string, sim::SimResult>> results;  // requested policies, in order
    sim::SimResult bl1, bl2;
    std::vector<SummaryRow> summary;  // requested policies, then BL1 and BL2
};

RunOutput run_experiment(const ExperimentSpec& spec, const Trace& trace);
RunOutput run_experiment(const ExperimentSpec& spec, std::uint64_t seed);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// ledger_<policy>.csv per policy and summary.csv.
void write_run_outputs(const std::filesystem::path& dir, const RunOutput& run);

enum class SweepParam { Ratio, K, RecordWords, DataSize };
SweepParam sweep_param_from_string(const std::string& s);
std::string to_string(SweepParam p);

struct SweepRow {
    double value = 0;
    std::vector<SummaryRow> summary;  // requested policies plus BL1 and BL2
};

struct SweepOutput {
    SweepParam param = SweepParam::Ratio;
    std::vector<SweepRow> rows;
    std::optional<double> crossover;  // first value with BL2 <= BL1 per op
};

/// Values from..to inclusive in `step` increments.
std::vector<double> sweep_values(double from, double to, double step);

ExperimentSpec apply_sweep_value(const ExperimentSpec& spec, SweepParam param, double value);
/// Runs are independent; the parallel mode fans them out with OpenMP and merges
/// in parameter order, so both modes return identical rows.
SweepOutput run_sweep(const ExperimentSpec& spec, SweepParam param, const std::vector<double>& values,
                      std::uint64_t seed, bool parallel = true);
void write_sweep_csv(std::ostream& out, const SweepOutput& sweep);
void write_sweep_outputs(const std::filesystem::path& dir, const SweepOutput& sweep);

/// Savings of `x` relative to `baseline`: (baseline - x) / baseline.
double savings(Gas baseline, Gas x);

}  // namespace adarep::experiment
