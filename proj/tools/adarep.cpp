// adarep: run, sweep, verify and gen front end.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "adarep/error.hpp"
#include "adarep/experiment.hpp"
#include "adarep/verify_suite.hpp"

namespace ex = adarep::experiment;

namespace {

constexpr int kValidation = 1;
constexpr int kPropertyFailure = 2;

std::filesystem::path out_dir(const std::string& flag, const ex::ExperimentSpec& spec) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("ADAREP_OUT_DIR"); env && *env) return env;
    if (!spec.output.empty()) return spec.output;
    return "out";
}

void apply_policies(ex::ExperimentSpec& spec, const std::vector<std::string>& names) {
    if (names.empty()) return;
    spec.policies.clear();
    for (const auto& n : names) spec.policies.push_back(ex::policy_by_name(n, spec.sim.schedule));
}

void print_summary(const std::vector<ex::SummaryRow>& rows) {
    std::printf("%-14s %14s %12s %10s %10s\n", "policy", "total_gas", "per_op", "vs_BL1", "vs_BL2");
    for (const auto& r : rows) {
        std::printf("%-14s %14llu %12.2f %9.1f%% %9.1f%%\n", r.policy.c_str(),
                    static_cast<unsigned long long>(r.total_gas), r.per_op_gas, 100 * r.savings_vs_bl1,
                    100 * r.savings_vs_bl2);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gas-driven replication simulator for on-chain data feeds"};
    app.require_subcommand(1);

    std::string spec_path, out, param = "ratio", mutate = "none", adversary;
    std::uint64_t seed = 1;
    std::vector<std::string> policies;
    double from = 0, to = 8, step = 1;
    bool serial = false;

    auto* run = app.add_subcommand("run", "run every policy on one workload");
    auto* sweep = app.add_subcommand("sweep", "run the experiment over a parameter range");
    auto* verify = app.add_subcommand("verify", "competitiveness, integrity and freshness properties");
    auto* gen = app.add_subcommand("gen", "write the spec's workload as a trace file");
    for (auto* c : {run, sweep, gen}) {
        c->add_option("--spec", spec_path, "experiment spec file")->required()->check(CLI::ExistingFile);
        c->add_option("--seed", seed, "workload seed");
        c->add_option("--out", out, "output directory (gen: trace file, default stdout)");
    }
    for (auto* c : {run, sweep}) c->add_option("--policy", policies, "policy by name; repeatable");
    sweep->add_option("--param", param, "ratio | k | record_words | data_size");
    sweep->add_option("--from", from);
    sweep->add_option("--to", to);
    sweep->add_option("--step", step);
    sweep->add_flag("--serial", serial, "run sweep points one at a time");
    verify->add_option("--seed", seed);
    verify->add_option("--mutate", mutate, "none | skip-reset");
    verify->add_option("--adversary", adversary, "forge | omit | replay | stale | corrupt-write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kValidation;
    }

    try {
        if (*verify) {
            adarep::verify::Options o;
            o.seed = seed;
            o.mutation = adarep::verify::mutation_from_string(mutate);
            if (!adversary.empty()) o.adversary = adarep::sim::adversary_from_string(adversary);
            const auto results = adarep::verify::run_suite(o);
            for (const auto& r : results) {
                const char* tag = r.informational ? "INFO" : r.passed ? "PASS" : "FAIL";
                std::printf("[%s] %s: %s", tag, r.name.c_str(), r.detail.c_str());
                if (!r.passed && !r.informational) std::printf(" (seed %llu)", static_cast<unsigned long long>(r.seed));
                std::printf("\n");
            }
            return adarep::verify::all_passed(results) ? 0 : kPropertyFailure;
        }

        auto spec = ex::parse_spec_file(spec_path);
        apply_policies(spec, policies);
        if (*gen) {
            const auto trace = ex::make_workload(spec.workload, seed);
            if (out.empty()) {
                adarep::write_trace(std::cout, trace);
            } else {
                std::ofstream f(out);
                if (!f) throw adarep::ValidationError("cannot write '" + out + "'");
                adarep::write_trace(f, trace);
            }
            return 0;
        }
        const auto dir = out_dir(out, spec);
        if (*run) {
            const auto result = ex::run_experiment(spec, seed);
            ex::write_run_outputs(dir, result);
            print_summary(result.summary);
            std::printf("wrote %s\n", dir.string().c_str());
            return 0;
        }
        const auto p = ex::sweep_param_from_string(param);
        const auto result = ex::run_sweep(spec, p, ex::sweep_values(from, to, step), seed, !serial);
        ex::write_sweep_outputs(dir, result);
        for (const auto& row : result.rows) {
            std::printf("%s = %g\n", param.c_str(), row.value);
            print_summary(row.summary);
        }
        if (result.crossover) std::printf("BL1/BL2 crossover at %s = %g\n", param.c_str(), *result.crossover);
        std::printf("wrote %s\n", dir.string().c_str());
        return 0;
    } catch (const adarep::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidation;
    } catch (const adarep::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidation;
    } catch (const adarep::IntegrityViolation& e) {
        std::fprintf(stderr, "integrity violation: %s\n", e.what());
        return kPropertyFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kPropertyFailure;
    }
}
