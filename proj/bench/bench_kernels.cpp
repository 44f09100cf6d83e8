// OpenMP kernels against their serial references. Each pair runs the same
// input; the serial variant is the reference the tests compare against.

#include <benchmark/benchmark.h>

#include <random>

#include "adarep/ads.hpp"
#include "adarep/experiment.hpp"
#include "adarep/sim.hpp"
#include "adarep/verify_suite.hpp"

using namespace adarep;

namespace {

std::vector<Record> records(std::size_t n) {
    std::vector<Record> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        char key[24];
        std::snprintf(key, sizeof key, "k%08zu", i);
        out.push_back(Record::numbered(key, i % 3 ? ReplState::NR : ReplState::R, i, 2));
    }
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

void BM_TreeBuild(benchmark::State& st, ads::BuildMode mode) {
    const auto recs = records(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(ads::AdsTree::build(recs, mode).root());
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

Trace brute_trace(std::size_t m) {
    std::mt19937_64 rng(1);
    Trace t;
    for (std::size_t i = 0; i < m; ++i) {
        const Key k = "k" + std::to_string(rng() % 3);
        if (rng() % 2) t.push_back(WriteOp{k, 1});
        else t.push_back(ReadOp{k});
    }
    return t;
}

void BM_BruteForce(benchmark::State& st, bool parallel) {
    const auto t = brute_trace(static_cast<std::size_t>(st.range(0)));
    const auto costs = sim::cost_model_for(t, sim::SimConfig{});
    for (auto _ : st) benchmark::DoNotOptimize(verify::brute_force_optimal(t, costs, parallel));
}

void BM_RatioSweep(benchmark::State& st, bool parallel) {
    experiment::ExperimentSpec spec;
    spec.workload.ratio.total_ops = 2048;
    spec.policies.push_back(experiment::policy_by_name("memoryless", spec.sim.schedule));
    const auto values = experiment::sweep_values(0, 8, 0.5);
    for (auto _ : st) {
        benchmark::DoNotOptimize(
            experiment::run_sweep(spec, experiment::SweepParam::Ratio, values, 1, parallel).crossover);
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_TreeBuild, serial, ads::BuildMode::Serial)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK_CAPTURE(BM_TreeBuild, parallel, ads::BuildMode::Parallel)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK_CAPTURE(BM_BruteForce, serial, false)->Arg(16)->Arg(20);
BENCHMARK_CAPTURE(BM_BruteForce, parallel, true)->Arg(16)->Arg(20);
BENCHMARK_CAPTURE(BM_RatioSweep, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RatioSweep, parallel, true)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
