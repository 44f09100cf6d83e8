#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "adarep/error.hpp"
#include "adarep/experiment.hpp"

using namespace adarep;
using namespace adarep::experiment;

namespace {

ExperimentSpec parse(const std::string& text) {
    std::istringstream in(text);
    return parse_spec(in);
}

const char* kRatioSpec = R"(name = t
# comment
[sim]
seed = 3
[workload]
type = ratio
ratio = 2
ops = 512
keys = 2
[policy.main]
type = memoryless
[policy.mem]
type = memorizing
k_prime = 4
d = 2
)";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t parse_error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST(SpecParser, ParsesSectionsAndPolicies) {
    const auto s = parse(kRatioSpec);
    EXPECT_EQ(s.name, "t");
    EXPECT_EQ(s.sim.rng_seed, 3u);
    EXPECT_EQ(s.workload.kind, WorkloadKind::Ratio);
    EXPECT_DOUBLE_EQ(s.workload.ratio.reads_per_write, 2.0);
    ASSERT_EQ(s.policies.size(), 2u);
    EXPECT_EQ(s.policies[0].name, "main");
    const auto& m = std::get<decision::MemorizingParams>(s.policies[1].spec);
    EXPECT_EQ(m.k_prime, 4u);
    EXPECT_EQ(m.d, 2u);
}

TEST(SpecParser, ErrorsCarryLines) {
    EXPECT_EQ(parse_error_line("name = a\n[workload]\nbogus = 1\n[policy.p]\ntype = bl1\n"), 3u);
    EXPECT_EQ(parse_error_line("[workload]\nratio = two\n[policy.p]\ntype = bl1\n"), 2u);
    EXPECT_EQ(parse_error_line("[sim]\nseed = 1\nseed = 2\n"), 3u);
    EXPECT_EQ(parse_error_line("just words\n"), 1u);
    EXPECT_EQ(parse_error_line("[sim\n"), 1u);
}

TEST(SpecParser, EmptyPolicyListIsValidationError) {
    const auto s = parse("[workload]\ntype = ratio\n");
    EXPECT_THROW(s.validate(), ValidationError);
    EXPECT_THROW(run_experiment(s, 1), ValidationError);
}

TEST(SpecParser, UnknownPolicyAndSection) {
    EXPECT_THROW(parse("[policy.p]\ntype = clairvoyant\n"), ValidationError);
    EXPECT_THROW(parse("[weird]\n[policy.p]\ntype = bl1\n"), ValidationError);
    EXPECT_THROW(parse("[workload]\ntype = ratio\nratio = -1\n[policy.p]\ntype = bl1\n"), ValidationError);
}

TEST(SpecParser, PolicyByName) {
    const GasSchedule s;
    EXPECT_EQ(std::get<decision::MemorylessParams>(policy_by_name("memoryless", s).spec).k, 2u);
    EXPECT_TRUE(std::holds_alternative<decision::OfflineOptimal>(policy_by_name("offline", s).spec));
    EXPECT_THROW(policy_by_name("nope", s), ValidationError);
}

TEST(Savings, Formula) {
    EXPECT_DOUBLE_EQ(savings(200, 150), 0.25);
    EXPECT_DOUBLE_EQ(savings(100, 150), -0.5);
    EXPECT_DOUBLE_EQ(savings(0, 10), 0.0);
}

TEST(Run, SummaryCrossChecksTotals) {
    const auto spec = parse(kRatioSpec);
    const auto out = run_experiment(spec, 3);
    ASSERT_EQ(out.results.size(), 2u);
    for (const auto& row : out.summary) {
        Gas raw = 0;
        if (row.policy == "BL1") raw = out.bl1.total_gas();
        else if (row.policy == "BL2") raw = out.bl2.total_gas();
        else {
            for (const auto& [name, r] : out.results) {
                if (name == row.policy) raw = r.total_gas();
            }
        }
        EXPECT_EQ(row.total_gas, raw) << row.policy;
        EXPECT_DOUBLE_EQ(row.savings_vs_bl1, savings(out.bl1.total_gas(), raw));
        EXPECT_DOUBLE_EQ(row.savings_vs_bl2, savings(out.bl2.total_gas(), raw));
    }
}

TEST(Run, OutputsAreByteIdentical) {
    const auto spec = parse(kRatioSpec);
    const auto base = std::filesystem::temp_directory_path() / "adarep_test_run";
    std::filesystem::remove_all(base);
    write_run_outputs(base / "a", run_experiment(spec, 3));
    write_run_outputs(base / "b", run_experiment(spec, 3));
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(base / "a")) {
        EXPECT_EQ(slurp(e.path()), slurp(base / "b" / e.path().filename())) << e.path();
        ++files;
    }
    EXPECT_GE(files, 3u);  // a ledger per policy plus summary.csv
    EXPECT_TRUE(std::filesystem::exists(base / "a" / "summary.csv"));
    std::filesystem::remove_all(base);
}

TEST(Sweep, Values) {
    const auto v = sweep_values(0, 1, 0.25);
    ASSERT_EQ(v.size(), 5u);
    EXPECT_DOUBLE_EQ(v.back(), 1.0);
    EXPECT_THROW(sweep_values(2, 1, 1), ValidationError);
    EXPECT_THROW(sweep_values(0, 1, 0), ValidationError);
}

TEST(Sweep, ParallelMatchesSerial) {
    const auto spec = parse(kRatioSpec);
    const auto values = sweep_values(0, 4, 0.5);
    const auto par = run_sweep(spec, SweepParam::Ratio, values, 3, true);
    const auto ser = run_sweep(spec, SweepParam::Ratio, values, 3, false);
    std::ostringstream a, b;
    write_sweep_csv(a, par);
    write_sweep_csv(b, ser);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(par.crossover, ser.crossover);
    ASSERT_TRUE(par.crossover.has_value());
    EXPECT_GE(*par.crossover, 1.0);
    EXPECT_LE(*par.crossover, 3.0);
}

TEST(Sweep, RecordWordsIncreasesCost) {
    const auto spec = parse(kRatioSpec);
    const auto sweep = run_sweep(spec, SweepParam::RecordWords, sweep_values(1, 16, 3), 3);
    for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
        for (std::size_t p = 0; p < sweep.rows[i].summary.size(); ++p) {
            EXPECT_GT(sweep.rows[i].summary[p].per_op_gas, sweep.rows[i - 1].summary[p].per_op_gas)
                << sweep.rows[i].summary[p].policy;
        }
    }
}

TEST(Sweep, ParameterChecks) {
    const auto spec = parse(kRatioSpec);
    EXPECT_THROW(apply_sweep_value(spec, SweepParam::RecordWords, 1.5), ValidationError);
    EXPECT_THROW(sweep_param_from_string("colour"), ValidationError);
    auto s = parse("[workload]\ntype = ycsb\nphases = A:16\n[policy.p]\ntype = bl1\n");
    EXPECT_THROW(apply_sweep_value(s, SweepParam::Ratio, 1), ValidationError);
    EXPECT_THROW(apply_sweep_value(s, SweepParam::K, 1), ValidationError);
    const auto k = apply_sweep_value(spec, SweepParam::K, 5);
    EXPECT_EQ(std::get<decision::MemorylessParams>(k.policies[0].spec).k, 5u);
}

TEST(Workload, TraceFileRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "adarep_trace_wl";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "t.trace");
        f << "W,a,1\nR,a\nR,a\n";
    }
    std::istringstream in("[workload]\ntype = trace\npath = t.trace\n[policy.p]\ntype = memoryless\n");
    const auto s = parse_spec(in, dir);
    EXPECT_EQ(make_workload(s.workload, 1).size(), 3u);
    std::filesystem::remove_all(dir);
}
