#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adarep/decision.hpp"
#include "adarep/sim.hpp"

namespace adarep::verify {

enum class Mutation { None, SkipReset };
Mutation mutation_from_string(const std::string& s);

struct Options {
    Mutation mutation = Mutation::None;
    // Restricts the integrity property to one scripted storage provider.
    std::optional<sim::Adversary> adversary;
    std::uint64_t seed = 1;
    std::uint32_t freshness_runs = 50;
};

struct PropertyResult {
    std::string name;
    bool passed = false;
    bool informational = false;  // reported, never fails the suite
    std::string detail;
    std::uint64_t seed = 0;
};

std::vector<PropertyResult> run_suite(const Options& options);
inline bool all_passed(const std::vector<PropertyResult>& rs) {
    for (const auto& r : rs) {
        if (!r.informational && !r.passed) return false;
    }
    return true;
}

/// Cheapest of all 2^m R/NR assignments over a read/write trace of m <= 24 ops.
Gas brute_force_optimal(const Trace& trace, const decision::CostModel& costs, bool parallel = true);

/// Memoryless variant whose read counter is never reset; used to show the
/// competitiveness property has teeth.
std::vector<ReplState> skip_reset_states(std::uint32_t k, const Trace& trace);

struct CompetitiveReport {
    bool passed = true;
    double max_ratio = 0;
    std::string worst;  // parameters of the worst case seen
};

/// Online gas <= bound * OPT + tx_base over W-then-j-reads families, j = 1..2K, n = 1..max_n.
CompetitiveReport memoryless_competitive(const GasSchedule& s, Mutation m, std::uint32_t max_n = 50);
CompetitiveReport memorizing_competitive(const GasSchedule& s, std::uint32_t k_prime, std::uint32_t d,
                                         std::uint32_t max_n = 30);

}  // namespace adarep::verify
