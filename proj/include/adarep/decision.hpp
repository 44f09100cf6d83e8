#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adarep/core.hpp"
#include "adarep/gas_model.hpp"

namespace adarep::decision {

struct DeltaEntry {
    std::uint64_t epoch = 0;
    Key key;
    ReplState from = ReplState::NR;
    ReplState to = ReplState::NR;
    bool operator==(const DeltaEntry&) const = default;
};
using DecisionDelta = std::vector<DeltaEntry>;

/// CSV with header `epoch,key,old,new`.
void write_delta_csv(std::ostream& out, const DecisionDelta& delta);

struct MemorylessState {
    std::uint32_t k_threshold = 2;
    std::map<Key, std::uint32_t> count;
    std::map<Key, ReplState> states;

    ReplState state_of(const Key& k) const;
};

struct MemorizingState {
    std::uint32_t k_prime = 2;
    std::uint32_t d_window = 1;
    std::map<Key, std::uint64_t> r_count;
    std::map<Key, std::uint64_t> w_count;
    std::map<Key, ReplState> states;

    ReplState state_of(const Key& k) const;
};

/// Scans are rejected; expand them into reads first (see expand_scans).
DecisionDelta memoryless_step(MemorylessState& st, const Operation& op);
DecisionDelta memorizing_step(MemorizingState& st, const Operation& op);

enum class AdaptiveVariant { K1, K2 };

double adaptive_k_predict(std::span<const std::uint32_t> history, std::size_t window);
ReplState adaptive_policy_decide(double predicted_k, double threshold_k, AdaptiveVariant variant);

/// Per-key reads-per-write history; the state is re-decided at every write.
struct AdaptiveState {
    AdaptiveVariant variant = AdaptiveVariant::K1;
    std::size_t window = 3;
    double threshold = 2.0;
    std::map<Key, std::vector<std::uint32_t>> history;
    std::map<Key, std::uint32_t> reads_since_write;
    std::map<Key, ReplState> states;

    ReplState state_of(const Key& k) const;
};
DecisionDelta adaptive_step(AdaptiveState& st, const Operation& op);

struct MemorylessParams {
    std::uint32_t k = 2;
};
struct MemorizingParams {
    std::uint32_t k_prime = 2;
    std::uint32_t d = 1;
};
struct AdaptiveParams {
    AdaptiveVariant variant = AdaptiveVariant::K1;
    std::size_t window = 3;
    double threshold = 2.0;
};
struct NeverReplicate {};   // BL1
struct AlwaysReplicate {};  // BL2
struct OfflineOptimal {};

using PolicySpec = std::variant<MemorylessParams, MemorizingParams, AdaptiveParams, NeverReplicate,
                                AlwaysReplicate, OfflineOptimal>;

std::string policy_kind(const PolicySpec& p);

/// Uniform driver over the online policies. OfflineOptimal is not online and is
/// rejected here.
class OnlinePolicy {
public:
    explicit OnlinePolicy(PolicySpec spec);

    DecisionDelta observe(const Operation& op);
    ReplState state_of(const Key& k) const;

private:
    PolicySpec spec_;
    std::variant<std::monostate, MemorylessState, MemorizingState, AdaptiveState> state_;
};

/// Every key mentioned in the trace, sorted.
std::vector<Key> key_universe(const Trace& trace);

/// Replaces each scan by reads of the `count` universe keys starting at its
/// start key (clipped at the end of the universe).
Trace expand_scans(const Trace& trace, std::span<const Key> universe);
Trace expand_scans(const Trace& trace);

/// Gas charged to one record for each decision-relevant event.
struct RecordCosts {
    Gas off_chain_read = 0;
    Gas on_chain_read = 0;
    Gas write_nr = 0;
    Gas write_r_fresh = 0;  // slot never allocated
    Gas write_r = 0;
    Gas replicate_fresh = 0;
    Gas replicate = 0;
    Gas evict = 0;
};

/// Costs for a record of the given size. Supplied by the simulator so the oracle
/// and the online replay price events identically.
using CostModel = std::function<RecordCosts(Words record_words)>;

/// Words per key at each op: the size of the latest write, else the first write
/// in the trace, else 1.
std::vector<Words> record_sizes(const Trace& trace);

/// Prices a decision sequence; states[i] is the key's state after op i. Reads are
/// served by the state held before the op. Scans must be expanded.
Gas price_decisions(const Trace& trace, std::span<const ReplState> states, const CostModel& costs);

/// States after each op as produced by an online policy.
std::vector<ReplState> online_states(const PolicySpec& policy, const Trace& trace);

struct OfflineResult {
    std::vector<ReplState> states;
    Gas total_gas = 0;
};

/// Per-key dynamic program over {never-allocated NR, allocated NR, R}. Throws
/// ValidationError on an empty trace. Scans are expanded internally; `states`
/// follows the expanded trace.
OfflineResult offline_optimal(const Trace& trace, const CostModel& costs);

/// Blocks of one write followed by k reads on a single key.
Trace worst_case_memoryless(std::uint32_t k, std::uint32_t repetitions, const Key& key = "k0");
/// Blocks of (2D+1) reads followed by ceil((2D+1)/K') writes on a single key.
Trace worst_case_memorizing(std::uint32_t k_prime, std::uint32_t d, std::uint32_t repetitions,
                            const Key& key = "k0");

}  // namespace adarep::decision
