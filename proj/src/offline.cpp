#include <algorithm>
#include <array>
#include <limits>
#include <map>

#include "adarep/decision.hpp"
#include "adarep/error.hpp"

namespace adarep::decision {

namespace {

// Slot-aware state: the first replication of a key pays for a fresh slot.
enum Slot : std::uint8_t { kNrFresh = 0, kNrAllocated = 1, kRepl = 2 };

struct Step {
    Gas cost;
    Slot next;
};

Step step(Slot prev, ReplState chosen, bool write, const RecordCosts& c) {
    if (write) {
        if (chosen == ReplState::R) return {prev == kNrFresh ? c.write_r_fresh : c.write_r, kRepl};
        if (prev == kRepl) return {c.write_nr + c.evict, kNrAllocated};
        return {c.write_nr, prev};
    }
    const Gas serve = prev == kRepl ? c.on_chain_read : c.off_chain_read;
    if (chosen == ReplState::R) {
        if (prev == kRepl) return {serve, kRepl};
        return {serve + (prev == kNrFresh ? c.replicate_fresh : c.replicate), kRepl};
    }
    if (prev == kRepl) return {serve + c.evict, kNrAllocated};
    return {serve, prev};
}

class CostCache {
public:
    explicit CostCache(const CostModel& m) : model_(m) {}
    const RecordCosts& get(Words w) {
        auto it = cache_.find(w);
        if (it == cache_.end()) it = cache_.emplace(w, model_(w)).first;
        return it->second;
    }

private:
    const CostModel& model_;
    std::map<Words, RecordCosts> cache_;
};

}  // namespace

std::vector<Words> record_sizes(const Trace& trace) {
    std::map<Key, Words> first;
    for (const auto& op : trace) {
        if (const auto* w = std::get_if<WriteOp>(&op)) first.emplace(w->key, w->words);
    }
    std::map<Key, Words> current;
    std::vector<Words> out;
    out.reserve(trace.size());
    for (const auto& op : trace) {
        const auto& k = op_key(op);
        if (const auto* w = std::get_if<WriteOp>(&op)) current[k] = w->words;
        if (auto it = current.find(k); it != current.end()) {
            out.push_back(it->second);
        } else if (auto f = first.find(k); f != first.end()) {
            out.push_back(f->second);
        } else {
            out.push_back(1);
        }
    }
    return out;
}

Gas price_decisions(const Trace& trace, std::span<const ReplState> states, const CostModel& costs) {
    if (states.size() != trace.size()) throw ValidationError("price_decisions: one state per op required");
    const auto sizes = record_sizes(trace);
    CostCache cache(costs);
    std::map<Key, Slot> slot;
    Gas total = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& op = trace[i];
        if (is_scan(op)) throw ValidationError("price_decisions: expand scans first");
        auto [it, _] = slot.try_emplace(op_key(op), kNrFresh);
        const auto s = step(it->second, states[i], is_write(op), cache.get(sizes[i]));
        total += s.cost;
        it->second = s.next;
    }
    return total;
}

std::vector<ReplState> online_states(const PolicySpec& policy, const Trace& trace) {
    OnlinePolicy p(policy);
    std::vector<ReplState> out;
    out.reserve(trace.size());
    for (const auto& op : trace) {
        p.observe(op);
        out.push_back(p.state_of(op_key(op)));
    }
    return out;
}

OfflineResult offline_optimal(const Trace& input, const CostModel& costs) {
    if (input.empty()) throw ValidationError("offline_optimal: empty trace");
    const Trace trace = expand_scans(input);
    const auto sizes = record_sizes(trace);
    CostCache cache(costs);

    std::map<Key, std::vector<std::size_t>> per_key;
    for (std::size_t i = 0; i < trace.size(); ++i) per_key[op_key(trace[i])].push_back(i);

    constexpr Gas kInf = std::numeric_limits<Gas>::max() / 4;
    OfflineResult result;
    result.states.assign(trace.size(), ReplState::NR);
    for (const auto& [key, idx] : per_key) {
        std::array<Gas, 3> dp{0, kInf, kInf};
        // back[j][slot] = (previous slot, choice) that reached `slot` after op j.
        std::vector<std::array<std::pair<Slot, ReplState>, 3>> back(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const auto i = idx[j];
            const auto& c = cache.get(sizes[i]);
            std::array<Gas, 3> next{kInf, kInf, kInf};
            for (int p = 0; p < 3; ++p) {
                if (dp[p] >= kInf) continue;
                for (const auto choice : {ReplState::NR, ReplState::R}) {
                    const auto s = step(static_cast<Slot>(p), choice, is_write(trace[i]), c);
                    const Gas v = dp[p] + s.cost;
                    if (v < next[s.next]) {
                        next[s.next] = v;
                        back[j][s.next] = {static_cast<Slot>(p), choice};
                    }
                }
            }
            dp = next;
        }
        const auto best = static_cast<Slot>(std::min_element(dp.begin(), dp.end()) - dp.begin());
        result.total_gas += dp[best];
        Slot cur = best;
        for (std::size_t j = idx.size(); j-- > 0;) {
            const auto [prev, choice] = back[j][cur];
            result.states[idx[j]] = choice;
            cur = prev;
        }
    }
    return result;
}

}  // namespace adarep::decision
