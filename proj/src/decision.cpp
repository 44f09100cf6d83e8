#include "adarep/decision.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>

#include "adarep/error.hpp"

namespace adarep::decision {

namespace {

template <class M>
ReplState lookup_state(const M& states, const Key& k) {
    const auto it = states.find(k);
    return it == states.end() ? ReplState::NR : it->second;
}

void require_point_op(const Operation& op) {
    if (is_scan(op)) throw ValidationError("decision policies take reads and writes; expand scans first");
}

}  // namespace

void write_delta_csv(std::ostream& out, const DecisionDelta& delta) {
    out << "epoch,key,old,new\n";
    for (const auto& d : delta) {
        out << d.epoch << ',' << d.key << ',' << to_string(d.from) << ',' << to_string(d.to) << '\n';
    }
}

ReplState MemorylessState::state_of(const Key& k) const { return lookup_state(states, k); }
ReplState MemorizingState::state_of(const Key& k) const { return lookup_state(states, k); }
ReplState AdaptiveState::state_of(const Key& k) const { return lookup_state(states, k); }

DecisionDelta memoryless_step(MemorylessState& st, const Operation& op) {
    require_point_op(op);
    if (st.k_threshold == 0) throw ValidationError("memoryless: K must be >= 1");
    const auto& key = op_key(op);
    DecisionDelta out;
    const auto prev = st.state_of(key);
    if (is_write(op)) {
        st.count[key] = 0;
        if (prev == ReplState::R) out.push_back({0, key, ReplState::R, ReplState::NR});
        st.states[key] = ReplState::NR;
        return out;
    }
    if (prev == ReplState::R) return out;
    auto& c = st.count[key];
    if (c < st.k_threshold) ++c;
    if (c >= st.k_threshold) {
        st.count.erase(key);
        st.states[key] = ReplState::R;
        out.push_back({0, key, ReplState::NR, ReplState::R});
    }
    return out;
}

DecisionDelta memorizing_step(MemorizingState& st, const Operation& op) {
    require_point_op(op);
    if (st.k_prime == 0 || st.d_window == 0) throw ValidationError("memorizing: K' and D must be >= 1");
    const auto& key = op_key(op);
    auto& w = st.w_count[key];
    auto& r = st.r_count[key];
    if (is_write(op)) {
        ++w;
    } else {
        ++r;
    }
    const auto prev = st.state_of(key);
    const auto kp = static_cast<std::int64_t>(st.k_prime);
    const auto d = static_cast<std::int64_t>(st.d_window);
    const auto wi = static_cast<std::int64_t>(w);
    const auto ri = static_cast<std::int64_t>(r);
    // Counters are rebased only when the state actually flips.
    ReplState next = prev;
    if (prev == ReplState::NR && wi * kp + d <= ri) {
        next = ReplState::R;
        w = 0;
        r = st.d_window;
    } else if (prev == ReplState::R && wi * kp - d >= ri) {
        next = ReplState::NR;
        r = 0;
        w = (st.d_window + st.k_prime - 1) / st.k_prime;
    }
    st.states[key] = next;
    DecisionDelta out;
    if (next != prev) out.push_back({0, key, prev, next});
    return out;
}

double adaptive_k_predict(std::span<const std::uint32_t> history, std::size_t window) {
    if (window == 0) throw ValidationError("adaptive K: window must be >= 1");
    if (history.empty()) return 0.0;
    const auto n = std::min(window, history.size());
    const auto tail = history.subspan(history.size() - n);
    const double sum = std::accumulate(tail.begin(), tail.end(), 0.0);
    return sum / static_cast<double>(n);
}

ReplState adaptive_policy_decide(double predicted_k, double threshold_k, AdaptiveVariant variant) {
    const bool replicate = predicted_k >= threshold_k;
    if (variant == AdaptiveVariant::K1) return replicate ? ReplState::R : ReplState::NR;
    return replicate ? ReplState::NR : ReplState::R;
}

DecisionDelta adaptive_step(AdaptiveState& st, const Operation& op) {
    require_point_op(op);
    const auto& key = op_key(op);
    DecisionDelta out;
    if (!is_write(op)) {
        const auto it = st.reads_since_write.find(key);
        if (it != st.reads_since_write.end()) ++it->second;
        return out;
    }
    auto& hist = st.history[key];
    if (const auto it = st.reads_since_write.find(key); it != st.reads_since_write.end()) {
        hist.push_back(it->second);
    }
    st.reads_since_write[key] = 0;
    const auto prev = st.state_of(key);
    const auto next = adaptive_policy_decide(adaptive_k_predict(hist, st.window), st.threshold, st.variant);
    st.states[key] = next;
    if (next != prev) out.push_back({0, key, prev, next});
    return out;
}

std::string policy_kind(const PolicySpec& p) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MemorylessParams>) return "memoryless";
            if constexpr (std::is_same_v<T, MemorizingParams>) return "memorizing";
            if constexpr (std::is_same_v<T, AdaptiveParams>) {
                return s.variant == AdaptiveVariant::K1 ? "adaptive-k1" : "adaptive-k2";
            }
            if constexpr (std::is_same_v<T, NeverReplicate>) return "bl1";
            if constexpr (std::is_same_v<T, AlwaysReplicate>) return "bl2";
            if constexpr (std::is_same_v<T, OfflineOptimal>) return "offline";
        },
        p);
}

OnlinePolicy::OnlinePolicy(PolicySpec spec) : spec_(std::move(spec)) {
    std::visit(
        [this](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MemorylessParams>) {
                if (s.k == 0) throw ValidationError("memoryless: K must be >= 1");
                MemorylessState m;
                m.k_threshold = s.k;
                state_ = std::move(m);
            } else if constexpr (std::is_same_v<T, MemorizingParams>) {
                if (s.k_prime == 0 || s.d == 0) throw ValidationError("memorizing: K' and D must be >= 1");
                MemorizingState m;
                m.k_prime = s.k_prime;
                m.d_window = s.d;
                state_ = std::move(m);
            } else if constexpr (std::is_same_v<T, AdaptiveParams>) {
                if (s.window == 0) throw ValidationError("adaptive K: window must be >= 1");
                AdaptiveState a;
                a.variant = s.variant;
                a.window = s.window;
                a.threshold = s.threshold;
                state_ = std::move(a);
            } else if constexpr (std::is_same_v<T, OfflineOptimal>) {
                throw ValidationError("the offline policy needs the whole trace; it is not an online policy");
            }
        },
        spec_);
}

DecisionDelta OnlinePolicy::observe(const Operation& op) {
    require_point_op(op);
    return std::visit(
        [&](auto& s) -> DecisionDelta {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MemorylessState>) return memoryless_step(s, op);
            if constexpr (std::is_same_v<T, MemorizingState>) return memorizing_step(s, op);
            if constexpr (std::is_same_v<T, AdaptiveState>) return adaptive_step(s, op);
            return {};
        },
        state_);
}

ReplState OnlinePolicy::state_of(const Key& k) const {
    if (std::holds_alternative<AlwaysReplicate>(spec_)) return ReplState::R;
    return std::visit(
        [&](const auto& s) -> ReplState {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return ReplState::NR;
            } else {
                return s.state_of(k);
            }
        },
        state_);
}

std::vector<Key> key_universe(const Trace& trace) {
    std::set<Key> keys;
    for (const auto& op : trace) keys.insert(op_key(op));
    return {keys.begin(), keys.end()};
}

Trace expand_scans(const Trace& trace, std::span<const Key> universe) {
    Trace out;
    out.reserve(trace.size());
    for (const auto& op : trace) {
        const auto* scan = std::get_if<ScanOp>(&op);
        if (!scan) {
            out.push_back(op);
            continue;
        }
        auto it = std::lower_bound(universe.begin(), universe.end(), scan->start_key);
        for (std::uint32_t i = 0; i < scan->count && it != universe.end(); ++i, ++it) {
            out.push_back(ReadOp{*it});
        }
    }
    return out;
}

Trace expand_scans(const Trace& trace) {
    const auto u = key_universe(trace);
    return expand_scans(trace, u);
}

Trace worst_case_memoryless(std::uint32_t k, std::uint32_t repetitions, const Key& key) {
    if (k == 0) throw ValidationError("worst_case_memoryless: k must be >= 1");
    if (repetitions == 0) throw ValidationError("worst_case_memoryless: repetitions must be >= 1");
    Trace t;
    t.reserve(static_cast<std::size_t>(repetitions) * (k + 1));
    for (std::uint32_t r = 0; r < repetitions; ++r) {
        t.push_back(WriteOp{key, 1});
        for (std::uint32_t i = 0; i < k; ++i) t.push_back(ReadOp{key});
    }
    return t;
}

Trace worst_case_memorizing(std::uint32_t k_prime, std::uint32_t d, std::uint32_t repetitions,
                            const Key& key) {
    if (k_prime == 0) throw ValidationError("worst_case_memorizing: K' must be >= 1");
    if (d == 0) throw ValidationError("worst_case_memorizing: D must be >= 1");
    if (repetitions == 0) throw ValidationError("worst_case_memorizing: repetitions must be >= 1");
    const std::uint32_t reads = 2 * d + 1;
    const std::uint32_t writes = (reads + k_prime - 1) / k_prime;
    Trace t;
    for (std::uint32_t r = 0; r < repetitions; ++r) {
        for (std::uint32_t i = 0; i < reads; ++i) t.push_back(ReadOp{key});
        for (std::uint32_t i = 0; i < writes; ++i) t.push_back(WriteOp{key, 1});
    }
    return t;
}

}  // namespace adarep::decision
