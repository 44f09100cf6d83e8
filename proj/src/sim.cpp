#include "adarep/sim.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <set>
#include <tuple>

#include "adarep/error.hpp"

namespace adarep::sim {

std::string to_string(Adversary a) {
    switch (a) {
        case Adversary::Honest: return "honest";
        case Adversary::Forge: return "forge";
        case Adversary::Omit: return "omit";
        case Adversary::Replay: return "replay";
        case Adversary::StaleServe: return "stale";
        case Adversary::CorruptWriteProof: return "corrupt-write";
    }
    return "honest";
}

Adversary adversary_from_string(const std::string& s) {
    if (s == "honest") return Adversary::Honest;
    if (s == "forge") return Adversary::Forge;
    if (s == "omit") return Adversary::Omit;
    if (s == "replay") return Adversary::Replay;
    if (s == "stale") return Adversary::StaleServe;
    if (s == "corrupt-write") return Adversary::CorruptWriteProof;
    throw ValidationError("unknown adversary '" + s + "'");
}

void SimConfig::validate() const {
    if (!(epoch_len > 0) || !(block_time > 0) || !(propagation_delay > 0)) {
        throw ValidationError("sim config: epoch_len, block_time and propagation_delay must be > 0");
    }
    if (finality_blocks < 1) throw ValidationError("sim config: finality_blocks must be >= 1");
    if (ops_per_epoch < 1) throw ValidationError("sim config: ops_per_epoch must be >= 1");
    schedule.validate();
}

namespace {

std::uint64_t decode_version(const std::string& value) {
    std::uint64_t v = 0;
    for (std::size_t i = kWordBytes - 8; i < kWordBytes && i < value.size(); ++i) {
        v = v << 8 | static_cast<std::uint8_t>(value[i]);
    }
    return v;
}

std::string raw_digest(const ads::Digest& d) { return std::string(d.begin(), d.end()); }

enum EventClass : int { kFinalize = 0, kEpochEnd = 1, kWatchdog = 2, kArrival = 3 };

struct Event {
    double time;
    int cls;
    std::uint64_t seq;
    std::size_t index;
    bool operator>(const Event& o) const {
        return std::tie(time, cls, seq) > std::tie(o.time, o.cls, o.seq);
    }
};

struct ReadRequest {
    std::size_t op = 0;
    std::uint64_t epoch = 0;
    double get_time = 0;
    std::vector<Key> keys;  // one key, or the resolved scan range
    bool range = false;
};

struct PendingTx {
    TxKind kind = TxKind::Update;
    std::uint64_t epoch = 0;
    double submit = 0;
    // update
    EpochBatch batch;
    std::set<Key> r_set;
    // deliver
    std::size_t request = 0;
    ads::MembershipProof point;
    ads::RangeProof range;
    bool as_range = false;
    bool stale = false;
    bool tampered = false;
    // direct write
    Record record;
};

struct PendingWrite {
    std::uint64_t version = 0;
    Words words = 1;
};

class World {
public:
    World(const Trace& trace, const SimConfig& cfg)
        : trace_(trace), cfg_(cfg), s_(cfg.schedule), chain_(cfg.schedule, ads::empty_root()),
          rng_(cfg.rng_seed) {}

    SimResult run();

private:
    bool always_replicate() const { return std::holds_alternative<decision::AlwaysReplicate>(cfg_.policy); }
    bool offline() const { return std::holds_alternative<decision::OfflineOptimal>(cfg_.policy); }
    double latency() const { return cfg_.finality_delay(); }

    void push(double t, int cls, std::size_t index) { queue_.push(Event{t, cls, next_seq_++, index}); }
    std::uint64_t epoch_of(std::size_t op) const { return op / cfg_.ops_per_epoch; }
    double arrival(std::size_t op) const {
        return static_cast<double>(op) * cfg_.epoch_len / static_cast<double>(cfg_.ops_per_epoch);
    }

    void genesis();
    void on_arrival(std::size_t op, double t);
    void on_watchdog(std::size_t req, double t);
    void on_epoch_end(std::uint64_t e, double t);
    void on_finalize(std::size_t tx, double t);

    void charge(std::uint64_t epoch, TxKind kind, double submit, double fin, bool ok, const Charge& c);
    void serve(const Key& key, std::uint64_t version, double get_time, double serve_time);
    std::vector<Key> scan_keys(const ScanOp& s) const;
    std::uint64_t sp_version(const Key& k) const;
    void tamper(ads::MembershipProof& p);
    std::size_t submit(PendingTx tx, double t);

    const Trace& trace_;
    SimConfig cfg_;
    GasSchedule s_;
    Chain chain_;
    std::mt19937_64 rng_;

    std::vector<Key> universe_;
    Trace expanded_;
    std::vector<std::vector<std::size_t>> expanded_by_epoch_;
    std::vector<ReplState> offline_states_;

    ads::AdsTree sp_;
    ads::AdsTree sp_prev_;
    ads::AdsTree sp_genesis_;
    ads::Digest do_root_{};
    std::map<Key, ReplState> committed_;
    std::map<Key, PendingWrite> pending_;
    std::map<Key, std::uint64_t> latest_version_;
    std::map<std::pair<Key, std::uint64_t>, double> put_time_;
    std::optional<decision::OnlinePolicy> policy_;

    std::vector<ReadRequest> requests_;
    std::vector<PendingTx> txs_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t tx_seq_ = 0;
    SimResult out_;
};

std::vector<Key> World::scan_keys(const ScanOp& s) const {
    std::vector<Key> keys;
    auto it = std::lower_bound(universe_.begin(), universe_.end(), s.start_key);
    for (std::uint32_t i = 0; i < s.count && it != universe_.end(); ++i, ++it) keys.push_back(*it);
    return keys;
}

void World::charge(std::uint64_t epoch, TxKind kind, double submit, double fin, bool ok, const Charge& c) {
    auto& e = out_.ledger.entries.at(epoch);
    e.tx_gas += c.tx;
    e.storage_gas += c.storage;
    e.verify_gas += c.verify;
    out_.txs.push_back(TxRecord{tx_seq_++, kind, epoch, submit, fin, ok, c});
}

void World::serve(const Key& key, std::uint64_t version, double get_time, double serve_time) {
    const auto it = put_time_.find({key, version});
    const double put = it == put_time_.end() ? 0.0 : it->second;
    out_.freshness_log.push_back(FreshnessEntry{key, get_time, serve_time, put, serve_time - put, version});
}

void World::tamper(ads::MembershipProof& p) {
    if (!p.siblings.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, p.siblings.size() - 1);
        p.siblings[pick(rng_)][31] ^= 0x01;
    } else {
        p.record.value[0] ^= 0x01;
    }
}

std::size_t World::submit(PendingTx tx, double t) {
    tx.submit = t;
    txs_.push_back(std::move(tx));
    const auto id = txs_.size() - 1;
    push(t + latency(), kFinalize, id);
    return id;
}

void World::genesis() {
    universe_ = decision::key_universe(trace_);
    std::map<Key, Words> words;
    for (const auto& op : trace_) {
        if (const auto* w = std::get_if<WriteOp>(&op)) words.emplace(w->key, w->words);
    }
    std::vector<Record> records;
    records.reserve(universe_.size());
    for (const auto& k : universe_) {
        const auto it = words.find(k);
        records.push_back(Record::numbered(k, ReplState::NR, 0, it == words.end() ? 1 : it->second));
        latest_version_[k] = 0;
        committed_[k] = ReplState::NR;
    }
    if (always_replicate()) {
        chain_ = Chain(s_, ads::empty_root());
        for (const auto& r : records) chain_.preload_replica(r.key, Replica{r.value, r.value_words});
        return;
    }
    sp_ = ads::AdsTree::build(records);
    if (cfg_.adversary == Adversary::Replay) sp_genesis_ = sp_;
    do_root_ = sp_.root();
    chain_ = Chain(s_, do_root_);
}

void World::on_arrival(std::size_t i, double t) {
    const auto& op = trace_[i];
    const auto e = epoch_of(i);
    out_.ledger.entries.at(e).ops += 1;
    if (const auto* w = std::get_if<WriteOp>(&op)) {
        const auto v = ++latest_version_[w->key];
        put_time_[{w->key, v}] = t;
        out_.put_log.push_back(PutEntry{w->key, t, v});
        if (always_replicate()) {
            PendingTx tx;
            tx.kind = TxKind::DirectWrite;
            tx.epoch = e;
            tx.record = Record::numbered(w->key, ReplState::R, v, w->words);
            submit(std::move(tx), t);
        } else {
            pending_[w->key] = PendingWrite{v, w->words};
        }
        return;
    }
    std::vector<Key> keys;
    bool range = false;
    if (const auto* r = std::get_if<ReadOp>(&op)) {
        keys.push_back(r->key);
    } else {
        keys = scan_keys(std::get<ScanOp>(op));
        range = true;
        if (keys.empty()) return;
    }
    const bool all_hit = std::all_of(keys.begin(), keys.end(),
                                     [&](const Key& k) { return chain_.replicas().count(k) > 0; });
    if (all_hit) {
        for (const auto& k : keys) {
            const auto res = chain_.gget(k);
            charge(e, TxKind::Get, t, t, true, res.charge);
            serve(k, decode_version(res.value->value), t, t);
        }
        return;
    }
    if (range) {
        chain_.request(keys.front());
    } else {
        chain_.gget(keys.front());
    }
    requests_.push_back(ReadRequest{i, e, t, std::move(keys), range});
    push(t + cfg_.propagation_delay, kWatchdog, requests_.size() - 1);
}

std::uint64_t World::sp_version(const Key& k) const {
    const auto* r = sp_.find_any(k);
    return r ? decode_version(r->value) : 0;
}

void World::on_watchdog(std::size_t req, double t) {
    const auto& rq = requests_[req];
    const ads::AdsTree* source = &sp_;
    if (cfg_.adversary == Adversary::Replay) source = &sp_genesis_;
    if (cfg_.adversary == Adversary::StaleServe) source = &sp_prev_;

    PendingTx tx;
    tx.kind = TxKind::Deliver;
    tx.epoch = rq.epoch;
    tx.request = req;
    const bool omit = cfg_.adversary == Adversary::Omit;
    if (rq.range || omit) {
        // An omitting provider answers point reads with a range that drops the record.
        tx.as_range = true;
        tx.range = source->prove_range(rq.keys.front(), rq.keys.back());
        if (omit && !tx.range.results.empty()) {
            tx.range.results.erase(tx.range.results.begin());
            tx.tampered = true;
        }
        if (cfg_.adversary == Adversary::Forge && !tx.range.results.empty()) {
            tx.range.results.front().value[kWordBytes - 1] ^= 0x01;
            tx.tampered = true;
        }
        for (const auto& r : tx.range.results) {
            if (decode_version(r.value) < sp_version(r.key)) tx.stale = true;
        }
    } else {
        const auto& key = rq.keys.front();
        const ads::AdsTree& tree = source->find_any(key) ? *source : sp_;
        tx.point = tree.prove_membership(key, tree.find_any(key)->state);
        if (cfg_.adversary == Adversary::Forge) {
            tx.point.record.value[kWordBytes - 1] ^= 0x01;
            tx.tampered = true;
        }
        if (decode_version(tx.point.record.value) < sp_version(key)) tx.stale = true;
    }
    if (tx.stale) ++out_.stale_served;
    if (tx.tampered) ++out_.tampered_served;
    submit(std::move(tx), t);
}

void World::on_epoch_end(std::uint64_t e, double t) {
    if (always_replicate()) return;

    // w0: the policy replays the epoch's federated trace.
    std::map<Key, ReplState> target;
    for (const auto idx : expanded_by_epoch_.at(e)) {
        const auto& op = expanded_[idx];
        const auto& key = op_key(op);
        if (policy_) {
            policy_->observe(op);
            target[key] = policy_->state_of(key);
        } else {
            target[key] = offline_states_[idx];
        }
    }

    std::set<Key> touched;
    for (const auto& [k, _] : pending_) touched.insert(k);
    for (const auto& [k, s] : target) {
        if (s != committed_.at(k)) touched.insert(k);
    }
    if (touched.empty() && !cfg_.digest_every_epoch) return;

    if (cfg_.adversary == Adversary::StaleServe) sp_prev_ = sp_;
    const auto root_before = do_root_;
    EpochBatch batch;
    batch.epoch_index = e;

    // w1: proof-driven root recomputation against the provider's tree.
    for (const auto& key : touched) {
        const auto from = committed_.at(key);
        const auto it = target.find(key);
        const auto to = it == target.end() ? from : it->second;
        const Record* cur = sp_.find(key, from);
        if (!cur) throw SimulationError("provider lost record '" + key + "'");
        const auto pw = pending_.find(key);
        const bool dirty = pw != pending_.end();
        Record next = dirty ? Record::numbered(key, to, pw->second.version, pw->second.words)
                            : Record{key, cur->value_words, cur->value, to};
        const bool corrupt = cfg_.adversary == Adversary::CorruptWriteProof;
        if (from == to) {
            auto proof = sp_.prove_membership(key, from);
            if (corrupt) tamper(proof);
            if (!(canonical_key(proof.record) == CanonicalKey{from, key})) {
                throw IntegrityViolation("provider proved the wrong record for '" + key + "'");
            }
            do_root_ = ads::do_update_root(do_root_, proof, proof.record, next);
            sp_.apply_update(next);
        } else {
            auto proof = sp_.prove_relocation(key, from, to);
            if (corrupt) tamper(proof.current);
            if (!(canonical_key(proof.current.record) == CanonicalKey{from, key})) {
                throw IntegrityViolation("provider proved the wrong record for '" + key + "'");
            }
            do_root_ = ads::do_relocate_root(do_root_, proof.current, proof.current.record, proof.position, next);
            sp_.apply_relocation(key, from, next);
            batch.transitions.push_back(Transition{key, to});
            out_.decisions.push_back(decision::DeltaEntry{e, key, from, to});
        }
        if (do_root_ != sp_.root()) throw SimulationError("owner and provider roots diverged at '" + key + "'");
        if (to == ReplState::R && (dirty || from != to)) batch.writes.push_back(next);
        committed_[key] = to;
    }
    pending_.clear();

    if (sp_.needs_compaction()) {
        do_root_ = ads::do_compact_root(do_root_, sp_.export_full());
        sp_.compact();
        if (do_root_ != sp_.root()) throw SimulationError("owner and provider roots diverged after compaction");
        ++out_.compactions;
    }

    if (do_root_ == root_before && batch.empty() && !cfg_.digest_every_epoch) return;

    // w2: digest, replicated writes and transitions in one update call.
    batch.digest = raw_digest(do_root_);
    PendingTx tx;
    tx.kind = TxKind::Update;
    tx.epoch = e;
    tx.batch = std::move(batch);
    for (const auto& [k, s] : committed_) {
        if (s == ReplState::R) tx.r_set.insert(k);
    }
    submit(std::move(tx), t);
}

void World::on_finalize(std::size_t id, double t) {
    auto& tx = txs_[id];
    switch (tx.kind) {
        case TxKind::Update: {
            const auto c = chain_.update("DO", tx.batch);
            if (!c) throw SimulationError("owner update rejected");
            charge(tx.epoch, TxKind::Update, tx.submit, t, true, *c);
            std::set<Key> replicated;
            for (const auto& [k, _] : chain_.replicas()) replicated.insert(k);
            if (replicated != tx.r_set) {
                throw SimulationError("replica set differs from committed R set after epoch " +
                                      std::to_string(tx.epoch));
            }
            break;
        }
        case TxKind::DirectWrite: {
            const auto c = chain_.direct_write("DO", tx.record);
            if (!c) throw SimulationError("owner write rejected");
            charge(tx.epoch, TxKind::DirectWrite, tx.submit, t, true, *c);
            break;
        }
        case TxKind::Deliver: {
            const auto& rq = requests_[tx.request];
            Chain::DeliverResult res;
            if (tx.as_range) {
                res = chain_.deliver_range(rq.keys.front(), rq.keys.back(), tx.range);
            } else {
                const auto& key = rq.keys.front();
                const bool replicate = tx.point.record.state == ReplState::R && !chain_.replicas().count(key);
                res = chain_.deliver(key, tx.point, replicate);
            }
            charge(tx.epoch, TxKind::Deliver, tx.submit, t, res.accepted, res.charge);
            if (!res.accepted) {
                ++out_.rejected_delivers;
                out_.unanswered_reads += rq.keys.size();
                break;
            }
            if (tx.stale) ++out_.stale_accepted;
            if (tx.tampered) ++out_.tampered_accepted;
            std::set<Key> answered;
            for (const auto& r : res.records) {
                serve(r.key, decode_version(r.value), rq.get_time, t);
                answered.insert(r.key);
            }
            // Replicated members of a range are read from the contract's buffer.
            for (const auto& k : rq.keys) {
                if (answered.count(k)) continue;
                const auto g = chain_.replicas().find(k);
                if (g == chain_.replicas().end()) {
                    ++out_.unanswered_reads;
                    continue;
                }
                Charge c;
                c.storage = s_.read_cost(g->second.words);
                charge(tx.epoch, TxKind::Get, t, t, true, c);
                serve(k, decode_version(g->second.value), rq.get_time, t);
            }
            break;
        }
        case TxKind::Get:
            break;
    }
}

SimResult World::run() {
    cfg_.validate();
    out_.policy = decision::policy_kind(cfg_.policy);
    if (trace_.empty()) return out_;

    genesis();
    const auto epochs = (trace_.size() + cfg_.ops_per_epoch - 1) / cfg_.ops_per_epoch;
    out_.ledger.entries.resize(epochs);
    for (std::size_t e = 0; e < epochs; ++e) out_.ledger.entries[e].epoch = e;

    expanded_by_epoch_.assign(epochs, {});
    for (std::size_t i = 0; i < trace_.size(); ++i) {
        const auto e = epoch_of(i);
        const Trace one{trace_[i]};
        for (auto& op : decision::expand_scans(one, universe_)) {
            expanded_.push_back(std::move(op));
            expanded_by_epoch_[e].push_back(expanded_.size() - 1);
        }
    }
    if (offline()) {
        offline_states_ = decision::offline_optimal(trace_, cost_model_for(trace_, cfg_)).states;
        if (offline_states_.size() != expanded_.size()) throw SimulationError("offline plan length mismatch");
    } else if (!always_replicate()) {
        policy_.emplace(cfg_.policy);
    }

    for (std::size_t i = 0; i < trace_.size(); ++i) push(arrival(i), kArrival, i);
    for (std::size_t e = 0; e < epochs; ++e) {
        push(static_cast<double>(e + 1) * cfg_.epoch_len, kEpochEnd, e);
    }
    while (!queue_.empty()) {
        const auto ev = queue_.top();
        queue_.pop();
        switch (ev.cls) {
            case kArrival: on_arrival(ev.index, ev.time); break;
            case kWatchdog: on_watchdog(ev.index, ev.time); break;
            case kEpochEnd: on_epoch_end(ev.index, ev.time); break;
            case kFinalize: on_finalize(ev.index, ev.time); break;
            default: break;
        }
    }
    return std::move(out_);
}

}  // namespace

SimResult run(const Trace& workload, const SimConfig& config) {
    World w(workload, config);
    return w.run();
}

SimResult run_baseline(const Trace& workload, const SimConfig& config, Baseline which) {
    SimConfig c = config;
    if (which == Baseline::BL1) {
        c.policy = decision::NeverReplicate{};
    } else {
        c.policy = decision::AlwaysReplicate{};
    }
    return run(workload, c);
}

bool check_freshness(const SimResult& result, const SimConfig& config) {
    const double bound = config.freshness_bound();
    std::map<Key, std::vector<std::pair<double, std::uint64_t>>> puts;
    for (const auto& p : result.put_log) puts[p.key].emplace_back(p.time, p.version);
    for (const auto& f : result.freshness_log) {
        if (f.delay < 0) return false;
        const auto it = puts.find(f.key);
        if (it == puts.end()) continue;
        std::uint64_t required = 0;
        for (const auto& [time, version] : it->second) {
            if (f.get_time > time + bound) required = std::max(required, version);
        }
        if (f.version < required) return false;
    }
    return true;
}

}  // namespace adarep::sim
