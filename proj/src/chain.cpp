#include <algorithm>
#include <cstdio>
#include <ostream>

#include "adarep/error.hpp"
#include "adarep/sim.hpp"

namespace adarep::sim {

namespace {

constexpr Words kMaxTxWords = 999;

ads::Digest digest_from_raw(const std::string& raw) {
    if (raw.size() != 32) throw ValidationError("batch digest must be 32 bytes");
    ads::Digest d{};
    std::copy(raw.begin(), raw.end(), d.begin());
    return d;
}

}  // namespace

Gas split_tx_cost(const GasSchedule& s, Words payload) {
    const Words txs = payload == 0 ? 1 : (payload + kMaxTxWords - 1) / kMaxTxWords;
    return txs * s.tx_base + s.tx_per_word * payload;
}

decision::RecordCosts attribute_costs(const GasSchedule& s, Words w, Words p, Gas d,
                                      Gas deliver_base_share) {
    decision::RecordCosts c;
    c.off_chain_read = s.tx_per_word * (1 + w + p) + s.hash_cost(w + 1) + p * s.hash_cost(2) +
                       deliver_base_share * s.tx_base;
    c.on_chain_read = s.read_cost(w);
    c.write_nr = d;
    const Gas carry = s.tx_per_word * (1 + w);
    c.write_r_fresh = d + carry + s.insert_cost(w);
    c.write_r = d + carry + s.update_cost(w);
    c.replicate_fresh = carry + s.insert_cost(w);
    c.replicate = carry + s.update_cost(w);
    c.evict = s.tx_per_word;
    return c;
}

Gas digest_share(const Trace& trace, const SimConfig& cfg) {
    const auto writes = static_cast<Gas>(std::count_if(trace.begin(), trace.end(), is_write));
    if (writes == 0) return 0;
    const Gas per_epoch = cfg.schedule.tx_cost(1) + cfg.schedule.update_cost(1);
    return per_epoch * trace.size() / (static_cast<Gas>(cfg.ops_per_epoch) * writes);
}

decision::CostModel cost_model_for(const Trace& trace, const SimConfig& cfg) {
    const auto keys = decision::key_universe(trace).size();
    Words p = 0;
    while ((std::size_t{1} << p) < keys) ++p;
    const Gas d = digest_share(trace, cfg);
    const GasSchedule s = cfg.schedule;
    return [s, p, d](Words w) { return attribute_costs(s, w, p, d); };
}

// ---- contract ----

Chain::Chain(GasSchedule schedule, ads::Digest genesis_root, std::string owner)
    : s_(schedule), root_(genesis_root), owner_(std::move(owner)) {}

void Chain::preload_replica(const Key& k, Replica r) {
    allocated_.insert(k);
    replicas_[k] = std::move(r);
}

Gas Chain::store(const Key& k, const Record& r) {
    const bool fresh = allocated_.insert(k).second;
    replicas_[k] = Replica{r.value, r.value_words};
    return fresh ? s_.insert_cost(r.value_words) : s_.update_cost(r.value_words);
}

std::uint64_t Chain::request(const Key& key) {
    const auto id = next_request_++;
    events_.push_back({id, key});
    return id;
}

Chain::GetResult Chain::gget(const Key& key) {
    GetResult out;
    if (const auto it = replicas_.find(key); it != replicas_.end()) {
        out.hit = true;
        out.value = it->second;
        out.charge.storage = s_.read_cost(it->second.words);
        return out;
    }
    out.request_id = request(key);
    return out;
}

Chain::DeliverResult Chain::deliver(const Key& key, const ads::MembershipProof& proof, bool replicate) {
    DeliverResult out;
    const Words w = proof.record.value_words;
    out.charge.tx = split_tx_cost(s_, 1 + w + proof.words());
    out.charge.verify = s_.hash_cost(w + 1) + proof.siblings.size() * s_.hash_cost(2);
    out.accepted = proof.record.key == key && ads::verify_membership(root_, proof.record, proof);
    if (!out.accepted) return out;
    if (replicate) out.charge.storage = store(key, proof.record);
    out.records.push_back(proof.record);
    return out;
}

Chain::DeliverResult Chain::deliver_range(const Key& lo, const Key& hi, const ads::RangeProof& proof) {
    DeliverResult out;
    Words payload = 2 + proof.words();
    for (const auto& r : proof.results) payload += ads::leaf_hash_words(r);
    out.charge.tx = split_tx_cost(s_, payload);
    out.charge.verify = proof.tree.verify_gas(s_);
    auto verified = ads::verify_range(root_, lo, hi, proof);
    out.accepted = verified.has_value();
    if (out.accepted) out.records = std::move(*verified);
    return out;
}

std::optional<Charge> Chain::update(const std::string& sender, const EpochBatch& batch) {
    if (sender != owner_) return std::nullopt;
    batch.validate();
    const auto digest = digest_from_raw(batch.digest);
    Words payload = 1;
    for (const auto& r : batch.writes) payload += 1 + r.value_words;
    for (const auto& t : batch.transitions) {
        if (t.to == ReplState::NR) payload += 1;
    }
    Charge c;
    c.tx = split_tx_cost(s_, payload);
    c.storage = s_.update_cost(1);
    root_ = digest;
    for (const auto& t : batch.transitions) {
        if (t.to == ReplState::NR) replicas_.erase(t.key);
    }
    for (const auto& r : batch.writes) c.storage += store(r.key, r);
    return c;
}

std::optional<Charge> Chain::direct_write(const std::string& sender, const Record& r) {
    if (sender != owner_) return std::nullopt;
    Charge c;
    c.tx = split_tx_cost(s_, 1 + r.value_words);
    c.storage = store(r.key, r);
    return c;
}

// ---- ledger ----

Gas GasLedger::total() const {
    Gas t = 0;
    for (const auto& e : entries) t += e.total();
    return t;
}

std::uint64_t GasLedger::ops() const {
    std::uint64_t n = 0;
    for (const auto& e : entries) n += e.ops;
    return n;
}

double GasLedger::per_op() const {
    const auto n = ops();
    return n == 0 ? 0.0 : static_cast<double>(total()) / static_cast<double>(n);
}

void GasLedger::write_csv(std::ostream& out) const {
    out << "epoch,ops,tx_gas,storage_gas,verify_gas,total_gas,per_op_gas\n";
    char buf[64];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof buf, "%.4f", e.per_op());
        out << e.epoch << ',' << e.ops << ',' << e.tx_gas << ',' << e.storage_gas << ',' << e.verify_gas
            << ',' << e.total() << ',' << buf << '\n';
    }
}

Gas recount(const SimResult& result) {
    Gas t = 0;
    for (const auto& tx : result.txs) t += tx.charge.tx + tx.charge.storage + tx.charge.verify;
    return t;
}

}  // namespace adarep::sim
