#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adarep/ads.hpp"
#include "adarep/core.hpp"
#include "adarep/decision.hpp"
#include "adarep/gas_model.hpp"

namespace adarep::sim {

/// Storage-provider behaviour on the read path; CorruptWriteProof targets the
/// data owner's write path instead.
enum class Adversary { Honest, Forge, Omit, Replay, StaleServe, CorruptWriteProof };

std::string to_string(Adversary a);
Adversary adversary_from_string(const std::string& s);

struct SimConfig {
    double epoch_len = 60;
    double block_time = 15;
    std::uint32_t finality_blocks = 6;
    double propagation_delay = 1;
    std::uint32_t ops_per_epoch = 32;  // arrival rate: op i arrives at i * E / ops_per_epoch
    GasSchedule schedule{};
    decision::PolicySpec policy = decision::MemorylessParams{2};
    std::uint64_t rng_seed = 1;
    bool digest_every_epoch = false;
    Adversary adversary = Adversary::Honest;

    void validate() const;
    /// Submission to finalization.
    double finality_delay() const { return propagation_delay + block_time * finality_blocks; }
    /// Staleness bound for sequentially ordered reads.
    double freshness_bound() const { return epoch_len + finality_delay(); }
};

/// Per-record event costs shared by the simulator's decision model and the
/// offline oracle. `p` is the membership proof length in digests, `d` the
/// per-write share of an epoch digest transaction.
decision::RecordCosts attribute_costs(const GasSchedule& s, Words w, Words p, Gas d,
                                      Gas deliver_base_share = 0);

/// Digest share for a trace: one digest update per epoch spread over its writes.
Gas digest_share(const Trace& trace, const SimConfig& cfg);
decision::CostModel cost_model_for(const Trace& trace, const SimConfig& cfg);

/// Transaction gas with large payloads split across transactions of < 1000 words.
Gas split_tx_cost(const GasSchedule& s, Words payload);

struct Charge {
    Gas tx = 0;
    Gas storage = 0;
    Gas verify = 0;
    Gas total() const { return tx + storage + verify; }
};

struct Replica {
    std::string value;
    Words words = 1;
};

struct RequestEvent {
    std::uint64_t id = 0;
    Key key;
};

/// On-chain storage-manager contract.
class Chain {
public:
    Chain(GasSchedule schedule, ads::Digest genesis_root, std::string owner = "DO");

    const ads::Digest& root() const { return root_; }
    const std::map<Key, Replica>& replicas() const { return replicas_; }
    bool slot_allocated(const Key& k) const { return allocated_.count(k) > 0; }
    const std::vector<RequestEvent>& event_log() const { return events_; }

    /// Genesis-time replica (no gas).
    void preload_replica(const Key& k, Replica r);

    struct GetResult {
        bool hit = false;
        std::optional<Replica> value;
        std::uint64_t request_id = 0;
        Charge charge;
    };
    /// Replica hit returns synchronously; a miss appends a request event.
    GetResult gget(const Key& key);
    /// Appends a request event without consulting replicas (range reads).
    std::uint64_t request(const Key& key);

    struct DeliverResult {
        bool accepted = false;
        std::vector<Record> records;
        Charge charge;
    };
    DeliverResult deliver(const Key& key, const ads::MembershipProof& proof, bool replicate);
    DeliverResult deliver_range(const Key& lo, const Key& hi, const ads::RangeProof& proof);

    /// Returns nullopt (and changes nothing) unless `sender` is the owner.
    std::optional<Charge> update(const std::string& sender, const EpochBatch& batch);
    /// Owner-only direct write, no digest (always-replicate baseline).
    std::optional<Charge> direct_write(const std::string& sender, const Record& r);

private:
    Gas store(const Key& k, const Record& r);

    GasSchedule s_;
    ads::Digest root_;
    std::string owner_;
    std::map<Key, Replica> replicas_;
    std::set<Key> allocated_;
    std::vector<RequestEvent> events_;
    std::uint64_t next_request_ = 1;
};

struct LedgerEntry {
    std::uint64_t epoch = 0;
    std::uint64_t ops = 0;
    Gas tx_gas = 0;
    Gas storage_gas = 0;
    Gas verify_gas = 0;

    Gas total() const { return tx_gas + storage_gas + verify_gas; }
    double per_op() const { return ops == 0 ? 0.0 : static_cast<double>(total()) / static_cast<double>(ops); }
};

struct GasLedger {
    std::vector<LedgerEntry> entries;

    Gas total() const;
    std::uint64_t ops() const;
    double per_op() const;
    /// `epoch,ops,tx_gas,storage_gas,verify_gas,total_gas,per_op_gas`
    void write_csv(std::ostream& out) const;
};

enum class TxKind { Get, Deliver, Update, DirectWrite };

struct TxRecord {
    std::uint64_t seq = 0;
    TxKind kind = TxKind::Get;
    std::uint64_t epoch = 0;
    double submit = 0;
    double finalize = 0;
    bool accepted = true;
    Charge charge;
};

struct FreshnessEntry {
    Key key;
    double get_time = 0;    // gGet issued
    double serve_time = 0;  // value reached the callback
    double put_time = 0;    // gPut that produced the served value
    double delay = 0;       // serve_time - put_time
    std::uint64_t version = 0;
};

struct PutEntry {
    Key key;
    double time = 0;
    std::uint64_t version = 0;
};

struct SimResult {
    std::string policy;
    GasLedger ledger;
    decision::DecisionDelta decisions;
    std::vector<FreshnessEntry> freshness_log;
    std::vector<PutEntry> put_log;
    std::vector<TxRecord> txs;
    std::uint64_t rejected_delivers = 0;
    std::uint64_t stale_served = 0;    // delivers carrying an outdated value
    std::uint64_t stale_accepted = 0;  // ... that the contract accepted
    std::uint64_t tampered_served = 0;    // forged or incomplete answers
    std::uint64_t tampered_accepted = 0;
    std::uint64_t compactions = 0;
    std::uint64_t unanswered_reads = 0;

    double per_op() const { return ledger.per_op(); }
    Gas total_gas() const { return ledger.total(); }
};

/// Runs the workload end to end. Throws IntegrityViolation when the storage
/// provider corrupts the write path, SimulationError on a broken invariant.
SimResult run(const Trace& workload, const SimConfig& config);

enum class Baseline { BL1, BL2 };
SimResult run_baseline(const Trace& workload, const SimConfig& config, Baseline which);

/// Every gGet issued more than E + Pt + B*F after a gPut on the same key saw that
/// gPut's value or a later one. Reads never answered are ignored.
bool check_freshness(const SimResult& result, const SimConfig& config);

/// Independent total over the itemized transaction log.
Gas recount(const SimResult& result);

}  // namespace adarep::sim
