#pragma once

#include <cstdint>

namespace adarep {

using Gas = std::uint64_t;
using Words = std::uint64_t;

/// Per-operation Gas prices of the modeled chain. Every cost is linear in the
/// number of 32-byte words touched; transactions and hashes carry a fixed base.
struct GasSchedule {
    Gas tx_base = 21000;
    Gas tx_per_word = 2176;
    Gas insert_per_word = 20000;
    Gas update_per_word = 5000;
    Gas read_per_word = 200;
    Gas hash_base = 30;
    Gas hash_per_word = 6;

    /// Throws ValidationError unless all prices are positive and
    /// insert > update > tx-per-word > read.
    void validate() const;

    Gas tx_cost(Words words) const { return tx_base + tx_per_word * words; }
    Gas insert_cost(Words words) const { return insert_per_word * words; }
    Gas update_cost(Words words) const { return update_per_word * words; }
    Gas read_cost(Words words) const { return read_per_word * words; }
    Gas hash_cost(Words words) const { return hash_base + hash_per_word * words; }

    // Marginal per-word cost of moving data from the off-chain store into a
    // contract; the transaction base is treated as amortized.
    Gas off_chain_read_unit_cost() const { return tx_per_word; }

    bool operator==(const GasSchedule&) const = default;
};

/// A validated copy of `s`; throws on invalid schedules.
GasSchedule make_schedule(const GasSchedule& s);

/// Replication threshold: floor(update_per_word / off-chain read unit), at least 1.
std::uint32_t default_k(const GasSchedule& s);

/// Memorizing-algorithm weight. The write cost of a replica is the update cost of
/// an existing slot, so this coincides with default_k.
std::uint32_t default_k_prime(const GasSchedule& s);

/// Number of 32-byte words needed for `bytes` bytes (partial words round up).
constexpr Words words_for_bytes(std::uint64_t bytes) { return (bytes + 31) / 32; }

}  // namespace adarep
