#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adarep/core.hpp"

namespace adarep::ads {

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& d);
Digest digest_from_hex(const std::string& hex);

// Domain-separated SHA-256 encodings.
Digest leaf_digest(const Record& r);
// Marker left behind by a relocated record; commits to the key and state only.
Digest invalid_digest(const Record& r);
Digest internal_digest(const Digest& left, const Digest& right);
Digest empty_root();

/// Words hashed for one leaf: the key word plus the payload.
inline Words leaf_hash_words(const Record& r) { return r.value_words + 1; }

struct ProofLeaf {
    Record record;
    bool invalid = false;
    bool operator==(const ProofLeaf&) const = default;
};

/// Proof words for a revealed leaf; a marker reveals only its key word.
inline Words proof_leaf_words(const ProofLeaf& l) { return l.invalid ? 1 : leaf_hash_words(l.record); }

enum class Anchor { Pred, Succ, Fresh };

/// Where a new leaf is attached given its valid neighbors: same-group neighbor
/// first (predecessor before successor), then any neighbor, else a fresh tree.
Anchor choose_anchor(const std::optional<CanonicalKey>& pred, const std::optional<CanonicalKey>& succ,
                     const CanonicalKey& target);

/// Pruned Merkle tree: subtrees are either revealed down to their leaves or
/// collapsed into an opaque digest. Used for range, position and export proofs,
/// and by the data owner to replay edits without holding the dataset.
class PartialTree {
public:
    enum class Kind : std::uint8_t { Opaque, Leaf, Internal };
    struct Node {
        Kind kind = Kind::Opaque;
        Digest digest{};
        ProofLeaf leaf;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::vector<Node> nodes;
    std::int32_t root = -1;

    bool empty() const { return root < 0; }

    std::int32_t add_opaque(const Digest& d);
    std::int32_t add_leaf(const Record& r, bool invalid = false);
    std::int32_t add_internal(std::int32_t left, std::int32_t right);

    Digest root_digest() const;
    Digest digest_of(std::int32_t node) const;

    /// Opaque and leaf nodes in left-to-right order.
    std::vector<std::int32_t> frontier() const;

    /// Payload words: one per opaque digest, key plus value per revealed leaf.
    Words words() const;
    /// Gas to recompute the root on chain.
    Gas verify_gas(const GasSchedule& s) const;

    bool fully_revealed() const;
    std::int32_t find_valid(const CanonicalKey& ck) const;

    struct Bounds {
        std::int32_t pred = -1;  // frontier positions, -1 / size() when absent
        std::int32_t succ = -1;
        std::vector<std::int32_t> frontier;
    };
    /// Checks that revealed valid leaves ascend and nothing is hidden between the
    /// last valid leaf below `lo` and the first valid leaf above `hi`.
    std::optional<Bounds> bounds(const CanonicalKey& lo, const CanonicalKey& hi) const;

    /// Replaces a leaf node by Internal(old, added) or Internal(added, old).
    void split_leaf(std::int32_t node, const ProofLeaf& added, bool added_on_right);

    /// Union of two views of the same tree. Throws IntegrityViolation when they
    /// disagree on any revealed part.
    static PartialTree merge(const PartialTree& a, const PartialTree& b);

private:
    std::int32_t copy_from(const PartialTree& src, std::int32_t node);
    std::int32_t merge_into(const PartialTree& a, std::int32_t na, const PartialTree& b,
                            std::int32_t nb);
};

}  // namespace adarep::ads
