#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adarep/core.hpp"
#include "adarep/partial_tree.hpp"

namespace adarep::ads {

/// Proof that one leaf sits under a root: siblings ordered leaf-to-root.
struct MembershipProof {
    Record record;
    std::vector<Digest> siblings;
    std::vector<bool> sibling_is_left;  // true when the sibling is the left child

    Words words() const { return siblings.size(); }
    bool operator==(const MembershipProof&) const = default;
};

/// Boundary evidence that a (state, key) pair is not a valid leaf.
struct NonMembershipProof {
    CanonicalKey target;
    PartialTree boundary;
};

using KeyProof = std::variant<MembershipProof, NonMembershipProof>;

/// NR records in [lo, hi] plus the pruned tree that proves nothing was left out.
struct RangeProof {
    Key lo;
    Key hi;
    std::vector<Record> results;
    PartialTree tree;

    /// Proof payload in words, excluding the result records themselves.
    Words words() const;
};

/// Proofs for moving a record to another replication group, both against the
/// same (pre-move) root.
struct RelocationProof {
    MembershipProof current;
    PartialTree position;
};

bool verify_membership(const Digest& root, const Record& record, const MembershipProof& proof);
bool verify_non_membership(const Digest& root, const CanonicalKey& target,
                           const NonMembershipProof& proof);

/// Root implied by a membership proof and a leaf payload.
Digest root_from_path(const Digest& leaf, const MembershipProof& proof);

/// Returns the verified NR records, or nullopt when the proof is incomplete,
/// tampered, or the results disagree with the revealed leaves.
std::optional<std::vector<Record>> verify_range(const Digest& root, const Key& lo, const Key& hi,
                                                const RangeProof& proof);

/// Data-owner side of an in-place value update. Throws IntegrityViolation when the
/// proof does not match `old_root`, ValidationError when the update moves the record.
Digest do_update_root(const Digest& old_root, const MembershipProof& proof, const Record& old_record,
                      const Record& new_record);

/// Data-owner side of a state transition: invalidates the old leaf and pairs the
/// new leaf with its neighbor. Both proofs must verify against `old_root`.
Digest do_relocate_root(const Digest& old_root, const MembershipProof& old_proof,
                        const Record& old_record, const PartialTree& new_position,
                        const Record& new_record);

/// Data-owner side of inserting a record whose key is not yet in the tree.
Digest do_insert_root(const Digest& old_root, const PartialTree& position, const Record& record);

/// Data-owner side of compaction: checks the full export against `old_root` and
/// returns the root of a fresh tree over the valid leaves.
Digest do_compact_root(const Digest& old_root, const PartialTree& full_export);

enum class BuildMode { Serial, Parallel };

/// Storage-provider tree. Leaves follow the canonical order left to right; state
/// transitions leave invalid markers behind and grow the tree by splitting the
/// neighbor leaf of the new position.
class AdsTree {
public:
    AdsTree() = default;

    /// Throws ValidationError unless `records` are in strict canonical order.
    static AdsTree build(std::span<const Record> records, BuildMode mode = BuildMode::Parallel);

    Digest root() const;
    bool empty() const { return root_ < 0; }
    std::size_t leaf_count() const { return leaf_count_total_; }
    std::size_t valid_count() const { return valid_.size(); }
    std::size_t invalid_count() const { return leaf_count_total_ - valid_.size(); }
    std::size_t depth() const;

    const Record* find(const Key& key, ReplState state) const;
    /// Current record for `key` in whichever group holds it.
    const Record* find_any(const Key& key) const;

    MembershipProof prove_membership(const Key& key, ReplState state) const;
    KeyProof prove_key(const Key& key, ReplState state) const;
    RangeProof prove_range(const Key& lo, const Key& hi) const;
    /// Position evidence for inserting `target` once `exclude` (if any) is invalidated.
    PartialTree prove_position(const CanonicalKey& target,
                               const std::optional<CanonicalKey>& exclude = std::nullopt) const;
    RelocationProof prove_relocation(const Key& key, ReplState from, ReplState to) const;
    PartialTree export_full() const;

    void apply_update(const Record& new_record);
    void apply_relocation(const Key& key, ReplState from, const Record& new_record);
    void apply_insert(const Record& record);
    /// Rebuilds over the valid leaves; drops every invalid marker.
    void compact();
    /// Invalid markers above half the leaves, or depth beyond twice the balanced depth.
    bool needs_compaction() const;

    /// Valid records in canonical order.
    std::vector<Record> records() const;

private:
    struct Node {
        Digest hash{};
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t parent = -1;
        std::int32_t leaf = -1;  // index into leaves_ for leaf nodes
        std::uint32_t leaves = 0;
    };
    struct Leaf {
        Record record;
        bool invalid = false;
    };

    std::int32_t new_node();
    void rehash_upward(std::int32_t node);
    std::int32_t leaf_node(const CanonicalKey& ck) const;
    std::size_t rank_of(std::int32_t node) const;
    std::int32_t leaf_at_rank(std::size_t rank) const;
    PartialTree reveal_ranks(std::size_t first, std::size_t last) const;
    std::int32_t reveal_into(PartialTree& out, std::int32_t node, std::size_t offset,
                             std::size_t first, std::size_t last) const;
    /// Neighbor bounds for `target` over valid leaves, skipping `exclude`.
    std::pair<std::optional<CanonicalKey>, std::optional<CanonicalKey>> neighbors(
        const CanonicalKey& target, const std::optional<CanonicalKey>& exclude) const;
    void insert_leaf(const Record& record);
    void reset_from(std::span<const Record> records, BuildMode mode);

    std::vector<Node> nodes_;
    std::vector<Leaf> leaves_;
    std::map<CanonicalKey, std::int32_t> valid_;  // canonical key -> leaf node
    std::int32_t root_ = -1;
    std::size_t leaf_count_total_ = 0;
};

/// Reference serial build kept for checking the parallel kernel.
inline AdsTree build_serial(std::span<const Record> records) {
    return AdsTree::build(records, BuildMode::Serial);
}

}  // namespace adarep::ads
