#include "adarep/ads.hpp"

#include <algorithm>

#include "adarep/error.hpp"

namespace adarep::ads {

namespace {

PartialTree path_tree(const MembershipProof& proof) {
    PartialTree t;
    auto cur = t.add_leaf(proof.record);
    for (std::size_t i = 0; i < proof.siblings.size(); ++i) {
        const auto s = t.add_opaque(proof.siblings[i]);
        cur = proof.sibling_is_left[i] ? t.add_internal(s, cur) : t.add_internal(cur, s);
    }
    t.root = cur;
    return t;
}

// Attaches `record` to a verified partial view and returns the new root.
Digest insert_into(PartialTree& view, const Record& record) {
    const auto target = canonical_key(record);
    const auto b = view.bounds(target, target);
    if (!b) throw IntegrityViolation("position proof does not cover the insertion point");
    const auto size = static_cast<std::int32_t>(b->frontier.size());
    auto node_at = [&](std::int32_t i) -> const PartialTree::Node& {
        return view.nodes[static_cast<std::size_t>(b->frontier[static_cast<std::size_t>(i)])];
    };
    for (std::int32_t i = b->pred + 1; i < b->succ; ++i) {
        const auto& n = node_at(i);
        if (n.kind == PartialTree::Kind::Leaf && !n.leaf.invalid) {
            throw IntegrityViolation("record '" + record.key + "' already present in that group");
        }
    }
    std::optional<CanonicalKey> pred, succ;
    if (b->pred >= 0) pred = canonical_key(node_at(b->pred).leaf.record);
    if (b->succ < size) succ = canonical_key(node_at(b->succ).leaf.record);
    switch (choose_anchor(pred, succ, target)) {
        case Anchor::Fresh:
            view = PartialTree{};
            view.root = view.add_leaf(record);
            break;
        case Anchor::Pred:
            view.split_leaf(b->frontier[static_cast<std::size_t>(b->pred)], ProofLeaf{record, false}, true);
            break;
        case Anchor::Succ:
            view.split_leaf(b->frontier[static_cast<std::size_t>(b->succ)], ProofLeaf{record, false}, false);
            break;
    }
    return view.root_digest();
}

}  // namespace

Words RangeProof::words() const {
    Words w = tree.words();
    for (const auto& r : results) w -= leaf_hash_words(r);
    return w;
}

Digest root_from_path(const Digest& leaf, const MembershipProof& proof) {
    if (proof.siblings.size() != proof.sibling_is_left.size()) {
        throw IntegrityViolation("membership proof: sibling and position counts differ");
    }
    Digest cur = leaf;
    for (std::size_t i = 0; i < proof.siblings.size(); ++i) {
        cur = proof.sibling_is_left[i] ? internal_digest(proof.siblings[i], cur)
                                       : internal_digest(cur, proof.siblings[i]);
    }
    return cur;
}

bool verify_membership(const Digest& root, const Record& record, const MembershipProof& proof) {
    if (!(record == proof.record)) return false;
    if (proof.siblings.size() != proof.sibling_is_left.size()) return false;
    if (record.value.size() != record.value_words * kWordBytes) return false;
    return root_from_path(leaf_digest(record), proof) == root;
}

bool verify_non_membership(const Digest& root, const CanonicalKey& target,
                           const NonMembershipProof& proof) {
    if (!(proof.target == target)) return false;
    try {
        if (proof.boundary.root_digest() != root) return false;
        const auto b = proof.boundary.bounds(target, target);
        if (!b) return false;
        for (auto i = b->pred + 1; i < b->succ; ++i) {
            const auto& n = proof.boundary.nodes[static_cast<std::size_t>(b->frontier[static_cast<std::size_t>(i)])];
            if (n.kind == PartialTree::Kind::Leaf && !n.leaf.invalid) return false;
        }
    } catch (const IntegrityViolation&) {
        return false;
    }
    return true;
}

std::optional<std::vector<Record>> verify_range(const Digest& root, const Key& lo, const Key& hi,
                                                const RangeProof& proof) {
    if (hi < lo || proof.lo != lo || proof.hi != hi) return std::nullopt;
    try {
        if (proof.tree.root_digest() != root) return std::nullopt;
        const auto b = proof.tree.bounds({ReplState::NR, lo}, {ReplState::NR, hi});
        if (!b) return std::nullopt;
        std::vector<Record> found;
        for (auto i = b->pred + 1; i < b->succ; ++i) {
            const auto& n = proof.tree.nodes[static_cast<std::size_t>(b->frontier[static_cast<std::size_t>(i)])];
            if (n.kind == PartialTree::Kind::Leaf && !n.leaf.invalid) found.push_back(n.leaf.record);
        }
        if (found != proof.results) return std::nullopt;
        return found;
    } catch (const IntegrityViolation&) {
        return std::nullopt;
    }
}

Digest do_update_root(const Digest& old_root, const MembershipProof& proof, const Record& old_record,
                      const Record& new_record) {
    if (!(canonical_key(old_record) == canonical_key(new_record))) {
        throw ValidationError("update must keep key and state; use a relocation instead");
    }
    new_record.validate();
    if (!verify_membership(old_root, old_record, proof)) {
        throw IntegrityViolation("update proof for '" + old_record.key + "' does not match the digest");
    }
    return root_from_path(leaf_digest(new_record), proof);
}

Digest do_relocate_root(const Digest& old_root, const MembershipProof& old_proof,
                        const Record& old_record, const PartialTree& new_position,
                        const Record& new_record) {
    if (old_record.key != new_record.key || old_record.state == new_record.state) {
        throw ValidationError("relocation must keep the key and change the state");
    }
    new_record.validate();
    if (!verify_membership(old_root, old_record, old_proof)) {
        throw IntegrityViolation("relocation proof for '" + old_record.key + "' does not match the digest");
    }
    if (new_position.root_digest() != old_root) {
        throw IntegrityViolation("position proof for '" + new_record.key + "' does not match the digest");
    }
    auto view = PartialTree::merge(path_tree(old_proof), new_position);
    const auto old_node = view.find_valid(canonical_key(old_record));
    if (old_node < 0) throw IntegrityViolation("relocated leaf missing from merged view");
    view.nodes[static_cast<std::size_t>(old_node)].leaf.invalid = true;
    return insert_into(view, new_record);
}

Digest do_insert_root(const Digest& old_root, const PartialTree& position, const Record& record) {
    record.validate();
    if (position.root_digest() != old_root) {
        throw IntegrityViolation("position proof for '" + record.key + "' does not match the digest");
    }
    PartialTree view = position;
    return insert_into(view, record);
}

Digest do_compact_root(const Digest& old_root, const PartialTree& full_export) {
    if (full_export.root_digest() != old_root) throw IntegrityViolation("export does not match the digest");
    if (!full_export.fully_revealed()) throw IntegrityViolation("export hides part of the tree");
    std::vector<Record> valid;
    for (auto id : full_export.frontier()) {
        const auto& n = full_export.nodes[static_cast<std::size_t>(id)];
        if (!n.leaf.invalid) valid.push_back(n.leaf.record);
    }
    try {
        return AdsTree::build(valid).root();
    } catch (const ValidationError& e) {
        throw IntegrityViolation(std::string("export is not in canonical order: ") + e.what());
    }
}

// ---- storage-provider tree ----

AdsTree AdsTree::build(std::span<const Record> records, BuildMode mode) {
    AdsTree t;
    t.reset_from(records, mode);
    return t;
}

void AdsTree::reset_from(std::span<const Record> records, BuildMode mode) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].validate();
        if (i > 0 && !canonical_less(records[i - 1], records[i])) {
            throw ValidationError("build: records not in strict canonical order at '" + records[i].key + "'");
        }
    }
    // Copy first: `records` may alias our own storage.
    std::vector<Leaf> fresh;
    fresh.reserve(records.size());
    for (const auto& r : records) fresh.push_back(Leaf{r, false});

    nodes_.clear();
    valid_.clear();
    leaves_ = std::move(fresh);
    root_ = -1;
    leaf_count_total_ = leaves_.size();
    const auto n = static_cast<std::int64_t>(leaves_.size());
    if (n == 0) return;

    const bool par = mode == BuildMode::Parallel;
    nodes_.resize(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (par && n >= 256)
    for (std::int64_t i = 0; i < n; ++i) {
        auto& node = nodes_[static_cast<std::size_t>(i)];
        node.leaf = static_cast<std::int32_t>(i);
        node.leaves = 1;
        node.hash = leaf_digest(leaves_[static_cast<std::size_t>(i)].record);
    }

    std::vector<std::int32_t> level(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) level[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
    while (level.size() > 1) {
        const auto pairs = static_cast<std::int64_t>(level.size() / 2);
        const auto start = static_cast<std::int32_t>(nodes_.size());
        nodes_.resize(nodes_.size() + static_cast<std::size_t>(pairs));
        for (std::int64_t p = 0; p < pairs; ++p) {
            const auto id = start + static_cast<std::int32_t>(p);
            auto& parent = nodes_[static_cast<std::size_t>(id)];
            parent.left = level[static_cast<std::size_t>(2 * p)];
            parent.right = level[static_cast<std::size_t>(2 * p + 1)];
            nodes_[static_cast<std::size_t>(parent.left)].parent = id;
            nodes_[static_cast<std::size_t>(parent.right)].parent = id;
            parent.leaves = nodes_[static_cast<std::size_t>(parent.left)].leaves +
                            nodes_[static_cast<std::size_t>(parent.right)].leaves;
        }
#pragma omp parallel for schedule(static) if (par && pairs >= 256)
        for (std::int64_t p = 0; p < pairs; ++p) {
            auto& parent = nodes_[static_cast<std::size_t>(start + p)];
            parent.hash = internal_digest(nodes_[static_cast<std::size_t>(parent.left)].hash,
                                          nodes_[static_cast<std::size_t>(parent.right)].hash);
        }
        std::vector<std::int32_t> next;
        next.reserve(static_cast<std::size_t>(pairs) + 1);
        for (std::int64_t p = 0; p < pairs; ++p) next.push_back(start + static_cast<std::int32_t>(p));
        if (level.size() % 2 == 1) next.push_back(level.back());  // odd one out is promoted
        level = std::move(next);
    }
    root_ = level.front();
    for (std::int64_t i = 0; i < n; ++i) {
        valid_.emplace_hint(valid_.end(), canonical_key(leaves_[static_cast<std::size_t>(i)].record),
                            static_cast<std::int32_t>(i));
    }
}

Digest AdsTree::root() const {
    return root_ < 0 ? empty_root() : nodes_[static_cast<std::size_t>(root_)].hash;
}

std::size_t AdsTree::depth() const {
    if (root_ < 0) return 0;
    std::size_t best = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{root_, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.leaf >= 0) {
            best = std::max(best, d);
        } else {
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return best;
}

bool AdsTree::needs_compaction() const {
    if (invalid_count() * 2 > leaf_count()) return true;
    std::size_t balanced = 0;
    while ((std::size_t{1} << balanced) < leaf_count()) ++balanced;
    return depth() > 2 * balanced + 2;
}

std::int32_t AdsTree::new_node() {
    nodes_.emplace_back();
    return static_cast<std::int32_t>(nodes_.size() - 1);
}

void AdsTree::rehash_upward(std::int32_t id) {
    while (id >= 0) {
        auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.leaf >= 0) {
            const auto& l = leaves_[static_cast<std::size_t>(n.leaf)];
            n.hash = l.invalid ? invalid_digest(l.record) : leaf_digest(l.record);
        } else {
            n.hash = internal_digest(nodes_[static_cast<std::size_t>(n.left)].hash,
                                     nodes_[static_cast<std::size_t>(n.right)].hash);
        }
        id = n.parent;
    }
}

std::int32_t AdsTree::leaf_node(const CanonicalKey& ck) const {
    const auto it = valid_.find(ck);
    return it == valid_.end() ? -1 : it->second;
}

const Record* AdsTree::find(const Key& key, ReplState state) const {
    const auto id = leaf_node({state, key});
    if (id < 0) return nullptr;
    return &leaves_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(id)].leaf)].record;
}

const Record* AdsTree::find_any(const Key& key) const {
    if (const auto* r = find(key, ReplState::NR)) return r;
    return find(key, ReplState::R);
}

std::size_t AdsTree::rank_of(std::int32_t id) const {
    std::size_t rank = 0;
    while (true) {
        const auto parent = nodes_[static_cast<std::size_t>(id)].parent;
        if (parent < 0) return rank;
        const auto& p = nodes_[static_cast<std::size_t>(parent)];
        if (p.right == id) rank += nodes_[static_cast<std::size_t>(p.left)].leaves;
        id = parent;
    }
}

std::int32_t AdsTree::leaf_at_rank(std::size_t rank) const {
    auto id = root_;
    while (id >= 0 && nodes_[static_cast<std::size_t>(id)].leaf < 0) {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        const auto left = nodes_[static_cast<std::size_t>(n.left)].leaves;
        if (rank < left) {
            id = n.left;
        } else {
            rank -= left;
            id = n.right;
        }
    }
    return id;
}

std::int32_t AdsTree::reveal_into(PartialTree& out, std::int32_t id, std::size_t offset,
                                  std::size_t first, std::size_t last) const {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    const std::size_t end = offset + n.leaves;  // exclusive
    if (end <= first || offset > last) return out.add_opaque(n.hash);
    if (n.leaf >= 0) {
        const auto& l = leaves_[static_cast<std::size_t>(n.leaf)];
        return out.add_leaf(l.record, l.invalid);
    }
    const auto left_leaves = nodes_[static_cast<std::size_t>(n.left)].leaves;
    const auto l = reveal_into(out, n.left, offset, first, last);
    const auto r = reveal_into(out, n.right, offset + left_leaves, first, last);
    return out.add_internal(l, r);
}

PartialTree AdsTree::reveal_ranks(std::size_t first, std::size_t last) const {
    PartialTree out;
    if (root_ >= 0) out.root = reveal_into(out, root_, 0, first, last);
    return out;
}

std::pair<std::optional<CanonicalKey>, std::optional<CanonicalKey>> AdsTree::neighbors(
    const CanonicalKey& target, const std::optional<CanonicalKey>& exclude) const {
    std::optional<CanonicalKey> pred, succ;
    auto it = valid_.lower_bound(target);
    for (auto back = it; back != valid_.begin();) {
        --back;
        if (exclude && back->first == *exclude) continue;
        pred = back->first;
        break;
    }
    for (auto fwd = it; fwd != valid_.end(); ++fwd) {
        if (fwd->first == target) continue;
        if (exclude && fwd->first == *exclude) continue;
        succ = fwd->first;
        break;
    }
    return {pred, succ};
}

MembershipProof AdsTree::prove_membership(const Key& key, ReplState state) const {
    auto id = leaf_node({state, key});
    if (id < 0) {
        throw ValidationError("no valid leaf for '" + key + "' in group " + std::string(to_string(state)));
    }
    MembershipProof proof;
    proof.record = leaves_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(id)].leaf)].record;
    while (true) {
        const auto parent = nodes_[static_cast<std::size_t>(id)].parent;
        if (parent < 0) break;
        const auto& p = nodes_[static_cast<std::size_t>(parent)];
        const bool is_left = p.left == id;
        proof.siblings.push_back(nodes_[static_cast<std::size_t>(is_left ? p.right : p.left)].hash);
        proof.sibling_is_left.push_back(!is_left);
        id = parent;
    }
    return proof;
}

PartialTree AdsTree::prove_position(const CanonicalKey& target,
                                    const std::optional<CanonicalKey>& exclude) const {
    if (root_ < 0) return {};
    const auto [pred, succ] = neighbors(target, exclude);
    const std::size_t first = pred ? rank_of(valid_.at(*pred)) : 0;
    const std::size_t last = succ ? rank_of(valid_.at(*succ)) : leaf_count_total_ - 1;
    return reveal_ranks(first, last);
}

KeyProof AdsTree::prove_key(const Key& key, ReplState state) const {
    if (leaf_node({state, key}) >= 0) return prove_membership(key, state);
    const CanonicalKey target{state, key};
    return NonMembershipProof{target, prove_position(target)};
}

RangeProof AdsTree::prove_range(const Key& lo, const Key& hi) const {
    if (hi < lo) throw ValidationError("range bounds reversed: '" + lo + "' > '" + hi + "'");
    RangeProof proof{lo, hi, {}, {}};
    if (root_ < 0) return proof;
    const CanonicalKey lo_ck{ReplState::NR, lo};
    const CanonicalKey hi_ck{ReplState::NR, hi};
    const auto first_in = valid_.lower_bound(lo_ck);
    const auto past_in = valid_.upper_bound(hi_ck);
    for (auto it = first_in; it != past_in; ++it) {
        proof.results.push_back(leaves_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(it->second)].leaf)].record);
    }
    std::size_t first = 0;
    if (first_in != valid_.begin()) first = rank_of(std::prev(first_in)->second);
    std::size_t last = leaf_count_total_ - 1;
    if (past_in != valid_.end()) last = rank_of(past_in->second);
    proof.tree = reveal_ranks(first, last);
    return proof;
}

RelocationProof AdsTree::prove_relocation(const Key& key, ReplState from, ReplState to) const {
    if (from == to) throw ValidationError("relocation must change the state");
    return RelocationProof{prove_membership(key, from), prove_position({to, key}, CanonicalKey{from, key})};
}

PartialTree AdsTree::export_full() const {
    if (root_ < 0) return {};
    return reveal_ranks(0, leaf_count_total_ - 1);
}

void AdsTree::apply_update(const Record& new_record) {
    new_record.validate();
    const auto id = leaf_node(canonical_key(new_record));
    if (id < 0) throw ValidationError("update of missing record '" + new_record.key + "'");
    leaves_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(id)].leaf)].record = new_record;
    rehash_upward(id);
}

void AdsTree::apply_relocation(const Key& key, ReplState from, const Record& new_record) {
    if (new_record.key != key || new_record.state == from) {
        throw ValidationError("relocation must keep the key and change the state");
    }
    new_record.validate();
    const CanonicalKey old_ck{from, key};
    const auto id = leaf_node(old_ck);
    if (id < 0) throw ValidationError("relocation of missing record '" + key + "'");
    leaves_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(id)].leaf)].invalid = true;
    valid_.erase(old_ck);
    rehash_upward(id);
    insert_leaf(new_record);
}

void AdsTree::apply_insert(const Record& record) {
    record.validate();
    if (find_any(record.key)) throw ValidationError("insert of existing key '" + record.key + "'");
    insert_leaf(record);
}

void AdsTree::insert_leaf(const Record& record) {
    const auto ck = canonical_key(record);
    if (valid_.count(ck)) throw ValidationError("duplicate leaf for '" + record.key + "'");
    const auto [pred, succ] = neighbors(ck, std::nullopt);
    const auto anchor = choose_anchor(pred, succ, ck);
    if (anchor == Anchor::Fresh) {
        const Record copy = record;
        reset_from(std::span<const Record>(&copy, 1), BuildMode::Serial);
        return;
    }
    const bool on_right = anchor == Anchor::Pred;
    const auto anchor_ck = on_right ? *pred : *succ;
    const auto a = valid_.at(anchor_ck);

    const auto kept = new_node();
    const auto added = new_node();
    leaves_.push_back(Leaf{record, false});
    {
        auto& k = nodes_[static_cast<std::size_t>(kept)];
        const auto& old = nodes_[static_cast<std::size_t>(a)];
        k.leaf = old.leaf;
        k.hash = old.hash;
        k.leaves = 1;
        k.parent = a;
    }
    {
        auto& n = nodes_[static_cast<std::size_t>(added)];
        n.leaf = static_cast<std::int32_t>(leaves_.size() - 1);
        n.hash = leaf_digest(record);
        n.leaves = 1;
        n.parent = a;
    }
    auto& split = nodes_[static_cast<std::size_t>(a)];
    split.leaf = -1;
    split.left = on_right ? kept : added;
    split.right = on_right ? added : kept;
    valid_[anchor_ck] = kept;
    valid_[ck] = added;
    ++leaf_count_total_;
    for (auto id = a; id >= 0; id = nodes_[static_cast<std::size_t>(id)].parent) {
        ++nodes_[static_cast<std::size_t>(id)].leaves;
    }
    rehash_upward(a);
}

void AdsTree::compact() {
    const auto valid = records();
    reset_from(valid, BuildMode::Parallel);
}

std::vector<Record> AdsTree::records() const {
    std::vector<Record> out;
    out.reserve(valid_.size());
    for (const auto& [ck, id] : valid_) {
        out.push_back(leaves_[static_cast<std::size_t>(nodes_[static_cast<std::size_t>(id)].leaf)].record);
    }
    return out;
}

}  // namespace adarep::ads
