#include "adarep/partial_tree.hpp"

#include <openssl/evp.h>

#include <functional>

#include "adarep/error.hpp"

namespace adarep::ads {

namespace {

constexpr std::uint8_t kTagLeaf = 0x00;
constexpr std::uint8_t kTagInternal = 0x01;
constexpr std::uint8_t kTagEmpty = 0x02;
constexpr std::uint8_t kTagInvalid = 0x03;

Digest sha256(const void* data, std::size_t len) {
    Digest out{};
    unsigned int out_len = 0;
    if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 || out_len != 32) {
        throw Error("SHA-256 failed");
    }
    return out;
}

Digest record_digest(std::uint8_t tag, const Record& r, bool with_value = true) {
    thread_local std::string buf;
    buf.clear();
    buf.push_back(static_cast<char>(tag));
    buf.push_back(static_cast<char>(r.state));
    const auto n = static_cast<std::uint32_t>(r.key.size());
    for (int shift = 24; shift >= 0; shift -= 8) buf.push_back(static_cast<char>((n >> shift) & 0xff));
    buf += r.key;
    if (with_value) buf += r.value;
    return sha256(buf.data(), buf.size());
}

}  // namespace

std::string to_hex(const Digest& d) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (auto b : d) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xf]);
    }
    return out;
}

Digest digest_from_hex(const std::string& hex) {
    if (hex.size() != 64) throw ValidationError("digest hex must be 64 characters");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ValidationError(std::string("bad hex digit '") + c + "'");
    };
    Digest d{};
    for (std::size_t i = 0; i < 32; ++i) {
        d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    }
    return d;
}

Digest leaf_digest(const Record& r) { return record_digest(kTagLeaf, r); }
Digest invalid_digest(const Record& r) { return record_digest(kTagInvalid, r, false); }

Digest internal_digest(const Digest& left, const Digest& right) {
    std::array<std::uint8_t, 65> buf{};
    buf[0] = kTagInternal;
    std::copy(left.begin(), left.end(), buf.begin() + 1);
    std::copy(right.begin(), right.end(), buf.begin() + 33);
    return sha256(buf.data(), buf.size());
}

Digest empty_root() {
    const std::uint8_t tag = kTagEmpty;
    return sha256(&tag, 1);
}

Anchor choose_anchor(const std::optional<CanonicalKey>& pred, const std::optional<CanonicalKey>& succ,
                     const CanonicalKey& target) {
    if (pred && pred->state == target.state) return Anchor::Pred;
    if (succ && succ->state == target.state) return Anchor::Succ;
    if (pred) return Anchor::Pred;
    if (succ) return Anchor::Succ;
    return Anchor::Fresh;
}

std::int32_t PartialTree::add_opaque(const Digest& d) {
    Node n;
    n.kind = Kind::Opaque;
    n.digest = d;
    nodes.push_back(std::move(n));
    return static_cast<std::int32_t>(nodes.size() - 1);
}

std::int32_t PartialTree::add_leaf(const Record& r, bool invalid) {
    Node n;
    n.kind = Kind::Leaf;
    n.leaf = ProofLeaf{r, invalid};
    nodes.push_back(std::move(n));
    return static_cast<std::int32_t>(nodes.size() - 1);
}

std::int32_t PartialTree::add_internal(std::int32_t left, std::int32_t right) {
    Node n;
    n.kind = Kind::Internal;
    n.left = left;
    n.right = right;
    nodes.push_back(std::move(n));
    return static_cast<std::int32_t>(nodes.size() - 1);
}

Digest PartialTree::digest_of(std::int32_t id) const {
    const auto& n = nodes.at(static_cast<std::size_t>(id));
    switch (n.kind) {
        case Kind::Opaque:
            return n.digest;
        case Kind::Leaf:
            return n.leaf.invalid ? invalid_digest(n.leaf.record) : leaf_digest(n.leaf.record);
        case Kind::Internal:
            if (n.left < 0 || n.right < 0) throw IntegrityViolation("internal proof node lacks a child");
            return internal_digest(digest_of(n.left), digest_of(n.right));
    }
    return {};
}

Digest PartialTree::root_digest() const { return empty() ? empty_root() : digest_of(root); }

std::vector<std::int32_t> PartialTree::frontier() const {
    std::vector<std::int32_t> out;
    if (empty()) return out;
    std::vector<std::int32_t> stack{root};
    while (!stack.empty()) {
        const auto id = stack.back();
        stack.pop_back();
        const auto& n = nodes.at(static_cast<std::size_t>(id));
        if (n.kind == Kind::Internal) {
            stack.push_back(n.right);
            stack.push_back(n.left);
        } else {
            out.push_back(id);
        }
    }
    return out;
}

Words PartialTree::words() const {
    Words w = 0;
    for (auto id : frontier()) {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        w += n.kind == Kind::Opaque ? 1 : proof_leaf_words(n.leaf);
    }
    return w;
}

Gas PartialTree::verify_gas(const GasSchedule& s) const {
    Gas g = 0;
    if (empty()) return g;
    std::vector<std::int32_t> stack{root};
    while (!stack.empty()) {
        const auto& n = nodes[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        if (n.kind == Kind::Internal) {
            g += s.hash_cost(2);
            stack.push_back(n.left);
            stack.push_back(n.right);
        } else if (n.kind == Kind::Leaf) {
            g += s.hash_cost(proof_leaf_words(n.leaf));
        }
    }
    return g;
}

bool PartialTree::fully_revealed() const {
    for (auto id : frontier()) {
        if (nodes[static_cast<std::size_t>(id)].kind == Kind::Opaque) return false;
    }
    return true;
}

std::int32_t PartialTree::find_valid(const CanonicalKey& ck) const {
    for (auto id : frontier()) {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        if (n.kind == Kind::Leaf && !n.leaf.invalid && canonical_key(n.leaf.record) == ck) return id;
    }
    return -1;
}

std::optional<PartialTree::Bounds> PartialTree::bounds(const CanonicalKey& lo,
                                                       const CanonicalKey& hi) const {
    Bounds b;
    b.frontier = frontier();
    const auto& f = b.frontier;
    const auto size = static_cast<std::int32_t>(f.size());
    std::optional<CanonicalKey> prev;
    b.pred = -1;
    b.succ = size;
    for (std::int32_t i = 0; i < size; ++i) {
        const auto& n = nodes[static_cast<std::size_t>(f[static_cast<std::size_t>(i)])];
        if (n.kind != Kind::Leaf || n.leaf.invalid) continue;
        const auto ck = canonical_key(n.leaf.record);
        if (prev && !(*prev < ck)) return std::nullopt;
        prev = ck;
        if (ck < lo) b.pred = i;
        if (hi < ck && b.succ == size) b.succ = i;
    }
    for (std::int32_t i = b.pred + 1; i < b.succ; ++i) {
        if (nodes[static_cast<std::size_t>(f[static_cast<std::size_t>(i)])].kind == Kind::Opaque) {
            return std::nullopt;
        }
    }
    return b;
}

void PartialTree::split_leaf(std::int32_t node, const ProofLeaf& added, bool added_on_right) {
    auto& n = nodes.at(static_cast<std::size_t>(node));
    if (n.kind != Kind::Leaf) throw IntegrityViolation("anchor is not a revealed leaf");
    const ProofLeaf old = n.leaf;
    const auto a = add_leaf(old.record, old.invalid);
    const auto b = add_leaf(added.record, added.invalid);
    auto& m = nodes[static_cast<std::size_t>(node)];  // re-fetch after growth
    m.kind = Kind::Internal;
    m.leaf = ProofLeaf{};
    m.left = added_on_right ? a : b;
    m.right = added_on_right ? b : a;
}

std::int32_t PartialTree::copy_from(const PartialTree& src, std::int32_t id) {
    const auto& n = src.nodes.at(static_cast<std::size_t>(id));
    switch (n.kind) {
        case Kind::Opaque:
            return add_opaque(n.digest);
        case Kind::Leaf:
            return add_leaf(n.leaf.record, n.leaf.invalid);
        case Kind::Internal: {
            const auto l = copy_from(src, n.left);
            const auto r = copy_from(src, n.right);
            return add_internal(l, r);
        }
    }
    return -1;
}

std::int32_t PartialTree::merge_into(const PartialTree& a, std::int32_t na, const PartialTree& b,
                                     std::int32_t nb) {
    const auto& x = a.nodes.at(static_cast<std::size_t>(na));
    const auto& y = b.nodes.at(static_cast<std::size_t>(nb));
    if (x.kind == Kind::Opaque) {
        if (a.digest_of(na) != b.digest_of(nb)) throw IntegrityViolation("proof views disagree");
        return copy_from(b, nb);
    }
    if (y.kind == Kind::Opaque) {
        if (a.digest_of(na) != b.digest_of(nb)) throw IntegrityViolation("proof views disagree");
        return copy_from(a, na);
    }
    if (x.kind != y.kind) throw IntegrityViolation("proof views disagree on tree shape");
    if (x.kind == Kind::Leaf) {
        const bool same = x.leaf.invalid ? y.leaf.invalid && canonical_key(x.leaf.record) == canonical_key(y.leaf.record)
                                         : x.leaf == y.leaf;
        if (!same) throw IntegrityViolation("proof views disagree on a leaf");
        return add_leaf(x.leaf.record, x.leaf.invalid);
    }
    const auto l = merge_into(a, x.left, b, y.left);
    const auto r = merge_into(a, x.right, b, y.right);
    return add_internal(l, r);
}

PartialTree PartialTree::merge(const PartialTree& a, const PartialTree& b) {
    PartialTree out;
    if (a.empty() || b.empty()) {
        if (!(a.empty() && b.empty())) throw IntegrityViolation("proof views disagree on emptiness");
        return out;
    }
    out.root = out.merge_into(a, a.root, b, b.root);
    return out;
}

}  // namespace adarep::ads
