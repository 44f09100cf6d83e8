#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "adarep/gas_model.hpp"

namespace adarep {

/// Record identifier. Compared bytewise, so numeric keys should be zero-padded
/// when their order matters.
using Key = std::string;

enum class ReplState : std::uint8_t { NR = 0, R = 1 };

std::string_view to_string(ReplState s);
ReplState repl_state_from_string(std::string_view s);

constexpr std::size_t kWordBytes = 32;

struct Record {
    Key key;
    Words value_words = 1;
    std::string value;  // exactly value_words * 32 bytes
    ReplState state = ReplState::NR;

    /// Record whose payload is `number` big-endian in the last 8 bytes of its first
    /// word, zero padded to `words` words.
    static Record numbered(Key key, ReplState state, std::uint64_t number, Words words = 1);

    /// Throws ValidationError when value_words is zero or the payload size does not match.
    void validate() const;

    bool operator==(const Record&) const = default;
};

/// Sort key shared by every module: the NR group precedes the R group and keys
/// ascend inside each group.
struct CanonicalKey {
    ReplState state;
    Key key;

    auto operator<=>(const CanonicalKey&) const = default;
};

inline CanonicalKey canonical_key(const Record& r) { return {r.state, r.key}; }

bool canonical_less(const Record& a, const Record& b);

/// Payload bytes for a numbered record; exposed for the simulator's value encoding.
std::string numbered_payload(std::uint64_t number, Words words);

struct WriteOp {
    Key key;
    Words words = 1;
    bool operator==(const WriteOp&) const = default;
};

struct ReadOp {
    Key key;
    bool operator==(const ReadOp&) const = default;
};

struct ScanOp {
    Key start_key;
    std::uint32_t count = 1;
    bool operator==(const ScanOp&) const = default;
};

using Operation = std::variant<WriteOp, ReadOp, ScanOp>;
using Trace = std::vector<Operation>;

inline bool is_write(const Operation& op) { return std::holds_alternative<WriteOp>(op); }
inline bool is_read(const Operation& op) { return std::holds_alternative<ReadOp>(op); }
inline bool is_scan(const Operation& op) { return std::holds_alternative<ScanOp>(op); }

/// Key an operation addresses; the start key for scans.
const Key& op_key(const Operation& op);

/// Parses the line-oriented trace format:
///   W,<key>,<words> | R,<key> | S,<key>,<count>
/// Throws ParseError naming the 1-based line on malformed input.
Trace parse_trace(std::istream& in);
Trace parse_trace_string(std::string_view text);

std::string serialize_trace(const Trace& trace);
void write_trace(std::ostream& out, const Trace& trace);

/// A key and the state it moves to.
struct Transition {
    Key key;
    ReplState to = ReplState::NR;
    bool operator==(const Transition&) const = default;
};

/// What the data owner sends to the chain at the end of an epoch.
struct EpochBatch {
    std::uint64_t epoch_index = 0;
    std::vector<Record> writes;  // replicated records carried on-chain
    std::vector<Transition> transitions;
    std::string digest;  // 32-byte root after the batch

    bool empty() const { return writes.empty() && transitions.empty(); }

    /// Throws ValidationError when a key appears twice in `writes`.
    void validate() const;
};

}  // namespace adarep
