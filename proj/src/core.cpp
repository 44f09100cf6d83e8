#include "adarep/core.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "adarep/error.hpp"

namespace adarep {

std::string_view to_string(ReplState s) { return s == ReplState::R ? "R" : "NR"; }

ReplState repl_state_from_string(std::string_view s) {
    if (s == "R") return ReplState::R;
    if (s == "NR") return ReplState::NR;
    throw ValidationError("unknown replication state '" + std::string(s) + "'");
}

std::string numbered_payload(std::uint64_t number, Words words) {
    std::string out(words * kWordBytes, '\0');
    for (int i = 0; i < 8; ++i) {
        out[kWordBytes - 1 - i] = static_cast<char>((number >> (8 * i)) & 0xff);
    }
    return out;
}

Record Record::numbered(Key key, ReplState state, std::uint64_t number, Words words) {
    if (words == 0) throw ValidationError("record must span at least one word");
    return Record{std::move(key), words, numbered_payload(number, words), state};
}

void Record::validate() const {
    if (value_words == 0) throw ValidationError("record '" + key + "': value_words must be >= 1");
    if (value.size() != value_words * kWordBytes) {
        throw ValidationError("record '" + key + "': payload is " + std::to_string(value.size()) +
                              " bytes, expected " + std::to_string(value_words * kWordBytes));
    }
}

bool canonical_less(const Record& a, const Record& b) { return canonical_key(a) < canonical_key(b); }

const Key& op_key(const Operation& op) {
    return std::visit(
        [](const auto& o) -> const Key& {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, ScanOp>) {
                return o.start_key;
            } else {
                return o.key;
            }
        },
        op);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::uint64_t parse_count(std::string_view field, std::size_t line_no, const char* what) {
    std::uint64_t v = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(line_no, std::string("invalid ") + what + " '" + std::string(field) + "'");
    }
    return v;
}

Operation parse_line(std::string_view line, std::size_t line_no) {
    const auto fields = split_commas(line);
    const auto code = fields[0];
    auto need = [&](std::size_t n) {
        if (fields.size() != n) {
            throw ParseError(line_no, "expected " + std::to_string(n) + " fields, got " +
                                          std::to_string(fields.size()));
        }
        if (fields[1].empty()) throw ParseError(line_no, "empty key");
    };
    if (code == "W") {
        need(3);
        const auto words = parse_count(fields[2], line_no, "word count");
        if (words == 0) throw ParseError(line_no, "write must carry at least one word");
        return WriteOp{Key(fields[1]), words};
    }
    if (code == "R") {
        need(2);
        return ReadOp{Key(fields[1])};
    }
    if (code == "S") {
        need(3);
        const auto count = parse_count(fields[2], line_no, "scan count");
        if (count == 0 || count > UINT32_MAX) throw ParseError(line_no, "scan count must be >= 1");
        return ScanOp{Key(fields[1]), static_cast<std::uint32_t>(count)};
    }
    throw ParseError(line_no, "unknown op code '" + std::string(code) + "'");
}

}  // namespace

Trace parse_trace(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        trace.push_back(parse_line(line, line_no));
    }
    return trace;
}

Trace parse_trace_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
    for (const auto& op : trace) {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, WriteOp>) {
                    out << "W," << o.key << ',' << o.words << '\n';
                } else if constexpr (std::is_same_v<T, ReadOp>) {
                    out << "R," << o.key << '\n';
                } else {
                    out << "S," << o.start_key << ',' << o.count << '\n';
                }
            },
            op);
    }
}

std::string serialize_trace(const Trace& trace) {
    std::ostringstream out;
    write_trace(out, trace);
    return out.str();
}

void EpochBatch::validate() const {
    std::set<Key> seen;
    for (const auto& r : writes) {
        if (!seen.insert(r.key).second) {
            throw ValidationError("epoch batch " + std::to_string(epoch_index) +
                                  ": duplicate write for key '" + r.key + "'");
        }
    }
}

}  // namespace adarep
