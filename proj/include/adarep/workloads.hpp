#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "adarep/core.hpp"

namespace adarep::workloads {

/// "k" followed by the index zero-padded to the width of key_count - 1.
Key key_name(std::uint64_t index, std::uint64_t key_count);

struct RatioSpec {
    double reads_per_write = 0;
    std::uint64_t total_ops = 1024;
    std::uint32_t key_count = 1;
    Words record_words = 1;

    void validate() const;
};

/// Blocks of one write then X2 reads; block b reads floor((b+1)r) - floor(br)
/// times so fractional ratios alternate block sizes. Blocks cycle over keys.
Trace gen_ratio(const RatioSpec& spec, std::uint64_t seed = 0);

enum class YcsbWorkload { A, B, E, F };
enum class KeyDist { Uniform, Zipfian, Latest };

YcsbWorkload ycsb_from_string(const std::string& s);
KeyDist key_dist_from_string(const std::string& s);

struct PhaseSpec {
    YcsbWorkload workload = YcsbWorkload::A;
    std::uint64_t op_count = 4096;  // YCSB operations; a read-modify-write emits two trace ops
    KeyDist dist = KeyDist::Zipfian;
    double theta = 0.99;
    Words record_words = 1;
    std::uint32_t key_count = 1024;
    std::uint32_t max_scan = 10;

    void validate() const;
};

struct MixPhaseSpec {
    std::vector<PhaseSpec> phases;
};

Trace gen_ycsb_phase(const PhaseSpec& phase, std::uint64_t seed);
/// Phases concatenated; phase i is seeded with seed + i.
Trace gen_ycsb_mix(const MixPhaseSpec& mix, std::uint64_t seed);

/// YCSB-style zipfian over [0, n): rank 0 is the hottest item.
class ZipfianGenerator {
public:
    ZipfianGenerator(std::uint64_t n, double theta);
    std::uint64_t operator()(std::mt19937_64& rng) const;

    std::uint64_t items() const { return n_; }

private:
    std::uint64_t n_;
    double theta_, alpha_, zetan_, eta_, half_pow_;  // YCSB constants
};

struct ReadsPerWriteDistribution {
    std::vector<std::pair<std::uint32_t, double>> entries;  // (reads following a write, probability)

    /// Non-empty, probabilities >= 0 summing to 1 within 1e-9.
    void validate() const;
    double mean() const;

    /// Rescales so probabilities sum to exactly 1.
    static ReadsPerWriteDistribution normalized(std::vector<std::pair<std::uint32_t, double>> raw);
    /// CSV `reads,probability` with optional header; validated.
    static ReadsPerWriteDistribution from_csv(std::istream& in);
};

/// Published tables, normalized (they sum to 99.92% and 100.04% as printed).
ReadsPerWriteDistribution eth_price_oracle();
ReadsPerWriteDistribution btc_relay();

Trace gen_from_distribution(const ReadsPerWriteDistribution& dist, std::uint64_t write_count,
                            std::uint64_t seed, const Key& key = "k0", Words words = 1);

/// Each base write becomes `batch_size` writes on distinct assets out of
/// `asset_count`; each base read targets one asset of the latest batch.
Trace multi_asset_feed(const Trace& base, std::uint32_t asset_count, std::uint32_t batch_size,
                       std::uint64_t seed = 0);

}  // namespace adarep::workloads
