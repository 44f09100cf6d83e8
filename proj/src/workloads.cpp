#include "adarep/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

#include "adarep/error.hpp"

namespace adarep::workloads {

Key key_name(std::uint64_t index, std::uint64_t key_count) {
    std::size_t width = 1;
    for (auto n = key_count > 0 ? key_count - 1 : 0; n >= 10; n /= 10) ++width;
    auto digits = std::to_string(index);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "k" + digits;
}

void RatioSpec::validate() const {
    if (!(reads_per_write >= 0) || !std::isfinite(reads_per_write)) {
        throw ValidationError("ratio spec: reads_per_write must be a finite value >= 0");
    }
    if (record_words < 1) throw ValidationError("ratio spec: record_words must be >= 1");
    if (key_count < 1) throw ValidationError("ratio spec: key_count must be >= 1");
}

Trace gen_ratio(const RatioSpec& spec, std::uint64_t /*seed*/) {
    spec.validate();
    Trace t;
    t.reserve(spec.total_ops);
    const double r = spec.reads_per_write;
    for (std::uint64_t b = 0; t.size() < spec.total_ops; ++b) {
        const Key key = key_name(b % spec.key_count, spec.key_count);
        t.push_back(WriteOp{key, spec.record_words});
        const auto reads = static_cast<std::uint64_t>(std::floor(static_cast<double>(b + 1) * r)) -
                           static_cast<std::uint64_t>(std::floor(static_cast<double>(b) * r));
        for (std::uint64_t i = 0; i < reads && t.size() < spec.total_ops; ++i) t.push_back(ReadOp{key});
    }
    return t;
}

YcsbWorkload ycsb_from_string(const std::string& s) {
    if (s == "A" || s == "a") return YcsbWorkload::A;
    if (s == "B" || s == "b") return YcsbWorkload::B;
    if (s == "E" || s == "e") return YcsbWorkload::E;
    if (s == "F" || s == "f") return YcsbWorkload::F;
    throw ValidationError("unknown YCSB workload '" + s + "' (expected A, B, E or F)");
}

KeyDist key_dist_from_string(const std::string& s) {
    if (s == "uniform") return KeyDist::Uniform;
    if (s == "zipfian") return KeyDist::Zipfian;
    if (s == "latest") return KeyDist::Latest;
    throw ValidationError("unknown key distribution '" + s + "'");
}

void PhaseSpec::validate() const {
    if (op_count < 1) throw ValidationError("ycsb phase: op_count must be >= 1");
    if (key_count < 1) throw ValidationError("ycsb phase: key_count must be >= 1");
    if (record_words < 1) throw ValidationError("ycsb phase: record_words must be >= 1");
    if (max_scan < 1) throw ValidationError("ycsb phase: max_scan must be >= 1");
    if (!(theta > 0 && theta < 1)) throw ValidationError("ycsb phase: zipfian theta must be in (0, 1)");
}

ZipfianGenerator::ZipfianGenerator(std::uint64_t n, double theta) : n_(n), theta_(theta) {
    if (n == 0) throw ValidationError("zipfian: need at least one item");
    zetan_ = 0;
    for (std::uint64_t i = 1; i <= n; ++i) zetan_ += 1.0 / std::pow(static_cast<double>(i), theta);
    half_pow_ = std::pow(0.5, theta);
    const double zeta2 = 1.0 + half_pow_;
    alpha_ = 1.0 / (1.0 - theta);
    eta_ = n == 1 ? 0.0
                  : (1.0 - std::pow(2.0 / static_cast<double>(n), 1.0 - theta)) / (1.0 - zeta2 / zetan_);
}

std::uint64_t ZipfianGenerator::operator()(std::mt19937_64& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double uz = u * zetan_;
    if (uz < 1.0 || n_ == 1) return 0;
    if (uz < 1.0 + half_pow_) return 1;
    const auto v = static_cast<std::uint64_t>(static_cast<double>(n_) * std::pow(eta_ * u - eta_ + 1.0, alpha_));
    return std::min(v, n_ - 1);
}

namespace {

class KeyChooser {
public:
    KeyChooser(const PhaseSpec& p) : spec_(p), zipf_(p.key_count, p.theta) {}

    std::uint64_t next(std::mt19937_64& rng) {
        switch (spec_.dist) {
            case KeyDist::Uniform:
                return std::uniform_int_distribution<std::uint64_t>(0, spec_.key_count - 1)(rng);
            case KeyDist::Zipfian:
                return zipf_(rng);
            case KeyDist::Latest:
                return (last_written_ + spec_.key_count - zipf_(rng)) % spec_.key_count;
        }
        return 0;
    }
    void wrote(std::uint64_t k) { last_written_ = k; }

private:
    const PhaseSpec& spec_;
    ZipfianGenerator zipf_;
    std::uint64_t last_written_ = 0;
};

}  // namespace

Trace gen_ycsb_phase(const PhaseSpec& phase, std::uint64_t seed) {
    phase.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::uint32_t> scan_len(1, phase.max_scan);
    KeyChooser keys(phase);
    const auto n = phase.key_count;
    Trace t;
    t.reserve(phase.op_count * (phase.workload == YcsbWorkload::F ? 2 : 1));
    for (std::uint64_t i = 0; i < phase.op_count; ++i) {
        const double c = coin(rng);
        const auto k = keys.next(rng);
        const Key key = key_name(k, n);
        auto write = [&] {
            t.push_back(WriteOp{key, phase.record_words});
            keys.wrote(k);
        };
        switch (phase.workload) {
            case YcsbWorkload::A:
                if (c < 0.5) t.push_back(ReadOp{key}); else write();
                break;
            case YcsbWorkload::B:
                if (c < 0.95) t.push_back(ReadOp{key}); else write();
                break;
            case YcsbWorkload::E:
                if (c < 0.95) t.push_back(ScanOp{key, scan_len(rng)}); else write();
                break;
            case YcsbWorkload::F:
                t.push_back(ReadOp{key});
                if (c >= 0.75) write();  // read-modify-write
                break;
        }
    }
    return t;
}

Trace gen_ycsb_mix(const MixPhaseSpec& mix, std::uint64_t seed) {
    if (mix.phases.empty()) throw ValidationError("ycsb mix: no phases");
    Trace t;
    for (std::size_t i = 0; i < mix.phases.size(); ++i) {
        auto part = gen_ycsb_phase(mix.phases[i], seed + i);
        t.insert(t.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return t;
}

void ReadsPerWriteDistribution::validate() const {
    if (entries.empty()) throw ValidationError("distribution: no entries");
    double sum = 0;
    for (const auto& [reads, p] : entries) {
        if (!(p >= 0)) throw ValidationError("distribution: negative probability for " + std::to_string(reads));
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "distribution: probabilities sum to " << sum << ", expected 1";
        throw ValidationError(msg.str());
    }
}

double ReadsPerWriteDistribution::mean() const {
    double m = 0;
    for (const auto& [reads, p] : entries) m += reads * p;
    return m;
}

ReadsPerWriteDistribution ReadsPerWriteDistribution::normalized(
    std::vector<std::pair<std::uint32_t, double>> raw) {
    double sum = 0;
    for (const auto& e : raw) sum += e.second;
    if (!(sum > 0)) throw ValidationError("distribution: total mass must be positive");
    for (auto& e : raw) e.second /= sum;
    ReadsPerWriteDistribution d{std::move(raw)};
    d.validate();
    return d;
}

ReadsPerWriteDistribution ReadsPerWriteDistribution::from_csv(std::istream& in) {
    ReadsPerWriteDistribution d;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("reads", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError(line_no, "expected reads,probability");
        try {
            std::size_t used = 0;
            const auto reads = std::stoul(line.substr(0, comma), &used);
            if (used != comma) throw std::invalid_argument("reads");
            const auto rest = line.substr(comma + 1);
            const double p = std::stod(rest, &used);
            if (used != rest.size()) throw std::invalid_argument("probability");
            d.entries.emplace_back(static_cast<std::uint32_t>(reads), p);
        } catch (const std::logic_error&) {
            throw ParseError(line_no, "bad reads,probability row '" + line + "'");
        }
    }
    d.validate();
    return d;
}

ReadsPerWriteDistribution eth_price_oracle() {
    return ReadsPerWriteDistribution::normalized({{0, 70.4}, {1, 16.0}, {2, 6.46}, {3, 2.91}, {4, 1.52},
                                                  {5, 0.76}, {6, 0.63}, {7, 0.25}, {8, 0.13}, {9, 0.25},
                                                  {10, 0.13}, {12, 0.13}, {13, 0.25}, {17, 0.13}, {20, 0.13}});
}

ReadsPerWriteDistribution btc_relay() {
    return ReadsPerWriteDistribution::normalized(
        {{0, 93.7}, {1, 5.30}, {2, 0.77}, {3, 0.15}, {4, 0.05}, {5, 0.04}, {6, 0.02}, {7, 0.01}});
}

Trace gen_from_distribution(const ReadsPerWriteDistribution& dist, std::uint64_t write_count,
                            std::uint64_t seed, const Key& key, Words words) {
    dist.validate();
    std::vector<double> weights;
    for (const auto& e : dist.entries) weights.push_back(e.second);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::mt19937_64 rng(seed);
    Trace t;
    for (std::uint64_t i = 0; i < write_count; ++i) {
        t.push_back(WriteOp{key, words});
        const auto reads = dist.entries[pick(rng)].first;
        for (std::uint32_t r = 0; r < reads; ++r) t.push_back(ReadOp{key});
    }
    return t;
}

Trace multi_asset_feed(const Trace& base, std::uint32_t asset_count, std::uint32_t batch_size,
                       std::uint64_t seed) {
    if (batch_size < 1 || asset_count < batch_size) {
        throw ValidationError("multi_asset_feed: need asset_count >= batch_size >= 1");
    }
    if (asset_count == 1) return base;
    std::mt19937_64 rng(seed);
    std::vector<std::uint32_t> assets(asset_count);
    std::iota(assets.begin(), assets.end(), 0u);
    std::vector<std::uint32_t> batch;
    Trace t;
    for (const auto& op : base) {
        if (const auto* w = std::get_if<WriteOp>(&op)) {
            // partial Fisher-Yates: the first batch_size slots become the batch
            for (std::uint32_t i = 0; i < batch_size; ++i) {
                std::uniform_int_distribution<std::uint32_t> j(i, asset_count - 1);
                std::swap(assets[i], assets[j(rng)]);
            }
            batch.assign(assets.begin(), assets.begin() + batch_size);
            std::sort(batch.begin(), batch.end());
            for (const auto a : batch) t.push_back(WriteOp{key_name(a, asset_count), w->words});
            continue;
        }
        const std::uint32_t a = batch.empty()
                                    ? std::uniform_int_distribution<std::uint32_t>(0, asset_count - 1)(rng)
                                    : batch[std::uniform_int_distribution<std::size_t>(0, batch.size() - 1)(rng)];
        if (const auto* s = std::get_if<ScanOp>(&op)) {
            t.push_back(ScanOp{key_name(a, asset_count), s->count});
        } else {
            t.push_back(ReadOp{key_name(a, asset_count)});
        }
    }
    return t;
}

}  // namespace adarep::workloads
