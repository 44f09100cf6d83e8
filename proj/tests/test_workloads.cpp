#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "adarep/error.hpp"
#include "adarep/workloads.hpp"

using namespace adarep;
using namespace adarep::workloads;

namespace {

struct Mix {
    double reads = 0, writes = 0, scans = 0;
};

Mix fractions(const Trace& t) {
    Mix m;
    for (const auto& op : t) {
        if (is_read(op)) m.reads += 1;
        else if (is_write(op)) m.writes += 1;
        else m.scans += 1;
    }
    const double n = static_cast<double>(t.size());
    return {m.reads / n, m.writes / n, m.scans / n};
}

// Reads between consecutive writes on a single-key trace.
std::vector<std::uint32_t> reads_per_write(const Trace& t) {
    std::vector<std::uint32_t> out;
    for (const auto& op : t) {
        if (is_write(op)) out.push_back(0);
        else if (!out.empty()) ++out.back();
    }
    return out;
}

PhaseSpec phase(YcsbWorkload w, std::uint64_t ops = 20000) {
    PhaseSpec p;
    p.workload = w;
    p.op_count = ops;
    p.key_count = 256;
    return p;
}

}  // namespace

TEST(Ratio, IntegerAndFractional) {
    RatioSpec s;
    s.reads_per_write = 1.5;
    s.total_ops = 10;
    const auto t = gen_ratio(s);
    EXPECT_EQ(serialize_trace(t), "W,k0,1\nR,k0\nW,k0,1\nR,k0\nR,k0\nW,k0,1\nR,k0\nW,k0,1\nR,k0\nR,k0\n");
    s.reads_per_write = 0;
    for (const auto& op : gen_ratio(s)) EXPECT_TRUE(is_write(op));
}

TEST(Ratio, CyclesKeysAndValidates) {
    RatioSpec s;
    s.reads_per_write = 1;
    s.total_ops = 8;
    s.key_count = 3;
    s.record_words = 4;
    const auto t = gen_ratio(s);
    EXPECT_EQ(t[0], (Operation{WriteOp{"k0", 4}}));
    EXPECT_EQ(t[2], (Operation{WriteOp{"k1", 4}}));
    EXPECT_EQ(t[6], (Operation{WriteOp{"k0", 4}}));
    s.reads_per_write = -1;
    EXPECT_THROW(gen_ratio(s), ValidationError);
    s.reads_per_write = 1;
    s.record_words = 0;
    EXPECT_THROW(gen_ratio(s), ValidationError);
}

TEST(Ratio, LongRunAverageMatches) {
    RatioSpec s;
    s.reads_per_write = 2.25;
    s.total_ops = 32500;
    const auto rpw = reads_per_write(gen_ratio(s));
    double sum = 0;
    for (auto r : rpw) sum += r;
    EXPECT_NEAR(sum / static_cast<double>(rpw.size()), 2.25, 0.01);
}

TEST(KeyName, ZeroPadded) {
    EXPECT_EQ(key_name(7, 1000), "k007");
    EXPECT_EQ(key_name(0, 1), "k0");
    EXPECT_EQ(key_name(10, 11), "k10");
}

TEST(Ycsb, WorkloadA) {
    const auto f = fractions(gen_ycsb_phase(phase(YcsbWorkload::A), 1));
    EXPECT_NEAR(f.reads, 0.50, 0.02);
}

TEST(Ycsb, WorkloadB) {
    const auto f = fractions(gen_ycsb_phase(phase(YcsbWorkload::B), 2));
    EXPECT_NEAR(f.reads, 0.95, 0.01);
}

TEST(Ycsb, WorkloadE) {
    const auto t = gen_ycsb_phase(phase(YcsbWorkload::E), 3);
    EXPECT_NEAR(fractions(t).scans, 0.95, 0.01);
    for (const auto& op : t) {
        if (const auto* s = std::get_if<ScanOp>(&op)) {
            ASSERT_GE(s->count, 1u);
            ASSERT_LE(s->count, 10u);
        }
    }
}

TEST(Ycsb, WorkloadFIsReadModifyWrite) {
    const auto t = gen_ycsb_phase(phase(YcsbWorkload::F), 4);
    std::size_t rmw = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (is_write(t[i])) {
            ASSERT_GT(i, 0u);
            ASSERT_TRUE(is_read(t[i - 1]));
            ASSERT_EQ(op_key(t[i]), op_key(t[i - 1]));
            ++rmw;
        }
    }
    EXPECT_NEAR(static_cast<double>(rmw) / 20000.0, 0.25, 0.02);
}

TEST(Ycsb, MixConcatenatesPhases) {
    MixPhaseSpec m;
    m.phases = {phase(YcsbWorkload::A, 100), phase(YcsbWorkload::E, 100)};
    const auto t = gen_ycsb_mix(m, 9);
    ASSERT_EQ(t.size(), 200u);
    const Trace tail(t.begin() + 100, t.end());
    EXPECT_EQ(tail, gen_ycsb_phase(m.phases[1], 10));
    EXPECT_THROW(gen_ycsb_mix({}, 1), ValidationError);
}

TEST(Ycsb, Validation) {
    auto p = phase(YcsbWorkload::A);
    p.op_count = 0;
    EXPECT_THROW(gen_ycsb_phase(p, 1), ValidationError);
    EXPECT_THROW(ycsb_from_string("Q"), ValidationError);
    EXPECT_THROW(key_dist_from_string("gaussian"), ValidationError);
    EXPECT_EQ(ycsb_from_string("f"), YcsbWorkload::F);
}

TEST(Zipfian, HeadIsHot) {
    ZipfianGenerator z(1000, 0.99);
    std::mt19937_64 rng(5);
    std::map<std::uint64_t, int> hist;
    for (int i = 0; i < 100000; ++i) {
        const auto v = z(rng);
        ASSERT_LT(v, 1000u);
        ++hist[v];
    }
    EXPECT_GT(hist[0], hist[1]);
    EXPECT_GT(hist[1], hist[10]);
    EXPECT_GT(hist[0], 100000 / 20);
    EXPECT_THROW(ZipfianGenerator(0, 0.99), ValidationError);
}

TEST(Distribution, EthPriceOracleShape) {
    const auto rpw = reads_per_write(gen_from_distribution(eth_price_oracle(), 10000, 1));
    ASSERT_EQ(rpw.size(), 10000u);
    double zero = 0;
    for (auto r : rpw) zero += r == 0;
    EXPECT_NEAR(zero / 10000.0, 0.704, 0.02);
}

TEST(Distribution, BtcRelayMean) {
    const auto d = btc_relay();
    const auto rpw = reads_per_write(gen_from_distribution(d, 10000, 2));
    double sum = 0;
    for (auto r : rpw) sum += r;
    EXPECT_NEAR(sum / 10000.0, 0.076, 0.01);
    EXPECT_NEAR(d.mean(), 0.076, 0.01);
}

TEST(Distribution, Degenerate) {
    const ReadsPerWriteDistribution d{{{3, 1.0}}};
    for (auto r : reads_per_write(gen_from_distribution(d, 50, 3))) EXPECT_EQ(r, 3u);
}

TEST(Distribution, Validation) {
    EXPECT_THROW((ReadsPerWriteDistribution{{{0, 0.5}}}.validate()), ValidationError);
    EXPECT_THROW((ReadsPerWriteDistribution{{{0, 1.5}, {1, -0.5}}}.validate()), ValidationError);
    EXPECT_THROW(ReadsPerWriteDistribution{}.validate(), ValidationError);
    double sum = 0;
    for (const auto& e : eth_price_oracle().entries) sum += e.second;
    EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Distribution, FromCsv) {
    std::istringstream ok("reads,probability\n0,0.25\n2,0.75\n");
    const auto d = ReadsPerWriteDistribution::from_csv(ok);
    EXPECT_DOUBLE_EQ(d.mean(), 1.5);
    std::istringstream bad("0,0.5\nx,0.5\n");
    try {
        ReadsPerWriteDistribution::from_csv(bad);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(MultiAsset, WriteCountScalesWithBatch) {
    const auto base = gen_from_distribution(eth_price_oracle(), 500, 4);
    const auto t = multi_asset_feed(base, 64, 10, 4);
    std::size_t writes = 0;
    for (const auto& op : t) writes += is_write(op);
    EXPECT_EQ(writes, 500u * 10u);
    EXPECT_EQ(t.size(), base.size() + 500u * 9u);
    EXPECT_THROW(multi_asset_feed(base, 4, 10), ValidationError);
}

TEST(MultiAsset, ReadsTargetLatestBatch) {
    const auto base = gen_from_distribution(ReadsPerWriteDistribution{{{2, 1.0}}}, 100, 5);
    const auto t = multi_asset_feed(base, 32, 4, 5);
    std::set<Key> batch;
    bool in_writes = false;
    for (const auto& op : t) {
        if (is_write(op)) {
            if (!in_writes) batch.clear();
            in_writes = true;
            batch.insert(op_key(op));
        } else {
            in_writes = false;
            ASSERT_TRUE(batch.count(op_key(op)));
        }
    }
}

TEST(WorkloadsProperty, Deterministic) {
    for (std::uint64_t seed : {1u, 2u, 77u}) {
        EXPECT_EQ(gen_ycsb_phase(phase(YcsbWorkload::E, 500), seed), gen_ycsb_phase(phase(YcsbWorkload::E, 500), seed));
        EXPECT_EQ(gen_from_distribution(btc_relay(), 300, seed), gen_from_distribution(btc_relay(), 300, seed));
        const auto base = gen_from_distribution(eth_price_oracle(), 100, seed);
        EXPECT_EQ(multi_asset_feed(base, 50, 5, seed), multi_asset_feed(base, 50, 5, seed));
    }
    EXPECT_NE(gen_ycsb_phase(phase(YcsbWorkload::A, 500), 1), gen_ycsb_phase(phase(YcsbWorkload::A, 500), 2));
}
