#include "adarep/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "adarep/error.hpp"

namespace adarep::experiment {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

using Section = std::map<std::string, std::pair<std::string, std::size_t>>;  // key -> (value, line)

struct Reader {
    const Section& sec;
    std::string where;
    std::set<std::string> used = {};

    const std::pair<std::string, std::size_t>* find(const std::string& k) {
        used.insert(k);
        const auto it = sec.find(k);
        return it == sec.end() ? nullptr : &it->second;
    }
    std::string str(const std::string& k, const std::string& def) {
        const auto* v = find(k);
        return v ? v->first : def;
    }
    template <class T>
    T num(const std::string& k, T def) {
        const auto* v = find(k);
        if (!v) return def;
        T out{};
        const auto& s = v->first;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw ParseError(v->second, where + ": invalid number for '" + k + "': '" + s + "'");
        }
        return out;
    }
    bool flag(const std::string& k, bool def) {
        const auto* v = find(k);
        if (!v) return def;
        if (v->first == "true" || v->first == "1" || v->first == "yes") return true;
        if (v->first == "false" || v->first == "0" || v->first == "no") return false;
        throw ParseError(v->second, where + ": expected true/false for '" + k + "'");
    }
    void finish() {
        for (const auto& [k, v] : sec) {
            if (!used.count(k)) throw ParseError(v.second, where + ": unknown key '" + k + "'");
        }
    }
};

decision::PolicySpec policy_from_section(Reader& r, const GasSchedule& s) {
    const auto type = r.str("type", "");
    if (type.empty()) throw ValidationError(r.where + ": missing 'type'");
    const auto k = r.num<std::uint32_t>("k", default_k(s));
    const auto kp = r.num<std::uint32_t>("k_prime", default_k_prime(s));
    const auto d = r.num<std::uint32_t>("d", 1);
    const auto window = r.num<std::size_t>("window", 3);
    const auto threshold = r.num<double>("threshold", static_cast<double>(default_k(s)));
    if (type == "memoryless") return decision::MemorylessParams{k};
    if (type == "memorizing") return decision::MemorizingParams{kp, d};
    if (type == "adaptive-k1") return decision::AdaptiveParams{decision::AdaptiveVariant::K1, window, threshold};
    if (type == "adaptive-k2") return decision::AdaptiveParams{decision::AdaptiveVariant::K2, window, threshold};
    if (type == "bl1") return decision::NeverReplicate{};
    if (type == "bl2") return decision::AlwaysReplicate{};
    if (type == "offline") return decision::OfflineOptimal{};
    throw ValidationError(r.where + ": unknown policy type '" + type + "'");
}

std::vector<workloads::PhaseSpec> parse_phases(const std::string& text, const workloads::PhaseSpec& proto,
                                               std::size_t line) {
    std::vector<workloads::PhaseSpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        auto p = proto;
        const auto colon = item.find(':');
        try {
            p.workload = workloads::ycsb_from_string(item.substr(0, colon));
            if (colon != std::string::npos) p.op_count = std::stoull(item.substr(colon + 1));
        } catch (const std::logic_error&) {
            throw ParseError(line, "bad phase '" + item + "' (expected <A|B|E|F>[:ops])");
        }
        out.push_back(p);
    }
    if (out.empty()) throw ParseError(line, "no phases listed");
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

void ExperimentSpec::validate() const {
    if (policies.empty()) throw ValidationError("experiment '" + name + "': at least one policy required");
    sim.validate();
    std::set<std::string> names;
    for (const auto& p : policies) {
        if (!names.insert(p.name).second) throw ValidationError("duplicate policy name '" + p.name + "'");
    }
    if (workload.kind == WorkloadKind::TraceFile && workload.trace_path.empty()) {
        throw ValidationError("trace workload needs a path");
    }
}

ExperimentSpec parse_spec(std::istream& in, const std::filesystem::path& base_dir) {
    std::map<std::string, Section> sections;
    std::vector<std::string> order;
    std::string current;
    sections[current];
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            current = trim(line.substr(1, line.size() - 2));
            if (sections.count(current)) throw ParseError(line_no, "duplicate section [" + current + "]");
            sections[current];
            order.push_back(current);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(line_no, "empty key");
        if (!sections[current].emplace(key, std::make_pair(trim(line.substr(eq + 1)), line_no)).second) {
            throw ParseError(line_no, "duplicate key '" + key + "'");
        }
    }

    ExperimentSpec spec;
    {
        Reader top{sections[""], "top level"};
        spec.name = top.str("name", spec.name);
        if (const auto* o = top.find("output")) spec.output = base_dir / o->first;
        top.finish();
    }
    if (sections.count("gas")) {
        Reader g{sections["gas"], "[gas]"};
        auto& s = spec.sim.schedule;
        s.tx_base = g.num("tx_base", s.tx_base);
        s.tx_per_word = g.num("tx_per_word", s.tx_per_word);
        s.insert_per_word = g.num("insert_per_word", s.insert_per_word);
        s.update_per_word = g.num("update_per_word", s.update_per_word);
        s.read_per_word = g.num("read_per_word", s.read_per_word);
        s.hash_base = g.num("hash_base", s.hash_base);
        s.hash_per_word = g.num("hash_per_word", s.hash_per_word);
        g.finish();
        s.validate();
    }
    if (sections.count("sim")) {
        Reader r{sections["sim"], "[sim]"};
        auto& c = spec.sim;
        c.epoch_len = r.num("epoch_len", c.epoch_len);
        c.block_time = r.num("block_time", c.block_time);
        c.finality_blocks = r.num("finality_blocks", c.finality_blocks);
        c.propagation_delay = r.num("propagation_delay", c.propagation_delay);
        c.ops_per_epoch = r.num("ops_per_epoch", c.ops_per_epoch);
        c.rng_seed = r.num("seed", c.rng_seed);
        c.digest_every_epoch = r.flag("digest_every_epoch", c.digest_every_epoch);
        c.adversary = sim::adversary_from_string(r.str("adversary", "honest"));
        r.finish();
    }
    if (sections.count("workload")) {
        Reader r{sections["workload"], "[workload]"};
        auto& w = spec.workload;
        const auto type = r.str("type", "ratio");
        w.record_words = r.num<Words>("record_words", 1);
        const auto keys = r.num<std::uint32_t>("keys", 1);
        if (type == "ratio") {
            w.kind = WorkloadKind::Ratio;
            w.ratio.reads_per_write = r.num("ratio", 0.0);
            w.ratio.total_ops = r.num<std::uint64_t>("ops", 1024);
            w.ratio.key_count = keys;
            w.ratio.record_words = w.record_words;
            w.ratio.validate();
        } else if (type == "ycsb") {
            w.kind = WorkloadKind::Ycsb;
            workloads::PhaseSpec proto;
            proto.record_words = w.record_words;
            proto.key_count = keys;
            proto.dist = workloads::key_dist_from_string(r.str("dist", "zipfian"));
            proto.theta = r.num("theta", proto.theta);
            proto.max_scan = r.num("max_scan", proto.max_scan);
            const auto* ph = r.find("phases");
            if (!ph) throw ValidationError("[workload]: ycsb needs 'phases'");
            w.mix.phases = parse_phases(ph->first, proto, ph->second);
        } else if (type == "distribution") {
            w.kind = WorkloadKind::Distribution;
            w.table = r.str("table", "eth");
            if (w.table != "eth" && w.table != "btc") w.table = (base_dir / w.table).string();
            w.writes = r.num<std::uint64_t>("writes", w.writes);
            w.assets = r.num<std::uint32_t>("assets", keys);
            w.batch = r.num<std::uint32_t>("batch", 1);
        } else if (type == "trace") {
            w.kind = WorkloadKind::TraceFile;
            w.trace_path = base_dir / r.str("path", "");
        } else {
            throw ValidationError("[workload]: unknown type '" + type + "'");
        }
        r.finish();
    }
    for (const auto& name : order) {
        if (name.rfind("policy.", 0) != 0) {
            if (name != "gas" && name != "sim" && name != "workload") {
                throw ValidationError("unknown section [" + name + "]");
            }
            continue;
        }
        Reader r{sections[name], "[" + name + "]"};
        spec.policies.push_back({name.substr(7), policy_from_section(r, spec.sim.schedule)});
        r.finish();
    }
    return spec;
}

ExperimentSpec parse_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read spec file '" + path.string() + "'");
    return parse_spec(in, path.parent_path());
}

NamedPolicy policy_by_name(const std::string& name, const GasSchedule& s) {
    if (name == "memoryless") return {name, decision::MemorylessParams{default_k(s)}};
    if (name == "memorizing") return {name, decision::MemorizingParams{default_k_prime(s), 1}};
    const double th = static_cast<double>(default_k(s));
    if (name == "adaptive-k1") return {name, decision::AdaptiveParams{decision::AdaptiveVariant::K1, 3, th}};
    if (name == "adaptive-k2") return {name, decision::AdaptiveParams{decision::AdaptiveVariant::K2, 3, th}};
    if (name == "bl1") return {name, decision::NeverReplicate{}};
    if (name == "bl2") return {name, decision::AlwaysReplicate{}};
    if (name == "offline") return {name, decision::OfflineOptimal{}};
    throw ValidationError("unknown policy '" + name + "'");
}

Trace make_workload(const WorkloadSpec& w, std::uint64_t seed) {
    switch (w.kind) {
        case WorkloadKind::Ratio:
            return workloads::gen_ratio(w.ratio, seed);
        case WorkloadKind::Ycsb:
            return workloads::gen_ycsb_mix(w.mix, seed);
        case WorkloadKind::Distribution: {
            workloads::ReadsPerWriteDistribution dist;
            if (w.table == "eth") {
                dist = workloads::eth_price_oracle();
            } else if (w.table == "btc") {
                dist = workloads::btc_relay();
            } else {
                std::ifstream in(w.table);
                if (!in) throw ValidationError("cannot read distribution '" + w.table + "'");
                dist = workloads::ReadsPerWriteDistribution::from_csv(in);
            }
            const auto base = workloads::gen_from_distribution(dist, w.writes, seed, "k0", w.record_words);
            return workloads::multi_asset_feed(base, w.assets, w.batch, seed);
        }
        case WorkloadKind::TraceFile: {
            std::ifstream in(w.trace_path);
            if (!in) throw ValidationError("cannot read trace '" + w.trace_path.string() + "'");
            return parse_trace(in);
        }
    }
    return {};
}

double savings(Gas baseline, Gas x) {
    if (baseline == 0) return 0.0;
    return (static_cast<double>(baseline) - static_cast<double>(x)) / static_cast<double>(baseline);
}

RunOutput run_experiment(const ExperimentSpec& spec, const Trace& trace) {
    spec.validate();
    RunOutput out;
    out.bl1 = sim::run_baseline(trace, spec.sim, sim::Baseline::BL1);
    out.bl2 = sim::run_baseline(trace, spec.sim, sim::Baseline::BL2);
    const auto b1 = out.bl1.total_gas();
    const auto b2 = out.bl2.total_gas();
    for (const auto& p : spec.policies) {
        sim::SimResult r;
        if (std::holds_alternative<decision::NeverReplicate>(p.spec)) {
            r = out.bl1;
        } else if (std::holds_alternative<decision::AlwaysReplicate>(p.spec)) {
            r = out.bl2;
        } else {
            auto cfg = spec.sim;
            cfg.policy = p.spec;
            r = sim::run(trace, cfg);
        }
        out.summary.push_back({p.name, r.total_gas(), r.per_op(), savings(b1, r.total_gas()),
                               savings(b2, r.total_gas())});
        out.results.emplace_back(p.name, std::move(r));
    }
    out.summary.push_back({"BL1", b1, out.bl1.per_op(), 0.0, savings(b2, b1)});
    out.summary.push_back({"BL2", b2, out.bl2.per_op(), savings(b1, b2), 0.0});
    return out;
}

RunOutput run_experiment(const ExperimentSpec& spec, std::uint64_t seed) {
    return run_experiment(spec, make_workload(spec.workload, seed));
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "policy,total_gas,per_op_gas,savings_vs_BL1,savings_vs_BL2\n";
    for (const auto& r : rows) {
        out << r.policy << ',' << r.total_gas << ',' << fmt(r.per_op_gas) << ',' << fmt(r.savings_vs_bl1) << ','
            << fmt(r.savings_vs_bl2) << '\n';
    }
}

void write_run_outputs(const std::filesystem::path& dir, const RunOutput& run) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, r] : run.results) {
        std::ofstream f(dir / ("ledger_" + name + ".csv"));
        if (!f) throw ValidationError("cannot write to '" + dir.string() + "'");
        r.ledger.write_csv(f);
    }
    std::ofstream s(dir / "summary.csv");
    if (!s) throw ValidationError("cannot write to '" + dir.string() + "'");
    write_summary_csv(s, run.summary);
}

SweepParam sweep_param_from_string(const std::string& s) {
    if (s == "ratio") return SweepParam::Ratio;
    if (s == "k") return SweepParam::K;
    if (s == "record_words") return SweepParam::RecordWords;
    if (s == "data_size") return SweepParam::DataSize;
    throw ValidationError("unknown sweep parameter '" + s + "' (ratio|k|record_words|data_size)");
}

std::string to_string(SweepParam p) {
    switch (p) {
        case SweepParam::Ratio: return "ratio";
        case SweepParam::K: return "k";
        case SweepParam::RecordWords: return "record_words";
        case SweepParam::DataSize: return "data_size";
    }
    return "ratio";
}

std::vector<double> sweep_values(double from, double to, double step) {
    if (!(step > 0) || !std::isfinite(from) || !std::isfinite(to) || to < from) {
        throw ValidationError("sweep range: need from <= to and step > 0");
    }
    std::vector<double> v;
    const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) v.push_back(from + static_cast<double>(i) * step);
    return v;
}

ExperimentSpec apply_sweep_value(const ExperimentSpec& spec, SweepParam param, double value) {
    auto s = spec;
    auto& w = s.workload;
    auto as_count = [&](const char* what) {
        if (!(value >= 1) || value != std::floor(value)) {
            throw ValidationError(std::string("sweep ") + what + ": values must be integers >= 1");
        }
        return static_cast<std::uint64_t>(value);
    };
    switch (param) {
        case SweepParam::Ratio:
            if (w.kind != WorkloadKind::Ratio) throw ValidationError("ratio sweep needs a ratio workload");
            w.ratio.reads_per_write = value;
            break;
        case SweepParam::K: {
            const auto k = static_cast<std::uint32_t>(as_count("k"));
            bool any = false;
            for (auto& p : s.policies) {
                if (auto* m = std::get_if<decision::MemorylessParams>(&p.spec)) {
                    m->k = k;
                    any = true;
                }
            }
            if (!any) throw ValidationError("k sweep needs a memoryless policy");
            break;
        }
        case SweepParam::RecordWords: {
            const auto words = as_count("record_words");
            w.record_words = words;
            w.ratio.record_words = words;
            for (auto& p : w.mix.phases) p.record_words = words;
            break;
        }
        case SweepParam::DataSize: {
            const auto n = static_cast<std::uint32_t>(as_count("data_size"));
            w.ratio.key_count = n;
            for (auto& p : w.mix.phases) p.key_count = n;
            w.assets = std::max(n, w.batch);
            break;
        }
    }
    return s;
}

SweepOutput run_sweep(const ExperimentSpec& spec, SweepParam param, const std::vector<double>& values,
                      std::uint64_t seed, bool parallel) {
    spec.validate();
    SweepOutput out;
    out.param = param;
    std::vector<ExperimentSpec> specs;
    for (const auto v : values) specs.push_back(apply_sweep_value(spec, param, v));
    out.rows.resize(values.size());
    const auto n = static_cast<std::int64_t>(values.size());
    std::vector<std::string> errors(values.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            auto run = run_experiment(specs[static_cast<std::size_t>(i)], seed);
            auto& row = out.rows[static_cast<std::size_t>(i)];
            row.value = values[static_cast<std::size_t>(i)];
            row.summary = std::move(run.summary);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) throw ValidationError("sweep value " + fmt_value(values[i]) + ": " + errors[i]);
    }
    if (param == SweepParam::Ratio) {
        for (const auto& row : out.rows) {
            const auto& bl1 = row.summary[row.summary.size() - 2];
            const auto& bl2 = row.summary.back();
            if (bl2.per_op_gas <= bl1.per_op_gas) {
                out.crossover = row.value;
                break;
            }
        }
    }
    return out;
}

void write_sweep_csv(std::ostream& out, const SweepOutput& sweep) {
    out << to_string(sweep.param) << ",policy,total_gas,per_op_gas,savings_vs_BL1,savings_vs_BL2\n";
    for (const auto& row : sweep.rows) {
        for (const auto& r : row.summary) {
            out << fmt_value(row.value) << ',' << r.policy << ',' << r.total_gas << ',' << fmt(r.per_op_gas) << ','
                << fmt(r.savings_vs_bl1) << ',' << fmt(r.savings_vs_bl2) << '\n';
        }
    }
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepOutput& sweep) {
    std::filesystem::create_directories(dir);
    const auto name = to_string(sweep.param);
    std::ofstream f(dir / ("sweep_" + name + ".csv"));
    if (!f) throw ValidationError("cannot write to '" + dir.string() + "'");
    write_sweep_csv(f, sweep);
    if (sweep.param == SweepParam::Ratio) {
        std::ofstream c(dir / "crossover.csv");
        c << "param,crossover\n" << name << ',' << (sweep.crossover ? fmt_value(*sweep.crossover) : "none") << '\n';
    }
}

}  // namespace adarep::experiment
