#include "roughn/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "roughn/bump.hpp"
#include "roughn/cramer.hpp"
#include "roughn/moments.hpp"
#include "roughn/primes.hpp"
#include "roughn/report.hpp"
#include "roughn/rng.hpp"
#include "roughn/sieve.hpp"

namespace roughn {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---- parameters ---------------------------------------------------------------

class key_reader {
public:
    explicit key_reader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    std::map<std::string, std::string>& raw() { return kv_; }

    std::optional<std::string> take(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        std::string v = it->second;
        kv_.erase(it);
        return v;
    }
    std::uint64_t u64(const std::string& key, std::uint64_t def) {
        auto v = take(key);
        return v ? parse_param_u64(key, *v) : def;
    }
    double real(const std::string& key, double def) {
        auto v = take(key);
        return v ? parse_param_real(key, *v) : def;
    }
    std::string str(const std::string& key, const std::string& def) { return take(key).value_or(def); }
    bool flag(const std::string& key, bool def) {
        auto v = take(key);
        if (!v) return def;
        if (*v == "1" || *v == "true") return true;
        if (*v == "0" || *v == "false") return false;
        fail(errc::invalid_argument, "parameter " + key + ": expected 0/1 or true/false");
    }
    std::vector<std::string> list(const std::string& key, const std::string& def) {
        const std::string v = str(key, def);
        std::vector<std::string> out;
        std::size_t pos = 0;
        while (pos <= v.size()) {
            const auto comma = std::min(v.find(',', pos), v.size());
            std::string item = v.substr(pos, comma - pos);
            item.erase(0, item.find_first_not_of(' '));
            item.erase(item.find_last_not_of(' ') + 1);
            if (!item.empty()) out.push_back(item);
            pos = comma + 1;
        }
        require(!out.empty(), errc::invalid_argument, "parameter " + key + ": empty list");
        return out;
    }
    std::vector<double> reals(const std::string& key, const std::string& def) {
        std::vector<double> out;
        for (const auto& s : list(key, def)) out.push_back(parse_param_real(key, s));
        return out;
    }
    std::vector<std::uint64_t> u64s(const std::string& key, const std::string& def) {
        std::vector<std::uint64_t> out;
        for (const auto& s : list(key, def)) out.push_back(parse_param_u64(key, s));
        return out;
    }
    void finish() {
        if (kv_.empty()) return;
        std::string names;
        for (const auto& [k, v] : kv_) names += (names.empty() ? "" : ", ") + k;
        fail(errc::invalid_argument, "unknown parameter(s): " + names);
    }

private:
    std::map<std::string, std::string> kv_;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_error, "cannot read parameter file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json sieve_json(const sieve_params& p) {
    json j;
    j["x"] = p.x;
    j["K"] = p.K;
    j["w"] = p.w;
    j["a"] = p.a;
    j["c"] = p.c;
    j["gamma"] = p.gamma;
    j["T_exponent"] = p.T_exponent;
    j["A"] = p.A;
    j["k_max"] = p.k_max;
    j["W"] = p.W();
    j["theta"] = p.theta();
    json levels = json::array();
    for (int k = 1; k <= p.K; ++k) levels.push_back(p.level(k));
    j["levels"] = levels;
    return j;
}

bump_options bump_keys(key_reader& kr, bool full) {
    bump_options o;
    o.sharpness = kr.real("sharpness", o.sharpness);
    if (full) {
        o.base_intervals = static_cast<int>(kr.u64("base_intervals", o.base_intervals));
        o.t_step = kr.real("t_step", o.t_step);
        o.t_max = kr.real("t_max", o.t_max);
        o.u_intervals = static_cast<int>(kr.u64("u_intervals", o.u_intervals));
    }
    require(o.sharpness > 0, errc::invalid_argument, "sharpness must be positive");
    require(o.base_intervals >= 2 && o.base_intervals % 2 == 0 && o.u_intervals >= 2 && o.u_intervals % 2 == 0,
            errc::invalid_argument, "quadrature interval counts must be even and at least 2");
    require(o.t_step > 0 && o.t_max > o.t_step, errc::invalid_argument, "need 0 < t_step < t_max");
    return o;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path.string(), j.dump(2) + "\n"); }

// ---- binary blobs ---------------------------------------------------------------

struct blob_writer {
    std::string s;
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
};

struct blob_reader {
    const std::string& s;
    std::size_t pos = 0;
    std::uint64_t u64() {
        require(pos + 8 <= s.size(), errc::io_error, "truncated checkpoint payload");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void done() const { require(pos == s.size(), errc::io_error, "trailing bytes in checkpoint payload"); }
};

// ---- unit loop with checkpoints -------------------------------------------------

struct run_context {
    const run_config& cfg;
    fs::path out;
    std::uint64_t fingerprint = 0;
    std::optional<checkpoint> resumed;
    run_result result;

    fs::path checkpoint_file() const {
        return cfg.resume_path.empty() ? out / (cfg.subcommand + ".rlck") : fs::path(cfg.resume_path);
    }
    void output(const fs::path& p) { result.outputs.push_back(p.string()); }
};

/// Runs units [start, total); returns the number of completed units, which is
/// below `total` only when stopped by max_units.
std::uint64_t run_units(run_context& ctx, std::uint64_t start, std::uint64_t total,
                        const std::function<void(std::uint64_t)>& unit, const std::function<std::string()>& save) {
    using clock = std::chrono::steady_clock;
    auto last = clock::now();
    std::uint64_t done_here = 0;
    for (std::uint64_t u = start; u < total; ++u) {
        unit(u);
        ++done_here;
        const bool more = u + 1 < total;
        const bool stop = more && ctx.cfg.max_units != 0 && done_here >= ctx.cfg.max_units;
        const bool due = ctx.cfg.checkpoint_secs <= 0 ||
                         clock::now() - last >= std::chrono::seconds(ctx.cfg.checkpoint_secs);
        if (more && (stop || due)) {
            write_checkpoint(ctx.checkpoint_file().string(),
                             checkpoint{ctx.cfg.subcommand, ctx.fingerprint, u + 1, save()});
            last = clock::now();
        }
        if (stop) {
            ctx.result.partial = true;
            ctx.result.checkpoint_path = ctx.checkpoint_file().string();
            return u + 1;
        }
    }
    std::error_code ec;
    fs::remove(ctx.checkpoint_file(), ec);
    return total;
}

void stopped(run_context& ctx, std::uint64_t done, std::uint64_t total) {
    ctx.result.exit_code = 3;
    ctx.result.code = errc::budget_exceeded;
    ctx.result.message = "stopped after " + std::to_string(done) + " of " + std::to_string(total) +
                         " units; resume with --resume " + ctx.result.checkpoint_path;
}

// ---- subcommands ------------------------------------------------------------------

constexpr std::size_t kScanUnit = 1 << 15;

void cmd_sieve_scan(run_context& ctx, key_reader& kr) {
    const sieve_params p = apply_sieve_keys({}, kr.raw());
    const bump b(bump_keys(kr, false));
    kr.finish();
    const support_layout layout = support_of(p);
    const level_weights lw(p, b);
    const std::uint64_t total_units = (layout.count + kScanUnit - 1) / kScanUnit;

    double running = 0.0;
    std::uint64_t nonzero = 0, start = 0, offset = 0;
    if (ctx.resumed) {
        blob_reader br{ctx.resumed->blob};
        running = br.f64();
        nonzero = br.u64();
        offset = br.u64();
        br.done();
        start = ctx.resumed->cursor;
    }
    const fs::path weights = ctx.out / "weights.csv";
    csv_writer csv(weights.string(), offset, ctx.resumed.has_value());
    if (!ctx.resumed) csv.header({"n", "nu", "cumulative_mass"});
    ctx.output(weights);

    const std::uint64_t done = run_units(
        ctx, start, total_units,
        [&](std::uint64_t u) {
            const std::size_t i0 = u * kScanUnit, i1 = std::min(layout.count, i0 + kScanUnit);
            const auto nu = nu_range(p, lw, i0, i1, ctx.cfg.workers);
            for (std::size_t i = i0; i < i1; ++i) {
                const double v = nu[i - i0];
                running += v;
                nonzero += v != 0.0;
                csv.col(layout.first + i * layout.W).col(v).col(running).end_row();
            }
        },
        [&] {
            blob_writer bw;
            bw.f64(running);
            bw.u64(nonzero);
            bw.u64(csv.offset());
            return bw.s;
        });
    csv.flush();

    json j;
    j["subcommand"] = "sieve-scan";
    j["params"] = sieve_json(p);
    j["sharpness"] = b.options().sharpness;
    j["first"] = layout.first;
    j["support_count"] = layout.count;
    j["rows_written"] = std::min<std::uint64_t>(layout.count, done * kScanUnit);
    j["nonzero"] = nonzero;
    j["total_mass"] = running;
    j["partial"] = done < total_units;
    if (done < total_units) stopped(ctx, done, total_units);
    const fs::path summary = ctx.out / "sieve_scan.json";
    write_json(summary, j);
    ctx.output(summary);
}

std::vector<std::pair<std::uint64_t, std::int64_t>> default_tuples(const sieve_params& p) {
    const prime_table small(1000);
    std::vector<std::uint64_t> rough;
    for (auto q : small.primes())
        if (q > p.w && rough.size() < 4) rough.push_back(q);
    std::vector<std::pair<std::uint64_t, std::int64_t>> out;
    for (std::size_t i = 0; i < rough.size(); ++i) out.emplace_back(rough[i], 1 + static_cast<std::int64_t>(i) % p.K);
    out.emplace_back(rough[0] * rough[1], 1);
    out.emplace_back(rough[0] * rough[2], p.K);
    out.emplace_back(rough[1] * rough[2], 1);
    out.emplace_back(rough[0] * rough[0], 1);
    out.emplace_back(2, 1);
    out.emplace_back(small.primes()[1], 2);
    return out;
}

std::vector<std::pair<std::uint64_t, std::int64_t>> parse_tuples(key_reader& kr, const sieve_params& p) {
    auto v = kr.take("tuples");
    if (!v) return default_tuples(p);
    std::vector<std::pair<std::uint64_t, std::int64_t>> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        require(colon != std::string::npos, errc::invalid_argument, "tuples: expected d:k items");
        const auto d = parse_param_u64("tuples", item.substr(0, colon));
        const auto k = parse_param_u64("tuples", item.substr(colon + 1));
        require(d >= 1 && k >= 1, errc::invalid_argument, "tuples: d and k must be positive");
        out.emplace_back(d, static_cast<std::int64_t>(k));
    }
    require(!out.empty(), errc::invalid_argument, "tuples: empty list");
    return out;
}

void cmd_sample(run_context& ctx, key_reader& kr) {
    const sieve_params p = apply_sieve_keys({}, kr.raw());
    const bump b(bump_keys(kr, false));
    const auto samples = kr.u64("samples", 100000);
    require(samples >= 1 && samples <= 100'000'000, errc::invalid_argument, "samples must be in [1, 1e8]");
    const auto tuples = parse_tuples(kr, p);
    kr.finish();
    const auto t = weight_table::build(p, b, ctx.cfg.workers);
    const auto draws = t.sample(ctx.cfg.seed, samples, ctx.cfg.workers);
    const auto rows = monte_carlo_probs(t, tuples, draws);

    const fs::path probs = ctx.out / "probs.csv";
    csv_writer csv(probs.string());
    csv.header({"d_star", "k_star", "exact_prob", "mc_estimate", "mc_sigma"});
    int within = 0;
    for (const auto& r : rows) {
        csv.col(r.d_star).col(r.k_star).col(r.exact_prob).col(r.mc_estimate).col(r.mc_sigma).end_row();
        within += std::fabs(r.mc_estimate - r.exact_prob) <= 3 * r.mc_sigma;
    }
    csv.flush();
    std::uint64_t divisible = 0;
    for (auto n : draws) divisible += n % t.W() == 0;
    json j;
    j["subcommand"] = "sample";
    j["params"] = sieve_json(p);
    j["seed"] = ctx.cfg.seed;
    j["samples"] = samples;
    j["divisible_by_W"] = divisible;
    j["tuples"] = rows.size();
    j["within_3_sigma"] = within;
    const fs::path summary = ctx.out / "sample.json";
    write_json(summary, j);
    ctx.output(probs);
    ctx.output(summary);
}

void cmd_moments(run_context& ctx, key_reader& kr) {
    const sieve_params p = apply_sieve_keys({}, kr.raw());
    const bump b(bump_keys(kr, false));
    const int s_max = static_cast<int>(kr.u64("s_max", 4));
    const int mk = static_cast<int>(kr.u64("moment_k_max", 6));
    const bool centered = kr.flag("centered", true);
    const double C3 = kr.real("C3", 3.0);
    const double C = kr.real("C", 2.0);
    const double C1 = kr.real("C1", 1.5e6);
    const double C2 = kr.real("C2", 2.0);
    const int s_C = static_cast<int>(kr.u64("s_C", 2));
    kr.finish();
    require(s_max >= 1 && s_max <= 12, errc::invalid_argument, "s_max must be in [1, 12]");
    require(mk >= 1 && mk <= p.k_max, errc::invalid_argument, "moment_k_max must be in [1, k_max]");

    const auto t = weight_table::build(p, b, ctx.cfg.workers);
    const auto table = table_for(t, p.k_max);
    const support_factors f(t, table, p.k_max, ctx.cfg.workers);

    const fs::path mpath = ctx.out / "moments.csv";
    csv_writer mcsv(mpath.string());
    mcsv.header({"k", "range", "s", "exact_moment", "abs_moment", "paper_bound", "ratio", "empty_range"});
    for (int k = 1; k <= mk; ++k)
        for (auto range : {prime_range::tiny, prime_range::medium, prime_range::large, prime_range::power})
            for (int s = 1; s <= s_max; ++s) {
                const auto m = exact_centered_moment(t, f, k, range, s, centered, C3, ctx.cfg.workers);
                mcsv.col(k).col(range_name(range)).col(s).col(m.exact_moment).col(m.abs_moment)
                    .col(m.paper_bound).col(m.ratio).col(m.empty_range ? 1 : 0).end_row();
            }
    mcsv.flush();

    const auto ub = union_bound(t, f, C, p.k_max);
    const fs::path upath = ctx.out / "union_bound.csv";
    csv_writer ucsv(upath.string());
    ucsv.header({"k", "C", "tail_prob"});
    for (int k = 2; k <= p.k_max; ++k) ucsv.col(k).col(C).col(ub.tail[k - 2]).end_row();
    ucsv.flush();

    const auto c1 = validate_C1(C1, C2, C3, p.A);
    const auto axc = axiom_check_C(t, s_C);
    json j;
    j["subcommand"] = "moments";
    j["params"] = sieve_json(p);
    j["centered"] = centered;
    j["stirling_kappa"] = stirling_kappa_fit(10, 60);
    j["C3_fit"] = axc.value;
    j["C3_used"] = C3;
    j["C1_check"] = {{"C1", C1}, {"C2", C2}, {"required", c1.required}, {"C3_prime", c1.c3_prime}, {"ok", c1.ok}};
    j["union_bound"] = {{"C", C}, {"k_max", p.k_max}, {"sum", ub.sum}, {"witness", ub.witness},
                        {"witness_score", ub.witness_score}};
    const fs::path summary = ctx.out / "moments.json";
    write_json(summary, j);
    ctx.output(mpath);
    ctx.output(upath);
    ctx.output(summary);
}

void cmd_c0(run_context& ctx, key_reader& kr) {
    const bump_options o = bump_keys(kr, true);
    const double u_step = kr.real("u_step", 0.005);
    const double decay_step = kr.real("decay_step", 0.5);
    kr.finish();
    require(u_step > 0 && u_step <= 0.5, errc::invalid_argument, "u_step must be in (0, 0.5]");
    require(decay_step > 0, errc::invalid_argument, "decay_step must be positive");
    const bump b(o);
    const auto c = c0_compute(b);
    const auto d = decay_profile(b, decay_step);
    json j;
    j["subcommand"] = "c0";
    j["bump"] = {{"sharpness", o.sharpness}, {"base_intervals", o.base_intervals}, {"t_step", o.t_step},
                 {"t_max", o.t_max}, {"u_intervals", o.u_intervals}};
    j["normalization"] = b.normalization();
    j["c0_time"] = c.c0_time;
    j["c0_freq"] = c.c0_freq;
    j["relative_difference"] = std::fabs(c.c0_time - c.c0_freq) / std::fabs(c.c0_time);
    j["err_time"] = c.err_time;
    j["err_freq"] = c.err_freq;
    j["eta_hat_mass"] = c.eta_hat_mass;
    j["decay_fit_c"] = d.fitted_c;
    j["decay_sup_scaled"] = d.sup_scaled;
    const fs::path eta = ctx.out / "eta_profile.csv", hat = ctx.out / "eta_hat_profile.csv";
    write_eta_profile(b, eta.string(), u_step);
    write_eta_hat_profile(b, hat.string());
    const fs::path summary = ctx.out / "c0.json";
    write_json(summary, j);
    ctx.output(summary);
    ctx.output(eta);
    ctx.output(hat);
}

json axiom_json(const axiom_report& r) {
    return {{"axiom", std::string(1, r.which)}, {"pass", r.pass}, {"partial", r.partial},
            {"checked", r.checked}, {"value", r.value}, {"normalized", r.normalized}, {"detail", r.detail}};
}

std::vector<divisibility_query> default_d_queries(const sieve_params& p) {
    const prime_table small(1000);
    std::vector<std::uint64_t> rough;
    for (auto q : small.primes())
        if (q > p.w && rough.size() < 5) rough.push_back(q);
    std::vector<divisibility_query> out;
    for (auto q : rough)
        for (std::uint32_t a : {2u, 3u})
            for (std::int64_t k : {std::int64_t{1}, static_cast<std::int64_t>(p.K)})
                out.push_back({{{q, a}}, k});
    return out;
}

void cmd_axioms(run_context& ctx, key_reader& kr) {
    const sieve_params p = apply_sieve_keys({}, kr.raw());
    const bump b(bump_keys(kr, false));
    const auto samples = kr.u64("samples", 100000);
    const int s_B = static_cast<int>(kr.u64("s_B", 2));
    const auto budget_B = kr.u64("budget_B", 20000);
    const int s_C = static_cast<int>(kr.u64("s_C", 2));
    kr.finish();
    const auto t = weight_table::build(p, b, ctx.cfg.workers);

    double rigidity = 0.0;
    std::uint64_t rigidity_checked = 0;
    for (auto q : p.tiny_primes())
        for (int k = 1; k <= p.k_max; ++k) {
            const double want = k % static_cast<int>(q) == 0 ? 1.0 : 0.0;
            rigidity = std::max(rigidity, std::fabs(t.prob_divides(q, k) - want));
            ++rigidity_checked;
        }

    json j;
    j["subcommand"] = "axioms";
    j["params"] = sieve_json(p);
    j["seed"] = ctx.cfg.seed;
    j["A"] = axiom_json(axiom_check_A(t, ctx.cfg.seed, samples));
    j["B"] = axiom_json(axiom_check_B(t, s_B, budget_B));
    j["C"] = axiom_json(axiom_check_C(t, s_C));
    j["D"] = axiom_json(axiom_check_D(t, default_d_queries(p)));
    j["tiny_prime_rigidity"] = {{"checked", rigidity_checked}, {"max_deviation", rigidity}};
    const fs::path summary = ctx.out / "axioms.json";
    write_json(summary, j);
    ctx.output(summary);
}

void cmd_cramer_gaps(run_context& ctx, key_reader& kr) {
    cramer_config c;
    c.f = parse_rate(kr.str("f", "log"));
    c.f.scale = kr.real("f_scale", 1.0);
    c.N = kr.u64("N", 100000);
    c.trials = static_cast<int>(kr.u64("trials", 100));
    c.warmup = kr.u64("warmup", 0);
    c.seed = ctx.cfg.seed;
    const std::string rows = kr.str("gap_rows", "all");
    kr.finish();
    require(rows == "all" || rows == "max", errc::invalid_argument, "gap_rows must be all or max");
    require(c.trials <= 1'000'000, errc::invalid_argument, "trials must be at most 1e6");
    validate(c);

    gap_accumulator acc(c);
    std::vector<trial_result> done;
    std::uint64_t start = 0, offset = 0;
    if (ctx.resumed) {
        blob_reader br{ctx.resumed->blob};
        offset = br.u64();
        const auto n = br.u64();
        for (std::uint64_t i = 0; i < n; ++i) {
            trial_result r;
            r.trial = static_cast<int>(br.u64());
            r.successes = br.u64();
            r.max_ratio = br.f64();
            r.gap_count = br.u64();
            r.gap_sum = br.u64();
            r.histogram.resize(kGapBins + 1);
            for (auto& h : r.histogram) h = br.u64();
            done.push_back(r);
            acc.add(r);
        }
        br.done();
        start = ctx.resumed->cursor;
        require(start == done.size(), errc::io_error, "checkpoint cursor does not match its trials");
    }
    const fs::path gaps = ctx.out / "gaps.csv";
    csv_writer csv(gaps.string(), offset, ctx.resumed.has_value());
    if (!ctx.resumed) csv.header({"trial", "k", "S_k", "gap", "ratio"});
    ctx.output(gaps);

    const bool complete = static_cast<std::uint64_t>(c.trials) == run_units(
        ctx, start, static_cast<std::uint64_t>(c.trials),
        [&](std::uint64_t u) {
            auto r = simulate_trial(c, static_cast<int>(u), true);
            if (rows == "all") {
                for (const auto& g : r.gaps) csv.col(r.trial).col(g.k).col(g.s_k).col(g.gap).col(g.ratio).end_row();
            } else if (!r.gaps.empty()) {
                const auto& g = *std::max_element(r.gaps.begin(), r.gaps.end(),
                                                  [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
                csv.col(r.trial).col(g.k).col(g.s_k).col(g.gap).col(g.ratio).end_row();
            }
            r.gaps.clear();
            r.gaps.shrink_to_fit();
            acc.add(r);
            done.push_back(std::move(r));
        },
        [&] {
            blob_writer bw;
            bw.u64(csv.offset());
            bw.u64(done.size());
            for (const auto& r : done) {
                bw.u64(static_cast<std::uint64_t>(r.trial));
                bw.u64(r.successes);
                bw.f64(r.max_ratio);
                bw.u64(r.gap_count);
                bw.u64(r.gap_sum);
                for (auto h : r.histogram) bw.u64(h);
            }
            return bw.s;
        });
    csv.flush();

    const auto rep = acc.finish();
    json j;
    j["subcommand"] = "cramer-gaps";
    j["seed"] = c.seed;
    j["f"] = rate_name(c.f);
    j["f_scale"] = c.f.scale;
    j["N"] = c.N;
    j["warmup"] = c.effective_warmup();
    j["trials_requested"] = c.trials;
    j["trials"] = rep.trials;
    j["empty"] = rep.empty;
    j["gap_count"] = rep.gap_count;
    j["mean_gap"] = rep.mean_gap;
    j["trials_max_ratio_le_1_5"] = rep.trials_at_most(1.5);
    j["max_ratio"] = rep.max_ratio;
    j["successes"] = rep.successes;
    j["histogram"] = {{"bin_width", rep.hist_width}, {"overflow_from", rep.hist_width * kGapBins},
                      {"counts", rep.histogram}};
    j["partial"] = !complete;
    if (!complete) stopped(ctx, done.size(), static_cast<std::uint64_t>(c.trials));
    const fs::path summary = ctx.out / "gaps_summary.json";
    write_json(summary, j);
    ctx.output(summary);
}

void cmd_pik(run_context& ctx, key_reader& kr) {
    const auto xs = kr.u64s("x_list", "1000,10000,100000,1000000");
    kr.finish();
    const fs::path path = ctx.out / "pik.csv";
    csv_writer csv(path.string());
    csv.header({"x", "k", "count", "lower_bound", "ratio"});
    json grid = json::array();
    for (auto x : xs) {
        require(x >= 3, errc::invalid_argument, "x_list entries must be at least 3");
        const auto counts = count_pi_all(x, ctx.cfg.workers);
        std::uint64_t sum = 0;
        for (auto v : counts) sum += v;
        const double l2 = std::log(std::log(static_cast<double>(x)));
        const int k_star = std::max(1, static_cast<int>(std::ceil(l2)));
        const int k_last = std::max<int>(static_cast<int>(counts.size()) - 1, k_star);
        for (int k = 1; k <= k_last; ++k) {
            const std::uint64_t cnt = static_cast<std::size_t>(k) < counts.size() ? counts[k] : 0;
            const double shape = pi_k_lower_shape(x, k);
            csv.col(x).col(k).col(cnt).col(shape).col(static_cast<double>(cnt) / shape).end_row();
        }
        const std::uint64_t at_star = static_cast<std::size_t>(k_star) < counts.size() ? counts[k_star] : 0;
        grid.push_back({{"x", x}, {"sum", sum}, {"x_minus_1", x - 1}, {"identity_holds", sum == x - 1},
                        {"k_star", k_star}, {"ratio_at_k_star", static_cast<double>(at_star) / pi_k_lower_shape(x, k_star)}});
    }
    csv.flush();
    json j;
    j["subcommand"] = "pik";
    j["grid"] = grid;
    const fs::path summary = ctx.out / "pik.json";
    write_json(summary, j);
    ctx.output(path);
    ctx.output(summary);
}

void cmd_window_search(run_context& ctx, key_reader& kr) {
    const auto xs = kr.u64s("x_list", "1000000,10000000");
    const auto variants = kr.list("variants", "A-omega,B-Omega,weak");
    const auto eps = kr.reals("eps_list", "0.5,1");
    const auto Cs = kr.reals("C_list", "1,2");
    const auto C0s = kr.reals("C0_list", "2");
    const auto ds = kr.reals("d_list", "1.5");
    kr.finish();
    const fs::path path = ctx.out / "witness.csv";
    csv_writer csv(path.string());
    csv.header({"x", "variant", "params", "witness_or_none", "count", "lo", "hi", "length"});
    for (auto x : xs)
        for (const auto& vs : variants) {
            const auto v = parse_variant(vs);
            const auto& first = v == window_variant::weak ? C0s : eps;
            const auto& second = v == window_variant::weak ? ds : Cs;
            for (double p1 : first)
                for (double p2 : second) {
                    const auto r = window_search(x, v, p1, p2, ctx.cfg.workers);
                    const std::string params = v == window_variant::weak
                        ? "C0=" + format_real(p1) + ";d=" + format_real(p2)
                        : "eps=" + format_real(p1) + ";C=" + format_real(p2);
                    csv.col(x).col(variant_name(v)).col(params);
                    if (r.witness) csv.col(*r.witness).col(r.witness_count);
                    else csv.col("none").col("");
                    csv.col(r.lo).col(r.hi).col(r.length).end_row();
                }
        }
    csv.flush();
    ctx.output(path);
}

void cmd_refute(run_context& ctx, key_reader& kr) {
    const auto n = kr.u64("n", 100000000);
    const double delta = kr.real("delta", 0.01);
    const auto budget = kr.u64("budget", 1000000);
    const double C0 = kr.real("C0", 2.0);
    const double d = kr.real("d", 1.5);
    kr.finish();
    const auto r = erdos679_refuter(n, delta, budget, std::make_pair(C0, d));
    json j;
    j["subcommand"] = "refute-679";
    j["n"] = n;
    j["delta"] = delta;
    j["budget"] = r.budget;
    if (r.k) {
        j["k"] = *r.k;
        j["omega"] = r.omega_value;
        j["threshold"] = r.threshold;
    } else {
        j["k"] = nullptr;
    }
    j["chain"] = {{"C0", C0}, {"d", d}, {"checked", r.chain_checked}};
    if (r.chain_checked) {
        j["chain"]["k"] = r.chain_k;
        j["chain"]["omega"] = r.chain_omega;
        j["chain"]["bound"] = r.chain_bound;
        j["chain"]["holds"] = r.chain_holds;
    }
    const fs::path summary = ctx.out / "refute_679.json";
    write_json(summary, j);
    ctx.output(summary);
}

void cmd_record_search(run_context& ctx, key_reader& kr) {
    const sieve_params p = apply_sieve_keys({}, kr.raw());
    const bump b(bump_keys(kr, false));
    const auto samples = kr.u64("samples", 10000);
    const double C = kr.real("C", 2.0);
    kr.finish();
    require(samples >= 1 && samples <= 100'000'000, errc::invalid_argument, "samples must be in [1, 1e8]");
    require(p.k_max >= 2, errc::invalid_argument, "k_max must be at least 2");

    const auto t = weight_table::build(p, b, ctx.cfg.workers);
    const auto table = table_for(t, p.k_max);
    const support_factors f(t, table, p.k_max, ctx.cfg.workers);
    const std::uint64_t total_units = (samples + kSampleBlock - 1) / kSampleBlock;

    std::uint64_t best_n = 0, best_index = 0, start = 0, offset = 0;
    double best_score = INFINITY;
    if (ctx.resumed) {
        blob_reader br{ctx.resumed->blob};
        offset = br.u64();
        best_n = br.u64();
        best_index = br.u64();
        best_score = br.f64();
        br.done();
        start = ctx.resumed->cursor;
    }
    const fs::path scan = ctx.out / "record_scan.csv";
    csv_writer csv(scan.string(), offset, ctx.resumed.has_value());
    if (!ctx.resumed) csv.header({"draw", "n", "score"});
    ctx.output(scan);

    const std::uint64_t done = run_units(
        ctx, start, total_units,
        [&](std::uint64_t u) {
            const auto draws = t.sample_block(ctx.cfg.seed, u, samples);
            for (std::size_t i = 0; i < draws.size(); ++i) {
                const std::uint64_t idx = u * kSampleBlock + i;
                const double s = record_score(draws[i], f.window(), p.k_max);
                csv.col(idx).col(draws[i]).col(s).end_row();
                if (s < best_score) {
                    best_score = s;
                    best_n = draws[i];
                    best_index = idx;
                }
            }
        },
        [&] {
            blob_writer bw;
            bw.u64(csv.offset());
            bw.u64(best_n);
            bw.u64(best_index);
            bw.f64(best_score);
            return bw.s;
        });
    csv.flush();

    json j;
    j["subcommand"] = "record-search";
    j["params"] = sieve_json(p);
    j["seed"] = ctx.cfg.seed;
    j["samples"] = samples;
    j["sampled"] = {{"witness", best_n}, {"draw", best_index}, {"score", best_score}};
    j["partial"] = done < total_units;
    if (done == total_units) {
        const auto ub = union_bound(t, f, C, p.k_max);
        j["exhaustive"] = {{"witness", ub.witness}, {"score", ub.witness_score}};
        j["score_ratio"] = best_score / ub.witness_score;
        j["union_bound"] = {{"C", C}, {"sum", ub.sum}};

        const fs::path prof = ctx.out / "record_profile.csv";
        csv_writer pc(prof.string());
        pc.header({"k", "n_plus_k", "Omega", "ratio"});
        for (int k = 2; k <= p.k_max; ++k) {
            const std::uint64_t m = best_n + static_cast<std::uint64_t>(k);
            const int big = f.window().big_omega(m);
            pc.col(k).col(m).col(big).col(big / std::log(static_cast<double>(k))).end_row();
        }
        pc.flush();
        ctx.output(prof);
    } else {
        stopped(ctx, done, total_units);
    }
    const fs::path summary = ctx.out / "record.json";
    write_json(summary, j);
    ctx.output(summary);
}

using command = void (*)(run_context&, key_reader&);

const std::map<std::string, command>& command_table() {
    static const std::map<std::string, command> table = {
        {"sieve-scan", cmd_sieve_scan}, {"sample", cmd_sample},
        {"moments", cmd_moments},       {"c0", cmd_c0},
        {"axioms", cmd_axioms},         {"cramer-gaps", cmd_cramer_gaps},
        {"pik", cmd_pik},               {"window-search", cmd_window_search},
        {"refute-679", cmd_refute},     {"record-search", cmd_record_search},
    };
    return table;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

void fnv(std::uint64_t& h, const std::string& s) {
    for (unsigned char ch : s) {
        h ^= ch;
        h *= kFnvPrime;
    }
    h ^= 0xFF;  // field separator
    h *= kFnvPrime;
}

} // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"sieve-scan", "sample", "moments", "c0", "axioms",
                                                   "cramer-gaps", "pik", "window-search", "refute-679",
                                                   "record-search"};
    return names;
}

bool supports_checkpoint(const std::string& s) {
    return s == "sieve-scan" || s == "record-search" || s == "cramer-gaps";
}

std::string usage() {
    std::string u = "usage: roughn-lab <subcommand> [--params FILE] [--out DIR] [--seed N] [--workers N]\n"
                    "                  [--checkpoint-secs N] [--resume FILE] [--max-units N]\n"
                    "subcommands:";
    for (const auto& s : subcommands()) u += " " + s;
    return u + "\n";
}

int exit_code_for(errc code) {
    switch (code) {
    case errc::ok: return 0;
    case errc::budget_exceeded: return 3;
    case errc::numeric_failure:
    case errc::internal: return 1;
    default: return 2;
    }
}

std::uint64_t config_fingerprint(const run_config& cfg, const std::string& params_text) {
    std::uint64_t h = kFnvOffset;
    fnv(h, cfg.subcommand);
    fnv(h, std::to_string(cfg.seed));
    fnv(h, params_text);
    return h;
}

void write_checkpoint(const std::string& path, const checkpoint& c) {
    blob_writer bw;
    bw.s = "RLCK1";
    const auto len = static_cast<std::uint32_t>(c.subcommand.size());
    for (int i = 0; i < 4; ++i) bw.s.push_back(static_cast<char>((len >> (8 * i)) & 0xFF));
    bw.s += c.subcommand;
    bw.u64(c.fingerprint);
    bw.u64(c.cursor);
    bw.u64(c.blob.size());
    bw.s += c.blob;
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(errc::io_error, "cannot write checkpoint '" + tmp + "'");
        out.write(bw.s.data(), static_cast<std::streamsize>(bw.s.size()));
        if (!out) fail(errc::io_error, "short write to checkpoint '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) fail(errc::io_error, "cannot move checkpoint into place: " + ec.message());
}

checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_error, "cannot read checkpoint '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    require(data.size() >= 9 && data.compare(0, 5, "RLCK1") == 0, errc::io_error, "not an RLCK1 checkpoint");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[5 + i])) << (8 * i);
    require(9 + static_cast<std::size_t>(len) <= data.size(), errc::io_error, "truncated checkpoint");
    checkpoint c;
    c.subcommand = data.substr(9, len);
    const std::string rest = data.substr(9 + len);
    blob_reader br{rest};
    c.fingerprint = br.u64();
    c.cursor = br.u64();
    const auto blob_len = br.u64();
    require(br.pos + blob_len == rest.size(), errc::io_error, "checkpoint payload length mismatch");
    c.blob = rest.substr(br.pos);
    return c;
}

run_result run(const run_config& cfg) {
    run_context ctx{cfg, fs::path(cfg.out_dir), 0, std::nullopt, {}};
    try {
        const auto& table = command_table();
        const auto it = table.find(cfg.subcommand);
        if (it == table.end()) {
            ctx.result.exit_code = 2;
            ctx.result.code = errc::invalid_argument;
            ctx.result.message = "unknown subcommand '" + cfg.subcommand + "'\n" + usage();
            return ctx.result;
        }
        require(cfg.workers >= 1 && cfg.workers <= 256, errc::invalid_argument, "workers must be in [1, 256]");
        require(cfg.checkpoint_secs >= 0, errc::invalid_argument, "checkpoint-secs must be nonnegative");
        const std::string params_text = cfg.params_path.empty() ? std::string() : read_file(cfg.params_path);
        key_reader kr(parse_key_values(params_text));
        ctx.fingerprint = config_fingerprint(cfg, params_text);
        if (!cfg.resume_path.empty()) {
            require(supports_checkpoint(cfg.subcommand), errc::invalid_argument,
                    cfg.subcommand + " does not support --resume");
            checkpoint c = read_checkpoint(cfg.resume_path);
            if (c.subcommand != cfg.subcommand || c.fingerprint != ctx.fingerprint)
                fail(errc::fingerprint_mismatch,
                     "refusing to resume: checkpoint was written by a different configuration");
            ctx.resumed = std::move(c);
        }
        if (cfg.max_units != 0)
            require(supports_checkpoint(cfg.subcommand), errc::invalid_argument,
                    cfg.subcommand + " does not support --max-units");
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (ec) fail(errc::io_error, "cannot create output directory '" + cfg.out_dir + "': " + ec.message());
        it->second(ctx, kr);
    } catch (const lab_error& e) {
        ctx.result.exit_code = exit_code_for(e.code());
        ctx.result.code = e.code();
        ctx.result.message = e.what();
    } catch (const std::exception& e) {
        ctx.result.exit_code = 1;
        ctx.result.code = errc::internal;
        ctx.result.message = e.what();
    }
    return ctx.result;
}

} // namespace roughn
