#include "roughn/cramer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "roughn/errors.hpp"
#include "roughn/parallel.hpp"
#include "roughn/primes.hpp"
#include "roughn/rng.hpp"
#include "roughn/sieve.hpp"

namespace roughn {

namespace {

constexpr std::uint64_t kPiBudget = 4'000'000'000ull;
constexpr std::uint64_t kSegment = 1ull << 18;
constexpr std::uint64_t kScanBudget = 100'000'000ull;
constexpr std::uint64_t kMaxSearchX = 100'000'000'000'000ull;  // sqrt fits a 1e7 table

std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

prime_table table_up_to_sqrt(std::uint64_t x) {
    return prime_table(std::max<std::uint64_t>(2, isqrt(x) + 1));
}

/// Plain trial division, independent of any table.
std::pair<int, int> trial_division_counts(std::uint64_t n) {
    int w = 0, big = 0;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d) continue;
        ++w;
        while (n % d == 0) {
            n /= d;
            ++big;
        }
    }
    if (n > 1) {
        ++w;
        ++big;
    }
    return {w, big};
}

double loglog(double n) { return std::log(std::log(n)); }

double weak_threshold(double C0, double n) {
    return C0 * loglog(n) / std::log(loglog(n));
}

/// Largest n in [lo, hi] with pred(n, omega, Omega), scanning down in segments.
template <class Pred>
std::optional<std::pair<std::uint64_t, int>> scan_down(std::uint64_t lo, std::uint64_t hi,
                                                      const prime_table& table, int workers,
                                                      Pred&& pred) {
    std::uint64_t top = hi;
    for (;;) {
        const std::uint64_t bottom = top - lo + 1 > kSegment ? top - kSegment + 1 : lo;
        const auto wf = factor_window(bottom, top, table, workers);
        for (std::uint64_t n = top;; --n) {
            if (auto c = pred(n, wf.omega(n), wf.big_omega(n))) return std::make_pair(n, *c);
            if (n == bottom) break;
        }
        if (bottom == lo) return std::nullopt;
        top = bottom - 1;
    }
}

} // namespace

// ---- rate functions ---------------------------------------------------------

double rate_function::operator()(std::uint64_t n) const {
    const double ln = std::log(static_cast<double>(n));
    double f = 0.0;
    switch (kind) {
    case rate_kind::log: f = ln; break;
    case rate_kind::iterated_log: f = ln / std::pow(std::log(ln), j - 1); break;
    case rate_kind::constant: f = value; break;
    case rate_kind::table:
        f = values.empty() ? 0.0 : values[std::min<std::size_t>(n, values.size() - 1)];
        break;
    }
    return scale * f;
}

rate_function parse_rate(const std::string& spec) {
    rate_function f;
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    if (head == "log" && arg.empty()) {
        f.kind = rate_kind::log;
    } else if (head == "iterated_log") {
        f.kind = rate_kind::iterated_log;
        f.j = arg.empty() ? 2 : static_cast<int>(parse_param_u64("f", arg));
        require(f.j >= 1 && f.j <= 16, errc::invalid_argument, "f: iterated_log exponent j must be in [1, 16]");
    } else if (head == "constant" && !arg.empty()) {
        f.kind = rate_kind::constant;
        f.value = parse_param_real("f", arg);
    } else if (head == "table" && !arg.empty()) {
        f.kind = rate_kind::table;
        std::size_t pos = 0;
        while (pos <= arg.size()) {
            const auto comma = std::min(arg.find(',', pos), arg.size());
            f.values.push_back(parse_param_real("f", arg.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    } else {
        fail(errc::invalid_argument, "f: expected log, iterated_log:J, constant:V or table:v0,v1,..., got '" + spec + "'");
    }
    return f;
}

std::string rate_name(const rate_function& f) {
    switch (f.kind) {
    case rate_kind::log: return "log";
    case rate_kind::iterated_log: return "iterated_log:" + std::to_string(f.j);
    case rate_kind::constant: return "constant";
    case rate_kind::table: return "table";
    }
    return "?";
}

std::uint64_t cramer_config::effective_warmup() const {
    if (warmup != 0) return warmup;
    const auto q = static_cast<std::uint64_t>(std::ceil(std::pow(static_cast<double>(N), 0.25)));
    return std::max<std::uint64_t>(3, q);
}

void validate(const cramer_config& c) {
    require(c.trials >= 1, errc::invalid_argument, "trials must be at least 1");
    require(c.N >= 3 && c.N <= 10'000'000'000ull, errc::invalid_argument, "N must be in [3, 1e10]");
    require(c.f.scale > 0 && std::isfinite(c.f.scale), errc::invalid_argument, "f scale must be positive");
    const auto w0 = c.effective_warmup();
    require(w0 >= 3, errc::invalid_argument, "warmup must be at least 3");
    require(w0 <= c.N, errc::invalid_argument, "warmup exceeds N");
    if (c.f.kind == rate_kind::log) {
        require(c.f(w0) > 1.0, errc::invalid_argument, "f(n) must exceed 1 from the warmup on");
        return;
    }
    if (c.f.kind == rate_kind::constant) {
        require(c.f(w0) > 1.0, errc::invalid_argument, "f must exceed 1");
        return;
    }
    if (c.f.kind == rate_kind::table) require(!c.f.values.empty(), errc::invalid_argument, "empty f table");
    for (std::uint64_t n = w0; n <= c.N; ++n) {
        const double v = c.f(n);
        if (!(v > 1.0))
            fail(errc::invalid_argument, "f(" + std::to_string(n) + ") = " + std::to_string(v) + " is not above 1");
        if (c.f.kind == rate_kind::table && n >= c.f.values.size()) break;
    }
}

// ---- gap simulation ---------------------------------------------------------

trial_result simulate_trial(const cramer_config& c, int trial, bool keep_gaps) {
    trial_result r;
    r.trial = trial;
    r.histogram.assign(kGapBins + 1, 0);
    std::mt19937_64 gen(stream_seed(c.seed, static_cast<std::uint64_t>(trial)));
    const auto w0 = c.effective_warmup();
    std::uint64_t prev = 0;
    for (std::uint64_t n = w0; n <= c.N; ++n) {
        const double f = c.f(n);
        if (!(unit_double(gen) < 1.0 / f)) continue;
        if (prev != 0) {
            const std::uint64_t gap = n - prev;
            const double ratio = static_cast<double>(gap) / (c.f(prev) * std::log(static_cast<double>(prev)));
            r.max_ratio = std::max(r.max_ratio, ratio);
            r.gap_sum += gap;
            const auto bin = static_cast<std::size_t>(std::min<double>(ratio / kGapBinWidth, kGapBins));
            ++r.histogram[bin];
            if (keep_gaps) r.gaps.push_back({r.successes - 1, prev, gap, ratio});
            ++r.gap_count;
        }
        ++r.successes;
        prev = n;
    }
    return r;
}

int gap_report::trials_at_most(double bound) const {
    return static_cast<int>(std::count_if(max_ratio.begin(), max_ratio.end(),
                                          [&](double m) { return m <= bound; }));
}

gap_accumulator::gap_accumulator(const cramer_config& c) {
    rep_.seed = c.seed;
    rep_.histogram.assign(kGapBins + 1, 0);
}

void gap_accumulator::add(const trial_result& r) {
    require(r.trial == rep_.trials, errc::internal, "gap trials merged out of order");
    ++rep_.trials;
    rep_.max_ratio.push_back(r.max_ratio);
    rep_.successes.push_back(r.successes);
    rep_.gap_count += r.gap_count;
    gap_total_ += r.gap_sum;
    for (std::size_t i = 0; i < rep_.histogram.size(); ++i) rep_.histogram[i] += r.histogram[i];
}

gap_report gap_accumulator::finish() const {
    gap_report out = rep_;
    out.empty = out.gap_count == 0;
    out.mean_gap = out.empty ? 0.0 : static_cast<double>(gap_total_) / static_cast<double>(out.gap_count);
    return out;
}

gap_report simulate_gaps(const cramer_config& c, int workers) {
    validate(c);
    std::vector<trial_result> results(static_cast<std::size_t>(c.trials));
    parallel_chunks(results.size(), workers,
                    [&](std::size_t t) { results[t] = simulate_trial(c, static_cast<int>(t), false); });
    gap_accumulator acc(c);
    for (const auto& r : results) acc.add(r);
    return acc.finish();
}

// ---- pi_k -------------------------------------------------------------------

std::vector<std::uint64_t> count_pi_all(std::uint64_t x, int workers) {
    require(x >= 1, errc::invalid_argument, "x must be at least 1");
    require(x <= kPiBudget, errc::budget_exceeded, "x exceeds the pi_k budget of 4e9");
    const prime_table table = table_up_to_sqrt(x);
    const auto primes = table.primes_in(1, isqrt(x));
    const std::uint64_t segments = (x - 1 + kSegment - 1) / kSegment;  // covers [2, x]
    std::vector<std::vector<std::uint64_t>> partial(segments);
    parallel_chunks(segments, workers, [&](std::size_t s) {
        const std::uint64_t lo = 2 + s * kSegment;
        const std::uint64_t hi = std::min(x, lo + kSegment - 1);
        const std::size_t len = hi - lo + 1;
        std::vector<std::uint64_t> rem(len);
        std::vector<std::uint8_t> cnt(len, 0);
        for (std::size_t i = 0; i < len; ++i) rem[i] = lo + i;
        for (const auto p : primes) {
            if (p * p > hi) break;
            for (std::uint64_t m = (lo + p - 1) / p * p; m <= hi; m += p) {
                const std::size_t i = m - lo;
                ++cnt[i];
                do rem[i] /= p;
                while (rem[i] % p == 0);
            }
        }
        auto& out = partial[s];
        for (std::size_t i = 0; i < len; ++i) {
            const int k = cnt[i] + (rem[i] > 1 ? 1 : 0);
            if (out.size() <= static_cast<std::size_t>(k)) out.resize(k + 1, 0);
            ++out[k];
        }
    });
    std::vector<std::uint64_t> counts(1, 0);
    for (const auto& part : partial) {
        if (counts.size() < part.size()) counts.resize(part.size(), 0);
        for (std::size_t k = 0; k < part.size(); ++k) counts[k] += part[k];
    }
    return counts;
}

std::uint64_t count_pi_k(std::uint64_t x, int k, int workers) {
    require(k >= 1, errc::invalid_argument, "k must be at least 1");
    const auto counts = count_pi_all(x, workers);
    return static_cast<std::size_t>(k) < counts.size() ? counts[k] : 0;
}

double pi_k_lower_shape(std::uint64_t x, int k) {
    require(x >= 3, errc::invalid_argument, "x must be at least 3");
    require(k >= 1, errc::invalid_argument, "k must be at least 1");
    const double lx = std::log(static_cast<double>(x));
    return std::exp(std::log(static_cast<double>(x) / lx) + (k - 1) * std::log(std::log(lx)) -
                    std::lgamma(static_cast<double>(k)));
}

double density_ratio(std::uint64_t x, int k, int workers) {
    const double shape = pi_k_lower_shape(x, k);
    return static_cast<double>(count_pi_k(x, k, workers)) / shape;
}

// ---- window searches ----------------------------------------------------------

const char* variant_name(window_variant v) {
    switch (v) {
    case window_variant::a_omega: return "A-omega";
    case window_variant::b_big_omega: return "B-Omega";
    case window_variant::weak: return "weak";
    }
    return "?";
}

window_variant parse_variant(const std::string& s) {
    if (s == "A-omega" || s == "A") return window_variant::a_omega;
    if (s == "B-Omega" || s == "B") return window_variant::b_big_omega;
    if (s == "weak") return window_variant::weak;
    fail(errc::invalid_argument, "variant must be A-omega, B-Omega or weak, got '" + s + "'");
}

window_result window_search(std::uint64_t x, window_variant v, double p1, double p2, int workers) {
    require(x >= 3, errc::invalid_argument, "x must be at least 3");
    require(x <= kMaxSearchX, errc::budget_exceeded, "x exceeds the search budget of 1e14");
    require(std::isfinite(p1) && std::isfinite(p2) && p1 > 0 && p2 > 0, errc::invalid_argument,
            "window parameters must be positive");
    window_result r;
    r.x = x;
    r.variant = v;
    r.p1 = p1;
    r.p2 = p2;
    const double xd = static_cast<double>(x);
    r.length = v == window_variant::weak ? std::pow(std::log(xd / 2), p2)
                                         : p2 * std::log(xd) * std::sqrt(loglog(xd));
    require(std::isfinite(r.length) && r.length >= 1.0, errc::invalid_argument,
            "degenerate window: length below 1");
    const double start = std::floor(xd - r.length) + 1.0;
    r.lo = start <= 2.0 ? 2 : static_cast<std::uint64_t>(start);
    r.hi = x;
    require(r.hi - r.lo < kScanBudget, errc::budget_exceeded, "window exceeds the scan budget of 1e8");
    const prime_table table = table_up_to_sqrt(x);
    const auto hit = scan_down(r.lo, r.hi, table, workers,
                               [&](std::uint64_t n, int w, int big) -> std::optional<int> {
        const double nd = static_cast<double>(n);
        switch (v) {
        case window_variant::a_omega:
            if (w >= p1 * loglog(nd)) return w;
            break;
        case window_variant::b_big_omega:
            if (big >= p1 * loglog(nd)) return big;
            break;
        case window_variant::weak:
            if (std::log(loglog(nd)) > 0 && w >= weak_threshold(p1, nd)) return w;
            break;
        }
        return std::nullopt;
    });
    if (hit) {
        const auto [w, big] = trial_division_counts(hit->first);
        const int check = v == window_variant::b_big_omega ? big : w;
        require(check == hit->second, errc::internal, "window witness failed trial-division recheck");
        r.witness = hit->first;
        r.witness_count = hit->second;
    }
    return r;
}

refuter_result erdos679_refuter(std::uint64_t n, double delta, std::uint64_t budget,
                                std::optional<std::pair<double, double>> c0_d) {
    require(n >= 1'000'000, errc::invalid_argument, "n must be at least 1e6");
    require(n <= kMaxSearchX, errc::budget_exceeded, "n exceeds the search budget of 1e14");
    require(delta > 0 && std::isfinite(delta), errc::invalid_argument, "delta must be positive");
    require(budget >= 3, errc::invalid_argument, "budget must be at least 3");
    require(budget < kScanBudget, errc::budget_exceeded, "budget exceeds 1e8");
    refuter_result r;
    r.n = n;
    r.delta = delta;
    r.budget = std::min(budget, n - 2);
    const prime_table table = table_up_to_sqrt(n);

    // k ascending means n - k descending, so scan_down over [n - budget, n - 3] finds the first k.
    const auto hit = scan_down(n - r.budget, n - 3, table, 1,
                               [&](std::uint64_t m, int w, int) -> std::optional<int> {
        const double k = static_cast<double>(n - m);
        if (w > (1.0 + delta) * std::log(k) / loglog(k)) return w;
        return std::nullopt;
    });
    if (hit) {
        const std::uint64_t k = n - hit->first;
        const double kd = static_cast<double>(k);
        r.k = k;
        r.omega_value = hit->second;
        r.threshold = (1.0 + delta) * std::log(kd) / loglog(kd);
        require(trial_division_counts(hit->first).first == hit->second && hit->second > r.threshold,
                errc::internal, "refuter witness failed recheck");
    }

    if (c0_d) {
        const auto [C0, d] = *c0_d;
        require(C0 > 0 && d > 0 && std::isfinite(C0) && std::isfinite(d), errc::invalid_argument,
                "C0 and d must be positive");
        const double L = std::pow(std::log(static_cast<double>(n) / 2), d);
        const double start = std::floor(static_cast<double>(n) - L) + 1.0;
        const std::uint64_t lo = start <= 2.0 ? 2 : static_cast<std::uint64_t>(start);
        // witnesses m = n - k with k >= 3, so that log log k > 0
        if (lo + 3 <= n && n - lo < kScanBudget) {
            const auto wit = scan_down(lo, n - 3, table, 1,
                                       [&](std::uint64_t m, int w, int) -> std::optional<int> {
                const double md = static_cast<double>(m);
                if (std::log(loglog(md)) > 0 && w >= weak_threshold(C0, md)) return w;
                return std::nullopt;
            });
            if (wit) {
                const double kd = static_cast<double>(n - wit->first);
                r.chain_checked = true;
                r.chain_k = n - wit->first;
                r.chain_omega = wit->second;
                r.chain_bound = (1.0 + (C0 / d - 1.0)) * std::log(kd) / loglog(kd);
                r.chain_holds = static_cast<double>(wit->second) >= r.chain_bound;
            }
        }
    }
    return r;
}

} // namespace roughn
