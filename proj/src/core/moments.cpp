#include "roughn/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "roughn/errors.hpp"
#include "roughn/parallel.hpp"

namespace roughn {

stirling_table::stirling_table(int max_s) : max_s_(max_s) {
    require(max_s >= 0 && max_s <= 2000, errc::invalid_argument, "stirling table size out of range");
    rows_.resize(max_s + 1);
    rows_[0] = {big_int(1)};
    for (int s = 1; s <= max_s; ++s) {
        rows_[s].assign(s + 1, big_int(0));
        for (int t = 1; t <= s; ++t) {
            big_int v = rows_[s - 1][t - 1];
            if (t <= s - 1) v += big_int(t) * rows_[s - 1][t];
            rows_[s][t] = std::move(v);
        }
    }
}

const big_int& stirling_table::operator()(int s, int t) const {
    require(s >= 0 && s <= max_s_ && t >= 0 && t <= s, errc::invalid_argument, "stirling index out of range");
    return rows_[s][t];
}

big_int stirling2(int s, int t) {
    require(t >= 1 && t <= s && s <= 400, errc::invalid_argument, "stirling2 needs 1 <= t <= s <= 400");
    static const stirling_table table(400);
    return table(s, t);
}

bool stirling_identity_check(int s, int m) {
    require(s >= 1, errc::invalid_argument, "identity needs s >= 1");
    require(m >= 2 * s, errc::invalid_argument, "identity needs m >= 2s");
    const stirling_table st(2 * s);
    big_int lhs = 0, falling = 1;
    for (int j = 1; j <= 2 * s; ++j) {
        falling *= (m - j + 1);
        lhs += st(2 * s, j) * falling;
    }
    big_int rhs = 1;
    for (int i = 0; i < 2 * s; ++i) rhs *= m;
    return lhs == rhs;
}

double stirling_kappa_fit(int s_lo, int s_hi) {
    require(s_lo >= 2 && s_lo <= s_hi && s_hi <= 400, errc::invalid_argument, "kappa fit range");
    const stirling_table st(s_hi);
    double kappa = 0.0;
    for (int s = s_lo; s <= s_hi; ++s) {
        const double scale = s * std::log(s / std::log(static_cast<double>(s)));
        for (int t = 1; t <= s; ++t) {
            const double lv = std::log(st(s, t).convert_to<double>());
            kappa = std::max(kappa, std::exp(lv - scale));
        }
    }
    return kappa;
}

falling_factorial_check falling_factorial_bound(int m_max) {
    require(m_max >= 2 && m_max <= 400, errc::invalid_argument, "m_max out of range");
    // e_lo = sum_{i<=24} 1/i! < e < e_lo + 2/25!
    big_rational e_lo = 0, term = 1;
    for (int i = 0; i <= 24; ++i) {
        if (i > 0) term /= i;
        e_lo += term;
    }
    falling_factorial_check out;
    for (int m = 2; m <= m_max; ++m) {
        for (int j = 1; 3 * j <= 2 * m; ++j) {
            big_int mj = 1, falling = 1;
            for (int i = 0; i < j; ++i) {
                mj *= m;
                falling *= (m - i);
            }
            big_rational ej = 1;
            for (int i = 0; i < j; ++i) ej *= e_lo;
            ++out.checked;
            if (big_rational(mj) > ej * big_rational(falling)) ++out.failures;
        }
    }
    return out;
}

c1_validation validate_C1(double C1, double C2, double C3, double A) {
    require(C2 > 1.0 && C3 > 0.0 && A > 0.0, errc::invalid_argument, "C2 > 1, C3 > 0, A > 0 required");
    c1_validation v;
    v.c3_prime = std::max(C3, 66.0 * std::log(C2) / std::numbers::ln2);
    const double e = std::numbers::e;
    v.required = std::max({8.0 * e * v.c3_prime, 132.0 * A * e, std::ldexp(e, 19)});
    v.ok = C1 >= v.required;
    return v;
}

partition_sum partition_sum_G(int s3, double R) {
    require(s3 >= 1, errc::invalid_argument, "s3 must be >= 1");
    if (s3 > 10) fail(errc::budget_exceeded, "partition enumeration limited to s3 <= 10");
    require(std::isfinite(R) && R > 2.0, errc::invalid_argument, "R must exceed 2");
    partition_sum out;

    // restricted growth strings; block sizes suffice for the product
    std::vector<int> sizes(s3 + 1, 0);
    double total = 0.0;
    std::function<void(int, int)> rec = [&](int i, int blocks) {
        if (i == s3) {
            double prod = 1.0;
            for (int b = 0; b < blocks; ++b)
                prod *= std::ldexp(1.0, 2 * sizes[b] + 1) / std::pow(R, 2 * sizes[b] - 1);
            total += prod;
            ++out.partitions;
            return;
        }
        for (int b = 0; b <= blocks; ++b) {
            ++sizes[b];
            rec(i + 1, std::max(blocks, b + 1));
            --sizes[b];
        }
    };
    rec(0, 0);
    out.enumeration = total;

    // n g_n = sum_{m=1}^n m a_m g_{n-m}, a_m = 2^{2m+1} / (R^{2m-1} m!)
    const big_rational r(R);
    std::vector<big_rational> a(s3 + 1), g(s3 + 1);
    big_rational rpow = r, fact = 1;  // R^{2m-1}, m!
    for (int m = 1; m <= s3; ++m) {
        fact *= m;
        if (m > 1) rpow *= r * r;
        a[m] = big_rational(big_int(1) << (2 * m + 1)) / (rpow * fact);
    }
    g[0] = 1;
    for (int n = 1; n <= s3; ++n) {
        big_rational acc = 0;
        for (int m = 1; m <= n; ++m) acc += big_rational(m) * a[m] * g[n - m];
        g[n] = acc / n;
    }
    out.egf = static_cast<double>(g[s3] * fact);
    out.relative_difference = std::abs(out.enumeration - out.egf) / std::abs(out.egf);
    return out;
}

double log_rho(const std::vector<double>& alpha) {
    static constexpr double q[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    require(!alpha.empty() && alpha.size() <= std::size(q), errc::invalid_argument, "rho_r needs 1 <= r <= 12");
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double a = alpha[i];
        if (a > 0.0) s += a * (std::log(32.0) - std::log(a) - 5.0 * std::log(q[i]));
    }
    return s;
}

rho_report rho_r_maximize(int r, double step) {
    require(r >= 1 && r <= 6, errc::invalid_argument, "rho_r_maximize needs 1 <= r <= 6");
    require(step > 0.0 && step <= 0.5, errc::invalid_argument, "step must lie in (0, 1/2]");
    const long N = std::lround(1.0 / step);
    require(std::abs(N * step - 1.0) < 1e-9, errc::invalid_argument, "1/step must be an integer");
    // partitions of N into at most r parts ~ N^{r-1} / ((r-1)! r!)
    double est = 1.0;
    for (int i = 1; i < r; ++i) est *= static_cast<double>(N) / i;
    for (int i = 1; i <= r; ++i) est /= i;
    if (est > 5e7) fail(errc::budget_exceeded, "rho_r grid too fine for r = " + std::to_string(r));

    rho_report rep;
    rep.r = r;
    rep.step = step;
    std::vector<long> parts(r);
    std::vector<double> alpha(r);
    rep.max_log_rho = -INFINITY;
    std::function<void(int, long, long)> rec = [&](int i, long lo, long remaining) {
        if (i == r - 1) {
            if (remaining < lo) return;
            parts[i] = remaining;
            for (int j = 0; j < r; ++j) alpha[j] = parts[j] * step;
            const double v = log_rho(alpha);
            ++rep.grid_points;
            if (v > rep.max_log_rho) {
                rep.max_log_rho = v;
                rep.argmax = alpha;
            }
            return;
        }
        // remaining parts are >= this one, so it is at most remaining / (r - i)
        for (long v = lo; v * (r - i) <= remaining; ++v) {
            parts[i] = v;
            rec(i + 1, v, remaining - v);
        }
    };
    rec(0, 0, N);
    std::vector<double> uni(r, 1.0 / r);
    rep.uniform_log_rho = log_rho(uni);
    for (int j = 0; j < r; ++j)
        rep.distance_to_uniform = std::max(rep.distance_to_uniform, std::abs(rep.argmax[j] - uni[j]));
    return rep;
}

const char* range_name(prime_range r) {
    switch (r) {
    case prime_range::tiny: return "tiny";
    case prime_range::medium: return "medium";
    case prime_range::large: return "large";
    case prime_range::power: return "power";
    }
    return "?";
}

prime_range parse_range(const std::string& s) {
    for (auto r : {prime_range::tiny, prime_range::medium, prime_range::large, prime_range::power})
        if (s == range_name(r)) return r;
    fail(errc::invalid_argument, "unknown prime range '" + s + "'");
}

prime_table table_for(const weight_table& t, int k_max) {
    const std::uint64_t hi = t.n_at(t.count() - 1) + static_cast<std::uint64_t>(k_max);
    auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(hi))) + 2;
    return prime_table(std::max<std::uint64_t>(root, 100));
}

support_factors::support_factors(const weight_table& t, const prime_table& table, int k_max, int workers)
    : wf_(factor_window(t.first() + 1, t.n_at(t.count() - 1) + static_cast<std::uint64_t>(k_max), table,
                        workers)),
      k_max_(k_max) {
    require(k_max >= 1, errc::invalid_argument, "k_max must be >= 1");
}

namespace {

struct range_spec {
    bool empty = false;
    double lo = 0, hi = 0;      // primes in (lo, hi]; power: p^j <= hi
    double center = 0.0;        // sum of 1/p (or 1/p^j) over the range
};

range_spec make_range(const sieve_params& p, int k, prime_range r, const prime_table& small) {
    range_spec rs;
    const double w = static_cast<double>(p.w), R = p.level(k), T = p.large_cutoff(k);
    switch (r) {
    case prime_range::tiny: rs.lo = 0; rs.hi = w; break;
    case prime_range::medium: rs.lo = w; rs.hi = R; break;
    case prime_range::large: rs.lo = R; rs.hi = T; break;
    case prime_range::power: rs.lo = 0; rs.hi = T; break;
    }
    if (r == prime_range::power) {
        for (std::uint64_t q : small.primes()) {
            const double qd = static_cast<double>(q);
            if (qd * qd > rs.hi) break;
            for (double pj = qd * qd; pj <= rs.hi; pj *= qd) rs.center += 1.0 / pj;
        }
        rs.empty = rs.hi < 4.0;
    } else {
        require(rs.hi <= static_cast<double>(small.limit()), errc::table_too_small, "range exceeds prime table");
        std::size_t cnt = 0;
        for (std::uint64_t q : small.primes()) {
            const double qd = static_cast<double>(q);
            if (qd > rs.hi) break;
            if (qd > rs.lo) {
                rs.center += 1.0 / qd;
                ++cnt;
            }
        }
        rs.empty = cnt == 0;
    }
    return rs;
}

int range_count(std::span<const prime_power> f, prime_range r, const range_spec& rs) {
    int c = 0;
    for (auto pp : f) {
        const double qd = static_cast<double>(pp.prime);
        if (r == prime_range::power) {
            double pj = qd;
            for (std::uint32_t j = 2; j <= pp.exponent; ++j) {
                pj *= qd;
                if (pj <= rs.hi) ++c;
            }
        } else if (qd > rs.lo && qd <= rs.hi) {
            ++c;
        }
    }
    return c;
}

double paper_bound_for(prime_range r, int k, int s, double C3, const sieve_params& p) {
    const double lk = std::log(static_cast<double>(std::max(k, 2)));
    switch (r) {
    case prime_range::tiny: return std::pow(lk / std::numbers::ln2, s);
    case prime_range::medium: return std::pow(2.0 * C3 * s, s);
    case prime_range::large: return std::pow(132.0 * p.A * lk, s);
    case prime_range::power: return std::pow(2.0, s);
    }
    return 0.0;
}

std::size_t range_table_limit(const sieve_params& p, int k) {
    const double top = std::max({static_cast<double>(p.w), p.level(k), std::min(p.large_cutoff(k), 2e7)});
    return static_cast<std::size_t>(std::max(100.0, top + 1));
}

} // namespace

moment_report exact_centered_moment(const weight_table& t, const support_factors& f, int k, prime_range range,
                                    int s, bool centered, double C3, int workers) {
    require(s >= 1 && s <= 12, errc::invalid_argument, "moment order must lie in [1, 12]");
    require(k >= 1 && k <= f.k_max(), errc::invalid_argument, "shift outside the factored range");
    const auto& p = t.params();
    const prime_table small(range_table_limit(p, k));
    const range_spec rs = make_range(p, k, range, small);

    moment_report rep;
    rep.k = k;
    rep.range = range;
    rep.s = s;
    rep.centered = centered;
    rep.empty_range = rs.empty;
    rep.paper_bound = paper_bound_for(range, k, s, C3, p);
    if (rs.empty) return rep;

    const std::size_t n = t.count();
    std::vector<double> signed_terms(n), abs_terms(n);
    const double shift = centered ? rs.center : 0.0;
    constexpr std::size_t kChunk = 1 << 14;
    parallel_chunks((n + kChunk - 1) / kChunk, workers, [&](std::size_t c) {
        const std::size_t i1 = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < i1; ++i) {
            const double wgt = t.nu_at(i) / t.total();
            const int cnt = range_count(f.window().factors(t.n_at(i) + k), range, rs);
            const double xv = cnt - shift;
            const double pw = std::pow(xv, s);
            signed_terms[i] = wgt * pw;
            abs_terms[i] = wgt * std::abs(pw);
        }
    });
    rep.exact_moment = pairwise_sum(signed_terms.data(), n);
    rep.abs_moment = pairwise_sum(abs_terms.data(), n);
    rep.ratio = rep.paper_bound > 0.0 ? rep.abs_moment / rep.paper_bound : 0.0;
    return rep;
}

double exact_tail(const weight_table& t, const support_factors& f, int k, prime_range range, bool centered,
                  double r) {
    require(k >= 1 && k <= f.k_max(), errc::invalid_argument, "shift outside the factored range");
    const auto& p = t.params();
    const prime_table small(range_table_limit(p, k));
    const range_spec rs = make_range(p, k, range, small);
    const double shift = centered ? rs.center : 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < t.count(); ++i) {
        const int cnt = rs.empty ? 0 : range_count(f.window().factors(t.n_at(i) + k), range, rs);
        if (std::abs(cnt - shift) >= r) s += t.nu_at(i);
    }
    return s / t.total();
}

double chebyshev_tail(double moment, double r, int s) {
    require(r > 0.0, errc::invalid_argument, "chebyshev_tail needs r > 0");
    require(s >= 1, errc::invalid_argument, "chebyshev_tail needs s >= 1");
    require(moment >= 0.0, errc::invalid_argument, "chebyshev_tail needs a nonnegative moment");
    return std::clamp(moment / std::pow(r, s), 0.0, 1.0);
}

double trivial_tail_bound(std::uint64_t n, std::uint64_t k) {
    require(n + k >= 2, errc::invalid_argument, "trivial_tail_bound needs n + k >= 2");
    return std::log2(static_cast<double>(n + k));
}

double record_score(std::uint64_t n, const window_factors& wf, int k_max) {
    double best = 0.0;
    for (int k = 2; k <= k_max; ++k) {
        int big = 0;
        for (auto pp : wf.factors(n + k)) big += static_cast<int>(pp.exponent);
        best = std::max(best, big / std::log(static_cast<double>(k)));
    }
    return best;
}

union_bound_report union_bound(const weight_table& t, const support_factors& f, double C, int k_max) {
    require(k_max >= 2 && k_max <= f.k_max(), errc::invalid_argument, "k_max outside the factored range");
    require(C >= 0.0, errc::invalid_argument, "C must be nonnegative");
    union_bound_report rep;
    rep.C = C;
    rep.k_max = k_max;
    rep.tail.assign(k_max - 1, 0.0);
    rep.witness_score = INFINITY;
    std::vector<double> thresh(k_max + 1);
    for (int k = 2; k <= k_max; ++k) thresh[k] = C * std::log(static_cast<double>(k));
    for (std::size_t i = 0; i < t.count(); ++i) {
        const double wgt = t.nu_at(i);
        if (wgt == 0.0) continue;
        const std::uint64_t n = t.n_at(i);
        double score = 0.0;
        for (int k = 2; k <= k_max; ++k) {
            int big = 0;
            for (auto pp : f.window().factors(n + k)) big += static_cast<int>(pp.exponent);
            if (big > thresh[k]) rep.tail[k - 2] += wgt;
            score = std::max(score, big / std::log(static_cast<double>(k)));
        }
        if (score < rep.witness_score) {
            rep.witness_score = score;
            rep.witness = n;
        }
    }
    for (auto& v : rep.tail) {
        v /= t.total();
        rep.sum += v;
    }
    return rep;
}

omega_parts omega_decomposition(std::uint64_t n, int k, const sieve_params& p, const prime_table& table) {
    require(k >= 1, errc::invalid_argument, "shift must be >= 1");
    const double R = p.level(k), T = p.large_cutoff(k);
    omega_parts out;
    for (auto pp : factorize(n + static_cast<std::uint64_t>(k), table)) {
        const double q = static_cast<double>(pp.prime);
        if (pp.prime <= p.w)
            ++out.tiny;
        else if (q <= R)
            ++out.medium;
        else if (q <= T)
            ++out.large;
        else
            ++out.very_large;
        for (std::uint32_t j = 2; j <= pp.exponent; ++j) {
            if (pp.prime > p.w)
                ++out.power_rough;
            else if (j <= 4)
                ++out.power_tiny_low;
            else
                ++out.power_tiny_high;
        }
    }
    return out;
}

} // namespace roughn
