#include "roughn/sieve.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "roughn/errors.hpp"
#include "roughn/parallel.hpp"
#include "roughn/report.hpp"
#include "roughn/rng.hpp"

namespace roughn {

namespace {

std::vector<std::uint64_t> small_primes_upto(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t m = 2; m <= n; ++m) {
        bool prime = true;
        for (std::uint64_t p : out) {
            if (p * p > m) break;
            if (m % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) out.push_back(m);
    }
    return out;
}

bool is_rough_squarefree(std::uint64_t d, std::uint64_t w) {
    for (std::uint64_t p = 2; p * p <= d; ++p) {
        if (d % p != 0) continue;
        if (p <= w) return false;
        d /= p;
        if (d % p == 0) return false;
    }
    return d == 1 || d > w;
}

// Sum of mu(d) * weight(d) over squarefree d < R built from `divs`.
template <class Weight>
double subset_sum(const std::uint64_t* divs, int r, double R, Weight&& weight) {
    double s = 0.0;
    // depth-first over subsets in lexicographic order; products only grow
    struct frame {
        int next;
        std::uint64_t d;
        int sign;
    };
    frame stack[64];
    int top = 0;
    stack[top++] = {0, 1, 1};
    while (top > 0) {
        const frame f = stack[--top];
        s += f.sign * weight(f.d);
        for (int i = r - 1; i >= f.next; --i) {
            const std::uint64_t nd = f.d * divs[i];
            if (static_cast<double>(nd) < R) stack[top++] = {i + 1, nd, -f.sign};
        }
    }
    return s;
}

template <class Weight>
big_int subset_sum_exact(const std::uint64_t* divs, int r, double R, Weight&& weight) {
    std::int64_t s = 0;
    struct frame {
        int next;
        std::uint64_t d;
        int sign;
    };
    frame stack[64];
    int top = 0;
    stack[top++] = {0, 1, 1};
    while (top > 0) {
        const frame f = stack[--top];
        s += f.sign * weight(f.d);
        for (int i = r - 1; i >= f.next; --i) {
            const std::uint64_t nd = f.d * divs[i];
            if (static_cast<double>(nd) < R) stack[top++] = {i + 1, nd, -f.sign};
        }
    }
    return big_int(s);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

} // namespace

std::uint64_t parse_param_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec == std::errc() && ptr == v.data() + v.size()) return out;
    // allow 1e6 style when it denotes an exact integer
    double d = 0.0;
    auto [p2, e2] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (e2 == std::errc() && p2 == v.data() + v.size() && d >= 0 && d < 9.2e18 && std::floor(d) == d)
        return static_cast<std::uint64_t>(d);
    fail(errc::invalid_argument, "parameter " + key + ": expected a nonnegative integer, got '" + v + "'");
}

double parse_param_real(const std::string& key, const std::string& v) {
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(d))
        fail(errc::invalid_argument, "parameter " + key + ": expected a real number, got '" + v + "'");
    return d;
}

std::uint64_t sieve_params::W() const {
    unsigned __int128 prod = 1;
    for (std::uint64_t p : small_primes_upto(w)) {
        for (int i = 0; i < a; ++i) {
            prod *= p;
            require(prod <= (static_cast<unsigned __int128>(1) << 62), errc::invalid_argument,
                    "W = prod_{p<=w} p^a overflows 62 bits");
        }
    }
    return static_cast<std::uint64_t>(prod);
}

double sieve_params::level(int k) const {
    const double r = std::pow(static_cast<double>(x), c / std::pow(static_cast<double>(k), gamma));
    return std::max(static_cast<double>(w), r);
}

double sieve_params::effective_level(int k) const {
    const double r = level(k);
    return r > static_cast<double>(w) ? r : 1.0;
}

double sieve_params::large_cutoff(int k) const {
    const double lk = std::log(static_cast<double>(std::max(k, 2)));
    return std::pow(static_cast<double>(x), T_exponent / (A * lk));
}

double sieve_params::theta() const {
    double s = std::log(static_cast<double>(W()));
    for (int k = 1; k <= K; ++k) s += 2.0 * std::log(effective_level(k));
    return s / std::log(static_cast<double>(x));
}

std::vector<std::uint64_t> sieve_params::tiny_primes() const { return small_primes_upto(w); }

void validate(const sieve_params& p) {
    require(p.x >= 2 && p.x <= (1ull << 61), errc::invalid_argument, "x must lie in [2, 2^61]");
    require(p.K >= 1, errc::invalid_argument, "K must be >= 1");
    require(p.w >= 2 && p.w <= 1000, errc::invalid_argument, "w must lie in [2, 1000]");
    require(static_cast<std::uint64_t>(p.K) <= p.w, errc::invalid_argument,
            "K must not exceed w (uniqueness of k_{*,p} needs K <= w < p)");
    require(p.a >= 1 && p.a <= 64, errc::invalid_argument, "a must lie in [1, 64]");
    require(std::isfinite(p.c) && p.c > 0.0, errc::invalid_argument, "c must be positive");
    require(std::isfinite(p.gamma) && p.gamma >= 0.0, errc::invalid_argument, "gamma must be >= 0");
    require(std::isfinite(p.T_exponent) && p.T_exponent > 0.0, errc::invalid_argument,
            "T_exponent must be positive");
    require(std::isfinite(p.A) && p.A > 0.0, errc::invalid_argument, "A must be positive");
    require(p.k_max >= 2, errc::invalid_argument, "k_max must be >= 2");
    (void)p.W();
    const double th = p.theta();
    require(th < 1.0, errc::invalid_argument,
            "infeasible parameters: W * prod R_k^2 = x^" + format_real(th) + " needs exponent < 1");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, errc::invalid_argument,
                "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        require(!key.empty() && !val.empty(), errc::invalid_argument,
                "line " + std::to_string(lineno) + ": empty key or value");
        require(out.emplace(key, val).second, errc::invalid_argument, "duplicate key " + key);
    }
    return out;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(errc::io_error, "cannot open parameter file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_key_values(ss.str());
}

sieve_params apply_sieve_keys(sieve_params p, std::map<std::string, std::string>& kv) {
    auto take = [&](const char* key, auto&& apply) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        apply(it->first, it->second);
        kv.erase(it);
    };
    auto as_int = [](const std::string& k, const std::string& v) {
        const auto u = parse_param_u64(k, v);
        require(u <= 1'000'000'000ull, errc::invalid_argument, "parameter " + k + " too large");
        return static_cast<int>(u);
    };
    take("x", [&](auto& k, auto& v) { p.x = parse_param_u64(k, v); });
    take("K", [&](auto& k, auto& v) { p.K = as_int(k, v); });
    take("w", [&](auto& k, auto& v) { p.w = parse_param_u64(k, v); });
    take("a", [&](auto& k, auto& v) { p.a = as_int(k, v); });
    take("c", [&](auto& k, auto& v) { p.c = parse_param_real(k, v); });
    take("gamma", [&](auto& k, auto& v) { p.gamma = parse_param_real(k, v); });
    take("T_exponent", [&](auto& k, auto& v) { p.T_exponent = parse_param_real(k, v); });
    take("A", [&](auto& k, auto& v) { p.A = parse_param_real(k, v); });
    take("k_max", [&](auto& k, auto& v) { p.k_max = as_int(k, v); });
    return p;
}

level_weights::level_weights(const sieve_params& p, const bump& b) {
    values_.resize(p.K);
    primes_.resize(p.K);
    for (int k = 1; k <= p.K; ++k) {
        const double R = p.level(k);
        auto& vals = values_[k - 1];
        if (!(R > static_cast<double>(p.w))) {
            vals.assign(2, 0.0);
            vals[1] = b.eta_tilde(0.0);
            continue;
        }
        require(R <= 1e7, errc::budget_exceeded, "sieve level R_k above 10^7 is outside the desk budget");
        const auto top = static_cast<std::uint64_t>(std::ceil(R)) - 1;  // largest d < R
        const std::uint64_t dmax = (static_cast<double>(top) < R) ? top : top - 1;
        vals.assign(dmax + 1, 0.0);
        const double logR = std::log(R);
        for (std::uint64_t d = 1; d <= dmax; ++d) {
            if (!is_rough_squarefree(d, p.w)) continue;
            vals[d] = b.eta_tilde(std::log(static_cast<double>(d)) / logR);
        }
        for (std::uint64_t q : small_primes_upto(dmax))
            if (q > p.w) primes_[k - 1].push_back(q);
    }
}

double level_weights::value(int k, std::uint64_t d) const {
    const auto& v = values_[k - 1];
    return d < v.size() ? v[d] : 0.0;
}

std::int64_t level_weights::dyadic(int k, std::uint64_t d) const {
    return std::llround(std::ldexp(value(k, d), 40));
}

namespace {

void check_window(std::uint64_t n, const sieve_params& p) {
    require(n >= p.x && n <= 2 * p.x, errc::invalid_argument, "n outside the window [x, 2x]");
}

} // namespace

double nu_exact(std::uint64_t n, const sieve_params& p, const bump& b) {
    check_window(n, p);
    if (n % p.W() != 0) return 0.0;
    double prod = 1.0;
    for (int k = 1; k <= p.K; ++k) {
        const double R = p.level(k);
        const double logR = std::log(R);
        const std::uint64_t m = n + static_cast<std::uint64_t>(k);
        std::uint64_t divs[64];
        int r = 0;
        for (std::uint64_t q = p.w + 1; static_cast<double>(q) < R; ++q) {
            bool prime = true;
            for (std::uint64_t e = 2; e * e <= q; ++e)
                if (q % e == 0) {
                    prime = false;
                    break;
                }
            if (prime && m % q == 0) divs[r++] = q;
        }
        const double s = subset_sum(divs, r, R, [&](std::uint64_t d) {
            return b.eta_tilde(std::log(static_cast<double>(d)) / logR);
        });
        prod *= s * s;
    }
    return prod;
}

double nu_unpruned(std::uint64_t n, const sieve_params& p, const bump& b) {
    check_window(n, p);
    if (n % p.W() != 0) return 0.0;
    double prod = 1.0;
    for (int k = 1; k <= p.K; ++k) {
        const double logR = std::log(p.level(k));
        std::uint64_t m = n + static_cast<std::uint64_t>(k);
        std::vector<prime_power> f;
        for (std::uint64_t q = 2; q * q <= m; ++q) {
            std::uint32_t e = 0;
            while (m % q == 0) {
                m /= q;
                ++e;
            }
            if (e) f.push_back({q, e});
        }
        if (m > 1) f.push_back({m, 1});
        // every divisor d with (d, P(w)) = 1
        std::vector<std::pair<std::uint64_t, int>> divisors{{1, 1}};
        for (auto pp : f) {
            if (pp.prime <= p.w) continue;
            const std::size_t base = divisors.size();
            std::uint64_t pw = 1;
            for (std::uint32_t e = 1; e <= pp.exponent; ++e) {
                pw *= pp.prime;
                for (std::size_t i = 0; i < base; ++i) {
                    const int mu = (e == 1) ? -divisors[i].second : 0;
                    divisors.push_back({divisors[i].first * pw, mu});
                }
            }
        }
        double s = 0.0;
        for (auto [d, mu] : divisors) {
            if (mu == 0) continue;
            s += mu * b.eta_tilde(std::log(static_cast<double>(d)) / logR);
        }
        prod *= s * s;
    }
    return prod;
}

support_layout support_of(const sieve_params& p) {
    validate(p);
    support_layout s;
    s.W = p.W();
    const std::uint64_t lo = p.x, hi = 2 * p.x;
    s.first = ((lo + s.W - 1) / s.W) * s.W;
    if (s.first > hi) fail(errc::empty_support, "no multiple of W in [x, 2x]");
    s.count = static_cast<std::size_t>((hi - s.first) / s.W + 1);
    require(s.count <= 200'000'000, errc::budget_exceeded, "weight table exceeds the memory budget");
    return s;
}

namespace {

void fill_nu(const sieve_params& p, const level_weights& lw, const support_layout& s, std::size_t i0,
             std::size_t i1, double* out, big_int* exact_out) {
    std::uint64_t divs[64];
    for (std::size_t i = i0; i < i1; ++i) {
        const std::uint64_t n = s.first + i * s.W;
        double prod = 1.0;
        big_int eprod = 1;
        for (int k = 1; k <= p.K; ++k) {
            const std::uint64_t m = n + static_cast<std::uint64_t>(k);
            int r = 0;
            for (std::uint64_t q : lw.sieving_primes(k))
                if (m % q == 0) divs[r++] = q;
            const double R = p.level(k);
            const double sum = subset_sum(divs, r, R, [&](std::uint64_t d) { return lw.value(k, d); });
            prod *= sum * sum;
            if (exact_out) {
                big_int es = subset_sum_exact(divs, r, R, [&](std::uint64_t d) { return lw.dyadic(k, d); });
                eprod *= es * es;
            }
        }
        out[i - i0] = prod;
        if (exact_out) exact_out[i - i0] = eprod;
    }
}

constexpr std::size_t kNuChunk = 1 << 15;

} // namespace

std::vector<double> nu_range(const sieve_params& p, const level_weights& lw, std::size_t i0,
                             std::size_t i1, int workers) {
    const support_layout s = support_of(p);
    require(i0 <= i1 && i1 <= s.count, errc::out_of_range, "support index range outside the window");
    std::vector<double> out(i1 - i0);
    const std::size_t nchunks = (out.size() + kNuChunk - 1) / kNuChunk;
    parallel_chunks(nchunks, workers, [&](std::size_t c) {
        const std::size_t a = i0 + c * kNuChunk, b = std::min(i1, a + kNuChunk);
        fill_nu(p, lw, s, a, b, out.data() + (a - i0), nullptr);
    });
    return out;
}

weight_table weight_table::build(const sieve_params& p, const bump& b, int workers, bool exact) {
    const support_layout s = support_of(p);
    if (exact) require(p.x + 1 <= 10'001, errc::budget_exceeded, "exact mode needs a window of at most 10^4");
    weight_table t;
    t.params_ = p;
    t.W_ = s.W;
    t.first_ = s.first;
    const std::size_t count = s.count;

    const level_weights lw(p, b);
    t.nu_.assign(count, 0.0);
    if (exact) t.exact_nu_.assign(count, big_int(0));

    const std::size_t nchunks = (count + kNuChunk - 1) / kNuChunk;
    parallel_chunks(nchunks, workers, [&](std::size_t c) {
        const std::size_t i0 = c * kNuChunk, i1 = std::min(count, i0 + kNuChunk);
        fill_nu(p, lw, s, i0, i1, t.nu_.data() + i0, exact ? t.exact_nu_.data() + i0 : nullptr);
    });

    t.cumulative_.resize(count);
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        sum += t.nu_[i];
        t.cumulative_[i] = sum;
    }
    t.total_ = sum;
    if (!(sum > 0.0)) fail(errc::empty_support, "all weights vanish on the window");
    if (exact) {
        t.exact_total_ = 0;
        for (const auto& v : t.exact_nu_) t.exact_total_ += v;
    }
    return t;
}

double weight_table::nu(std::uint64_t n) const {
    check_window(n, params_);
    if (n < first_ || (n - first_) % W_ != 0) return 0.0;
    return nu_[(n - first_) / W_];
}

namespace {

// First index i >= 0 with d | first + i*W + k, and the index stride; nullopt if none.
std::optional<std::pair<std::size_t, std::size_t>> lattice_hits(std::uint64_t first, std::uint64_t W,
                                                                std::uint64_t d, std::int64_t k,
                                                                std::size_t count) {
    const std::uint64_t g = gcd_u64(W, d);
    const std::uint64_t stride = d / g;
    const auto kmod = static_cast<std::uint64_t>(((k % static_cast<std::int64_t>(d)) + static_cast<std::int64_t>(d)) %
                                                 static_cast<std::int64_t>(d));
    const std::uint64_t fm = first % d, wm = W % d;
    std::uint64_t r = (fm + kmod) % d;
    for (std::uint64_t i = 0; i < stride && i < count; ++i) {
        if (r == 0) return std::make_pair(static_cast<std::size_t>(i), static_cast<std::size_t>(stride));
        r = static_cast<std::uint64_t>((static_cast<unsigned __int128>(r) + wm) % d);
    }
    return std::nullopt;
}

} // namespace

double weight_table::prob_divides(std::uint64_t d, std::int64_t k) const {
    require(d >= 1, errc::invalid_argument, "prob_divides needs d >= 1");
    const auto hits = lattice_hits(first_, W_, d, k, nu_.size());
    if (!hits) return 0.0;
    double s = 0.0;
    for (std::size_t i = hits->first; i < nu_.size(); i += hits->second) s += nu_[i];
    return s / total_;
}

big_rational weight_table::exact_prob_divides(std::uint64_t d, std::int64_t k) const {
    require(has_exact(), errc::invalid_argument, "table was built without exact weights");
    require(d >= 1, errc::invalid_argument, "prob_divides needs d >= 1");
    const auto hits = lattice_hits(first_, W_, d, k, exact_nu_.size());
    big_int s = 0;
    if (hits)
        for (std::size_t i = hits->first; i < exact_nu_.size(); i += hits->second) s += exact_nu_[i];
    return big_rational(s, exact_total_);
}

std::vector<std::uint64_t> weight_table::sample(std::uint64_t seed, std::size_t count, int workers) const {
    require(count >= 1, errc::invalid_argument, "sample count must be >= 1");
    std::vector<std::uint64_t> out(count);
    const std::size_t nblocks = (count + kSampleBlock - 1) / kSampleBlock;
    parallel_chunks(nblocks, workers, [&](std::size_t blk) {
        const auto part = sample_block(seed, blk, count);
        std::copy(part.begin(), part.end(), out.begin() + static_cast<std::ptrdiff_t>(blk * kSampleBlock));
    });
    return out;
}

std::vector<std::uint64_t> weight_table::sample_block(std::uint64_t seed, std::size_t block,
                                                      std::size_t count) const {
    if (!(total_ > 0.0)) fail(errc::empty_support, "cannot sample an empty measure");
    const std::size_t j0 = block * kSampleBlock;
    require(j0 < count, errc::out_of_range, "sample block beyond the requested count");
    const std::size_t j1 = std::min(count, j0 + kSampleBlock);
    std::vector<std::uint64_t> out(j1 - j0);
    std::mt19937_64 gen(stream_seed(seed, block));
    for (auto& v : out) {
        const double u = unit_double(gen) * total_;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        v = n_at(static_cast<std::size_t>(it - cumulative_.begin()));
    }
    return out;
}

std::optional<int> k_star_p(std::uint64_t p, std::int64_t k_star, const sieve_params& params) {
    require(p > params.w, errc::invalid_argument, "k_{*,p} needs p > w");
    std::optional<int> found;
    const auto sp = static_cast<std::int64_t>(p);
    for (int k = 1; k <= params.K; ++k) {
        const std::int64_t diff = k - k_star;
        if (diff % sp == 0) {
            if (found) fail(errc::internal, "k_{*,p} is not unique");
            found = k;
        }
    }
    return found;
}

std::complex<double> local_factor_E(std::int64_t k_star, std::uint64_t d_star, std::uint64_t p,
                                    const std::vector<double>& t, const std::vector<double>& tp,
                                    const sieve_params& params) {
    require(p > params.w, errc::invalid_argument, "local factor needs p > w");
    require(d_star >= 1, errc::invalid_argument, "d_star must be >= 1");
    require(t.size() == static_cast<std::size_t>(params.K) && tp.size() == t.size(),
            errc::invalid_argument, "t and t' need K components");
    const double lp = std::log(static_cast<double>(p));
    using cd = std::complex<double>;
    // p^{-z} = exp(-z log p)
    auto ppow = [&](cd z) { return std::exp(-z * lp); };
    if (d_star % p != 0) {
        cd s = 0.0;
        for (int k = 1; k <= params.K; ++k) {
            const double L = std::log(params.level(k));
            const cd z1(1.0, t[k - 1]), z2(1.0, tp[k - 1]), z12(2.0, t[k - 1] + tp[k - 1]);
            s += ppow(1.0 + z1 / L) + ppow(1.0 + z2 / L) - ppow(1.0 + z12 / L);
        }
        return 1.0 - s;
    }
    require((d_star / p) % p != 0, errc::invalid_argument, "d_star must be squarefree");
    const auto ks = k_star_p(p, k_star, params);
    const double inv = 1.0 / static_cast<double>(p);
    if (!ks) return cd(inv, 0.0);
    const int k = *ks;
    const double L = std::log(params.level(k));
    return inv * (1.0 - ppow(cd(1.0, t[k - 1]) / L)) * (1.0 - ppow(cd(1.0, tp[k - 1]) / L));
}

euler_product euler_product_F(const std::vector<double>& t, const std::vector<double>& tp,
                              std::uint64_t d_star, std::int64_t k_star, const sieve_params& params,
                              std::uint64_t cutoff, const prime_table& table) {
    require(cutoff <= table.limit(), errc::table_too_small, "Euler product cutoff exceeds the prime table");
    euler_product out;
    out.value = 1.0;
    out.half_cutoff_value = 1.0;
    const std::uint64_t half = cutoff / 2;
    for (std::uint64_t p : table.primes_in(params.w, cutoff)) {
        out.value *= local_factor_E(k_star, d_star, p, t, tp, params);
        if (p <= half) out.half_cutoff_value = out.value;
        ++out.primes_used;
    }
    const double mag = std::abs(out.value);
    out.relative_delta = mag > 0.0 ? std::abs(out.value - out.half_cutoff_value) / mag : 0.0;
    return out;
}

axiom_report axiom_check_A(const weight_table& t, std::uint64_t seed, std::size_t samples) {
    axiom_report r;
    r.which = 'A';
    const std::uint64_t W = t.W();
    for (std::size_t i = 0; i < t.count(); ++i) {
        if (t.nu_at(i) > 0.0 && t.n_at(i) % W != 0) r.pass = false;
        ++r.checked;
    }
    if (samples > 0) {
        for (std::uint64_t n : t.sample(seed, samples)) {
            if (n % W != 0) r.pass = false;
            ++r.checked;
        }
    }
    r.value = r.pass ? 1.0 : 0.0;
    r.detail = "W=" + std::to_string(W);
    return r;
}

axiom_report axiom_check_B(const weight_table& t, int s, std::size_t budget) {
    require(s >= 1 && s <= 8, errc::invalid_argument, "axiom B needs 1 <= s <= 8");
    axiom_report r;
    r.which = 'B';
    const auto& p = t.params();
    const std::uint64_t nmax = 2 * p.x + static_cast<std::uint64_t>(p.k_max);
    double sup = 1.0;  // d* = 1
    const int kmax = std::min(p.k_max, std::max(p.K, 8));
    for (int k = 1; k <= kmax && !r.partial; ++k) {
        const double Rk = p.level(k), Tk = p.large_cutoff(k);
        std::vector<std::uint64_t> ps;
        const auto top = static_cast<std::uint64_t>(std::min(Tk, 1e6));
        for (std::uint64_t q : small_primes_upto(top))
            if (static_cast<double>(q) > Rk) ps.push_back(q);
        // lexicographic combinations of size 1..s, products bounded by the window
        std::vector<std::size_t> idx;
        std::uint64_t d = 1;
        std::function<void(std::size_t, int)> rec = [&](std::size_t from, int depth) {
            for (std::size_t i = from; i < ps.size(); ++i) {
                if (r.checked >= budget) {
                    r.partial = true;
                    return;
                }
                const unsigned __int128 nd = static_cast<unsigned __int128>(d) * ps[i];
                if (nd > nmax) break;
                const std::uint64_t saved = d;
                d = static_cast<std::uint64_t>(nd);
                sup = std::max(sup, static_cast<double>(d) * t.prob_divides(d, k));
                ++r.checked;
                if (depth + 1 < s) rec(i + 1, depth + 1);
                d = saved;
                if (r.partial) return;
            }
        };
        rec(0, 0);
    }
    r.value = sup;
    r.normalized = sup / std::pow(8.0, s);
    r.pass = std::isfinite(sup);
    r.detail = "sup d*P(d*|n+k); normalized by 8^s";
    return r;
}

axiom_report axiom_check_C(const weight_table& t, int s) {
    require(s >= 2 && s <= 20, errc::invalid_argument, "axiom C needs 2 <= s <= 20");
    axiom_report r;
    r.which = 'C';
    const auto& p = t.params();
    double max_sum = 0.0;
    for (int k = 1; k <= p.K; ++k) {
        const double Rk = p.level(k);
        std::vector<std::uint64_t> ps;
        for (std::uint64_t q : small_primes_upto(static_cast<std::uint64_t>(Rk)))
            if (q > p.w) ps.push_back(q);
        // sum over ordered distinct j-tuples = j! E[binom(M, j)], M = #{p | n+k}
        std::vector<double> moment(s + 1, 0.0);
        for (std::size_t i = 0; i < t.count(); ++i) {
            const double wgt = t.nu_at(i);
            if (wgt == 0.0) continue;
            const std::uint64_t m = t.n_at(i) + static_cast<std::uint64_t>(k);
            int M = 0;
            for (std::uint64_t q : ps) M += (m % q == 0);
            double falling = 1.0;
            for (int j = 1; j <= s && j <= M; ++j) {
                falling *= (M - j + 1);
                moment[j] += wgt * falling;
            }
            ++r.checked;
        }
        for (int j = 1; j <= s; ++j) max_sum = std::max(max_sum, moment[j] / t.total());
    }
    r.normalized = max_sum;
    r.value = (max_sum > 0.0 ? std::pow(max_sum, 1.0 / s) : 0.0) / std::log(static_cast<double>(s));
    r.detail = "C3 fitted from max_j sum <= (C3 log s)^s";
    return r;
}

double axiom_D_deviation(const weight_table& t, const divisibility_query& q) {
    unsigned __int128 full = 1, rad = 1;
    double scale = 1.0;
    for (auto pp : q.factors) {
        require(pp.exponent >= 1, errc::invalid_argument, "exponents must be >= 1");
        rad *= pp.prime;
        for (std::uint32_t e = 0; e < pp.exponent; ++e) full *= pp.prime;
        scale *= std::pow(static_cast<double>(pp.prime), static_cast<double>(pp.exponent) - 1.0);
        require(full < (static_cast<unsigned __int128>(1) << 63), errc::invalid_argument, "modulus too large");
    }
    const double lhs = t.prob_divides(static_cast<std::uint64_t>(full), q.k);
    const double rhs = t.prob_divides(static_cast<std::uint64_t>(rad), q.k) / scale;
    return std::abs(lhs - rhs);
}

axiom_report axiom_check_D(const weight_table& t, const std::vector<divisibility_query>& queries) {
    axiom_report r;
    r.which = 'D';
    for (const auto& q : queries) {
        r.value = std::max(r.value, axiom_D_deviation(t, q));
        ++r.checked;
    }
    r.pass = r.value <= 1e-3;
    r.detail = "max |P(prod p^a | n+k) - P(prod p | n+k)/prod p^(a-1)|";
    return r;
}

std::vector<prob_row> monte_carlo_probs(const weight_table& t,
                                        const std::vector<std::pair<std::uint64_t, std::int64_t>>& tuples,
                                        const std::vector<std::uint64_t>& samples) {
    require(!samples.empty(), errc::invalid_argument, "no samples");
    std::vector<prob_row> rows;
    const double N = static_cast<double>(samples.size());
    for (auto [d, k] : tuples) {
        const double pe = t.prob_divides(d, k);
        std::size_t hits = 0;
        for (std::uint64_t n : samples) {
            const auto m = static_cast<std::int64_t>(n) + k;
            if (m % static_cast<std::int64_t>(d) == 0) ++hits;
        }
        rows.push_back({d, k, pe, static_cast<double>(hits) / N, std::sqrt(pe * (1.0 - pe) / N)});
    }
    return rows;
}

} // namespace roughn
