#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "roughn/bump.hpp"
#include "roughn/primes.hpp"

namespace roughn {

using big_int = boost::multiprecision::cpp_int;
using big_rational = boost::multiprecision::cpp_rational;

/// Desk-scale sieve configuration. Levels are R_k = max(w, x^{c / k^gamma});
/// the large-prime cutoff is T_k = x^{T_exponent / (A log max(k, 2))}.
struct sieve_params {
    std::uint64_t x = 10'000'000;
    int K = 4;
    std::uint64_t w = 7;
    int a = 1;
    double c = 0.25;
    double gamma = 3.0;
    double T_exponent = 0.1;
    double A = 0.25;
    int k_max = 100;

    std::uint64_t W() const;
    double level(int k) const;
    /// Level actually used by the weight: R_k when R_k > w, else 1 (only d = 1 survives).
    double effective_level(int k) const;
    double large_cutoff(int k) const;
    /// log(W * prod R_eff^2) / log x.
    double theta() const;
    std::vector<std::uint64_t> tiny_primes() const;
};

/// Throws invalid_argument with a reason when the parameters are unusable.
void validate(const sieve_params& p);

/// Flat `key = value` lines, `#` starts a comment. Duplicate keys are rejected.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_value_file(const std::string& path);

/// Integer parameter; "1e6" is accepted when it denotes an exact integer.
std::uint64_t parse_param_u64(const std::string& key, const std::string& value);
double parse_param_real(const std::string& key, const std::string& value);

/// Applies the sieve keys (x, K, w, a, c, gamma, T_exponent, A, k_max) present
/// in `kv` on top of `base`, removing them from `kv`.
sieve_params apply_sieve_keys(sieve_params base, std::map<std::string, std::string>& kv);

/// eta_tilde(log d / log R_k) for every w-rough squarefree d < R_k, per shift.
class level_weights {
public:
    level_weights(const sieve_params& p, const bump& b);
    /// 0 when d is not tabulated for shift k (d >= R_k or not w-rough squarefree).
    double value(int k, std::uint64_t d) const;
    /// Dyadic rounding of value() to 40 fractional bits.
    std::int64_t dyadic(int k, std::uint64_t d) const;
    const std::vector<std::uint64_t>& sieving_primes(int k) const { return primes_[k - 1]; }

private:
    std::vector<std::vector<double>> values_;       // [k-1][d]
    std::vector<std::vector<std::uint64_t>> primes_; // primes in (w, R_k)
};

/// nu(n) for one n in [x, 2x], directly from the definition: factors n+k by
/// trial division and sums over all squarefree w-rough d | n+k with d < R_k.
double nu_exact(std::uint64_t n, const sieve_params& p, const bump& b);

/// The same sum without pruning: every divisor d of n+k with (d, P(w)) = 1,
/// weighted by mu(d) eta_tilde(log d / log R_k), including d >= R_k.
double nu_unpruned(std::uint64_t n, const sieve_params& p, const bump& b);

/// Support candidates n_i = first + i * W, i < count, for the window [x, 2x].
struct support_layout {
    std::uint64_t W = 0;
    std::uint64_t first = 0;
    std::size_t count = 0;
};
/// Validates p; throws empty_support / budget_exceeded like weight_table::build.
support_layout support_of(const sieve_params& p);

/// nu at support indices [i0, i1), bit-identical to the built table.
std::vector<double> nu_range(const sieve_params& p, const level_weights& lw, std::size_t i0,
                             std::size_t i1, int workers = 1);

class weight_table {
public:
    /// Throws invalid_argument for infeasible params, empty_support when no
    /// multiple of W lies in [x, 2x]. `exact` additionally keeps dyadic
    /// big-integer weights (windows of at most 10^4 integers).
    static weight_table build(const sieve_params& p, const bump& b, int workers = 1,
                              bool exact = false);

    const sieve_params& params() const noexcept { return params_; }
    std::uint64_t W() const noexcept { return W_; }
    /// Support candidates are n_i = first() + i * W for i < count().
    std::uint64_t first() const noexcept { return first_; }
    std::size_t count() const noexcept { return nu_.size(); }
    std::uint64_t n_at(std::size_t i) const { return first_ + i * W_; }
    double nu_at(std::size_t i) const { return nu_[i]; }
    /// nu(n) for any n in [x, 2x]; zero off the W-lattice.
    double nu(std::uint64_t n) const;
    double total() const noexcept { return total_; }
    /// Running unnormalized sum of nu in index order; cumulative().back() == total().
    const std::vector<double>& cumulative() const noexcept { return cumulative_; }

    /// P(d | n + k) under nu / total, summed in index order.
    double prob_divides(std::uint64_t d, std::int64_t k) const;
    /// The same probability from the dyadic big-integer weights.
    big_rational exact_prob_divides(std::uint64_t d, std::int64_t k) const;
    bool has_exact() const noexcept { return !exact_nu_.empty(); }

    /// Deterministic inverse-CDF sampling. Draws are generated in blocks of
    /// fixed size, each block with its own seeded stream, so the result does
    /// not depend on `workers`.
    std::vector<std::uint64_t> sample(std::uint64_t seed, std::size_t count, int workers = 1) const;
    /// Draws [block * kSampleBlock, min(count, (block + 1) * kSampleBlock)) of sample(seed, count).
    std::vector<std::uint64_t> sample_block(std::uint64_t seed, std::size_t block, std::size_t count) const;

private:
    sieve_params params_;
    std::uint64_t W_ = 0;
    std::uint64_t first_ = 0;
    std::vector<double> nu_;
    std::vector<double> cumulative_;
    double total_ = 0.0;
    std::vector<big_int> exact_nu_;
    big_int exact_total_;
};

/// Unique k in [1, K] with p | |k - k_star|, if any. Requires p > w.
std::optional<int> k_star_p(std::uint64_t p, std::int64_t k_star, const sieve_params& params);

/// The local factor E_{k*, d*, p}(t, t'); t and t' have K components.
std::complex<double> local_factor_E(std::int64_t k_star, std::uint64_t d_star, std::uint64_t p,
                                    const std::vector<double>& t, const std::vector<double>& tp,
                                    const sieve_params& params);

struct euler_product {
    std::complex<double> value;
    std::complex<double> half_cutoff_value;  // product up to cutoff / 2
    double relative_delta = 0.0;             // |value - half| / |value|
    std::size_t primes_used = 0;
};

/// Product of E over w < p <= cutoff. Throws table_too_small when cutoff
/// exceeds the table.
euler_product euler_product_F(const std::vector<double>& t, const std::vector<double>& tp,
                              std::uint64_t d_star, std::int64_t k_star, const sieve_params& params,
                              std::uint64_t cutoff, const prime_table& table);

struct axiom_report {
    char which = 'A';
    bool pass = true;
    bool partial = false;  // budget ran out before all tuples were visited
    std::size_t checked = 0;
    double value = 0.0;    // A: 1 or 0; B: sup d*P; C: fitted C3; D: max deviation
    double normalized = 0.0;  // B: sup d*P / 8^s; C: max tuple sum; D: unused
    std::string detail;
};

struct divisibility_query {
    std::vector<prime_power> factors;  // d = prod p^a
    std::int64_t k = 1;
};

/// A: every support point and every drawn sample is divisible by W.
axiom_report axiom_check_A(const weight_table& t, std::uint64_t seed, std::size_t samples);
/// B: sup of d* P(d* | n+k) over distinct j-tuples (j <= s) of primes in (R_k, T_k].
axiom_report axiom_check_B(const weight_table& t, int s, std::size_t budget);
/// C: sums over ordered distinct j-tuples in (w, R_k], j <= s, k <= K; fits C3.
axiom_report axiom_check_C(const weight_table& t, int s);
/// D: max |P(prod p^a | n+k) - P(prod p | n+k) / prod p^{a-1}| over the queries.
axiom_report axiom_check_D(const weight_table& t, const std::vector<divisibility_query>& queries);
double axiom_D_deviation(const weight_table& t, const divisibility_query& q);

/// probs.csv rows.
struct prob_row {
    std::uint64_t d_star;
    std::int64_t k_star;
    double exact_prob;
    double mc_estimate;
    double mc_sigma;
};
std::vector<prob_row> monte_carlo_probs(const weight_table& t,
                                        const std::vector<std::pair<std::uint64_t, std::int64_t>>& tuples,
                                        const std::vector<std::uint64_t>& samples);

} // namespace roughn
