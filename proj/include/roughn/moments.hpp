#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roughn/primes.hpp"
#include "roughn/sieve.hpp"

namespace roughn {

// ---- Stirling numbers of the second kind ---------------------------------

class stirling_table {
public:
    /// {s, t} for 0 <= t <= s <= max_s by the recurrence {s,t} = t{s-1,t} + {s-1,t-1}.
    explicit stirling_table(int max_s);
    int max_s() const noexcept { return max_s_; }
    const big_int& operator()(int s, int t) const;

private:
    int max_s_;
    std::vector<std::vector<big_int>> rows_;
};

/// Throws invalid_argument unless 1 <= t <= s <= 400.
big_int stirling2(int s, int t);

/// sum_{j=1}^{2s} {2s, j} m!/(m-j)! == m^{2s}, evaluated in big integers.
/// Throws invalid_argument when m < 2s or s < 1.
bool stirling_identity_check(int s, int m);

/// Smallest kappa with {s,t} <= kappa (s / log s)^s over s in [s_lo, s_hi], all t.
double stirling_kappa_fit(int s_lo = 10, int s_hi = 60);

struct falling_factorial_check {
    std::size_t checked = 0;
    std::size_t failures = 0;
};
/// m^j <= e^j m!/(m-j)! for every 1 <= j with 3j/2 <= m <= m_max, exactly
/// (e bracketed by rational partial sums of its series).
falling_factorial_check falling_factorial_bound(int m_max = 60);

struct c1_validation {
    bool ok = false;
    double required = 0.0;   // max{8 e C3', 132 A e, 2^19 e}
    double c3_prime = 0.0;   // max{C3, 66 log C2 / log 2}
};
c1_validation validate_C1(double C1, double C2, double C3, double A);

// ---- Exponential formula --------------------------------------------------

struct partition_sum {
    double enumeration = 0.0;
    double egf = 0.0;
    double relative_difference = 0.0;
    std::uint64_t partitions = 0;
};

/// G(s3, R) = sum over set partitions of [s3] of prod_B 2^{2|B|+1} / R^{2|B|-1},
/// by direct enumeration and by s3! [y^s3] exp(sum_m 2^{2m+1} y^m / (R^{2m-1} m!))
/// in exact rationals. Throws budget_exceeded for s3 > 10.
partition_sum partition_sum_G(int s3, double R);

// ---- rho_r on the ordered simplex -----------------------------------------

/// log rho_r(alpha) = sum_i alpha_i log(32 / (alpha_i q_i^5)), q_i the i-th prime.
double log_rho(const std::vector<double>& alpha);

struct rho_report {
    int r = 0;
    double step = 0.0;
    std::vector<double> argmax;
    double max_log_rho = 0.0;
    double uniform_log_rho = 0.0;
    double distance_to_uniform = 0.0;  // max-norm
    std::uint64_t grid_points = 0;
};

/// Grid search over alpha_1 <= ... <= alpha_r, alpha_i in step * Z, sum = 1.
/// Throws budget_exceeded when the grid would exceed 5e7 points.
rho_report rho_r_maximize(int r, double step);

// ---- Moments over the weighted support -----------------------------------

enum class prime_range { tiny, medium, large, power };
const char* range_name(prime_range r);
prime_range parse_range(const std::string& s);

/// Factorizations of n + k for every support n and 1 <= k <= k_max.
class support_factors {
public:
    support_factors(const weight_table& t, const prime_table& table, int k_max, int workers = 1);
    const window_factors& window() const noexcept { return wf_; }
    int k_max() const noexcept { return k_max_; }

private:
    window_factors wf_;
    int k_max_;
};

/// Prime table large enough for support_factors on this weight table.
prime_table table_for(const weight_table& t, int k_max);

struct moment_report {
    int k = 0;
    prime_range range = prime_range::medium;
    int s = 0;
    bool centered = false;
    bool empty_range = false;
    double exact_moment = 0.0;  // E[X^s]
    double abs_moment = 0.0;    // E|X|^s
    double paper_bound = 0.0;   // display only
    double ratio = 0.0;         // abs_moment / paper_bound
};

/// X = sum over the range of (1_{p | n+k} - [centered]/p) (prime powers p^j,
/// j >= 2, p^j <= T_k, for the power range); moments by full enumeration.
/// `C3` enters only the displayed medium-range bound.
moment_report exact_centered_moment(const weight_table& t, const support_factors& f, int k,
                                    prime_range range, int s, bool centered, double C3 = 3.0,
                                    int workers = 1);

/// P(|X| >= r) under the same measure.
double exact_tail(const weight_table& t, const support_factors& f, int k, prime_range range,
                  bool centered, double r);

/// moment / r^s clamped to [0, 1]; throws invalid_argument for r <= 0.
double chebyshev_tail(double moment, double r, int s);

/// log(n + k) / log 2.
double trivial_tail_bound(std::uint64_t n, std::uint64_t k);

struct union_bound_report {
    double C = 0.0;
    int k_max = 0;
    std::vector<double> tail;  // tail[k - 2] = P(Omega(n+k) > C log k)
    double sum = 0.0;
    std::uint64_t witness = 0;
    double witness_score = 0.0;
};

/// max_{2 <= k <= k_max} Omega(n+k) / log k.
double record_score(std::uint64_t n, const window_factors& wf, int k_max);

union_bound_report union_bound(const weight_table& t, const support_factors& f, double C, int k_max);

struct omega_parts {
    int tiny = 0;             // p <= w
    int medium = 0;           // w < p <= R_k
    int large = 0;            // R_k < p <= T_k
    int very_large = 0;       // p > T_k
    int power_tiny_low = 0;   // p <= w, exponent index j in [2, 4]
    int power_tiny_high = 0;  // p <= w, j >= 5
    int power_rough = 0;      // p > w, j >= 2
    int total() const {
        return tiny + medium + large + very_large + power_tiny_low + power_tiny_high + power_rough;
    }
};

omega_parts omega_decomposition(std::uint64_t n, int k, const sieve_params& p, const prime_table& table);

} // namespace roughn
