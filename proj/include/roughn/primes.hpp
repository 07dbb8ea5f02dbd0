#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace roughn {

struct prime_power {
    std::uint64_t prime;
    std::uint32_t exponent;

    friend bool operator==(const prime_power&, const prime_power&) = default;
};

using factor_list = std::vector<prime_power>;

/// Primes up to `limit` together with a smallest-prime-factor array.
///
/// Immutable after construction; safe to share between threads.
class prime_table {
public:
    /// Throws invalid_argument when limit < 2.
    explicit prime_table(std::uint64_t limit);

    std::uint64_t limit() const noexcept { return limit_; }
    std::span<const std::uint64_t> primes() const noexcept { return primes_; }

    /// Smallest prime factor of n, 2 <= n <= limit.
    std::uint64_t spf(std::uint64_t n) const;

    bool is_prime(std::uint64_t n) const;

    /// Primes p with lo < p <= hi, hi clamped to limit.
    std::span<const std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi) const;

    /// Binary dump: "RLPT1", u64 limit, u64 count, count x u64 primes (little-endian).
    void save(const std::string& path) const;
    static prime_table load(const std::string& path);

private:
    prime_table() = default;
    void build_spf_from_primes();

    std::uint64_t limit_ = 0;
    std::vector<std::uint64_t> primes_;
    std::vector<std::uint32_t> spf_;  // index n - 2
};

/// Full factorization of n >= 1. Uses the spf array when n <= limit, trial
/// division by table primes otherwise. Throws table_too_small when
/// limit^2 < n, invalid_argument when n == 0.
factor_list factorize(std::uint64_t n, const prime_table& table);

int omega(const factor_list& f);
int big_omega(const factor_list& f);
std::uint64_t tau(const factor_list& f);
int mobius(const factor_list& f);

int omega(std::uint64_t n, const prime_table& table);
int big_omega(std::uint64_t n, const prime_table& table);
std::uint64_t tau(std::uint64_t n, const prime_table& table);
/// Short-circuits as soon as a squared prime factor is found.
int mobius(std::uint64_t n, const prime_table& table);

/// Factorizations of every integer in [lo, hi], stored compactly.
class window_factors {
public:
    std::uint64_t lo() const noexcept { return lo_; }
    std::uint64_t hi() const noexcept { return hi_; }
    std::size_t size() const noexcept { return offsets_.size() - 1; }

    std::span<const prime_power> factors(std::uint64_t n) const;
    int omega(std::uint64_t n) const;
    int big_omega(std::uint64_t n) const;

private:
    friend window_factors factor_window(std::uint64_t, std::uint64_t, const prime_table&, int);

    std::uint64_t lo_ = 0;
    std::uint64_t hi_ = 0;
    std::vector<std::uint32_t> offsets_;
    std::vector<prime_power> entries_;
};

/// Segmented factorization of [lo, hi] with primes <= sqrt(hi). Sub-windows
/// are processed by `workers` threads and merged by index.
window_factors factor_window(std::uint64_t lo, std::uint64_t hi, const prime_table& table,
                             int workers = 1);

/// Sum of 1/p over table primes lo < p <= hi, in increasing order of p.
double mertens_partial_sum(double lo, double hi, const prime_table& table);

} // namespace roughn
