#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "roughn/errors.hpp"
#include "roughn/primes.hpp"

using namespace roughn;

namespace {

factor_list trial_division(std::uint64_t n) {
    factor_list out;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        std::uint32_t e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) out.push_back({p, e});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

bool naive_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

} // namespace

TEST_CASE("prime table small limits") {
    prime_table t10(10);
    CHECK(std::vector<std::uint64_t>(t10.primes().begin(), t10.primes().end()) ==
          std::vector<std::uint64_t>{2, 3, 5, 7});
    prime_table t2(2);
    REQUIRE(t2.primes().size() == 1);
    CHECK(t2.primes()[0] == 2);
    CHECK_THROWS_AS(prime_table(1), lab_error);

    prime_table t100(100);
    std::size_t oracle = 0;
    for (int n = 2; n <= 100; ++n) oracle += naive_prime(n);
    CHECK(t100.primes().size() == oracle);
    CHECK(oracle == 25);
}

TEST_CASE("spf invariants") {
    prime_table t(20000);
    for (std::uint64_t n = 2; n <= t.limit(); ++n) {
        const auto s = t.spf(n);
        REQUIRE(n % s == 0);
        REQUIRE(naive_prime(s));
        REQUIRE((s == n) == naive_prime(n));
    }
}

TEST_CASE("factorize matches trial division up to 1e5") {
    prime_table t(100000);
    for (std::uint64_t n = 1; n <= 100000; ++n) {
        const auto f = factorize(n, t);
        REQUIRE(f == trial_division(n));
        std::uint64_t prod = 1;
        std::uint64_t tau_oracle = 1;
        int big = 0;
        for (auto pp : f) {
            for (std::uint32_t i = 0; i < pp.exponent; ++i) prod *= pp.prime;
            tau_oracle *= pp.exponent + 1;
            big += pp.exponent;
        }
        REQUIRE(prod == n);
        REQUIRE(tau(f) == tau_oracle);
        REQUIRE(big_omega(f) == big);
    }
}

TEST_CASE("factorize beyond the table") {
    prime_table t(4000);
    CHECK(factorize(9999991, t) == trial_division(9999991));
    CHECK(factorize(12, t) == factor_list{{2, 2}, {3, 1}});
    CHECK(factorize(1, t).empty());
    CHECK_THROWS_AS(factorize(0, t), lab_error);
    prime_table small(100);
    try {
        (void)factorize(1000003ull * 1000033ull, small);
        FAIL("expected table_too_small");
    } catch (const lab_error& e) {
        CHECK(e.code() == errc::table_too_small);
    }
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t n = 1 + rng() % 16000000ull;
        REQUIRE(factorize(n, t) == trial_division(n));
    }
}

TEST_CASE("arithmetic functions") {
    prime_table t(1000);
    CHECK(omega(12, t) == 2);
    CHECK(big_omega(12, t) == 3);
    CHECK(tau(12, t) == 6);
    CHECK(mobius(12, t) == 0);
    CHECK(omega(30, t) == 3);
    CHECK(big_omega(30, t) == 3);
    CHECK(tau(30, t) == 8);
    CHECK(mobius(30, t) == -1);
    CHECK(omega(1024, t) == 1);
    CHECK(big_omega(1024, t) == 10);
    CHECK(tau(1024, t) == 11);
    CHECK(mobius(1024, t) == 0);
    CHECK(omega(1, t) == 0);
    CHECK(big_omega(1, t) == 0);
    CHECK(tau(1, t) == 1);
    CHECK(mobius(1, t) == 1);
    CHECK_THROWS_AS(mobius(0, t), lab_error);
    for (std::uint64_t n = 1; n <= 1000; ++n) REQUIRE(mobius(n, t) == mobius(factorize(n, t)));
    // beyond the table, via trial division
    CHECK(mobius(997ull * 991, t) == 1);
    CHECK(mobius(997ull * 997, t) == 0);
}

TEST_CASE("window factorization") {
    prime_table t(2000);
    auto w = factor_window(10, 20, t);
    CHECK(w.size() == 11);
    for (std::uint64_t n = 10; n <= 20; ++n) {
        auto f = w.factors(n);
        CHECK(factor_list(f.begin(), f.end()) == factorize(n, t));
    }
    auto w2 = factor_window(2, 2, t);
    CHECK(factor_list(w2.factors(2).begin(), w2.factors(2).end()) == factor_list{{2, 1}});

    auto big = factor_window(1000000, 1001000, t);
    for (std::uint64_t n = 1000000; n <= 1001000; ++n) {
        int oracle = 0;
        for (auto pp : trial_division(n)) oracle += pp.exponent;
        REQUIRE(big.big_omega(n) == oracle);
    }
    CHECK_THROWS_AS(big.factors(999999), lab_error);
    prime_table tiny(10);
    CHECK_THROWS_AS(factor_window(1000, 2000, tiny), lab_error);
}

TEST_CASE("window factorization on random windows, several workers") {
    prime_table t(1 << 16);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint64_t lo = 2 + rng() % 4000000000ull;
        const std::uint64_t hi = lo + rng() % 64;
        auto w = factor_window(lo, hi, t, 1 + trial % 3);
        for (std::uint64_t n = lo; n <= hi; ++n) {
            auto f = w.factors(n);
            REQUIRE(factor_list(f.begin(), f.end()) == factorize(n, t));
        }
    }
    // a window spanning several segments, merged by index
    auto a = factor_window(3000000, 3700000, t, 1);
    auto b = factor_window(3000000, 3700000, t, 4);
    for (std::uint64_t n = 3000000; n <= 3700000; n += 997) {
        auto fa = a.factors(n), fb = b.factors(n);
        REQUIRE(factor_list(fa.begin(), fa.end()) == factor_list(fb.begin(), fb.end()));
    }
}

TEST_CASE("mertens partial sums") {
    prime_table t(10000000);
    CHECK(mertens_partial_sum(1, 10, t) == doctest::Approx(1.0 / 2 + 1.0 / 3 + 1.0 / 5 + 1.0 / 7).epsilon(1e-15));
    CHECK(mertens_partial_sum(10, 10, t) == 0.0);
    CHECK(mertens_partial_sum(2, 3, t) == doctest::Approx(1.0 / 3));
    for (double x : {1e5, 1e6, 1e7}) {
        const double d = mertens_partial_sum(0, x, t) - std::log(std::log(x));
        CHECK(std::abs(d - 0.2615) <= 0.05);
    }
    for (double x : {1e3, 1e4}) {
        const double d = mertens_partial_sum(0, x, t) - std::log(std::log(x));
        CHECK(std::abs(d) < 1.0);
    }
    CHECK_THROWS_AS(mertens_partial_sum(0, 2e7, t), lab_error);
}

TEST_CASE("RLPT1 roundtrip") {
    prime_table t(50000);
    const auto path = (std::filesystem::temp_directory_path() / "roughn_rlpt1_test.bin").string();
    t.save(path);
    auto u = prime_table::load(path);
    CHECK(u.limit() == t.limit());
    CHECK(std::equal(u.primes().begin(), u.primes().end(), t.primes().begin(), t.primes().end()));
    for (std::uint64_t n = 2; n <= t.limit(); ++n) REQUIRE(u.spf(n) == t.spf(n));
    {
        std::FILE* f = std::fopen(path.c_str(), "r+b");
        std::fputc('X', f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(prime_table::load(path), lab_error);
    std::filesystem::remove(path);
}
