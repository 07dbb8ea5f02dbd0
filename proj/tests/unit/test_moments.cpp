#include <doctest.h>

#include <cmath>
#include <random>

#include "roughn/errors.hpp"
#include "roughn/moments.hpp"

using namespace roughn;

namespace {

// Number of set partitions of an s-set into t blocks, by enumerating
// restricted growth strings.
std::uint64_t count_partitions(int s, int t) {
    std::vector<int> a(s, 0);
    std::uint64_t count = 0;
    std::function<void(int, int)> rec = [&](int i, int mx) {
        if (i == s) {
            if (mx == t) ++count;
            return;
        }
        for (int b = 0; b <= mx && b < t; ++b) {
            a[i] = b;
            rec(i + 1, std::max(mx, b + 1));
        }
    };
    rec(0, 0);
    return count;
}

const bump& shared_bump() {
    static const bump b;
    return b;
}

sieve_params toy() {
    sieve_params p;
    p.x = 100000;
    p.w = 3;
    p.a = 1;
    p.K = 2;
    p.c = 0.25;
    p.gamma = 1.0;
    p.k_max = 40;
    return p;
}

} // namespace

TEST_CASE("Stirling numbers") {
    CHECK(stirling2(2, 1) == 1);
    CHECK(stirling2(2, 2) == 1);
    CHECK(stirling2(4, 2) == 7);
    CHECK_THROWS_AS(stirling2(3, 4), lab_error);
    CHECK_THROWS_AS(stirling2(3, 0), lab_error);
    for (int s = 1; s <= 10; ++s)
        for (int t = 1; t <= s; ++t) REQUIRE(stirling2(s, t) == count_partitions(s, t));
    const stirling_table st(60);
    for (int s = 1; s <= 60; ++s) {
        REQUIRE(st(s, 1) == 1);
        REQUIRE(st(s, s) == 1);
        for (int t = 2; t < s; ++t) REQUIRE(st(s, t) == big_int(t) * st(s - 1, t) + st(s - 1, t - 1));
    }
}

TEST_CASE("Stirling identity") {
    CHECK(stirling_identity_check(1, 2));
    CHECK(stirling_identity_check(1, 3));
    CHECK(stirling_identity_check(3, 6));
    CHECK(stirling_identity_check(6, 12));
    for (int s = 1; s <= 12; ++s)
        for (int m = 2 * s; m <= 24; ++m) REQUIRE(stirling_identity_check(s, m));
    CHECK_THROWS_AS(stirling_identity_check(3, 5), lab_error);
}

TEST_CASE("Stirling growth fit and falling factorial bound") {
    const double kappa = stirling_kappa_fit(10, 60);
    CHECK(kappa > 0.0);
    CHECK(std::isfinite(kappa));
    const stirling_table st(60);
    for (int s = 10; s <= 60; ++s)
        for (int t = 1; t <= s; ++t)
            REQUIRE(st(s, t).convert_to<double>() <= kappa * std::pow(s / std::log(s), s) * (1 + 1e-12));
    const auto ff = falling_factorial_bound(60);
    CHECK(ff.checked > 1000);
    CHECK(ff.failures == 0);
}

TEST_CASE("C1 validator") {
    const auto v = validate_C1(2e7, 10.0, 3.0, 1.0);
    CHECK(v.c3_prime == doctest::Approx(66 * std::log(10.0) / std::log(2.0)));
    CHECK(v.required == doctest::Approx(std::ldexp(std::exp(1.0), 19)));
    CHECK(v.ok);
    CHECK_FALSE(validate_C1(1e5, 10.0, 3.0, 1.0).ok);
    CHECK_FALSE(validate_C1(2e7, 10.0, 1e6, 1.0).ok);
}

TEST_CASE("exponential formula") {
    CHECK(partition_sum_G(1, 10.0).enumeration == doctest::Approx(0.8));
    const auto g2 = partition_sum_G(2, 10.0);
    CHECK(g2.enumeration == doctest::Approx(32.0 / 1000 + 64.0 / 100).epsilon(1e-14));
    CHECK(g2.partitions == 2);
    for (int s3 = 1; s3 <= 8; ++s3)
        for (double R : {10.0, 100.0, 1000.0}) REQUIRE(partition_sum_G(s3, R).relative_difference <= 1e-10);
    CHECK(partition_sum_G(8, 10.0).partitions == 4140);
    try {
        (void)partition_sum_G(11, 10.0);
        FAIL("expected budget_exceeded");
    } catch (const lab_error& e) {
        CHECK(e.code() == errc::budget_exceeded);
    }
    CHECK_THROWS_AS(partition_sum_G(3, 2.0), lab_error);
}

TEST_CASE("rho_r maximization") {
    const auto r1 = rho_r_maximize(1, 0.01);
    CHECK(r1.argmax == std::vector<double>{1.0});
    const auto r2 = rho_r_maximize(2, 1e-3);
    CHECK(r2.distance_to_uniform <= 1e-3);
    std::mt19937_64 rng(4);
    std::exponential_distribution<double> ex(1.0);
    for (int r = 2; r <= 4; ++r) {
        const std::vector<double> uni(r, 1.0 / r);
        for (int i = 0; i < 100; ++i) {
            std::vector<double> a(r);
            double s = 0;
            for (auto& v : a) s += (v = ex(rng));
            for (auto& v : a) v /= s;
            std::sort(a.begin(), a.end());
            REQUIRE(log_rho(uni) >= log_rho(a));
        }
    }
    CHECK_THROWS_AS(rho_r_maximize(6, 1e-3), lab_error);
    CHECK(rho_r_maximize(6, 0.02).distance_to_uniform <= 0.04);
}

TEST_CASE("moments over a toy table") {
    const auto p = toy();
    const auto t = weight_table::build(p, shared_bump());
    const auto table = table_for(t, p.k_max);
    const support_factors f(t, table, p.k_max);

    // independent two-pass oracle for k = 1, s = 2, medium range, shuffled order
    const double R = p.level(1);
    std::vector<std::size_t> order(t.count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
    double center = 0.0;
    for (std::uint64_t q = 5; q <= R; ++q) {
        bool prime = true;
        for (std::uint64_t e = 2; e * e <= q; ++e) prime &= (q % e != 0);
        if (prime) center += 1.0 / q;
    }
    double num = 0.0, den = 0.0;
    for (auto i : order) {
        const std::uint64_t m = t.n_at(i) + 1;
        int cnt = 0;
        for (std::uint64_t q = 5; q <= R; ++q) {
            bool prime = true;
            for (std::uint64_t e = 2; e * e <= q; ++e) prime &= (q % e != 0);
            if (prime && m % q == 0) ++cnt;
        }
        num += t.nu_at(i) * (cnt - center) * (cnt - center);
        den += t.nu_at(i);
    }
    const auto rep = exact_centered_moment(t, f, 1, prime_range::medium, 2, true);
    CHECK(std::abs(rep.exact_moment - num / den) <= 1e-10 * std::abs(num / den));
    CHECK(rep.exact_moment >= 0.0);
    CHECK(rep.paper_bound == doctest::Approx(std::pow(2 * 3.0 * 2, 2)));

    // s = 1, large range: triangle inequality against per-prime deviations
    const auto l1 = exact_centered_moment(t, f, 1, prime_range::large, 1, true);
    double tri = 0.0;
    for (std::uint64_t q : table.primes())
        if (q > p.level(1) && q <= p.large_cutoff(1)) tri += std::abs(t.prob_divides(q, 1) - 1.0 / q);
    CHECK(std::abs(l1.exact_moment) <= tri + 1e-12);

    // far shift: medium range empty
    const auto far = exact_centered_moment(t, f, 30, prime_range::medium, 4, false);
    CHECK(far.empty_range);
    CHECK(far.exact_moment == 0.0);

    // Chebyshev dominates the exact tail
    for (auto rg : {prime_range::medium, prime_range::large, prime_range::power, prime_range::tiny}) {
        for (int s : {2, 4, 6}) {
            const auto m = exact_centered_moment(t, f, 2, rg, s, true);
            for (double r : {0.5, 1.0, 2.0, 3.0}) {
                REQUIRE(chebyshev_tail(m.abs_moment, r, s) >= exact_tail(t, f, 2, rg, true, r) - 1e-15);
            }
        }
    }
}

TEST_CASE("chebyshev_tail contract") {
    CHECK(chebyshev_tail(0.25, 0.5, 2) == 1.0);
    CHECK(chebyshev_tail(0.0, 3.0, 4) == 0.0);
    CHECK(chebyshev_tail(1.0, 2.0, 2) == 0.25);
    CHECK_THROWS_AS(chebyshev_tail(1.0, 0.0, 2), lab_error);
}

TEST_CASE("union bound and witness") {
    const auto p = toy();
    const auto t = weight_table::build(p, shared_bump());
    const auto table = table_for(t, p.k_max);
    const support_factors f(t, table, p.k_max);
    double prev = INFINITY;
    for (double C : {1.0, 2.0, 3.0, 5.0, 50.0}) {
        const auto u = union_bound(t, f, C, p.k_max);
        for (double v : u.tail) REQUIRE((v >= 0.0 && v <= 1.0));
        CHECK(u.sum <= prev);
        prev = u.sum;
        if (C == 50.0) CHECK(u.sum == 0.0);
        CHECK(u.witness != 0);
    }
    // witness equals a brute scan of the support
    const auto u = union_bound(t, f, 2.0, p.k_max);
    double best = INFINITY;
    std::uint64_t arg = 0;
    for (std::size_t i = 0; i < t.count(); ++i) {
        if (t.nu_at(i) == 0.0) continue;
        const std::uint64_t n = t.n_at(i);
        double sc = 0;
        for (int k = 2; k <= p.k_max; ++k) sc = std::max(sc, big_omega(n + k, table) / std::log(double(k)));
        if (sc < best) best = sc, arg = n;
    }
    CHECK(u.witness == arg);
    CHECK(u.witness_score == best);
    CHECK(record_score(arg, f.window(), p.k_max) == best);
}

TEST_CASE("trivial tail bound") {
    CHECK(trivial_tail_bound(6, 2) == 3.0);
    CHECK(trivial_tail_bound(10, 2) == doctest::Approx(3.5849625));
    prime_table table(100000);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t n = 1 + rng() % 1000000000ull, k = 1 + rng() % 100;
        REQUIRE(trivial_tail_bound(n, k) >= big_omega(n + k, table));
    }
}

TEST_CASE("omega decomposition partitions Omega") {
    sieve_params p = toy();
    prime_table table(200000);
    const double R = p.level(1), T = p.large_cutoff(1);
    REQUIRE(R < 40);
    REQUIRE(T > 100);
    // one prime from each of tiny, medium, large and very large
    std::uint64_t big = 0;
    for (std::uint64_t q = static_cast<std::uint64_t>(T) + 1;; ++q)
        if (table.is_prime(q)) {
            big = q;
            break;
        }
    const std::uint64_t m = 2ull * 7 * 101 * big;
    const auto d = omega_decomposition(m - 1, 1, p, table);
    CHECK(d.tiny == 1);
    CHECK(d.medium == 1);
    CHECK(d.large == 1);
    CHECK(d.very_large == 1);
    CHECK(d.total() == 4);

    const auto pw = omega_decomposition((1ull << 7) * 9 * 49 - 1, 1, p, table);
    CHECK(pw.power_tiny_low == 4);   // 2^2..2^4 and 3^2
    CHECK(pw.power_tiny_high == 3);  // 2^5, 2^6, 2^7
    CHECK(pw.power_rough == 1);
    CHECK(pw.total() == 7 + 2 + 2);

    std::mt19937_64 rng(12);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t n = 1 + rng() % 10000000000ull;
        const int k = 1 + static_cast<int>(rng() % 40);
        const auto parts = omega_decomposition(n, k, p, table);
        REQUIRE(parts.total() == big_omega(n + k, table));
        REQUIRE(parts.very_large <= std::log(double(n + k)) / std::log(p.large_cutoff(k)) + 1e-12);
    }
}
