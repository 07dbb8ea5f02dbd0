#include "roughn/primes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "roughn/errors.hpp"
#include "roughn/parallel.hpp"

namespace roughn {

namespace {

constexpr char kTableMagic[5] = {'R', 'L', 'P', 'T', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) fail(errc::io_error, "truncated prime table file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

// floor(sqrt(n)) exactly.
std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && static_cast<unsigned __int128>(r) * r > n) --r;
    while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= n) ++r;
    return r;
}

} // namespace

prime_table::prime_table(std::uint64_t limit) : limit_(limit) {
    require(limit >= 2, errc::invalid_argument, "prime table limit must be >= 2");
    require(limit <= 0xFFFFFFFFull, errc::invalid_argument,
            "prime table limit exceeds the 32-bit spf budget");
    spf_.assign(limit - 1, 0);
    // Linear sieve: every composite is marked exactly once by its spf.
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (spf_[i - 2] == 0) {
            spf_[i - 2] = static_cast<std::uint32_t>(i);
            primes_.push_back(i);
        }
        const std::uint64_t si = spf_[i - 2];
        for (std::uint64_t p : primes_) {
            if (p > si || p * i > limit) break;
            spf_[p * i - 2] = static_cast<std::uint32_t>(p);
        }
    }
}

void prime_table::build_spf_from_primes() {
    spf_.assign(limit_ - 1, 0);
    for (std::uint64_t p : primes_) {
        for (std::uint64_t m = p; m <= limit_; m += p) {
            if (spf_[m - 2] == 0) spf_[m - 2] = static_cast<std::uint32_t>(p);
        }
    }
    for (std::uint64_t n = 2; n <= limit_; ++n) {
        if (spf_[n - 2] == 0) fail(errc::io_error, "prime table file is missing primes");
    }
}

std::uint64_t prime_table::spf(std::uint64_t n) const {
    require(n >= 2 && n <= limit_, errc::table_too_small, "spf query outside table");
    return spf_[n - 2];
}

bool prime_table::is_prime(std::uint64_t n) const {
    if (n < 2) return false;
    if (n <= limit_) return spf_[n - 2] == n;
    const factor_list f = factorize(n, *this);
    return f.size() == 1 && f[0].exponent == 1;
}

std::span<const std::uint64_t> prime_table::primes_in(std::uint64_t lo, std::uint64_t hi) const {
    hi = std::min(hi, limit_);
    if (hi <= lo) return {};
    auto first = std::upper_bound(primes_.begin(), primes_.end(), lo);
    auto last = std::upper_bound(primes_.begin(), primes_.end(), hi);
    if (last <= first) return {};
    return {&*first, static_cast<std::size_t>(last - first)};
}

void prime_table::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(errc::io_error, "cannot open " + path + " for writing");
    os.write(kTableMagic, sizeof kTableMagic);
    put_u64(os, limit_);
    put_u64(os, primes_.size());
    for (std::uint64_t p : primes_) put_u64(os, p);
    if (!os) fail(errc::io_error, "write failed: " + path);
}

prime_table prime_table::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(errc::io_error, "cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, kTableMagic, 5) != 0)
        fail(errc::io_error, "bad prime table magic in " + path);
    prime_table t;
    t.limit_ = get_u64(is);
    require(t.limit_ >= 2 && t.limit_ <= 0xFFFFFFFFull, errc::io_error, "bad prime table limit");
    const std::uint64_t count = get_u64(is);
    require(count <= t.limit_, errc::io_error, "bad prime count");
    t.primes_.resize(count);
    std::uint64_t prev = 1;
    for (auto& p : t.primes_) {
        p = get_u64(is);
        require(p > prev && p <= t.limit_, errc::io_error, "prime list not increasing");
        prev = p;
    }
    t.build_spf_from_primes();
    for (std::uint64_t p : t.primes_) {
        require(t.spf_[p - 2] == p, errc::io_error, "prime table file lists a composite");
    }
    return t;
}

factor_list factorize(std::uint64_t n, const prime_table& table) {
    require(n != 0, errc::invalid_argument, "cannot factorize 0");
    factor_list out;
    if (n <= table.limit()) {
        while (n > 1) {
            const std::uint64_t p = table.spf(n);
            std::uint32_t e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.push_back({p, e});
        }
        return out;
    }
    require(static_cast<unsigned __int128>(table.limit()) * table.limit() >= n,
            errc::table_too_small,
            "prime table limit " + std::to_string(table.limit()) + " too small to factor " +
                std::to_string(n));
    for (std::uint64_t p : table.primes()) {
        if (static_cast<unsigned __int128>(p) * p > n) break;
        if (n % p != 0) continue;
        std::uint32_t e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({p, e});
        if (n <= table.limit()) break;
    }
    if (n > 1 && n <= table.limit()) {
        // finish with spf; remaining factors are >= the last trial prime
        while (n > 1) {
            const std::uint64_t p = table.spf(n);
            std::uint32_t e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.push_back({p, e});
        }
    } else if (n > 1) {
        out.push_back({n, 1});
    }
    return out;
}

int omega(const factor_list& f) { return static_cast<int>(f.size()); }

int big_omega(const factor_list& f) {
    int s = 0;
    for (const auto& pp : f) s += static_cast<int>(pp.exponent);
    return s;
}

std::uint64_t tau(const factor_list& f) {
    std::uint64_t t = 1;
    for (const auto& pp : f) t *= pp.exponent + 1;
    return t;
}

int mobius(const factor_list& f) {
    for (const auto& pp : f)
        if (pp.exponent > 1) return 0;
    return (f.size() % 2 == 0) ? 1 : -1;
}

int omega(std::uint64_t n, const prime_table& table) { return omega(factorize(n, table)); }
int big_omega(std::uint64_t n, const prime_table& table) { return big_omega(factorize(n, table)); }
std::uint64_t tau(std::uint64_t n, const prime_table& table) { return tau(factorize(n, table)); }

int mobius(std::uint64_t n, const prime_table& table) {
    require(n != 0, errc::invalid_argument, "mobius(0) is undefined");
    if (n <= table.limit()) {
        int sign = 1;
        while (n > 1) {
            const std::uint64_t p = table.spf(n);
            n /= p;
            if (n % p == 0) return 0;
            sign = -sign;
        }
        return sign;
    }
    return mobius(factorize(n, table));
}

std::span<const prime_power> window_factors::factors(std::uint64_t n) const {
    require(n >= lo_ && n <= hi_, errc::out_of_range, "integer outside factored window");
    const std::size_t i = n - lo_;
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

int window_factors::omega(std::uint64_t n) const { return static_cast<int>(factors(n).size()); }

int window_factors::big_omega(std::uint64_t n) const {
    int s = 0;
    for (const auto& pp : factors(n)) s += static_cast<int>(pp.exponent);
    return s;
}

namespace {

struct segment_result {
    std::vector<std::uint32_t> counts;
    std::vector<prime_power> entries;
};

segment_result factor_segment(std::uint64_t lo, std::uint64_t hi, std::span<const std::uint64_t> sieve_primes) {
    const std::size_t len = hi - lo + 1;
    std::vector<std::uint64_t> rem(len);
    for (std::size_t i = 0; i < len; ++i) rem[i] = lo + i;

    struct event {
        std::uint32_t index;
        prime_power pp;
    };
    std::vector<event> events;
    events.reserve(len * 3);
    for (std::uint64_t p : sieve_primes) {
        std::uint64_t first = ((lo + p - 1) / p) * p;
        for (std::uint64_t m = first; m <= hi; m += p) {
            const std::size_t i = m - lo;
            std::uint32_t e = 0;
            while (rem[i] % p == 0) {
                rem[i] /= p;
                ++e;
            }
            events.push_back({static_cast<std::uint32_t>(i), {p, e}});
        }
    }
    for (std::size_t i = 0; i < len; ++i) {
        if (rem[i] > 1) events.push_back({static_cast<std::uint32_t>(i), {rem[i], 1}});
    }
    // Counting sort by index; stable, so primes stay ascending within an index.
    segment_result out;
    out.counts.assign(len, 0);
    for (const auto& ev : events) ++out.counts[ev.index];
    std::vector<std::size_t> pos(len + 1, 0);
    for (std::size_t i = 0; i < len; ++i) pos[i + 1] = pos[i] + out.counts[i];
    out.entries.resize(events.size());
    for (const auto& ev : events) out.entries[pos[ev.index]++] = ev.pp;
    return out;
}

} // namespace

window_factors factor_window(std::uint64_t lo, std::uint64_t hi, const prime_table& table, int workers) {
    require(lo >= 2 && lo <= hi, errc::invalid_argument, "factor_window needs 2 <= lo <= hi");
    const std::uint64_t root = isqrt(hi);
    require(table.limit() >= root, errc::table_too_small,
            "prime table does not cover sqrt(hi) = " + std::to_string(root));
    require(hi - lo < 0xFFFFFFF0ull, errc::budget_exceeded, "window too large");
    const auto sieve_primes = table.primes_in(1, root);

    constexpr std::uint64_t kSegment = 1u << 18;
    const std::uint64_t len = hi - lo + 1;
    const std::size_t nseg = static_cast<std::size_t>((len + kSegment - 1) / kSegment);
    std::vector<segment_result> parts(nseg);
    parallel_chunks(nseg, workers, [&](std::size_t s) {
        const std::uint64_t a = lo + s * kSegment;
        const std::uint64_t b = std::min(hi, a + kSegment - 1);
        parts[s] = factor_segment(a, b, sieve_primes);
    });

    window_factors wf;
    wf.lo_ = lo;
    wf.hi_ = hi;
    wf.offsets_.reserve(len + 1);
    wf.offsets_.push_back(0);
    std::size_t total = 0;
    for (const auto& part : parts) total += part.entries.size();
    wf.entries_.reserve(total);
    for (auto& part : parts) {
        for (std::uint32_t c : part.counts) wf.offsets_.push_back(wf.offsets_.back() + c);
        wf.entries_.insert(wf.entries_.end(), part.entries.begin(), part.entries.end());
    }
    return wf;
}

double mertens_partial_sum(double lo, double hi, const prime_table& table) {
    require(lo >= 0.0 && lo <= hi, errc::invalid_argument, "mertens_partial_sum needs 0 <= lo <= hi");
    require(hi <= static_cast<double>(table.limit()), errc::table_too_small,
            "mertens range exceeds the prime table");
    double s = 0.0;
    for (std::uint64_t p : table.primes()) {
        const double pd = static_cast<double>(p);
        if (pd > hi) break;
        if (pd > lo) s += 1.0 / pd;
    }
    return s;
}

} // namespace roughn
