#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace roughn {

enum class rate_kind { log, iterated_log, constant, table };

/// Success rate 1/f(n) of the Bernoulli model, with f scaled by `scale`.
///   log:          f(n) = log n
///   iterated_log: f(n) = log n / (log log n)^{j-1}
///   constant:     f(n) = value
///   table:        f(n) = values[n], last value repeated beyond the table
struct rate_function {
    rate_kind kind = rate_kind::log;
    int j = 2;
    double value = 2.0;
    std::vector<double> values;
    double scale = 1.0;

    double operator()(std::uint64_t n) const;
};

/// "log", "iterated_log:J", "constant:V" or "table:v0,v1,...".
rate_function parse_rate(const std::string& spec);
std::string rate_name(const rate_function& f);

struct cramer_config {
    rate_function f;
    std::uint64_t N = 100000;
    int trials = 100;
    std::uint64_t seed = 1;
    std::uint64_t warmup = 0;  // 0 selects max(3, ceil(N^{1/4}))

    std::uint64_t effective_warmup() const;
};

/// Throws invalid_argument unless f(n) > 1 for warmup <= n <= N.
void validate(const cramer_config& c);

struct gap_record {
    std::uint64_t k;      // index of S_k within the trial
    std::uint64_t s_k;
    std::uint64_t gap;    // S_{k+1} - S_k
    double ratio;         // gap / (f(S_k) log S_k)
};

inline constexpr int kGapBins = 60;
inline constexpr double kGapBinWidth = 0.05;

struct trial_result {
    int trial = 0;
    std::uint64_t successes = 0;
    double max_ratio = 0.0;
    std::uint64_t gap_count = 0;
    std::uint64_t gap_sum = 0;
    std::vector<std::uint64_t> histogram;  // kGapBins + 1 bins, last is overflow
    std::vector<gap_record> gaps;          // only when requested
};

/// One trial, seeded with stream_seed(seed, trial).
trial_result simulate_trial(const cramer_config& c, int trial, bool keep_gaps);

struct gap_report {
    std::uint64_t seed = 0;
    int trials = 0;
    std::vector<double> max_ratio;  // per trial; 0 when the trial has no gap
    std::vector<std::uint64_t> successes;
    double mean_gap = 0.0;
    std::uint64_t gap_count = 0;
    double hist_width = kGapBinWidth;
    std::vector<std::uint64_t> histogram;  // [i*w, (i+1)*w), last bin is overflow
    bool empty = false;                    // no gap recorded in any trial

    int trials_at_most(double bound) const;
};

class gap_accumulator {
public:
    explicit gap_accumulator(const cramer_config& c);
    /// Trials must arrive in index order.
    void add(const trial_result& r);
    gap_report finish() const;

private:
    gap_report rep_;
    std::uint64_t gap_total_ = 0;
};

gap_report simulate_gaps(const cramer_config& c, int workers = 1);

// ---- pi_k ------------------------------------------------------------------

/// counts[k] = #{2 <= n <= x : omega(n) = k}; throws budget_exceeded for x > 4e9.
std::vector<std::uint64_t> count_pi_all(std::uint64_t x, int workers = 1);
std::uint64_t count_pi_k(std::uint64_t x, int k, int workers = 1);

/// (x / log x) (log log x)^{k-1} / (k-1)!
double pi_k_lower_shape(std::uint64_t x, int k);
double density_ratio(std::uint64_t x, int k, int workers = 1);

// ---- conjecture-facing searches ------------------------------------------

enum class window_variant { a_omega, b_big_omega, weak };
const char* variant_name(window_variant v);
window_variant parse_variant(const std::string& s);

struct window_result {
    std::uint64_t x = 0;
    window_variant variant = window_variant::a_omega;
    double p1 = 0, p2 = 0;  // (eps, C) for A/B, (C0, d) for weak
    std::uint64_t lo = 0, hi = 0;  // scanned integers [lo, hi]
    double length = 0.0;
    std::optional<std::uint64_t> witness;
    int witness_count = 0;  // omega or Omega of the witness
};

/// Largest n in the window belonging to the set, or none. Windows:
/// (x - C log x sqrt(log log x), x] for A/B, (x - (log(x/2))^d, x] for weak,
/// clamped at 2. Throws invalid_argument when the length is below 1.
window_result window_search(std::uint64_t x, window_variant v, double p1, double p2, int workers = 1);

struct refuter_result {
    std::uint64_t n = 0;
    double delta = 0.0;
    std::uint64_t budget = 0;
    std::optional<std::uint64_t> k;
    int omega_value = 0;
    double threshold = 0.0;
    // chain check, filled when (C0, d) were given and a window witness exists
    bool chain_checked = false;
    bool chain_holds = false;
    std::uint64_t chain_k = 0;
    int chain_omega = 0;
    double chain_bound = 0.0;  // (1 + (C0/d - 1)) log k / log log k
};

/// First k in [3, budget] with omega(n - k) > (1 + delta) log k / log log k.
refuter_result erdos679_refuter(std::uint64_t n, double delta, std::uint64_t budget,
                                std::optional<std::pair<double, double>> c0_d = std::nullopt);

} // namespace roughn
