#ifndef ROUGHN_H
#define ROUGHN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define RL_API __attribute__((visibility("default")))
#else
#define RL_API
#endif

typedef enum rl_status {
    RL_OK = 0,
    RL_INVALID_ARGUMENT = 1,
    RL_TABLE_TOO_SMALL = 2,
    RL_OUT_OF_RANGE = 3,
    RL_EMPTY_SUPPORT = 4,
    RL_NUMERIC_FAILURE = 5,
    RL_BUDGET_EXCEEDED = 6,
    RL_IO_ERROR = 7,
    RL_FINGERPRINT_MISMATCH = 8,
    RL_INTERNAL = 9
} rl_status;

RL_API const char* rl_status_name(rl_status s);
/* Message of the last failed call on this thread; "" after a success. */
RL_API const char* rl_last_error(void);

/* ---- primes ---------------------------------------------------------------- */

typedef struct rl_prime_table rl_prime_table;

RL_API rl_status rl_prime_table_create(uint64_t limit, rl_prime_table** out);
RL_API rl_status rl_prime_table_load(const char* path, rl_prime_table** out);
RL_API rl_status rl_prime_table_save(const rl_prime_table* t, const char* path);
RL_API void rl_prime_table_destroy(rl_prime_table* t);
RL_API uint64_t rl_prime_table_limit(const rl_prime_table* t);

/* Writes up to `cap` prime/exponent pairs; *count receives the number of
 * distinct primes even when it exceeds cap (then RL_OUT_OF_RANGE). */
RL_API rl_status rl_factorize(const rl_prime_table* t, uint64_t n, uint64_t* primes, uint32_t* exponents,
                              size_t cap, size_t* count);

typedef struct rl_arith {
    int omega;
    int big_omega;
    uint64_t tau;
    int mobius;
} rl_arith;

RL_API rl_status rl_arithmetic(const rl_prime_table* t, uint64_t n, rl_arith* out);

/* ---- bump ------------------------------------------------------------------ */

typedef struct rl_bump rl_bump;

RL_API rl_status rl_bump_create(double sharpness, rl_bump** out);
RL_API void rl_bump_destroy(rl_bump* b);
RL_API rl_status rl_bump_eta(const rl_bump* b, double u, double* out);
RL_API rl_status rl_bump_eta_tilde(const rl_bump* b, double u, double* out);
RL_API rl_status rl_bump_eta_hat(const rl_bump* b, double t, double* out);

typedef struct rl_c0 {
    double c0_time;
    double c0_freq;
    double err_time;
    double err_freq;
    double eta_hat_mass;
} rl_c0;

RL_API rl_status rl_c0_compute(const rl_bump* b, rl_c0* out);

/* ---- sieve measure ------------------------------------------------------------ */

typedef struct rl_sieve_params {
    uint64_t x;
    int K;
    uint64_t w;
    int a;
    double c;
    double gamma;
    double T_exponent;
    double A;
    int k_max;
} rl_sieve_params;

RL_API void rl_sieve_params_default(rl_sieve_params* p);
RL_API rl_status rl_sieve_params_validate(const rl_sieve_params* p);

typedef struct rl_weight_table rl_weight_table;

RL_API rl_status rl_weight_table_build(const rl_sieve_params* p, const rl_bump* b, int workers,
                                       rl_weight_table** out);
RL_API void rl_weight_table_destroy(rl_weight_table* t);

typedef struct rl_weight_info {
    uint64_t W;
    uint64_t first;
    uint64_t count;
    double total;
} rl_weight_info;

RL_API rl_status rl_weight_table_info(const rl_weight_table* t, rl_weight_info* out);
RL_API rl_status rl_nu(const rl_weight_table* t, uint64_t n, double* out);
RL_API rl_status rl_prob_divides(const rl_weight_table* t, uint64_t d, int64_t k, double* out);
RL_API rl_status rl_sample(const rl_weight_table* t, uint64_t seed, size_t count, int workers, uint64_t* out);

/* ---- moments ------------------------------------------------------------------ */

/* Decimal digits of {s, t} into buf (NUL-terminated). */
RL_API rl_status rl_stirling2(int s, int t, char* buf, size_t cap);
RL_API rl_status rl_partition_sum_G(int s3, double R, double* enumeration, double* egf);
RL_API rl_status rl_rho_r_maximize(int r, double step, double* max_log_rho, double* distance_to_uniform);

/* ---- Cramer models -------------------------------------------------------------- */

RL_API rl_status rl_count_pi_k(uint64_t x, int k, int workers, uint64_t* out);
RL_API rl_status rl_density_ratio(uint64_t x, int k, int workers, double* out);

typedef struct rl_gap_summary {
    int trials;
    int trials_le_1_5;
    uint64_t gap_count;
    double mean_gap;
    double worst_max_ratio;
    int empty;
} rl_gap_summary;

/* rate: "log", "iterated_log:J", "constant:V" or "table:v0,v1,..."; warmup 0 selects the default. */
RL_API rl_status rl_simulate_gaps(const char* rate, double scale, uint64_t N, int trials, uint64_t seed,
                                  uint64_t warmup, int workers, rl_gap_summary* out);

typedef enum rl_window_variant { RL_WINDOW_A_OMEGA = 0, RL_WINDOW_B_BIG_OMEGA = 1, RL_WINDOW_WEAK = 2 } rl_window_variant;

/* *found is 0 when the window holds no member; *witness is then untouched. */
RL_API rl_status rl_window_search(uint64_t x, rl_window_variant v, double p1, double p2, int workers,
                                  int* found, uint64_t* witness);
RL_API rl_status rl_refute_679(uint64_t n, double delta, uint64_t budget, int* found, uint64_t* k,
                               int* omega_value);

/* ---- harness -------------------------------------------------------------------- */

typedef struct rl_run_config {
    const char* subcommand;
    const char* params_path;  /* NULL: defaults */
    const char* out_dir;      /* NULL: "." */
    uint64_t seed;
    int workers;
    int checkpoint_secs;
    const char* resume_path;  /* NULL: fresh run */
    uint64_t max_units;       /* 0: unlimited */
} rl_run_config;

typedef struct rl_run_info {
    rl_status status;
    int partial;
    char message[2048];
    char checkpoint_path[1024];
} rl_run_info;

RL_API void rl_run_config_default(rl_run_config* cfg);
/* Returns the process exit code: 0 ok, 1 failure, 2 invalid config, 3 budget exhausted. */
RL_API int rl_run(const rl_run_config* cfg, rl_run_info* info);
RL_API const char* rl_usage(void);

#ifdef __cplusplus
}
#endif

#endif
