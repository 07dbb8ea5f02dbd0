#include "roughn/roughn.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

#include "roughn/bump.hpp"
#include "roughn/cramer.hpp"
#include "roughn/errors.hpp"
#include "roughn/harness.hpp"
#include "roughn/moments.hpp"
#include "roughn/primes.hpp"
#include "roughn/sieve.hpp"

struct rl_prime_table {
    roughn::prime_table impl;
};
struct rl_bump {
    roughn::bump impl;
};
struct rl_weight_table {
    roughn::weight_table impl;
};

namespace {

thread_local std::string last_error;

template <class Fn>
rl_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return RL_OK;
    } catch (const roughn::lab_error& e) {
        last_error = e.what();
        return static_cast<rl_status>(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return RL_BUDGET_EXCEEDED;
    } catch (const std::exception& e) {
        last_error = e.what();
        return RL_INTERNAL;
    } catch (...) {
        last_error = "unknown exception";
        return RL_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) roughn::fail(roughn::errc::invalid_argument, std::string(what) + " is NULL");
}

void copy_str(char* dst, std::size_t cap, const std::string& src) {
    if (cap == 0) return;
    const std::size_t n = std::min(cap - 1, src.size());
    std::memcpy(dst, src.data(), n);
    dst[n] = '\0';
}

roughn::sieve_params to_cpp(const rl_sieve_params& p) {
    roughn::sieve_params s;
    s.x = p.x;
    s.K = p.K;
    s.w = p.w;
    s.a = p.a;
    s.c = p.c;
    s.gamma = p.gamma;
    s.T_exponent = p.T_exponent;
    s.A = p.A;
    s.k_max = p.k_max;
    return s;
}

} // namespace

extern "C" {

const char* rl_status_name(rl_status s) { return roughn::errc_name(static_cast<roughn::errc>(s)); }

const char* rl_last_error(void) { return last_error.c_str(); }

rl_status rl_prime_table_create(uint64_t limit, rl_prime_table** out) {
    return guarded([&] {
        need(out, "out");
        *out = new rl_prime_table{roughn::prime_table(limit)};
    });
}

rl_status rl_prime_table_load(const char* path, rl_prime_table** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new rl_prime_table{roughn::prime_table::load(path)};
    });
}

rl_status rl_prime_table_save(const rl_prime_table* t, const char* path) {
    return guarded([&] {
        need(t, "table");
        need(path, "path");
        t->impl.save(path);
    });
}

void rl_prime_table_destroy(rl_prime_table* t) { delete t; }

uint64_t rl_prime_table_limit(const rl_prime_table* t) { return t ? t->impl.limit() : 0; }

rl_status rl_factorize(const rl_prime_table* t, uint64_t n, uint64_t* primes, uint32_t* exponents, size_t cap,
                       size_t* count) {
    return guarded([&] {
        need(t, "table");
        need(count, "count");
        const auto f = roughn::factorize(n, t->impl);
        *count = f.size();
        if (f.size() > cap) roughn::fail(roughn::errc::out_of_range, "factor buffer too small");
        if (!f.empty()) {
            need(primes, "primes");
            need(exponents, "exponents");
        }
        for (std::size_t i = 0; i < f.size(); ++i) {
            primes[i] = f[i].prime;
            exponents[i] = f[i].exponent;
        }
    });
}

rl_status rl_arithmetic(const rl_prime_table* t, uint64_t n, rl_arith* out) {
    return guarded([&] {
        need(t, "table");
        need(out, "out");
        const auto f = roughn::factorize(n, t->impl);
        out->omega = roughn::omega(f);
        out->big_omega = roughn::big_omega(f);
        out->tau = roughn::tau(f);
        out->mobius = roughn::mobius(f);
    });
}

rl_status rl_bump_create(double sharpness, rl_bump** out) {
    return guarded([&] {
        need(out, "out");
        roughn::require(sharpness > 0, roughn::errc::invalid_argument, "sharpness must be positive");
        roughn::bump_options o;
        o.sharpness = sharpness;
        *out = new rl_bump{roughn::bump(o)};
    });
}

void rl_bump_destroy(rl_bump* b) { delete b; }

rl_status rl_bump_eta(const rl_bump* b, double u, double* out) {
    return guarded([&] {
        need(b, "bump");
        need(out, "out");
        *out = b->impl.eta(u);
    });
}

rl_status rl_bump_eta_tilde(const rl_bump* b, double u, double* out) {
    return guarded([&] {
        need(b, "bump");
        need(out, "out");
        *out = b->impl.eta_tilde(u);
    });
}

rl_status rl_bump_eta_hat(const rl_bump* b, double t, double* out) {
    return guarded([&] {
        need(b, "bump");
        need(out, "out");
        *out = b->impl.eta_hat(t);
    });
}

rl_status rl_c0_compute(const rl_bump* b, rl_c0* out) {
    return guarded([&] {
        need(b, "bump");
        need(out, "out");
        const auto r = roughn::c0_compute(b->impl);
        *out = rl_c0{r.c0_time, r.c0_freq, r.err_time, r.err_freq, r.eta_hat_mass};
    });
}

void rl_sieve_params_default(rl_sieve_params* p) {
    if (!p) return;
    const roughn::sieve_params s;
    *p = rl_sieve_params{s.x, s.K, s.w, s.a, s.c, s.gamma, s.T_exponent, s.A, s.k_max};
}

rl_status rl_sieve_params_validate(const rl_sieve_params* p) {
    return guarded([&] {
        need(p, "params");
        roughn::validate(to_cpp(*p));
    });
}

rl_status rl_weight_table_build(const rl_sieve_params* p, const rl_bump* b, int workers, rl_weight_table** out) {
    return guarded([&] {
        need(p, "params");
        need(b, "bump");
        need(out, "out");
        *out = new rl_weight_table{roughn::weight_table::build(to_cpp(*p), b->impl, std::max(1, workers))};
    });
}

void rl_weight_table_destroy(rl_weight_table* t) { delete t; }

rl_status rl_weight_table_info(const rl_weight_table* t, rl_weight_info* out) {
    return guarded([&] {
        need(t, "table");
        need(out, "out");
        *out = rl_weight_info{t->impl.W(), t->impl.first(), t->impl.count(), t->impl.total()};
    });
}

rl_status rl_nu(const rl_weight_table* t, uint64_t n, double* out) {
    return guarded([&] {
        need(t, "table");
        need(out, "out");
        *out = t->impl.nu(n);
    });
}

rl_status rl_prob_divides(const rl_weight_table* t, uint64_t d, int64_t k, double* out) {
    return guarded([&] {
        need(t, "table");
        need(out, "out");
        *out = t->impl.prob_divides(d, k);
    });
}

rl_status rl_sample(const rl_weight_table* t, uint64_t seed, size_t count, int workers, uint64_t* out) {
    return guarded([&] {
        need(t, "table");
        need(out, "out");
        const auto s = t->impl.sample(seed, count, std::max(1, workers));
        std::copy(s.begin(), s.end(), out);
    });
}

rl_status rl_stirling2(int s, int t, char* buf, size_t cap) {
    return guarded([&] {
        need(buf, "buf");
        const std::string digits = roughn::stirling2(s, t).str();
        if (digits.size() + 1 > cap) roughn::fail(roughn::errc::out_of_range, "buffer too small for {s, t}");
        copy_str(buf, cap, digits);
    });
}

rl_status rl_partition_sum_G(int s3, double R, double* enumeration, double* egf) {
    return guarded([&] {
        need(enumeration, "enumeration");
        need(egf, "egf");
        const auto g = roughn::partition_sum_G(s3, R);
        *enumeration = g.enumeration;
        *egf = g.egf;
    });
}

rl_status rl_rho_r_maximize(int r, double step, double* max_log_rho, double* distance_to_uniform) {
    return guarded([&] {
        need(max_log_rho, "max_log_rho");
        need(distance_to_uniform, "distance_to_uniform");
        const auto rep = roughn::rho_r_maximize(r, step);
        *max_log_rho = rep.max_log_rho;
        *distance_to_uniform = rep.distance_to_uniform;
    });
}

rl_status rl_count_pi_k(uint64_t x, int k, int workers, uint64_t* out) {
    return guarded([&] {
        need(out, "out");
        *out = roughn::count_pi_k(x, k, std::max(1, workers));
    });
}

rl_status rl_density_ratio(uint64_t x, int k, int workers, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = roughn::density_ratio(x, k, std::max(1, workers));
    });
}

rl_status rl_simulate_gaps(const char* rate, double scale, uint64_t N, int trials, uint64_t seed, uint64_t warmup,
                           int workers, rl_gap_summary* out) {
    return guarded([&] {
        need(rate, "rate");
        need(out, "out");
        roughn::cramer_config c;
        c.f = roughn::parse_rate(rate);
        c.f.scale = scale;
        c.N = N;
        c.trials = trials;
        c.seed = seed;
        c.warmup = warmup;
        const auto r = roughn::simulate_gaps(c, std::max(1, workers));
        out->trials = r.trials;
        out->trials_le_1_5 = r.trials_at_most(1.5);
        out->gap_count = r.gap_count;
        out->mean_gap = r.mean_gap;
        out->worst_max_ratio = r.max_ratio.empty() ? 0.0 : *std::max_element(r.max_ratio.begin(), r.max_ratio.end());
        out->empty = r.empty ? 1 : 0;
    });
}

rl_status rl_window_search(uint64_t x, rl_window_variant v, double p1, double p2, int workers, int* found,
                           uint64_t* witness) {
    return guarded([&] {
        need(found, "found");
        need(witness, "witness");
        if (v < RL_WINDOW_A_OMEGA || v > RL_WINDOW_WEAK) roughn::fail(roughn::errc::invalid_argument, "bad variant");
        const auto r = roughn::window_search(x, static_cast<roughn::window_variant>(v), p1, p2, std::max(1, workers));
        *found = r.witness ? 1 : 0;
        if (r.witness) *witness = *r.witness;
    });
}

rl_status rl_refute_679(uint64_t n, double delta, uint64_t budget, int* found, uint64_t* k, int* omega_value) {
    return guarded([&] {
        need(found, "found");
        need(k, "k");
        need(omega_value, "omega_value");
        const auto r = roughn::erdos679_refuter(n, delta, budget);
        *found = r.k ? 1 : 0;
        if (r.k) {
            *k = *r.k;
            *omega_value = r.omega_value;
        }
    });
}

void rl_run_config_default(rl_run_config* cfg) {
    if (!cfg) return;
    const roughn::run_config d;
    *cfg = rl_run_config{nullptr, nullptr, nullptr, d.seed, d.workers, d.checkpoint_secs, nullptr, d.max_units};
}

int rl_run(const rl_run_config* cfg, rl_run_info* info) {
    roughn::run_result r;
    if (!cfg || !cfg->subcommand) {
        r.exit_code = 2;
        r.code = roughn::errc::invalid_argument;
        r.message = "missing subcommand\n" + roughn::usage();
    } else {
        roughn::run_config c;
        c.subcommand = cfg->subcommand;
        if (cfg->params_path) c.params_path = cfg->params_path;
        if (cfg->out_dir) c.out_dir = cfg->out_dir;
        c.seed = cfg->seed;
        c.workers = cfg->workers;
        c.checkpoint_secs = cfg->checkpoint_secs;
        if (cfg->resume_path) c.resume_path = cfg->resume_path;
        c.max_units = cfg->max_units;
        r = roughn::run(c);
    }
    if (info) {
        info->status = static_cast<rl_status>(r.code);
        info->partial = r.partial ? 1 : 0;
        copy_str(info->message, sizeof info->message, r.message);
        copy_str(info->checkpoint_path, sizeof info->checkpoint_path, r.checkpoint_path);
    }
    return r.exit_code;
}

const char* rl_usage(void) {
    static const std::string u = roughn::usage();
    return u.c_str();
}

} // extern "C"
