#pragma once

#include <functional>
#include <string>
#include <vector>

namespace roughn {

struct bump_options {
    /// eta0(u) = exp(-sharpness / (1 - 4u^2)) on (-1/2, 1/2).
    double sharpness = 1.0;
    /// Simpson intervals across the base support [-1/2, 1/2].
    int base_intervals = 4000;
    /// Uniform frequency step and truncation for the tabulated eta_hat.
    double t_step = 0.025;
    double t_max = 200.0;
    /// Simpson intervals on [0, 1] for time-domain integrals.
    int u_intervals = 2000;
};

/// User-supplied base bump: an even, nonnegative function supported in
/// [-1/2, 1/2], together with its derivative.
struct base_bump {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

struct c0_result {
    double c0_time = 0.0;
    double c0_freq = 0.0;
    double err_time = 0.0;
    double err_freq = 0.0;
    /// Simpson integral of the tabulated eta_hat over [-t_max, t_max]; equals eta(0) = 1.
    double eta_hat_mass = 0.0;
};

struct decay_sample {
    double t;
    double abs_eta_hat;
    double scaled;  // |eta_hat(t)| * exp(c * sqrt(t))
};

struct decay_report {
    double fitted_c = 0.0;
    double sup_scaled = 0.0;
    std::vector<decay_sample> samples;
};

/// The normalized autocorrelation bump
///     eta(u) = (eta0 * eta0~)(u) / (eta0 * eta0~)(0),   eta0~(u) = eta0(-u),
/// supported in [-1, 1] with eta(0) = 1 and eta_hat = |eta0_hat|^2 / const >= 0.
///
/// Convolutions and Fourier integrals use composite Simpson. Immutable after
/// construction; all member functions are reentrant.
class bump {
public:
    explicit bump(bump_options opts = {});
    /// Throws invalid_argument when the base is not even, is negative, or is
    /// not supported in [-1/2, 1/2].
    bump(base_bump base, bump_options opts);

    const bump_options& options() const noexcept { return opts_; }
    double normalization() const noexcept { return norm_; }

    double base(double u) const;
    double eta(double u) const;
    double eta_prime(double u) const;
    double eta_tilde(double u) const;
    double eta_tilde_prime(double u) const;

    /// (1/2pi) * integral eta(u) e^{itu} du, computed from the base transform.
    /// Throws out_of_range when |t| > t_max.
    double eta_hat(double t) const;

    /// Tabulated eta_hat on the uniform grid over [-t_max, t_max].
    const std::vector<double>& t_grid() const noexcept { return t_grid_; }
    const std::vector<double>& eta_hat_grid() const noexcept { return eta_hat_grid_; }

    /// Cached samples of eta and eta' on the uniform u-grid over [0, 1].
    const std::vector<double>& u_grid() const noexcept { return u_grid_; }
    const std::vector<double>& eta_grid() const noexcept { return eta_grid_; }
    const std::vector<double>& eta_prime_grid() const noexcept { return eta_prime_grid_; }

private:
    void init();
    double base_prime(double u) const;
    double base_transform(double t) const;
    double convolve(double u, bool derivative) const;

    bump_options opts_;
    base_bump custom_;
    bool has_custom_ = false;

    double norm_ = 1.0;
    std::vector<double> base_nodes_;    // [0, 1/2]
    std::vector<double> base_weighted_; // Simpson weight * eta0(node)
    std::vector<double> t_grid_;
    std::vector<double> eta_hat_grid_;
    std::vector<double> u_grid_;
    std::vector<double> eta_grid_;
    std::vector<double> eta_prime_grid_;
};

/// Both routes to c0: the time integral of (eta_tilde')^2 over [0, 1] and the
/// double frequency integral of Re[(1+it)(1+it')/(2+i(t+t'))] eta_hat(t) eta_hat(t').
/// Error estimates are Richardson differences plus the eta_hat mass defect.
/// Throws numeric_failure if either estimate exceeds 1e-4.
c0_result c0_compute(const bump& b);

/// Frequency-route integrand before the eta_hat factors (always >= 0).
double c0_kernel(double t, double tp);

/// Samples of |eta_hat| on the grid t in [0, t_max] with the half-exponential
/// envelope exp(-c sqrt t) fitted to the local maxima over t >= 1.
decay_report decay_profile(const bump& b, double t_step = 0.5);

/// CSV emitters: eta_profile.csv columns u,eta,eta_tilde,eta_tilde_prime and
/// eta_hat_profile.csv columns t,eta_hat.
void write_eta_profile(const bump& b, const std::string& path, double u_step = 0.005);
void write_eta_hat_profile(const bump& b, const std::string& path);

} // namespace roughn
