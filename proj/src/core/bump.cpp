#include "roughn/bump.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "roughn/errors.hpp"
#include "roughn/report.hpp"

namespace roughn {

namespace {

// Simpson weights (without the h/3 factor) for n intervals, n even.
inline double simpson_coef(int j, int n) {
    if (j == 0 || j == n) return 1.0;
    return (j % 2 == 1) ? 4.0 : 2.0;
}

int even_at_least(double v, int floor_value) {
    int n = std::max(floor_value, static_cast<int>(std::ceil(v)));
    return n + (n % 2);
}

} // namespace

bump::bump(bump_options opts) : opts_(opts) { init(); }

bump::bump(base_bump base, bump_options opts)
    : opts_(opts), custom_(std::move(base)), has_custom_(true) {
    require(static_cast<bool>(custom_.value) && static_cast<bool>(custom_.derivative),
            errc::invalid_argument, "custom base bump needs a value and a derivative");
    const double peak = custom_.value(0.0);
    require(std::isfinite(peak) && peak > 0.0, errc::invalid_argument,
            "custom base bump must be positive at 0");
    for (int i = 1; i < 64; ++i) {
        const double u = 0.5 * i / 64.0;
        const double a = custom_.value(u), b = custom_.value(-u);
        require(a >= 0.0 && b >= 0.0, errc::invalid_argument, "custom base bump is negative");
        require(std::abs(a - b) <= 1e-12 * peak, errc::invalid_argument,
                "custom base bump is not even");
    }
    for (double u : {0.5, 0.5000001, 0.55, 0.75, 1.0, 2.0}) {
        require(custom_.value(u) == 0.0 && custom_.value(-u) == 0.0, errc::invalid_argument,
                "custom base bump is not supported in [-1/2, 1/2]");
    }
    init();
}

double bump::base(double u) const {
    if (!(std::abs(u) < 0.5)) return 0.0;
    if (has_custom_) return custom_.value(u);
    return std::exp(-opts_.sharpness / (1.0 - 4.0 * u * u));
}

double bump::base_prime(double u) const {
    if (!(std::abs(u) < 0.5)) return 0.0;
    if (has_custom_) return custom_.derivative(u);
    const double q = 1.0 - 4.0 * u * u;
    return std::exp(-opts_.sharpness / q) * (-8.0 * opts_.sharpness * u / (q * q));
}

void bump::init() {
    require(opts_.sharpness > 0.0, errc::invalid_argument, "sharpness must be positive");
    require(opts_.base_intervals >= 16 && opts_.base_intervals % 4 == 0, errc::invalid_argument,
            "base_intervals must be a positive multiple of 4");
    require(opts_.u_intervals >= 16 && opts_.u_intervals % 4 == 0, errc::invalid_argument,
            "u_intervals must be a positive multiple of 4");
    require(opts_.t_step > 0.0 && opts_.t_max > 0.0, errc::invalid_argument,
            "t_step and t_max must be positive");
    const double nt_real = 2.0 * opts_.t_max / opts_.t_step;
    const long nt = std::lround(nt_real);
    require(std::abs(nt_real - static_cast<double>(nt)) < 1e-9 && nt % 4 == 0, errc::invalid_argument,
            "2*t_max/t_step must be an integer multiple of 4");

    const int m = opts_.base_intervals / 2;
    const double h = 0.5 / m;
    base_nodes_.resize(m + 1);
    base_weighted_.resize(m + 1);
    double n2 = 0.0;
    for (int j = 0; j <= m; ++j) {
        const double v = j * h;
        const double wv = simpson_coef(j, m) * h / 3.0;
        const double e = base(v);
        base_nodes_[j] = v;
        base_weighted_[j] = wv * e;
        n2 += wv * e * e;
    }
    norm_ = 2.0 * n2;
    require(norm_ > 0.0 && std::isfinite(norm_), errc::numeric_failure, "degenerate base bump");

    const long half = nt / 2;
    t_grid_.resize(nt + 1);
    eta_hat_grid_.resize(nt + 1);
    for (long i = 0; i <= half; ++i) {
        const double t = i * opts_.t_step;
        const double f = base_transform(t);
        const double v = f * f / (2.0 * std::numbers::pi * norm_);
        t_grid_[half + i] = t;
        t_grid_[half - i] = -t;
        eta_hat_grid_[half + i] = v;
        eta_hat_grid_[half - i] = v;
    }

    const int nu = opts_.u_intervals;
    u_grid_.resize(nu + 1);
    eta_grid_.resize(nu + 1);
    eta_prime_grid_.resize(nu + 1);
    for (int i = 0; i <= nu; ++i) {
        const double u = static_cast<double>(i) / nu;
        u_grid_[i] = u;
        eta_grid_[i] = eta(u);
        eta_prime_grid_[i] = eta_prime(u);
    }
}

double bump::base_transform(double t) const {
    double s = 0.0;
    for (std::size_t j = 0; j < base_nodes_.size(); ++j)
        s += base_weighted_[j] * std::cos(t * base_nodes_[j]);
    return 2.0 * s;
}

// (eta0 * eta0~)(u) = int eta0(v) eta0(v - u) dv, or its u-derivative.
double bump::convolve(double u, bool derivative) const {
    const double a = std::abs(u);
    if (a >= 1.0) return 0.0;
    const double lo = a - 0.5, len = 1.0 - a;
    const int n = even_at_least(opts_.base_intervals * len, 64);
    const double h = len / n;
    double s = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double v = lo + j * h;
        const double g = derivative ? -base_prime(v - a) : base(v - a);
        s += simpson_coef(j, n) * base(v) * g;
    }
    s *= h / 3.0;
    if (derivative && u < 0.0) s = -s;
    return s;
}

double bump::eta(double u) const {
    return convolve(u, false) / norm_;
}

double bump::eta_prime(double u) const { return convolve(u, true) / norm_; }

double bump::eta_tilde(double u) const { return std::exp(-u) * eta(u); }

double bump::eta_tilde_prime(double u) const {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-u) * (eta_prime(u) - eta(u));
}

double bump::eta_hat(double t) const {
    if (!(std::abs(t) <= opts_.t_max * (1.0 + 1e-12)))
        fail(errc::out_of_range, "eta_hat: |t| exceeds t_max");
    const double f = base_transform(t);
    return f * f / (2.0 * std::numbers::pi * norm_);
}

double c0_kernel(double t, double tp) {
    const double s = t + tp;
    return (2.0 + t * t + tp * tp) / (4.0 + s * s);
}

c0_result c0_compute(const bump& b) {
    c0_result r;

    // time route
    {
        const auto& u = b.u_grid();
        const auto& e = b.eta_grid();
        const auto& ep = b.eta_prime_grid();
        const int n = static_cast<int>(u.size()) - 1;
        const double h = 1.0 / n;
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double d = ep[i] - e[i];
            const double f = std::exp(-2.0 * u[i]) * d * d;
            s1 += simpson_coef(i, n) * f;
            if (i % 2 == 0) s2 += simpson_coef(i / 2, n / 2) * f;
        }
        const double ih = s1 * h / 3.0, i2h = s2 * 2.0 * h / 3.0;
        r.c0_time = ih;
        r.err_time = std::abs(ih - i2h) / 15.0 + 4.0 * std::numeric_limits<double>::epsilon() * ih;
    }

    // frequency route
    {
        const auto& t = b.t_grid();
        const auto& eh = b.eta_hat_grid();
        const int n = static_cast<int>(t.size()) - 1;
        const double h = b.options().t_step;
        std::vector<double> a(n + 1), a2(n + 1, 0.0);
        double mass = 0.0;
        for (int i = 0; i <= n; ++i) {
            a[i] = simpson_coef(i, n) * h / 3.0 * eh[i];
            if (i % 2 == 0) a2[i] = simpson_coef(i / 2, n / 2) * 2.0 * h / 3.0 * eh[i];
            mass += a[i];
        }
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double ti = t[i];
            double row1 = 0.5 * a[i] * c0_kernel(ti, ti);
            double row2 = 0.5 * a2[i] * c0_kernel(ti, ti);
            for (int j = i + 1; j <= n; ++j) {
                const double k = c0_kernel(ti, t[j]);
                row1 += a[j] * k;
                row2 += a2[j] * k;
            }
            s1 += a[i] * row1;
            s2 += a2[i] * row2;
        }
        const double ih = 2.0 * s1, i2h = 2.0 * s2;
        r.c0_freq = ih;
        r.eta_hat_mass = mass;
        r.err_freq = std::abs(ih - i2h) / 15.0 + 2.0 * std::abs(mass - 1.0) * std::abs(ih) +
                     64.0 * std::numeric_limits<double>::epsilon() * ih;
    }

    if (!(r.err_time <= 1e-4) || !(r.err_freq <= 1e-4)) {
        fail(errc::numeric_failure,
             "c0 quadrature did not converge: c0_time=" + format_real(r.c0_time) +
                 " err_time=" + format_real(r.err_time) + " c0_freq=" + format_real(r.c0_freq) +
                 " err_freq=" + format_real(r.err_freq));
    }
    return r;
}

decay_report decay_profile(const bump& b, double t_step) {
    require(t_step > 0.0, errc::invalid_argument, "decay_profile step must be positive");
    const auto& t = b.t_grid();
    const auto& eh = b.eta_hat_grid();

    // least-squares fit of log|eta_hat| = alpha - c sqrt(t) through local maxima
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        if (t[i] < 1.0) continue;
        if (eh[i] >= eh[i - 1] && eh[i] >= eh[i + 1] && eh[i] > 0.0) {
            const double x = std::sqrt(t[i]), y = std::log(eh[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
    }
    decay_report rep;
    if (cnt >= 2) {
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        rep.fitted_c = -slope;
    }
    const double tmax = b.options().t_max;
    const long steps = static_cast<long>(std::floor(tmax / t_step + 1e-9));
    rep.samples.reserve(steps + 1);
    for (long i = 0; i <= steps; ++i) {
        const double ti = i * t_step;
        const double v = std::abs(b.eta_hat(ti));
        const double sc = v * std::exp(rep.fitted_c * std::sqrt(ti));
        rep.samples.push_back({ti, v, sc});
        rep.sup_scaled = std::max(rep.sup_scaled, sc);
    }
    return rep;
}

void write_eta_profile(const bump& b, const std::string& path, double u_step) {
    require(u_step > 0.0, errc::invalid_argument, "u_step must be positive");
    csv_writer out(path);
    out.header({"u", "eta", "eta_tilde", "eta_tilde_prime"});
    const long n = std::lround(2.0 / u_step);
    for (long i = 0; i <= n; ++i) {
        const double u = -1.0 + 2.0 * static_cast<double>(i) / n;
        const double e = b.eta(u);
        out.col(u).col(e).col(std::exp(-u) * e).col(b.eta_tilde_prime(u));
        out.end_row();
    }
    out.flush();
}

void write_eta_hat_profile(const bump& b, const std::string& path) {
    csv_writer out(path);
    out.header({"t", "eta_hat"});
    const auto& t = b.t_grid();
    const auto& eh = b.eta_hat_grid();
    for (std::size_t i = 0; i < t.size(); ++i) {
        out.col(t[i]).col(eh[i]);
        out.end_row();
    }
    out.flush();
}

} // namespace roughn
