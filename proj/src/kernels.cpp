#include "shelab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shelab/numerics.hpp"

namespace shelab {

void KernelParams::validate() const {
    if (!(abs_tol > 0.0) || !std::isfinite(abs_tol))
        throw std::domain_error("KernelParams: abs_tol must be positive");
    if (!(switch_time > 0.0) || !std::isfinite(switch_time))
        throw std::domain_error("KernelParams: switch_time must be positive");
    if (max_terms < 1)
        throw std::domain_error("KernelParams: max_terms must be >= 1");
}

void KernelPoint::validate() const {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::domain_error("KernelPoint: t must be positive and finite");
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
        throw std::domain_error("KernelPoint: x,y must lie in [0,1]");
}

double eigenfunction(BoundaryCondition bc, int k, double x) {
    if (bc == BoundaryCondition::Neumann) {
        if (k == 0) return 1.0;
        return std::sqrt(2.0) * std::cos(k * kPi * x);
    }
    if (k < 1)
        throw std::domain_error("eigenfunction: Dirichlet modes start at k=1");
    return std::sqrt(2.0) * std::sin(k * kPi * x);
}

double heat_kernel_free(double t, double x, double y) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::domain_error("heat_kernel_free: t must be positive and finite");
    const double d = x - y;
    return std::exp(-d * d / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

namespace {

// Number of image shifts needed so the omitted tail stays below abs_tol.
// Images at |n| > n decay like exp(-(2n-2)^2/4t); the log argument carries a
// fixed overcount of 64 terms.
long image_shift_count(double t, const KernelParams& params) {
    const double arg = std::max(64.0 / params.abs_tol, kEuler);
    return 1 + static_cast<long>(
                   std::ceil(0.5 * std::sqrt(4.0 * t * std::log(arg))));
}

double image_tail_bound(double t, long n_max) {
    const double w = 2.0 * double(n_max);
    return 8.0 * std::exp(-w * w / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

double green_image(BoundaryCondition bc, const KernelPoint& p,
                   const KernelParams& params) {
    const long n_img = image_shift_count(p.t, params);
    if (2 * (2 * n_img + 1) > params.max_terms) {
        const long n_cap = std::max<long>(0, params.max_terms / 4 - 1);
        throw truncation_error("green_eval: image sum exceeds max_terms",
                               image_tail_bound(p.t, std::max<long>(1, n_cap)));
    }
    const double sign = (bc == BoundaryCondition::Neumann) ? 1.0 : -1.0;
    const double inv4t = 1.0 / (4.0 * p.t);
    Kahan acc;
    for (long n = -n_img; n <= n_img; ++n) {
        const double d1 = p.x - p.y - 2.0 * double(n);
        const double d2 = p.x + p.y - 2.0 * double(n);
        acc.add(std::exp(-d1 * d1 * inv4t) + sign * std::exp(-d2 * d2 * inv4t));
    }
    return acc.value() / std::sqrt(4.0 * kPi * p.t);
}

double green_spectral(BoundaryCondition bc, const KernelPoint& p,
                      const KernelParams& params) {
    const double cutoff = params.abs_tol / 4.0;
    Kahan acc;
    if (bc == BoundaryCondition::Neumann) acc.add(1.0);
    for (long k = 1;; ++k) {
        const double w = std::exp(-eigenvalue(int(k)) * p.t);
        if (w < cutoff) break;
        if (k > params.max_terms)
            throw truncation_error("green_eval: spectral sum exceeds max_terms",
                                   2.0 * w / (1.0 - std::exp(-(2.0 * k + 1.0) *
                                                             kPi * kPi * p.t)));
        acc.add(w * eigenfunction(bc, int(k), p.x) * eigenfunction(bc, int(k), p.y));
    }
    return acc.value();
}

// Integral over y in [0,1] of a Gaussian image term centered at c with
// variance 2t, normalized by 1/sqrt(4 pi t).
double image_segment_mass(double c, double t) {
    const double s = 2.0 * std::sqrt(t);
    return 0.5 * (std::erf((1.0 - c) / s) - std::erf((0.0 - c) / s));
}

} // namespace

double green_eval(BoundaryCondition bc, const KernelPoint& p,
                  const KernelParams& params, KernelRepr repr) {
    p.validate();
    params.validate();
    if (repr == KernelRepr::Auto)
        repr = (p.t < params.switch_time) ? KernelRepr::ImageSum
                                          : KernelRepr::Spectral;
    return (repr == KernelRepr::ImageSum) ? green_image(bc, p, params)
                                          : green_spectral(bc, p, params);
}

double green_mass(BoundaryCondition bc, double t, double x,
                  const KernelParams& params) {
    KernelPoint{t, x, 0.5}.validate();
    params.validate();
    if (t >= params.switch_time) {
        // Term-wise integration of the eigenfunction sum. Neumann: only the
        // constant mode has nonzero integral. Dirichlet: odd sine modes.
        if (bc == BoundaryCondition::Neumann) return 1.0;
        const double cutoff = params.abs_tol / 4.0;
        Kahan acc;
        for (long k = 1;; k += 2) {
            const double w = std::exp(-eigenvalue(int(k)) * t);
            if (w < cutoff) break;
            acc.add(w * 4.0 / (double(k) * kPi) * std::sin(k * kPi * x));
        }
        return acc.value();
    }
    const long n_img = image_shift_count(t, params);
    if (2 * (2 * n_img + 1) > params.max_terms)
        throw truncation_error("green_mass: image sum exceeds max_terms",
                               image_tail_bound(t, 1));
    const double sign = (bc == BoundaryCondition::Neumann) ? 1.0 : -1.0;
    Kahan acc;
    for (long n = -n_img; n <= n_img; ++n) {
        acc.add(image_segment_mass(x - 2.0 * double(n), t));
        acc.add(sign * image_segment_mass(2.0 * double(n) - x, t));
    }
    return acc.value();
}

double green_convolve(BoundaryCondition bc, double s, double t, double x,
                      double z, const KernelParams& params) {
    if (!(s > 0.0) || !(t > 0.0))
        throw std::domain_error("green_convolve: s,t must be positive");
    KernelPoint{t, x, z}.validate();
    params.validate();
    const double cutoff = params.abs_tol / 4.0;
    Kahan acc;
    if (bc == BoundaryCondition::Neumann) acc.add(1.0);
    for (long k = 1;; ++k) {
        const double w = std::exp(-eigenvalue(int(k)) * t) *
                         std::exp(-eigenvalue(int(k)) * s);
        if (w < cutoff) break;
        if (k > params.max_terms)
            throw truncation_error("green_convolve: exceeds max_terms", w);
        acc.add(w * eigenfunction(bc, int(k), x) * eigenfunction(bc, int(k), z));
    }
    return acc.value();
}

double green_sq_integral(BoundaryCondition bc, double t, double x,
                         const KernelParams& params) {
    KernelPoint{t, x, 0.5}.validate();
    params.validate();
    const double cutoff = params.abs_tol / 4.0;
    Kahan acc;
    if (bc == BoundaryCondition::Neumann) acc.add(1.0);
    for (long k = 1;; ++k) {
        const double w = std::exp(-2.0 * eigenvalue(int(k)) * t);
        if (w < cutoff) break;
        if (k > params.max_terms)
            throw truncation_error("green_sq_integral: exceeds max_terms", w);
        const double e = eigenfunction(bc, int(k), x);
        acc.add(w * e * e);
    }
    return acc.value();
}

namespace {

// int_0^T s^{-1/2} exp(-a/(2s)) ds, closed form via erfc.
double sqrt_exp_time_integral(double a, double T) {
    if (a == 0.0) return 2.0 * std::sqrt(T);
    const double W = std::sqrt(a / (2.0 * T));
    if (W >= 8.0) return 0.0; // below 1e-27 of the a=0 term
    return std::sqrt(2.0 * a) *
           (std::exp(-W * W) / W - std::sqrt(kPi) * std::erfc(W));
}

} // namespace

double green_sq_time_integral(BoundaryCondition bc, double delta, double x,
                              const KernelParams& params) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::domain_error("green_sq_time_integral: delta must be positive");
    KernelPoint{delta, x, 0.5}.validate();
    params.validate();

    const double sign = (bc == BoundaryCondition::Neumann) ? 1.0 : -1.0;
    const double t_img = std::min(delta, params.switch_time);

    // Image part on [0, t_img]: int G_{2s}(x,x) ds with image centers n and
    // x-n, each contributing a sqrt_exp_time_integral term.
    Kahan acc;
    const long n_img = 1 + static_cast<long>(std::ceil(std::sqrt(128.0 * t_img)));
    const double norm = 1.0 / std::sqrt(8.0 * kPi);
    for (long n = -n_img; n <= n_img; ++n) {
        const double a1 = double(n) * double(n);
        const double d2 = x - double(n);
        acc.add(norm * sqrt_exp_time_integral(a1, t_img));
        acc.add(sign * norm * sqrt_exp_time_integral(d2 * d2, t_img));
    }

    if (delta > t_img) {
        // Spectral part on [t_img, delta].
        if (bc == BoundaryCondition::Neumann) acc.add(delta - t_img);
        const double cutoff = params.abs_tol / 4.0;
        for (long k = 1;; ++k) {
            const double lk = eigenvalue(int(k));
            const double w = std::exp(-2.0 * lk * t_img);
            if (w < cutoff) break;
            if (k > params.max_terms)
                throw truncation_error("green_sq_time_integral: exceeds max_terms", w);
            const double e = eigenfunction(bc, int(k), x);
            acc.add(e * e * (w - std::exp(-2.0 * lk * delta)) / (2.0 * lk));
        }
    }
    return acc.value();
}

double green_l1_time_diff(BoundaryCondition bc, double s, double t,
                          const KernelParams& params, int n_grid) {
    if (!(0.0 < s && s < t))
        throw std::domain_error("green_l1_time_diff: need 0 < s < t");
    params.validate();
    if (n_grid < 1)
        throw std::domain_error("green_l1_time_diff: n_grid must be >= 1");

    auto curve_integral = [&](double free_v, bool integrate_second) {
        auto integrand = [&](double w) {
            const KernelPoint p{t, integrate_second ? free_v : w,
                                integrate_second ? w : free_v};
            const KernelPoint q{s, p.x, p.y};
            return std::abs(green_eval(bc, p, params) - green_eval(bc, q, params));
        };
        // Panels clustered around the diagonal spike and the endpoints.
        std::vector<double> bp{0.0,
                               0.25 * free_v,
                               0.75 * free_v,
                               free_v,
                               free_v + 0.25 * (1.0 - free_v),
                               free_v + 0.75 * (1.0 - free_v),
                               1.0};
        std::sort(bp.begin(), bp.end());
        return panel_gauss_legendre(integrand, bp, 1e-10);
    };

    double worst = 0.0;
    for (int role = 0; role < 2; ++role) {
        for (int j = 0; j < n_grid; ++j) {
            const double v = (j + 0.5) / double(n_grid);
            worst = std::max(worst, curve_integral(v, role == 0));
        }
    }
    return worst;
}

} // namespace shelab
