#include "shelab/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace shelab {

double norm_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Wichura, Applied Statistics 37 (1988), algorithm AS 241 (PPND16).
double norm_ppf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("norm_ppf: p must lie in (0,1)");

    static const double a[8] = {
        3.3871328727963666080e0,  1.3314166789178437745e2,
        1.9715909503065514427e3,  1.3731693765509461125e4,
        4.5921953931549871457e4,  6.7265770927008700853e4,
        3.3430575583588128105e4,  2.5090809287301226727e3};
    static const double b[7] = {
        4.2313330701600911252e1, 6.8718700749205790830e2,
        5.3941960214247511077e3, 2.1213794301586595867e4,
        3.9307895800092710610e4, 2.8729085735721942674e4,
        5.2264952788528545610e3};
    static const double c[8] = {
        1.42343711074968357734e0,  4.63033784615654529590e0,
        5.76949722146069140550e0,  3.64784832476320460504e0,
        1.27045825245236838258e0,  2.41780725177450611770e-1,
        2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static const double d[7] = {
        2.05319162663775882187e0,  1.67638483018380384940e0,
        6.89767334985100004550e-1, 1.48103976427480074590e-1,
        1.51986665636164571966e-2, 5.47593808499534494600e-4,
        1.05075007164441684324e-9};
    static const double e[8] = {
        6.65790464350110377720e0,  5.46378491116411436990e0,
        1.78482653991729133580e0,  2.96560571828504891230e-1,
        2.65321895265761230930e-2, 1.24266094738807843860e-3,
        2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static const double f[7] = {
        5.99832206555887937690e-1, 1.36929880922735805310e-1,
        1.48753612908506148525e-2, 7.86869131145613259100e-4,
        1.84631831751005468180e-5, 1.42151175831644588870e-7,
        2.04426310338993978564e-15};

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        double num = a[7];
        double den = b[6];
        for (int i = 6; i >= 0; --i) num = num * r + a[i];
        for (int i = 5; i >= 0; --i) den = den * r + b[i];
        den = den * r + 1.0;
        return q * num / den;
    }

    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        double num = c[7];
        double den = d[6];
        for (int i = 6; i >= 0; --i) num = num * r + c[i];
        for (int i = 5; i >= 0; --i) den = den * r + d[i];
        den = den * r + 1.0;
        val = num / den;
    } else {
        r -= 5.0;
        double num = e[7];
        double den = f[6];
        for (int i = 6; i >= 0; --i) num = num * r + e[i];
        for (int i = 5; i >= 0; --i) den = den * r + f[i];
        den = den * r + 1.0;
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

double phi1(double z) {
    if (std::abs(z) < 1e-8)
        return 1.0 - z / 2.0 + z * z / 6.0;
    return -std::expm1(-z) / z;
}

double phim(double z) {
    if (z == 0.0) return 1.0;
    return std::expm1(z) / z;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double fa, double b, double fb, double m, double fm,
                     double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(a, fa, b, fb, fm);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

GaussLegendre::GaussLegendre(int n) : nodes(n), weights(n) {
    // Roots of P_n by Newton iteration from the Chebyshev initial guess.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

double GaussLegendre::integrate(const std::function<double(double)>& f,
                                double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    Kahan acc;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        acc.add(weights[i] * f(mid + half * nodes[i]));
    return half * acc.value();
}

namespace {

double panel_recurse(const std::function<double(double)>& f,
                     const GaussLegendre& gl, double a, double b, double tol,
                     int depth) {
    const double whole = gl.integrate(f, a, b);
    const double m = 0.5 * (a + b);
    const double two = gl.integrate(f, a, m) + gl.integrate(f, m, b);
    if (depth <= 0 || std::abs(two - whole) <= tol) return two;
    return panel_recurse(f, gl, a, m, tol / 2.0, depth - 1) +
           panel_recurse(f, gl, m, b, tol / 2.0, depth - 1);
}

} // namespace

SampleMoments sample_moments(std::span<const double> xs) {
    SampleMoments m;
    m.n = xs.size();
    if (m.n == 0) return m;
    Kahan s;
    for (double x : xs) s.add(x);
    m.mean = s.value() / double(m.n);
    Kahan m2, m3, m4;
    for (double x : xs) {
        const double d = x - m.mean;
        m2.add(d * d);
        m3.add(d * d * d);
        m4.add(d * d * d * d);
    }
    const double n = double(m.n);
    const double mu2 = m2.value() / n;
    m.variance = m.n > 1 ? m2.value() / (n - 1.0) : 0.0;
    if (mu2 > 0.0) {
        m.skewness = (m3.value() / n) / std::pow(mu2, 1.5);
        m.excess_kurtosis = (m4.value() / n) / (mu2 * mu2) - 3.0;
    }
    return m;
}

double panel_gauss_legendre(const std::function<double(double)>& f,
                            std::span<const double> breakpoints, double tol) {
    static const GaussLegendre gl16(16);
    if (breakpoints.size() < 2)
        throw std::domain_error("panel_gauss_legendre: need >= 2 breakpoints");
    Kahan acc;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        double a = breakpoints[i];
        double b = breakpoints[i + 1];
        if (b <= a) continue;
        acc.add(panel_recurse(f, gl16, a, b, tol, 30));
    }
    return acc.value();
}

} // namespace shelab
