#pragma once

#include <functional>
#include <span>
#include <vector>

#include "shelab/common.hpp"

namespace shelab {

/// Standard normal density.
double norm_pdf(double z);

/// Standard normal CDF via erfc.
double norm_cdf(double z);

/// Inverse standard normal CDF (Wichura's PPND16 rational approximation,
/// relative error below 1e-15 on (0,1)). Monotone, branch-stable: suitable
/// for replay-exact inverse-CDF sampling.
double norm_ppf(double p);

/// (1 - e^{-z}) / z with series fallback for small z; phi(0) = 1.
double phi1(double z);

/// (e^{z} - 1) / z with expm1; phim(0) = 1.
double phim(double z);

/// Adaptive Simpson quadrature of f over [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

/// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
    explicit GaussLegendre(int n);

    double integrate(const std::function<double(double)>& f, double a,
                     double b) const;
};

/// Composite Gauss-Legendre over explicit panel breakpoints, with recursive
/// panel bisection until the local GL estimate is stable to tol.
double panel_gauss_legendre(const std::function<double(double)>& f,
                            std::span<const double> breakpoints, double tol);

/// Two-pass compensated sample statistics. Deterministic for a fixed order.
struct SampleMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;        // unbiased
    double skewness = 0.0;        // g1
    double excess_kurtosis = 0.0; // g2
};
SampleMoments sample_moments(std::span<const double> xs);

} // namespace shelab
