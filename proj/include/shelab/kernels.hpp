#pragma once

#include <cstddef>

#include "shelab/common.hpp"

namespace shelab {

enum class BoundaryCondition { Neumann, Dirichlet };

inline const char* to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::Neumann ? "neumann" : "dirichlet";
}

/// Which series representation of the Green function to evaluate. Auto picks
/// the image sum below switch_time and the eigenfunction sum above it.
enum class KernelRepr { Auto, ImageSum, Spectral };

struct KernelParams {
    double abs_tol = 1e-12;   // absolute truncation tolerance
    double switch_time = 0.1; // image sum below, spectral sum above
    long max_terms = 1 << 20; // safety cap on series length

    void validate() const;
};

struct KernelPoint {
    double t; // > 0
    double x; // in [0,1]
    double y; // in [0,1]

    void validate() const;
};

/// Eigenvalue lambda_k = (k pi)^2 of -d^2/dx^2 on [0,1].
inline double eigenvalue(int k) { return double(k) * double(k) * kPi * kPi; }

/// Orthonormal eigenfunction on [0,1]: 1 and sqrt(2) cos(k pi x) for Neumann,
/// sqrt(2) sin(k pi x) for Dirichlet (k >= 1).
double eigenfunction(BoundaryCondition bc, int k, double x);

/// Heat kernel on R: exp(-(x-y)^2/(4t)) / sqrt(4 pi t).
double heat_kernel_free(double t, double x, double y);

/// Green function G_t(x,y) of the heat semigroup on [0,1].
double green_eval(BoundaryCondition bc, const KernelPoint& p,
                  const KernelParams& params, KernelRepr repr = KernelRepr::Auto);

/// Integral of G_t(x,.) over [0,1], by term-wise closed form of the chosen
/// series. Identically 1 for Neumann; in (0,1) for Dirichlet.
double green_mass(BoundaryCondition bc, double t, double x,
                  const KernelParams& params);

/// Semigroup contraction: integral of G_t(x,.) G_s(.,z) over [0,1], by the
/// mode-wise closed form (product of exponentials).
double green_convolve(BoundaryCondition bc, double s, double t, double x,
                      double z, const KernelParams& params);

/// Integral of G_t(x,.)^2 over [0,1] = sum_k e^{-2 lambda_k t} e_k(x)^2
/// in the mass-normalized eigenbasis (equals G_{2t}(x,x)).
double green_sq_integral(BoundaryCondition bc, double t, double x,
                         const KernelParams& params);

/// Time integral of the squared-kernel mass: int_0^delta int_0^1 G_s(x,y)^2
/// dy ds, by term-wise closed form (erfc image integrals below switch_time,
/// spectral tail above). This is the variance kernel of the one-step law.
double green_sq_time_integral(BoundaryCondition bc, double delta, double x,
                              const KernelParams& params);

/// max over integration variable choice of the sup over an n_grid-point grid
/// of the free variable of int |G_t - G_s|, by composite Gauss-Legendre with
/// panel refinement near the diagonal and the endpoints. The sup over a
/// finite grid is a lower bound of the true sup.
double green_l1_time_diff(BoundaryCondition bc, double s, double t,
                          const KernelParams& params, int n_grid = 64);

} // namespace shelab
