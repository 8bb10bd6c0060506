#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "shelab/kernels.hpp"

namespace shelab {

inline int mode_count(BoundaryCondition bc, int K) {
    return bc == BoundaryCondition::Neumann ? K + 1 : K;
}

/// Coefficients of a function on [0,1] in the mass-normalized eigenbasis.
/// Neumann stores modes 0..K, Dirichlet modes 1..K.
struct ModeVector {
    BoundaryCondition bc = BoundaryCondition::Neumann;
    int K = 0;
    std::vector<double> coeffs;

    static ModeVector zeros(BoundaryCondition bc, int K);
    int physical_mode(std::size_t i) const {
        return bc == BoundaryCondition::Neumann ? int(i) : int(i) + 1;
    }
    void validate() const;
};

/// Values on the uniform midpoint collocation grid x_j = (j+1/2)/M.
struct GridFunction {
    BoundaryCondition bc = BoundaryCondition::Neumann;
    std::vector<double> values;

    int size() const { return int(values.size()); }
    double node(int j) const { return (j + 0.5) / double(values.size()); }
};

/// u(x_j) = sum_k a_k e_k(x_j). Plain basis expansion; requires M >= 2K+2.
GridFunction synthesize(const ModeVector& m, int M);

/// a_k = (1/M) sum_j g(x_j) e_k(x_j); exact on band-limited inputs within
/// the anti-aliasing margin M >= 2K+2.
ModeVector analyze(const GridFunction& g, int K);

/// Modes of x -> b(u(x)) where u is carried by `state`:
/// analyze(b o synthesize(state, M), K).
ModeVector project_drift(const std::function<double(double)>& b,
                         const ModeVector& state, int M);

/// Pointwise evaluation sum_k a_k e_k(x) at an arbitrary coordinate.
double evaluate_at(const ModeVector& m, double x);

/// FFTW-backed cosine/sine transforms on the midpoint grid. Produces the
/// same values as synthesize/analyze up to rounding; one instance owns its
/// buffers, so use one per thread. Plan creation is internally serialized.
class FastTransform {
  public:
    FastTransform(BoundaryCondition bc, int K, int M);
    ~FastTransform();
    FastTransform(const FastTransform&) = delete;
    FastTransform& operator=(const FastTransform&) = delete;

    int modes() const { return n_modes_; }
    int grid() const { return M_; }

    /// coeffs (mode_count entries) -> grid values (M entries).
    void synthesize(std::span<const double> coeffs, std::span<double> values);
    /// grid values (M entries) -> coeffs (mode_count entries).
    void analyze(std::span<const double> values, std::span<double> coeffs);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    BoundaryCondition bc_;
    int K_;
    int M_;
    int n_modes_;
};

} // namespace shelab
