#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shelab/scheme.hpp"

namespace shelab {

/// Density values on a strictly increasing z grid. bandwidth records the
/// mollifier variance used (0 for exact laws).
struct DensityEstimate {
    std::vector<double> z_grid;
    std::vector<double> values;
    double bandwidth = 0.0;

    void validate() const;
    /// Trapezoid integral over the grid.
    double total_mass() const;
};

/// Scalar Monte Carlo samples with their provenance.
struct SampleSet {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::string config_hash;

    void validate() const;
};

/// Gaussian mollifier of variance zeta evaluated at displacement y.
double mollifier(double zeta, double y);

/// Bandwidth schedule zeta(n) = c n^{-2/5}, calibrated so zeta(1e6) = 0.005.
double bandwidth_schedule(std::size_t n_samples);

/// Uniform grid of `points` nodes spanning [center - half, center + half].
std::vector<double> uniform_grid(double center, double half, int points);

/// Mollified empirical density: value at z is the sample mean of
/// g_zeta(z - X_i). Accumulation order is fixed, so results are identical
/// for any thread count.
DensityEstimate kde(const SampleSet& samples, double zeta,
                    std::vector<double> z_grid, int n_threads = 1);

/// Exact normal density sampled on the grid (bandwidth recorded as 0).
DensityEstimate gaussian_density(const GaussianLaw& law, std::vector<double> z_grid);

/// max over the shared grid of |a - b| (a grid lower bound of the true sup).
double sup_distance(const DensityEstimate& a, const DensityEstimate& b);

/// Trapezoid integral of |a - b| over the shared grid; equals the total
/// variation distance under the factor-2 convention. Requires the grid to
/// hold all but 1e-4 of each estimate's mass.
double tv_distance(const DensityEstimate& a, const DensityEstimate& b);

/// Provenance fields carried by the JSON sidecar of a serialized estimate.
struct DensitySidecar {
    double zeta = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
};

/// CSV (`z,value`) plus a JSON sidecar at path_prefix{.csv,.json}.
void write_density_estimate(const std::string& path_prefix,
                            const DensityEstimate& estimate,
                            const DensitySidecar& sidecar);
DensityEstimate read_density_estimate(const std::string& path_prefix);

} // namespace shelab
