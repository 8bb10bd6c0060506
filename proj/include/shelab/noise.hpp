#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "shelab/spectral.hpp"

namespace shelab {

/// Identification of the pinned counter-based generator; recorded in every
/// report file.
inline constexpr const char* kGeneratorId = "philox4x32-10";

/// Philox 4x32, 10 rounds (Salmon et al., SC'11). Stateless block cipher
/// view: 128-bit counter, 64-bit key, 128-bit output.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::uint64_t key);

/// Two standard normal draws for mode pair (2j, 2j+1) of a given step,
/// derived by inverse CDF from one Philox block. Pure function of its
/// arguments; the basis of order-independent parallel reproducibility.
std::array<double, 2> counter_normal_pair(std::uint64_t master_seed,
                                          std::uint64_t path_index,
                                          std::uint32_t step,
                                          std::uint32_t mode_pair);

struct NoisePlan {
    double delta = 0.0; // step size
    long steps = 0;     // N; horizon T = N * delta
    int K = 0;          // mode truncation index
    BoundaryCondition bc = BoundaryCondition::Neumann;

    int modes() const { return mode_count(bc, K); }
    void validate() const;
};

/// Variance of the stochastic-convolution increment of a mode with
/// eigenvalue lambda over one step: (1 - e^{-2 lambda delta}) / (2 lambda),
/// with the lambda -> 0 limit delta. Series-expanded near zero.
double mode_increment_variance(double lambda, double delta);

/// Per-(step, mode) Gaussian increments of the stochastic convolution,
/// already scaled to their exact variances. Immutable after creation.
struct NoiseTensor {
    NoisePlan plan;
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
    std::vector<double> xi; // [step * modes + slot]

    double at(long step, int slot) const { return xi[step * plan.modes() + slot]; }
    const double* step_span(long step) const { return xi.data() + step * plan.modes(); }
};

/// Sample all increments for one path. Bit-reproducible as a function of
/// (master_seed, path_index, step, physical mode) alone.
NoiseTensor sample_increments(std::uint64_t master_seed, std::uint64_t path_index,
                              const NoisePlan& plan);

/// Exact aggregation of fine increments into coarse increments over blocks
/// of `ratio` steps: coarse_i = sum_j e^{-lambda (r-1-j) delta_f} fine_{ir+j}.
NoiseTensor aggregate_to_coarse(const NoiseTensor& fine, long ratio);

/// Little-endian binary audit dump (header then raw doubles) and reader.
void write_noise_dump(const std::string& path, const NoiseTensor& tensor);
NoiseTensor read_noise_dump(const std::string& path);

} // namespace shelab
