#include "shelab/noise.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "shelab/numerics.hpp"

namespace shelab {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::uint64_t key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    std::uint32_t k0 = std::uint32_t(key);
    std::uint32_t k1 = std::uint32_t(key >> 32);
    for (int round = 0;; ++round) {
        const std::uint64_t p0 = std::uint64_t(kM0) * c[0];
        const std::uint64_t p1 = std::uint64_t(kM1) * c[2];
        c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k0, std::uint32_t(p1),
             std::uint32_t(p0 >> 32) ^ c[3] ^ k1, std::uint32_t(p0)};
        if (round == 9) break;
        k0 += kW0;
        k1 += kW1;
    }
    return c;
}

namespace {

// (k + 1/2) * 2^-53 for k in [0, 2^53): strictly inside (0,1).
double to_unit_open(std::uint64_t bits) {
    return (double(bits >> 11) + 0.5) * 0x1p-53;
}

} // namespace

std::array<double, 2> counter_normal_pair(std::uint64_t master_seed,
                                          std::uint64_t path_index,
                                          std::uint32_t step,
                                          std::uint32_t mode_pair) {
    const auto out = philox4x32_10(
        {mode_pair, step, std::uint32_t(path_index), std::uint32_t(path_index >> 32)},
        master_seed);
    const std::uint64_t w0 = (std::uint64_t(out[1]) << 32) | out[0];
    const std::uint64_t w1 = (std::uint64_t(out[3]) << 32) | out[2];
    return {norm_ppf(to_unit_open(w0)), norm_ppf(to_unit_open(w1))};
}

void NoisePlan::validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::domain_error("NoisePlan: delta must be positive");
    if (steps < 1) throw std::domain_error("NoisePlan: steps must be >= 1");
    if (K < 1) throw std::domain_error("NoisePlan: K must be >= 1");
}

double mode_increment_variance(double lambda, double delta) {
    return delta * phi1(2.0 * lambda * delta);
}

NoiseTensor sample_increments(std::uint64_t master_seed,
                              std::uint64_t path_index, const NoisePlan& plan) {
    plan.validate();
    const int n = plan.modes();
    NoiseTensor tensor;
    tensor.plan = plan;
    tensor.master_seed = master_seed;
    tensor.path_index = path_index;
    tensor.xi.resize(std::size_t(plan.steps) * n);

    std::vector<double> sd(n);
    const int k_base = plan.bc == BoundaryCondition::Neumann ? 0 : 1;
    for (int i = 0; i < n; ++i)
        sd[i] = std::sqrt(mode_increment_variance(eigenvalue(k_base + i), plan.delta));

    for (long step = 0; step < plan.steps; ++step) {
        double* row = tensor.xi.data() + std::size_t(step) * n;
        // draws are keyed by the physical mode index (lane = parity), so each
        // Philox block serves the mode pair (2j, 2j+1)
        std::uint32_t cached_pair = ~0u;
        std::array<double, 2> z{};
        for (int slot = 0; slot < n; ++slot) {
            const int k = k_base + slot;
            const auto pair = std::uint32_t(k) >> 1;
            if (pair != cached_pair) {
                z = counter_normal_pair(master_seed, path_index,
                                        std::uint32_t(step), pair);
                cached_pair = pair;
            }
            row[slot] = sd[slot] * z[k & 1];
        }
    }
    return tensor;
}

NoiseTensor aggregate_to_coarse(const NoiseTensor& fine, long ratio) {
    if (ratio < 1)
        throw std::domain_error("aggregate_to_coarse: ratio must be >= 1");
    if (fine.plan.steps % ratio != 0)
        throw std::domain_error("aggregate_to_coarse: steps not divisible by ratio");
    NoiseTensor coarse;
    coarse.plan = fine.plan;
    coarse.plan.delta = fine.plan.delta * double(ratio);
    coarse.plan.steps = fine.plan.steps / ratio;
    coarse.master_seed = fine.master_seed;
    coarse.path_index = fine.path_index;

    const int n = fine.plan.modes();
    const int k_base = fine.plan.bc == BoundaryCondition::Neumann ? 0 : 1;
    std::vector<double> decay(n);
    for (int i = 0; i < n; ++i)
        decay[i] = std::exp(-eigenvalue(k_base + i) * fine.plan.delta);

    coarse.xi.assign(std::size_t(coarse.plan.steps) * n, 0.0);
    for (long block = 0; block < coarse.plan.steps; ++block) {
        double* out = coarse.xi.data() + std::size_t(block) * n;
        for (long j = 0; j < ratio; ++j) {
            const double* in = fine.xi.data() + std::size_t(block * ratio + j) * n;
            // weight e^{-lambda (r-1-j) delta_f}: fold the previous partial
            // sum through one decay instead of recomputing powers
            for (int i = 0; i < n; ++i) out[i] = out[i] * decay[i] + in[i];
        }
    }
    return coarse;
}

namespace {
constexpr std::uint32_t kDumpMagic = 0x53484C42u; // "SHLB"
constexpr std::uint32_t kDumpVersion = 1;
} // namespace

void write_noise_dump(const std::string& path, const NoiseTensor& tensor) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw numerical_error("write_noise_dump: cannot open " + path);
    auto put = [&](const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), std::streamsize(n));
    };
    const std::uint64_t steps = std::uint64_t(tensor.plan.steps);
    const std::uint32_t K = std::uint32_t(tensor.plan.K);
    const std::uint32_t bc = tensor.plan.bc == BoundaryCondition::Neumann ? 0 : 1;
    put(&kDumpMagic, 4);
    put(&kDumpVersion, 4);
    put(&tensor.master_seed, 8);
    put(&tensor.path_index, 8);
    put(&steps, 8);
    put(&K, 4);
    put(&bc, 4);
    put(&tensor.plan.delta, 8);
    put(tensor.xi.data(), tensor.xi.size() * sizeof(double));
    if (!out) throw numerical_error("write_noise_dump: write failed");
}

NoiseTensor read_noise_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw numerical_error("read_noise_dump: cannot open " + path);
    auto get = [&](void* p, std::size_t n) {
        in.read(static_cast<char*>(p), std::streamsize(n));
    };
    std::uint32_t magic = 0, version = 0, K = 0, bc = 0;
    std::uint64_t steps = 0;
    NoiseTensor tensor;
    get(&magic, 4);
    get(&version, 4);
    if (magic != kDumpMagic || version != kDumpVersion)
        throw numerical_error("read_noise_dump: bad magic or version");
    get(&tensor.master_seed, 8);
    get(&tensor.path_index, 8);
    get(&steps, 8);
    get(&K, 4);
    get(&bc, 4);
    get(&tensor.plan.delta, 8);
    tensor.plan.steps = long(steps);
    tensor.plan.K = int(K);
    tensor.plan.bc = bc == 0 ? BoundaryCondition::Neumann : BoundaryCondition::Dirichlet;
    tensor.xi.resize(std::size_t(tensor.plan.steps) * tensor.plan.modes());
    get(tensor.xi.data(), tensor.xi.size() * sizeof(double));
    if (!in) throw numerical_error("read_noise_dump: truncated file");
    return tensor;
}

} // namespace shelab
