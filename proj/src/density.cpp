#include "shelab/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shelab/numerics.hpp"
#include "shelab/parallel.hpp"

namespace shelab {

void DensityEstimate::validate() const {
    if (z_grid.size() < 2 || z_grid.size() != values.size())
        throw std::domain_error("DensityEstimate: need matching grid and values");
    for (std::size_t i = 1; i < z_grid.size(); ++i)
        if (!(z_grid[i] > z_grid[i - 1]))
            throw std::domain_error("DensityEstimate: grid must be strictly increasing");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::domain_error("DensityEstimate: values must be nonnegative");
}

double DensityEstimate::total_mass() const {
    Kahan acc;
    for (std::size_t i = 1; i < z_grid.size(); ++i)
        acc.add(0.5 * (values[i] + values[i - 1]) * (z_grid[i] - z_grid[i - 1]));
    return acc.value();
}

void SampleSet::validate() const {
    if (values.empty()) throw std::domain_error("SampleSet: no samples");
    for (double v : values)
        if (!std::isfinite(v)) throw std::domain_error("SampleSet: non-finite sample");
}

double mollifier(double zeta, double y) {
    if (!(zeta > 0.0) || !std::isfinite(zeta))
        throw std::domain_error("mollifier: zeta must be positive");
    return std::exp(-y * y / (2.0 * zeta)) / std::sqrt(2.0 * kPi * zeta);
}

double bandwidth_schedule(std::size_t n_samples) {
    if (n_samples == 0) throw std::domain_error("bandwidth_schedule: empty sample set");
    const double c = 0.005 * std::pow(1e6, 0.4);
    return c * std::pow(double(n_samples), -0.4);
}

std::vector<double> uniform_grid(double center, double half, int points) {
    if (points < 2 || !(half > 0.0))
        throw std::domain_error("uniform_grid: need points >= 2 and half > 0");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = center - half + 2.0 * half * double(i) / double(points - 1);
    return g;
}

DensityEstimate kde(const SampleSet& samples, double zeta,
                    std::vector<double> z_grid, int n_threads) {
    samples.validate();
    if (!(zeta > 0.0)) throw std::domain_error("kde: zeta must be positive");
    DensityEstimate est;
    est.z_grid = std::move(z_grid);
    est.values.assign(est.z_grid.size(), 0.0);
    est.bandwidth = zeta;

    const double norm = 1.0 / std::sqrt(2.0 * kPi * zeta);
    const double inv2z = 1.0 / (2.0 * zeta);
    const double n = double(samples.values.size());
    // parallel over grid points: each value is a fixed-order sum over samples
    parallel_chunks(est.z_grid.size(), 16, n_threads,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        for (std::size_t i = begin; i < end; ++i) {
                            const double z = est.z_grid[i];
                            Kahan acc;
                            for (double x : samples.values) {
                                const double d = z - x;
                                acc.add(std::exp(-d * d * inv2z));
                            }
                            est.values[i] = norm * acc.value() / n;
                        }
                    });
    est.validate();
    return est;
}

DensityEstimate gaussian_density(const GaussianLaw& law, std::vector<double> z_grid) {
    law.validate();
    DensityEstimate est;
    est.z_grid = std::move(z_grid);
    est.values.resize(est.z_grid.size());
    est.bandwidth = 0.0;
    for (std::size_t i = 0; i < est.z_grid.size(); ++i)
        est.values[i] = mollifier(law.variance, est.z_grid[i] - law.mean);
    est.validate();
    return est;
}

namespace {

void check_same_grid(const DensityEstimate& a, const DensityEstimate& b) {
    if (a.z_grid.size() != b.z_grid.size())
        throw std::domain_error("density distance: grid size mismatch");
    for (std::size_t i = 0; i < a.z_grid.size(); ++i)
        if (a.z_grid[i] != b.z_grid[i])
            throw std::domain_error("density distance: grids differ");
}

} // namespace

double sup_distance(const DensityEstimate& a, const DensityEstimate& b) {
    check_same_grid(a, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    return worst;
}

void write_density_estimate(const std::string& path_prefix,
                            const DensityEstimate& estimate,
                            const DensitySidecar& sidecar) {
    estimate.validate();
    std::ostringstream csv;
    csv << "z,value\n";
    char buf[80];
    for (std::size_t i = 0; i < estimate.z_grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", estimate.z_grid[i],
                      estimate.values[i]);
        csv << buf;
    }
    std::ofstream out(path_prefix + ".csv", std::ios::binary | std::ios::trunc);
    if (!out) throw numerical_error("cannot write " + path_prefix + ".csv");
    out << csv.str();

    nlohmann::json j;
    j["zeta"] = sidecar.zeta;
    j["n_samples"] = sidecar.n_samples;
    j["seed"] = sidecar.seed;
    j["config_hash"] = sidecar.config_hash;
    std::ofstream sj(path_prefix + ".json", std::ios::binary | std::ios::trunc);
    if (!sj) throw numerical_error("cannot write " + path_prefix + ".json");
    sj << j.dump(2) << "\n";
}

DensityEstimate read_density_estimate(const std::string& path_prefix) {
    std::ifstream in(path_prefix + ".csv");
    if (!in) throw numerical_error("cannot read " + path_prefix + ".csv");
    std::string line;
    if (!std::getline(in, line) || line != "z,value")
        throw numerical_error("bad density CSV header in " + path_prefix + ".csv");
    DensityEstimate est;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) break;
        est.z_grid.push_back(std::stod(line.substr(0, comma)));
        est.values.push_back(std::stod(line.substr(comma + 1)));
    }
    std::ifstream sj(path_prefix + ".json");
    if (sj) {
        nlohmann::json j;
        sj >> j;
        est.bandwidth = j.value("zeta", 0.0);
    }
    est.validate();
    return est;
}

double tv_distance(const DensityEstimate& a, const DensityEstimate& b) {
    check_same_grid(a, b);
    const double missing_a = 1.0 - a.total_mass();
    const double missing_b = 1.0 - b.total_mass();
    if (missing_a > 1e-4 || missing_b > 1e-4)
        throw std::domain_error(
            "tv_distance: grid span leaves more than 1e-4 tail mass");
    Kahan acc;
    for (std::size_t i = 1; i < a.z_grid.size(); ++i) {
        const double d1 = std::abs(a.values[i] - b.values[i]);
        const double d0 = std::abs(a.values[i - 1] - b.values[i - 1]);
        acc.add(0.5 * (d1 + d0) * (a.z_grid[i] - a.z_grid[i - 1]));
    }
    return acc.value();
}

} // namespace shelab
