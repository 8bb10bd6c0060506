#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "shelab/density.hpp"
#include "shelab/numerics.hpp"

using namespace shelab;

TEST_CASE("mollifier: normalization, peak, convolution semigroup") {
    CHECK(mollifier(0.04, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * kPi * 0.04)));
    CHECK_THROWS_AS(mollifier(0.0, 0.1), std::domain_error);
    CHECK_THROWS_AS(mollifier(-1.0, 0.1), std::domain_error);

    const double mass = adaptive_simpson([](double y) { return mollifier(0.04, y); },
                                         -4.0, 4.0, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));

    // int g_a(y-w) g_b(w-z) dw = g_{a+b}(y-z)
    const double a = 0.01, b = 0.03, y = 0.35, z = -0.1;
    const double conv = adaptive_simpson(
        [&](double w) { return mollifier(a, y - w) * mollifier(b, w - z); }, -3.0, 3.0,
        1e-12);
    CHECK(conv == doctest::Approx(mollifier(a + b, y - z)).epsilon(1e-9));
}

TEST_CASE("kde: single sample reproduces the kernel curve") {
    SampleSet s;
    s.values = {0.0};
    DensityEstimate est = kde(s, 1.0, uniform_grid(0.0, 5.0, 201));
    for (std::size_t i = 0; i < est.z_grid.size(); ++i)
        CHECK(est.values[i] == doctest::Approx(mollifier(1.0, est.z_grid[i])).epsilon(1e-14));
}

TEST_CASE("kde of 1e6 standard normals targets the zeta-smoothed density") {
    std::mt19937_64 rng(8675309);
    std::normal_distribution<double> nd;
    SampleSet s;
    s.values.resize(1000000);
    for (auto& v : s.values) v = nd(rng);
    const double zeta = 0.01;
    DensityEstimate est = kde(s, zeta, uniform_grid(0.0, 6.0, 257));
    const DensityEstimate target =
        gaussian_density(GaussianLaw{0.0, 1.0 + zeta}, est.z_grid);
    CHECK(sup_distance(est, target) <= 0.01);
}

TEST_CASE("kde: smoothing flattens the mode as zeta grows") {
    std::mt19937_64 rng(24601);
    std::normal_distribution<double> nd;
    SampleSet s;
    s.values.resize(20000);
    for (auto& v : s.values) v = 0.3 * nd(rng);
    const auto grid = uniform_grid(0.0, 4.0, 401);
    double prev = 1e300;
    for (double zeta : {0.005, 0.02, 0.08, 0.32}) {
        const DensityEstimate est = kde(s, zeta, grid);
        const double peak = *std::max_element(est.values.begin(), est.values.end());
        CHECK(peak < prev);
        prev = peak;
    }
}

TEST_CASE("kde: permutation invariance and shift equivariance") {
    std::mt19937_64 rng(1001);
    std::normal_distribution<double> nd;
    SampleSet s;
    s.values.resize(500);
    for (auto& v : s.values) v = nd(rng);
    SampleSet shuffled = s;
    std::shuffle(shuffled.values.begin(), shuffled.values.end(), rng);
    const auto grid = uniform_grid(0.1, 3.0, 101);
    const DensityEstimate a = kde(s, 0.05, grid);
    const DensityEstimate b = kde(shuffled, 0.05, grid);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-13));

    const double shift = 1.7;
    SampleSet moved = s;
    for (auto& v : moved.values) v += shift;
    auto grid2 = grid;
    for (auto& z : grid2) z += shift;
    const DensityEstimate c = kde(moved, 0.05, grid2);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(c.values[i] == doctest::Approx(a.values[i]).epsilon(1e-14));
}

TEST_CASE("kde accumulates identically for any thread count") {
    std::mt19937_64 rng(777);
    std::normal_distribution<double> nd;
    SampleSet s;
    s.values.resize(10000);
    for (auto& v : s.values) v = nd(rng);
    const auto grid = uniform_grid(0.0, 5.0, 129);
    const DensityEstimate one = kde(s, 0.02, grid, 1);
    const DensityEstimate eight = kde(s, 0.02, grid, 8);
    for (std::size_t i = 0; i < one.values.size(); ++i)
        CHECK(one.values[i] == eight.values[i]);
}

TEST_CASE("gaussian_density: peak, mass, and agreement with the mollifier") {
    const GaussianLaw std_normal{0.0, 1.0};
    DensityEstimate est = gaussian_density(std_normal, uniform_grid(0.0, 8.0, 1025));
    CHECK(est.values[512] == doctest::Approx(1.0 / std::sqrt(2.0 * kPi)).epsilon(1e-14));
    CHECK(est.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 0; i < est.z_grid.size(); i += 97)
        CHECK(est.values[i] ==
              doctest::Approx(mollifier(1.0, est.z_grid[i] - 0.0)).epsilon(1e-14));
}

TEST_CASE("sup_distance: zero on identical inputs, dense-grid oracle, triangle") {
    const auto grid = uniform_grid(0.05, 8.0, 2049);
    const DensityEstimate a = gaussian_density(GaussianLaw{0.0, 1.0}, grid);
    CHECK(sup_distance(a, a) == 0.0);

    const DensityEstimate b = gaussian_density(GaussianLaw{0.1, 1.0}, grid);
    // quadrature-refined maximum of |g(z) - g(z-0.1)|
    double refined = 0.0;
    for (int i = 0; i < 400001; ++i) {
        const double z = -8.0 + 16.0 * i / 400000.0;
        refined = std::max(refined,
                           std::abs(mollifier(1.0, z) - mollifier(1.0, z - 0.1)));
    }
    CHECK(std::abs(sup_distance(a, b) - refined) <= 1e-3);

    const DensityEstimate c = gaussian_density(GaussianLaw{-0.3, 1.44}, grid);
    CHECK(sup_distance(a, c) <= sup_distance(a, b) + sup_distance(b, c) + 1e-16);

    const DensityEstimate wrong =
        gaussian_density(GaussianLaw{0.0, 1.0}, uniform_grid(0.0, 8.0, 513));
    CHECK_THROWS_AS(sup_distance(a, wrong), std::domain_error);
}

TEST_CASE("tv_distance: quadrature oracle and probability bound") {
    const auto grid = uniform_grid(0.25, 9.0, 4097);
    const DensityEstimate a = gaussian_density(GaussianLaw{0.0, 1.0}, grid);
    CHECK(tv_distance(a, a) == 0.0);

    const DensityEstimate b = gaussian_density(GaussianLaw{0.5, 1.0}, grid);
    const double oracle = adaptive_simpson(
        [](double z) { return std::abs(mollifier(1.0, z) - mollifier(1.0, z - 0.5)); },
        -9.0, 9.5, 1e-10);
    CHECK(std::abs(tv_distance(a, b) - oracle) <= 1e-4);
    CHECK(tv_distance(a, b) <= 2.0);

    // far-apart laws saturate near the bound 2
    const auto wide = uniform_grid(10.0, 40.0, 16385);
    const DensityEstimate c = gaussian_density(GaussianLaw{0.0, 1.0}, wide);
    const DensityEstimate d = gaussian_density(GaussianLaw{20.0, 1.0}, wide);
    const double far = tv_distance(c, d);
    CHECK(far <= 2.0);
    CHECK(far >= 1.999);
}

TEST_CASE("tv_distance: insufficient span is rejected") {
    const auto grid = uniform_grid(0.0, 2.0, 257); // ~4.6% tail mass outside
    const DensityEstimate a = gaussian_density(GaussianLaw{0.0, 1.0}, grid);
    const DensityEstimate b = gaussian_density(GaussianLaw{0.2, 1.0}, grid);
    CHECK_THROWS_AS(tv_distance(a, b), std::domain_error);
}

TEST_CASE("tv bounded by span times sup") {
    const auto grid = uniform_grid(0.1, 8.5, 1025);
    const DensityEstimate a = gaussian_density(GaussianLaw{0.0, 1.1}, grid);
    const DensityEstimate b = gaussian_density(GaussianLaw{0.3, 0.9}, grid);
    const double span = grid.back() - grid.front();
    CHECK(tv_distance(a, b) <= span * sup_distance(a, b) + 1e-15);
}

TEST_CASE("density estimate serialization round-trips with its sidecar") {
    const GaussianLaw law{0.3, 0.8};
    const DensityEstimate est = gaussian_density(law, uniform_grid(0.3, 7.0, 129));
    DensitySidecar sc;
    sc.zeta = 0.0;
    sc.n_samples = 0;
    sc.seed = 42;
    sc.config_hash = "deadbeefdeadbeef";
    write_density_estimate("density_io_test", est, sc);
    const DensityEstimate back = read_density_estimate("density_io_test");
    REQUIRE(back.z_grid.size() == est.z_grid.size());
    for (std::size_t i = 0; i < est.z_grid.size(); ++i) {
        CHECK(back.z_grid[i] == est.z_grid[i]);
        CHECK(back.values[i] == est.values[i]);
    }
    CHECK(back.bandwidth == 0.0);
    std::remove("density_io_test.csv");
    std::remove("density_io_test.json");
}

TEST_CASE("bandwidth schedule hits the calibration point") {
    CHECK(bandwidth_schedule(1000000) == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(bandwidth_schedule(1000) > bandwidth_schedule(1000000));
}

TEST_CASE("kde of simulated affine samples matches the perturbed law") {
    // configuration of the deterministic affine ladder study, first level;
    // K=63 keeps the run short (the truncation gap is far below the 0.02
    // tolerance)
    ModelSpec model;
    model.drift = Drift::affine(1.0, 0.0);
    model.sigma = 1.0;
    model.u0 = InitialDatum::named("one");
    SchemeConfig config;
    config.T = 1.0;
    config.N = 16;
    config.K = 63;
    config.M = 128;
    const double x = 0.5;
    const GaussianLaw law = affine_perturbed_law(model, config, x);

    const std::size_t n_samples = 1000000;
    SampleSet s;
    s.seed = 90210;
    s.values.resize(n_samples);
    for (std::size_t p = 0; p < n_samples; ++p)
        s.values[p] = evaluate_at(simulate_terminal_modes(model, config, s.seed, p), x);

    const double sd = std::sqrt(law.variance);
    const auto grid = uniform_grid(law.mean, 6.0 * sd, 513);
    const DensityEstimate est = kde(s, 0.005, grid);
    const DensityEstimate exact = gaussian_density(law, grid);
    CHECK(sup_distance(est, exact) <= 0.02);
}
