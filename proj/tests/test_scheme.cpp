#include <doctest.h>

#include <cmath>
#include <vector>

#include "shelab/kernels.hpp"
#include "shelab/numerics.hpp"
#include "shelab/scheme.hpp"

using namespace shelab;

namespace {
constexpr auto NEU = BoundaryCondition::Neumann;
const KernelParams kq{}; // kernel defaults for quadrature oracles

ModelSpec basic_model(Drift d, double sigma, const std::string& u0 = "zero",
                      BoundaryCondition bc = NEU) {
    ModelSpec m;
    m.drift = d;
    m.sigma = sigma;
    m.u0 = InitialDatum::named(u0);
    m.bc = bc;
    return m;
}
} // namespace

TEST_CASE("step_perturbed: pure decay when b=0, sigma=0") {
    ModelSpec model = basic_model(Drift::zero(), 0.0);
    ModeVector state = ModeVector::zeros(NEU, 6);
    for (std::size_t i = 0; i < state.coeffs.size(); ++i) state.coeffs[i] = 1.0 + double(i);
    std::vector<double> xi(state.coeffs.size(), 0.0);
    const double delta = 0.03;
    ModeVector next = step_perturbed(state, model, delta, xi, 16);
    for (std::size_t i = 0; i < state.coeffs.size(); ++i)
        CHECK(next.coeffs[i] ==
              doctest::Approx(std::exp(-eigenvalue(int(i)) * delta) * state.coeffs[i])
                  .epsilon(1e-14));
}

TEST_CASE("step_perturbed: constant drift hits only mode 0") {
    ModelSpec model = basic_model(Drift::affine(0.0, 1.0), 0.0);
    ModeVector state = ModeVector::zeros(NEU, 8);
    std::vector<double> xi(state.coeffs.size(), 0.0);
    const double delta = 0.02;
    ModeVector next = step_perturbed(state, model, delta, xi, 32);
    CHECK(next.coeffs[0] == doctest::Approx(delta).epsilon(1e-15));
    for (std::size_t i = 1; i < next.coeffs.size(); ++i)
        CHECK(std::abs(next.coeffs[i]) <= 1e-14);
}

TEST_CASE("step_perturbed: dimension mismatch rejected") {
    ModelSpec model = basic_model(Drift::zero(), 1.0);
    ModeVector state = ModeVector::zeros(NEU, 4);
    std::vector<double> xi(3, 0.0);
    CHECK_THROWS_AS(step_perturbed(state, model, 0.1, xi, 16), std::domain_error);
}

TEST_CASE("one step with named drift matches the kernel-quadrature oracle") {
    // band-limited initial state, sigma=0, one step of size delta
    const double delta = 0.05;
    const int K = 255, M = 1024;
    auto u0 = [](double x) { return std::cos(kPi * x) + 0.3 * std::cos(2.0 * kPi * x); };
    ModelSpec model = basic_model(Drift::named(Drift::Name::Sin), 0.0);
    model.u0 = InitialDatum::custom("bandlimited", u0);

    ModeVector state = initial_modes(model, K, M);
    std::vector<double> xi(state.coeffs.size(), 0.0);
    ModeVector next = step_perturbed(state, model, delta, xi, M);

    auto drifted = [&](double y) { return std::sin(u0(y)); };
    for (double x : {0.12, 0.35, 0.5, 0.77, 0.91}) {
        // semigroup part
        const double part1 = adaptive_simpson(
            [&](double y) { return green_eval(NEU, {delta, x, y}, kq) * u0(y); }, 0.0,
            1.0, 1e-11);
        // drift part int_0^delta int_0^1 G_tau(x,y) b(u0(y)) dy dtau with the
        // tau -> 0 kernel spike handled by tau = w^2 and explicit panels
        const double tau0 = 1e-6;
        auto inner = [&](double tau) {
            const double width = 10.0 * std::sqrt(2.0 * tau);
            std::vector<double> bp{0.0, std::max(0.0, x - width),
                                   std::min(1.0, x + width), 1.0};
            std::sort(bp.begin(), bp.end());
            return panel_gauss_legendre(
                [&](double y) { return green_eval(NEU, {tau, x, y}, kq) * drifted(y); },
                bp, 1e-12);
        };
        const double part2 =
            tau0 * drifted(x) +
            adaptive_simpson([&](double w) { return 2.0 * w * inner(w * w); },
                             std::sqrt(tau0), std::sqrt(delta), 1e-10);
        const double oracle = part1 + part2;
        CHECK(std::abs(evaluate_at(next, x) - oracle) <= 1e-6);
    }
}

TEST_CASE("b=0: coarse run under aggregated noise equals the fine run") {
    ModelSpec model = basic_model(Drift::zero(), 1.0, "cospix");
    SchemeConfig config;
    config.T = 0.5;
    config.N = 16;
    config.K = 63;
    config.M = 128;
    config.ref_refinement = 3;
    for (std::uint64_t path = 0; path < 20; ++path) {
        const CoupledTerminal ct = simulate_coupled_terminal(model, config, 2025, path);
        const GridFunction a = synthesize(ct.coarse, config.M);
        const GridFunction b = synthesize(ct.fine, config.M);
        double worst = 0.0;
        for (int j = 0; j < config.M; ++j)
            worst = std::max(worst, std::abs(a.values[j] - b.values[j]));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("sigma=0 affine: mode 0 follows the scalar recursion closed form") {
    const double b1 = 0.7, c = 0.3, T = 0.5;
    const long N = 32;
    ModelSpec model = basic_model(Drift::affine(b1, c), 0.0);
    model.u0 = InitialDatum::custom("two", [](double) { return 2.0; });
    SchemeConfig config;
    config.T = T;
    config.N = N;
    config.K = 31;
    config.M = 64;
    const ModeVector term = simulate_terminal_modes(model, config, 1, 0);
    const double delta = T / double(N);
    const double g = 1.0 + delta * b1;
    const double expected = std::pow(g, double(N)) * 2.0 +
                            (c / b1) * (std::pow(g, double(N)) - 1.0);
    CHECK(term.coeffs[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("distinct path indices give distinct states") {
    ModelSpec model = basic_model(Drift::zero(), 1.0);
    SchemeConfig config;
    config.T = 0.25;
    config.N = 16;
    config.K = 15;
    config.M = 32;
    const ModeVector a = simulate_terminal_modes(model, config, 9, 0);
    const ModeVector b = simulate_terminal_modes(model, config, 9, 1);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        diff = std::max(diff, std::abs(a.coeffs[i] - b.coeffs[i]));
    CHECK(diff > 1e-8);
}

TEST_CASE("strict-hypothesis mode rejects an oversized step") {
    ModelSpec model = basic_model(Drift::named(Drift::Name::Sin), 1.0);
    SchemeConfig config;
    config.T = 1.0;
    config.N = 4; // delta = 0.25 > 1/12
    config.K = 15;
    config.M = 32;
    CHECK_THROWS_AS(config.validate(model), std::domain_error);
    config.strict = false;
    CHECK_NOTHROW(config.validate(model));
    config.strict = true;
    config.N = 16; // delta = 0.0625 < min(1/12, log(3/2)/4)
    CHECK_NOTHROW(config.validate(model));
}

TEST_CASE("affine exact law: b=0 variance equals the isometry integral") {
    ModelSpec model = basic_model(Drift::zero(), 1.3);
    const double T = 0.7, x = 0.4;
    const GaussianLaw law = affine_exact_law(model, T, x);
    CHECK(law.mean == doctest::Approx(0.0).epsilon(1e-14));
    const double oracle = 1.3 * 1.3 * green_sq_time_integral(NEU, T, x, kq);
    CHECK(law.variance == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("affine exact law: Dirichlet b=0 variance against the kernel route") {
    ModelSpec model = basic_model(Drift::zero(), 1.0, "zero", BoundaryCondition::Dirichlet);
    const double T = 0.3, x = 0.6;
    const GaussianLaw law = affine_exact_law(model, T, x);
    const double oracle = green_sq_time_integral(BoundaryCondition::Dirichlet, T, x, kq);
    CHECK(law.variance == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("affine exact law: single-mode decay of the mean") {
    ModelSpec model = basic_model(Drift::zero(), 1.0, "cospix");
    const double T = 0.8;
    for (double x : {0.2, 0.5, 0.9}) {
        const GaussianLaw law = affine_exact_law(model, T, x);
        CHECK(law.mean ==
              doctest::Approx(std::exp(-kPi * kPi * T) * std::cos(kPi * x)).epsilon(1e-12));
    }
}

TEST_CASE("affine exact law: mean cross-validated against kernel quadrature") {
    // nonzero b1 and c: m1 = e^{b1 T} int G_T(x,y) u0(y) dy + c T phim(b1 T)
    ModelSpec model = basic_model(Drift::affine(0.7, 0.3), 1.0, "cospix");
    const double T = 0.6, x = 0.3;
    const GaussianLaw law = affine_exact_law(model, T, x);
    const double quad = adaptive_simpson(
        [&](double y) {
            return green_eval(NEU, {T, x, y}, kq) * std::cos(kPi * y);
        },
        0.0, 1.0, 1e-12);
    const double mean_oracle = std::exp(0.7 * T) * quad + 0.3 * T * phim(0.7 * T);
    CHECK(law.mean == doctest::Approx(mean_oracle).epsilon(1e-9));
}

TEST_CASE("affine exact law: b1 != 0 variance against weighted kernel quadrature") {
    // sigma1 = sigma^2 int_0^T e^{2 b1 r} (int G_r(x,y)^2 dy) dr, flattened by r = w^2
    ModelSpec model = basic_model(Drift::affine(0.5, 0.0), 1.1);
    const double T = 0.9, x = 0.45;
    const GaussianLaw law = affine_exact_law(model, T, x);
    auto integrand = [&](double w) {
        const double r = w * w;
        return 2.0 * w * std::exp(2.0 * 0.5 * r) *
               green_eval(NEU, {2.0 * r, x, x}, kq);
    };
    const double d0 = 1e-8; // analytic start: int_0^{d0} ~ sqrt(d0/(2 pi))
    const double oracle =
        1.1 * 1.1 * (std::sqrt(d0 / (2.0 * kPi)) +
                     adaptive_simpson(integrand, std::sqrt(d0), std::sqrt(T), 1e-11));
    CHECK(law.variance == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("affine perturbed law: b=0 reduces to the exact law") {
    ModelSpec model = basic_model(Drift::zero(), 1.0, "cospix");
    SchemeConfig config;
    config.T = 0.5;
    config.N = 16;
    config.K = 31;
    config.M = 64;
    for (double x : {0.25, 0.5}) {
        const GaussianLaw exact = affine_exact_law(model, config.T, x);
        const GaussianLaw pert = affine_perturbed_law(model, config, x);
        CHECK(std::abs(pert.variance - exact.variance) <= 1e-10);
        CHECK(std::abs(pert.mean - exact.mean) <= 1e-12);
    }
}

TEST_CASE("affine perturbed law: converges monotonically to the exact law") {
    ModelSpec model = basic_model(Drift::affine(1.0, 0.0), 1.0, "one");
    const double x = 0.5;
    const GaussianLaw exact = affine_exact_law(model, 1.0, x);
    double prev_mean_err = 1e300, prev_var_err = 1e300;
    for (long N : {16, 32, 64, 128}) {
        SchemeConfig config;
        config.T = 1.0;
        config.N = N;
        config.K = 255;
        config.M = 512;
        const GaussianLaw pert = affine_perturbed_law(model, config, x);
        const double mean_err = std::abs(pert.mean - exact.mean);
        const double var_err = std::abs(pert.variance - exact.variance);
        CHECK(mean_err < prev_mean_err);
        CHECK(var_err < prev_var_err);
        prev_mean_err = mean_err;
        prev_var_err = var_err;
    }
}

TEST_CASE("reference simulation matches the exact affine law (MC, m=6)" *
          doctest::timeout(1200)) {
    // b1=0.5, c=0.2, u0 = 1: Gaussian law of the fine reference vs oracle
    ModelSpec model = basic_model(Drift::affine(0.5, 0.2), 1.0, "one");
    SchemeConfig config;
    config.T = 1.0;
    config.N = 16;
    config.K = 31;
    config.M = 64;
    config.ref_refinement = 6;
    const double x = 0.5;
    const long n_paths = 100000;
    std::vector<double> samples(n_paths);
    for (long p = 0; p < n_paths; ++p) {
        const CoupledTerminal ct = simulate_coupled_terminal(model, config, 777, p);
        samples[p] = evaluate_at(ct.fine, x);
    }
    const SampleMoments m = sample_moments(samples);
    const GaussianLaw law = affine_exact_law(model, config.T, x);
    const double se_mean = std::sqrt(law.variance / double(n_paths));
    const double se_var = law.variance * std::sqrt(2.0 / double(n_paths));
    CHECK(std::abs(m.mean - law.mean) <= 4.0 * se_mean);
    CHECK(std::abs(m.variance - law.variance) <= 4.0 * se_var);
}

TEST_CASE("perturbed simulation matches the perturbed affine law (MC)" *
          doctest::timeout(600)) {
    // b1=1, c=0, T=0.5, x=0.3
    ModelSpec model = basic_model(Drift::affine(1.0, 0.0), 1.0, "one");
    SchemeConfig config;
    config.T = 0.5;
    config.N = 32;
    config.K = 31;
    config.M = 64;
    const double x = 0.3;
    const long n_paths = 100000;
    std::vector<double> samples(n_paths);
    for (long p = 0; p < n_paths; ++p)
        samples[p] = evaluate_at(simulate_terminal_modes(model, config, 31337, p), x);
    const SampleMoments m = sample_moments(samples);
    const GaussianLaw law = affine_perturbed_law(model, config, x);
    const double se_mean = std::sqrt(law.variance / double(n_paths));
    const double se_var = law.variance * std::sqrt(2.0 / double(n_paths));
    CHECK(std::abs(m.mean - law.mean) <= 4.0 * se_mean);
    CHECK(std::abs(m.variance - law.variance) <= 4.0 * se_var);
}

TEST_CASE("reference self-convergence: doubling the refinement decays at order >= 0.7" *
          doctest::timeout(600)) {
    ModelSpec model = basic_model(Drift::affine(1.0, 0.0), 1.0, "one");
    const double T = 1.0;
    const long N = 16;
    const int K = 31, M = 64;
    const double x = 0.5;
    const long n_paths = 10000;
    std::vector<double> log_h, log_d;
    for (int m = 1; m <= 3; ++m) {
        const long fine_steps = N << (m + 1);
        const NoisePlan plan{T / double(fine_steps), fine_steps, K, NEU};
        Kahan sq;
        for (long p = 0; p < n_paths; ++p) {
            const NoiseTensor finest = sample_increments(4242, p, plan);
            const NoiseTensor coarser = aggregate_to_coarse(finest, 2);
            const ModeVector uf = evolve_with_tensor(model, M, finest);
            const ModeVector uc = evolve_with_tensor(model, M, coarser);
            const double d = evaluate_at(uf, x) - evaluate_at(uc, x);
            sq.add(d * d);
        }
        const double l2 = std::sqrt(sq.value() / double(n_paths));
        log_h.push_back(std::log(T / double(N << m)));
        log_d.push_back(std::log(l2));
    }
    // slope of log d vs log h
    const double slope = (log_d.back() - log_d.front()) / (log_h.back() - log_h.front());
    CHECK(slope >= 0.7);
}

TEST_CASE("aggregated-noise coarse run reproduces the fine run to 1e-12 (b=0)") {
    ModelSpec model = basic_model(Drift::zero(), 1.0, "cospix");
    const int K = 31, M = 64;
    const NoisePlan fine_plan{0.5 / 128.0, 128, K, NEU};
    for (std::uint64_t p = 0; p < 10; ++p) {
        const NoiseTensor fine = sample_increments(606, p, fine_plan);
        const NoiseTensor coarse = aggregate_to_coarse(fine, 8);
        const ModeVector uf = evolve_with_tensor(model, M, fine);
        const ModeVector uc = evolve_with_tensor(model, M, coarse);
        for (std::size_t i = 0; i < uf.coeffs.size(); ++i)
            CHECK(std::abs(uf.coeffs[i] - uc.coeffs[i]) <= 1e-12);
    }
}

TEST_CASE("bounded drifts keep the terminal sup-norm within a fitted envelope" *
          doctest::timeout(300)) {
    ModelSpec model = basic_model(Drift::named(Drift::Name::Sin), 1.0, "one");
    SchemeConfig config;
    config.T = 0.5;
    config.N = 16;
    config.K = 31;
    config.M = 64;
    auto sup_norm = [&](std::uint64_t p) {
        const GridFunction g = simulate_path(model, config, 8088, p);
        double w = 0.0;
        for (double v : g.values) w = std::max(w, std::abs(v));
        return w;
    };
    double fitted = 0.0;
    for (std::uint64_t p = 0; p < 500; ++p) fitted = std::max(fitted, sup_norm(p));
    CHECK(std::isfinite(fitted));
    for (std::uint64_t p = 500; p < 1000; ++p) CHECK(sup_norm(p) <= 2.0 * fitted);
}

TEST_CASE("affine terminal distribution is Gaussian (skew/kurtosis)" *
          doctest::timeout(600)) {
    ModelSpec model = basic_model(Drift::affine(0.8, 0.0), 1.0, "one");
    SchemeConfig config;
    config.T = 0.5;
    config.N = 16;
    config.K = 31;
    config.M = 64;
    const long n_paths = 50000;
    std::vector<double> samples(n_paths);
    for (long p = 0; p < n_paths; ++p)
        samples[p] = evaluate_at(simulate_terminal_modes(model, config, 5150, p), 0.5);
    const SampleMoments m = sample_moments(samples);
    const double se_skew = std::sqrt(6.0 / double(n_paths));
    const double se_kurt = std::sqrt(24.0 / double(n_paths));
    CHECK(std::abs(m.skewness) <= 5.0 * se_skew);
    CHECK(std::abs(m.excess_kurtosis) <= 5.0 * se_kurt);
}
