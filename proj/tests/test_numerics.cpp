#include <doctest.h>

#include <cmath>

#include "shelab/numerics.hpp"

using namespace shelab;

TEST_CASE("norm_ppf round-trips the normal CDF") {
    CHECK(norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
        const double z = norm_ppf(p);
        CHECK(norm_cdf(z) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK_THROWS_AS(norm_ppf(0.0), std::domain_error);
    CHECK_THROWS_AS(norm_ppf(1.0), std::domain_error);
}

TEST_CASE("norm_ppf is monotone") {
    double prev = norm_ppf(1e-9);
    for (int i = 1; i <= 1000; ++i) {
        const double p = 1e-9 + (1.0 - 2e-9) * i / 1000.0;
        const double z = norm_ppf(p);
        CHECK(z > prev);
        prev = z;
    }
}

TEST_CASE("phi helpers handle small arguments without cancellation") {
    CHECK(phi1(0.0) == 1.0);
    CHECK(phi1(1e-12) == doctest::Approx(1.0 - 5e-13).epsilon(1e-12));
    CHECK(phi1(2.0) == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-15));
    CHECK(phim(0.0) == 1.0);
    CHECK(phim(1.0) == doctest::Approx(std::expm1(1.0)).epsilon(1e-15));
}

TEST_CASE("adaptive Simpson integrates a Gaussian to 1e-12") {
    auto f = [](double x) { return norm_pdf(x); };
    const double v = adaptive_simpson(f, -10.0, 10.0, 1e-13);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Gauss-Legendre nodes reproduce polynomial integrals exactly") {
    GaussLegendre gl(16);
    double wsum = 0.0;
    for (double w : gl.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    // degree-31 exactness: check x^30 over [0,1]
    const double v = gl.integrate([](double x) { return std::pow(x, 30); }, 0.0, 1.0);
    CHECK(v == doctest::Approx(1.0 / 31.0).epsilon(1e-13));
}

TEST_CASE("panel GL handles a near-singular spike") {
    // 1/sqrt(|x-0.3|+1e-6) style spike, refined adaptively
    auto f = [](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3) + 1e-6); };
    double bp[] = {0.0, 0.3, 1.0};
    const double v = panel_gauss_legendre(f, bp, 1e-10);
    const double ref = adaptive_simpson(f, 0.0, 0.3, 1e-12) +
                       adaptive_simpson(f, 0.3, 1.0, 1e-12);
    CHECK(v == doctest::Approx(ref).epsilon(1e-8));
}
