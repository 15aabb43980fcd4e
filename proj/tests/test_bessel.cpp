#include "singspec/bessel.hpp"
#include "singspec/errors.hpp"

#include <doctest.h>

#include <cmath>

using singspec::bessel_k;

namespace {
constexpr double kPi = 3.14159265358979323846;

// closed form K_{1/2}(z) = sqrt(pi/(2z)) e^{-z}, the independent oracle
double k_half(double z) { return std::sqrt(kPi / (2.0 * z)) * std::exp(-z); }
} // namespace

TEST_CASE("half-order closed form") {
    CHECK(bessel_k(0.5, 1.0) == doctest::Approx(std::sqrt(kPi / 2.0) * std::exp(-1.0)).epsilon(1e-12));
    // 100 log-spaced arguments
    for (int i = 0; i < 100; ++i) {
        const double z = std::pow(10.0, -3.0 + 6.0 * i / 99.0);
        const double expected = k_half(z);
        CHECK(bessel_k(0.5, z) == doctest::Approx(expected).epsilon(1e-10));
        CHECK(bessel_k(-0.5, z) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("symmetry in the order") {
    for (double nu : {0.05, 0.15, 0.3, 0.45, 1.2, 3.7}) {
        for (double z : {1e-4, 0.01, 0.5, 2.0, 10.0}) {
            CHECK(bessel_k(-nu, z) == doctest::Approx(bessel_k(nu, z)).epsilon(1e-12));
        }
    }
}

TEST_CASE("small-argument asymptote K_nu(z) ~ Gamma(nu) 2^(nu-1) z^(-nu)") {
    const double nu = 0.4, z = 1e-6;
    const double asym = std::tgamma(nu) * std::pow(2.0, nu - 1.0) * std::pow(z, -nu);
    CHECK(bessel_k(nu, z) == doctest::Approx(asym).epsilon(1e-3));
}

TEST_CASE("agrees with the standard library implementation") {
    for (double nu : {0.0, 0.2, 0.35, 1.0, 2.5, 7.0}) {
        for (double z : {0.05, 0.3, 1.0, 4.0, 25.0}) {
            CHECK(bessel_k(nu, z) == doctest::Approx(std::cyl_bessel_k(nu, z)).epsilon(1e-10));
        }
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(bessel_k(0.3, 0.0), singspec::domain_error);
    CHECK_THROWS_AS(bessel_k(0.3, -1.0), singspec::domain_error);
}
