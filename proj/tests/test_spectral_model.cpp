#include "singspec/spectral_model.hpp"

#include "singspec/bessel.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace singspec;

namespace {

constexpr double kPi = 3.14159265358979323846;

SpectralModel single(double alpha, double kappa, TimeDomain domain) {
    return SpectralModel({{1.0, alpha, kappa}}, domain);
}

SpectralModel mixture(TimeDomain domain) {
    return SpectralModel({{0.4, 0.8, 0.0}, {0.35, 0.6, 1.0}, {0.25, 0.9, 2.5}}, domain);
}

} // namespace

TEST_CASE("model invariants are enforced") {
    CHECK_THROWS_AS(SpectralModel({{0.5, 0.7, 0.0}}, TimeDomain::Discrete), assumption_error);
    CHECK_THROWS_AS(SpectralModel({{1.0, 1.2, 0.0}}, TimeDomain::Discrete), assumption_error);
    CHECK_THROWS_AS(SpectralModel({{0.5, 0.7, 1.0}, {0.5, 0.6, 0.5}}, TimeDomain::Discrete),
                    assumption_error);
    CHECK_THROWS_AS(SpectralModel({{1.0, 0.7, 4.0}}, TimeDomain::Discrete), assumption_error);
    CHECK(mixture(TimeDomain::Continuous).min_alpha() == doctest::Approx(0.6));
}

TEST_CASE("covariance values") {
    auto m = mixture(TimeDomain::Continuous);
    CHECK(covariance(m, 0.0) == doctest::Approx(1.0));

    auto s = single(0.6, kPi, TimeDomain::Continuous);
    CHECK(covariance(s, 2.0) == doctest::Approx(std::cos(2.0 * kPi) / std::pow(5.0, 0.3)));
    CHECK(covariance(s, 2.0) == doctest::Approx(0.61702).epsilon(1e-4));

    for (double t : {0.3, 1.7, 12.0, 401.5}) {
        CHECK(covariance(m, t) == doctest::Approx(covariance(m, -t)).epsilon(1e-15));
        CHECK(std::abs(covariance(m, t)) <= 1.0);
    }
}

TEST_CASE("spectral density matches Fourier inversion of B") {
    auto m = single(0.7, 2.0, TimeDomain::Continuous);
    const double f = spectral_density(m, 1.0);
    const double inv = oracles::fourier_inversion(m, 1.0);
    CHECK(f == doctest::Approx(inv).epsilon(1e-4));

    // a handful of frequencies away from the singular points +/-2
    for (double lam : {0.0, 0.5, 1.5, 2.5, 3.5, 6.0}) {
        CHECK(spectral_density(m, lam) ==
              doctest::Approx(oracles::fourier_inversion(m, lam)).epsilon(1e-4));
    }
}

TEST_CASE("density is even and nonnegative") {
    for (auto domain : {TimeDomain::Continuous, TimeDomain::Discrete}) {
        auto m = mixture(domain);
        for (double lam : {0.1, 0.7, 1.4, 2.0, 3.0}) {
            if (domain == TimeDomain::Discrete && lam > kPi) continue;
            const double f = spectral_density(m, lam);
            CHECK(f >= 0.0);
            CHECK(f == doctest::Approx(spectral_density(m, -lam)).epsilon(1e-12));
        }
    }
}

TEST_CASE("density integrates to B(0) = 1") {
    SUBCASE("continuous single") {
        CHECK(integrate_density(single(0.7, 2.0, TimeDomain::Continuous), 1e-9) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("continuous mixture with a singularity at zero") {
        CHECK(integrate_density(mixture(TimeDomain::Continuous), 1e-9) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("discrete single") {
        CHECK(integrate_density(single(0.7, 0.5 * kPi, TimeDomain::Discrete), 1e-9) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("discrete mixture") {
        CHECK(integrate_density(mixture(TimeDomain::Discrete), 1e-9) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("singular point evaluation is rejected") {
    auto m = single(0.7, 2.0, TimeDomain::Continuous);
    CHECK_THROWS_AS(spectral_density(m, 2.0), domain_error);
    CHECK_THROWS_AS(spectral_density(m, -2.0), domain_error);
    auto d = single(0.7, 0.5 * kPi, TimeDomain::Discrete);
    CHECK_THROWS_AS(spectral_density(d, 0.5 * kPi), domain_error);
    CHECK_THROWS_AS(spectral_density(d, 4.0), domain_error); // outside (-pi, pi]
}

TEST_CASE("asymptote matches the density near a singularity") {
    auto m = single(0.6, kPi / 2.0, TimeDomain::Continuous);
    SUBCASE("ratio approaches 1 at shrinking offsets") {
        for (double off : {1e-3, 1e-4, 1e-5}) {
            const double lam = kPi / 2.0 + off;
            const double ratio = spectral_density(m, lam) / density_asymptote(m, 0, lam);
            CHECK(ratio == doctest::Approx(1.0).epsilon(1e-2));
        }
    }
    SUBCASE("also on the negative side and for mixtures") {
        auto mx = mixture(TimeDomain::Continuous);
        for (std::size_t j = 0; j < 3; ++j) {
            const double kap = mx.components()[j].kappa;
            const double lam = -kap + 3e-5;
            const double ratio = spectral_density(mx, lam) / density_asymptote(mx, j, lam);
            CHECK(ratio == doctest::Approx(1.0).epsilon(1e-2));
        }
    }
    SUBCASE("discrete-time fold") {
        auto d = single(0.7, 0.5 * kPi, TimeDomain::Discrete);
        const double lam = 0.5 * kPi + 1e-4;
        CHECK(spectral_density(d, lam) / density_asymptote(d, 0, lam) ==
              doctest::Approx(1.0).epsilon(1e-2));
    }
    SUBCASE("far from the singularity the asymptote is rejected") {
        CHECK_THROWS_AS(density_asymptote(m, 0, kPi / 2.0 + 1.0), domain_error);
    }
}

TEST_CASE("condition (I): extracted singular coefficient") {
    const double alpha = 0.65, kappa = 1.0;
    auto m = single(alpha, kappa, TimeDomain::Continuous);
    const double off = 1e-8;
    const double extracted = spectral_density(m, kappa + off) * std::pow(off, 1.0 - alpha);
    const double a_j = 0.5 * detail::c2_constant(alpha); // A_j c2(alpha)/2 with A_j = 1
    CHECK(extracted == doctest::Approx(a_j).epsilon(1e-2));
    CHECK(a_j > 0.0);

    // kappa = 0 merges the two mirrored power laws: coefficient doubles
    auto z = single(alpha, 0.0, TimeDomain::Continuous);
    const double extracted0 = spectral_density(z, off) * std::pow(off, 1.0 - alpha);
    CHECK(extracted0 == doctest::Approx(2.0 * a_j).epsilon(1e-2));
}

TEST_CASE("asymptote reduces to a pure power law at 0+") {
    const double alpha = 0.7, kappa = 2.0;
    auto m = single(alpha, kappa, TimeDomain::Continuous);
    const double coeff = 0.5 * detail::c2_constant(alpha);
    double prev_gap = 1e300;
    for (double off : {1e-4, 1e-7, 1e-10}) {
        const double asym = density_asymptote(m, 0, kappa + off);
        const double power = coeff * std::pow(off, alpha - 1.0);
        const double gap = std::abs(asym / power - 1.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 2e-3);
}

TEST_CASE("convolution density: mass, symmetry, consistency") {
    auto d = single(0.7, 0.5 * kPi, TimeDomain::Discrete);

    SUBCASE("f^{*(1)} coincides with f away from singularities") {
        for (double lam : {0.1, 0.9, 2.2}) {
            CHECK(convolution_density_at(d, 1, lam) ==
                  doctest::Approx(spectral_density(d, lam)).epsilon(1e-12));
        }
    }

    SUBCASE("2 pi f^{*(2)}(0) equals the lag-sum oracle") {
        const double lhs = 2.0 * kPi * convolution_density_at(d, 2, 0.0);
        const double rhs = oracles::lag_sum_covariance_power(d, 2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
    }

    SUBCASE("continuous time: 2 pi f^{*(2)}(0) equals the integral oracle") {
        auto c = single(0.8, 1.0, TimeDomain::Continuous);
        const double lhs = 2.0 * kPi * convolution_density_at(c, 2, 0.0);
        const double rhs = oracles::integral_covariance_power(c, 2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
    }

    SUBCASE("unit mass for j = 2, 3 (discrete, adaptive with kink splits)") {
        // f^{*(j)} is continuous but has |u|^(beta-1)-type derivative kinks at
        // the wrapped combination frequencies; split the quadrature there
        for (int j : {2, 3}) {
            std::vector<double> cuts{-kPi, kPi};
            for (const auto& t : covariance_power_terms(d, j)) {
                const double w = std::abs(detail::wrap_to_torus(t.freq));
                cuts.push_back(w);
                cuts.push_back(-w);
            }
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end(),
                                   [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                       cuts.end());
            double mass = 0.0;
            for (std::size_t i = 1; i < cuts.size(); ++i)
                mass += adaptive_simpson(
                    [&](double lam) {
                        return convolution_density_at(d, j, detail::wrap_to_torus(lam));
                    },
                    cuts[i - 1], cuts[i], 1e-9);
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        }
    }

    SUBCASE("assumption violation for alpha*j <= 1") {
        auto low = single(0.4, 1.0, TimeDomain::Discrete);
        CHECK_THROWS_AS(convolution_density_at(low, 2, 0.3), assumption_error);
        CHECK_NOTHROW(convolution_density_at(low, 2, 0.3 + 0.0, true)); // conjecture mode
        CHECK_NOTHROW(convolution_density_at(low, 3, 0.3));             // 1.2 > 1
    }

    SUBCASE("grid version is even and nonnegative") {
        std::vector<double> freqs;
        for (int i = -20; i <= 20; ++i) freqs.push_back(i * 0.15);
        auto grid = convolution_density(d, 2, freqs);
        REQUIRE(grid.values.size() == freqs.size());
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            CHECK(grid.values[i] >= -1e-12);
            const auto j = freqs.size() - 1 - i;
            CHECK(grid.values[i] == doctest::Approx(grid.values[j]).epsilon(1e-10));
        }
    }
}

TEST_CASE("convolution semigroup on the torus grid") {
    auto d = single(0.7, 0.5 * kPi, TimeDomain::Discrete);
    const int n = 1024;
    const double h = 2.0 * kPi / n;

    // cell masses of f (singularity-aware), f^{*(2)} at nodes, f^{*(3)} at centers
    std::vector<double> mass(n), f2(n), f3(n);
    for (int i = 0; i < n; ++i) {
        const double a = -kPi + i * h, b = a + h;
        mass[i] = integrate_density_over(d, a, b, 1e-10);
        // center_i - center_c = (i-c) h, so tabulate f^{*(2)} on the node grid k*h
        f2[i] = convolution_density_at(d, 2, detail::wrap_to_torus(i * h));
        f3[i] = convolution_density_at(d, 3, detail::wrap_to_torus(-kPi + (i + 0.5) * h));
    }

    double total = 0.0;
    for (double mi : mass) total += mi;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));

    for (int i = 0; i < n; i += 37) {
        double conv = 0.0;
        for (int c = 0; c < n; ++c) {
            // center_i - center_c lands on a node of the f2 grid
            int k = i - c;
            k %= n;
            if (k < 0) k += n;
            conv += f2[k] * mass[c];
        }
        CHECK(conv == doctest::Approx(f3[i]).epsilon(1e-3));
    }
}

TEST_CASE("decay law of the integrated covariance at kappa_0 = 0") {
    const double alpha = 0.7;
    auto m = single(alpha, 0.0, TimeDomain::Discrete);
    std::vector<double> logT, logI;
    double acc = 0.0;
    long long t = 1;
    for (int p = 10; p <= 16; ++p) {
        const long long T = 1LL << p;
        for (; t <= T; ++t) acc += std::abs(covariance(m, static_cast<double>(t)));
        logT.push_back(std::log(static_cast<double>(T)));
        logI.push_back(std::log(acc));
    }
    CHECK(oracles::fitted_slope(logT, logI) == doctest::Approx(1.0 - alpha).epsilon(0.05));
}

TEST_CASE("validate_assumptions") {
    auto rep1 = validate_assumptions(single(0.7, 1.0, TimeDomain::Discrete), 1, false);
    CHECK(rep1.passed);
    CHECK(rep1.a4_i);

    auto rep2 = validate_assumptions(single(0.4, 1.0, TimeDomain::Discrete), 3, false);
    CHECK(rep2.passed);
    CHECK(rep2.a4_ii);
    CHECK_FALSE(rep2.a4_i);

    auto rep3 = validate_assumptions(single(0.4, 1.0, TimeDomain::Discrete), 1, false);
    CHECK_FALSE(rep3.passed);

    auto rep4 = validate_assumptions(single(0.4, 1.0, TimeDomain::Discrete), 1, true);
    CHECK(rep4.passed);
    CHECK(rep4.conjecture_regime);
}

TEST_CASE("half-integer closed form locks the Fourier convention") {
    // alpha = 1 would give K_0; instead use the exact transform pair at
    // beta = 2: (1/2pi) int e^{-iut} / (1+t^2) dt = e^{-|u|} / 2
    for (double u : {0.3, 1.0, 2.5}) {
        CHECK(detail::power_law_density(2.0, u) == doctest::Approx(0.5 * std::exp(-u)).epsilon(1e-11));
    }
}
