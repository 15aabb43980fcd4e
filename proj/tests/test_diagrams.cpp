#include "singspec/diagrams.hpp"

#include "singspec/limit_covariance.hpp"
#include "support/isserlis.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace singspec;

namespace {
constexpr double kPi = 3.14159265358979323846;

SpectralModel reference_model() {
    return SpectralModel({{1.0, 0.7, 0.5 * kPi}}, TimeDomain::Discrete);
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// independent diagram count: sum over edge-count matrices of the wiring
// multiplicities prod_i l_i! / prod_{i<k} e_ik!
long long count_by_edge_matrices(const std::vector<int>& order);

void count_rec(const std::vector<int>& order, std::vector<int>& residual, std::size_t i,
               std::size_t k, double ways, double& total) {
    if (i >= order.size()) {
        bool done = true;
        for (int r : residual) done = done && r == 0;
        if (done) total += ways;
        return;
    }
    if (k >= order.size()) {
        if (residual[i] != 0) return;
        count_rec(order, residual, i + 1, i + 2, ways, total);
        return;
    }
    const int cap = std::min(residual[i], residual[k]);
    for (int e = 0; e <= cap; ++e) {
        residual[i] -= e;
        residual[k] -= e;
        double f = 1.0;
        for (int x = 2; x <= e; ++x) f *= x;
        count_rec(order, residual, i, k + 1, ways / f, total);
        residual[i] += e;
        residual[k] += e;
    }
}

long long count_by_edge_matrices(const std::vector<int>& order) {
    std::vector<int> residual = order;
    double total = 0.0;
    count_rec(order, residual, 0, 1, 1.0, total);
    double scale = 1.0;
    for (int l : order) scale *= factorial(l);
    return static_cast<long long>(std::llround(total * scale));
}

std::vector<Rational> random_psd_rational_correlation(std::size_t p, std::mt19937_64& rng) {
    // unit diagonal with small rational off-diagonals: diagonally dominant,
    // hence positive definite, and exactly representable
    const long long cap = 128 / (3 * static_cast<long long>(p - 1));
    std::uniform_int_distribution<long long> pick(-cap, cap);
    std::vector<Rational> corr(p * p, Rational(0));
    for (std::size_t i = 0; i < p; ++i) corr[i * p + i] = Rational(1);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            const Rational r(pick(rng), 128);
            corr[i * p + j] = r;
            corr[j * p + i] = r;
        }
    }
    return corr;
}
} // namespace

TEST_CASE("diagram enumeration counts") {
    CHECK(enumerate_diagrams({1, 1, 1, 1}).size() == 3);
    CHECK(enumerate_diagrams({1, 1, 1}).empty());
    CHECK(enumerate_diagrams({2, 2}).size() == 2);

    for (const std::vector<int>& order :
         {std::vector<int>{2, 2, 2, 2}, {3, 3, 2}, {1, 2, 3, 2}, {4, 4}, {3, 3, 3, 3}}) {
        const auto diagrams = enumerate_diagrams(order);
        CHECK(static_cast<long long>(diagrams.size()) == count_by_edge_matrices(order));
        // every vertex has degree exactly one and no edge stays inside a level
        for (const auto& d : diagrams) {
            std::vector<int> deg(d.vertex_level.size(), 0);
            for (const auto& e : d.edges) {
                ++deg[static_cast<std::size_t>(e.first)];
                ++deg[static_cast<std::size_t>(e.second)];
                CHECK(d.vertex_level[static_cast<std::size_t>(e.first)] !=
                      d.vertex_level[static_cast<std::size_t>(e.second)]);
            }
            for (int v : deg) CHECK(v == 1);
        }
    }

    CHECK_THROWS_AS(enumerate_diagrams({5, 5, 5, 5}), numerical_error);
}

TEST_CASE("regular diagram classification") {
    SUBCASE("|L*| = 3 (j!)^2 for square orders") {
        for (int j : {1, 2, 3}) {
            long long regular = 0;
            for (const auto& d : enumerate_diagrams({j, j, j, j}))
                if (classify_regular(d)) ++regular;
            CHECK(regular == static_cast<long long>(3.0 * factorial(j) * factorial(j)));
        }
    }
    SUBCASE("odd level count has no regular diagrams") {
        for (const auto& d : enumerate_diagrams({2, 2, 2})) CHECK_FALSE(classify_regular(d));
        for (const auto& d : enumerate_diagrams({3, 2, 1})) CHECK_FALSE(classify_regular(d));
    }
    SUBCASE("all three pairings of four singletons are regular") {
        for (const auto& d : enumerate_diagrams({1, 1, 1, 1})) CHECK(classify_regular(d));
    }
}

TEST_CASE("donor / recipient classification") {
    SUBCASE("level 1 is a strong donor, level 4 a recipient") {
        for (int j : {1, 2, 3}) {
            for (const auto& d : enumerate_diagrams({j, j, j, j})) {
                const auto roles = classify_levels(d);
                CHECK(roles.front() == LevelRole::StrongDonor);
                CHECK(roles.back() == LevelRole::Recipient);
            }
        }
    }
    SUBCASE("fully paired regular diagram has indegrees (j, 0, j, 0)") {
        for (const auto& d : enumerate_diagrams({2, 2, 2, 2})) {
            if (!classify_regular(d)) continue;
            const auto q = d.level_indegrees();
            // pick out the diagrams pairing levels (1,2) and (3,4)
            bool pairs_12_34 = true;
            for (const auto& e : d.edges) {
                const int a = d.vertex_level[static_cast<std::size_t>(e.first)];
                const int b = d.vertex_level[static_cast<std::size_t>(e.second)];
                const int lo = std::min(a, b), hi = std::max(a, b);
                pairs_12_34 = pairs_12_34 && ((lo == 0 && hi == 1) || (lo == 2 && hi == 3));
            }
            if (pairs_12_34) {
                CHECK(q[0] == 2);
                CHECK(q[1] == 0);
                CHECK(q[2] == 2);
                CHECK(q[3] == 0);
            }
        }
    }
    SUBCASE("two strong donors force two recipients on (2,2,2,2)") {
        for (const auto& d : enumerate_diagrams({2, 2, 2, 2})) {
            if (classify_regular(d)) continue;
            const auto roles = classify_levels(d);
            int strong = 0, recipients = 0;
            for (auto r : roles) {
                if (r == LevelRole::StrongDonor) ++strong;
                if (r == LevelRole::Recipient) ++recipients;
            }
            if (strong == 2) CHECK(recipients == 2);
        }
    }
}

TEST_CASE("hermite moments against closed forms") {
    SUBCASE("pair orders: k! rho^k") {
        for (int k : {1, 2, 3, 5}) {
            for (double rho : {-0.7, 0.2, 0.9}) {
                const std::vector<double> corr{1.0, rho, rho, 1.0};
                CHECK(hermite_moment({k, k}, corr) ==
                      doctest::Approx(factorial(k) * std::pow(rho, k)).epsilon(1e-12));
            }
        }
        // mismatched orders vanish
        CHECK(hermite_moment({2, 3}, {1.0, 0.5, 0.5, 1.0}) == doctest::Approx(0.0));
    }
    SUBCASE("four unit levels with common correlation: 3 rho^2") {
        const double rho = 0.37;
        std::vector<double> corr(16, rho);
        for (int i = 0; i < 4; ++i) corr[static_cast<std::size_t>(i) * 4 + i] = 1.0;
        CHECK(hermite_moment({1, 1, 1, 1}, corr) == doctest::Approx(3.0 * rho * rho).epsilon(1e-12));
    }
    SUBCASE("independent variables: every cross-level edge vanishes") {
        std::vector<double> eye(16, 0.0);
        for (int i = 0; i < 4; ++i) eye[static_cast<std::size_t>(i) * 4 + i] = 1.0;
        CHECK(hermite_moment({2, 2, 2, 2}, eye) == doctest::Approx(0.0));
    }
    SUBCASE("invalid correlation") {
        CHECK_THROWS_AS(hermite_moment({1, 1}, {1.0, 0.5, 0.4, 1.0}), domain_error);
        CHECK_THROWS_AS(hermite_moment({1, 1}, {0.9, 0.5, 0.5, 1.0}), domain_error);
    }
}

TEST_CASE("exact agreement with the Isserlis oracle") {
    std::mt19937_64 rng(20260808ULL);
    const std::vector<std::vector<int>> orders_list{
        {1, 1}, {2, 2}, {3, 3}, {1, 1, 1, 1}, {2, 2, 2, 2}, {2, 2, 1, 1},
        {3, 3, 2, 2}, {3, 2, 1}, {4, 4}, {2, 3, 3, 2}, {5, 5}, {4, 2, 2, 2}};
    for (const auto& orders : orders_list) {
        int total = 0;
        for (int l : orders) total += l;
        REQUIRE(total <= 10);
        for (int rep = 0; rep < 20; ++rep) {
            const auto corr = random_psd_rational_correlation(orders.size(), rng);
            const auto lhs = hermite_moment_exact(orders, corr);
            const auto rhs = oracles::isserlis_hermite_moment(orders, corr);
            CHECK(lhs == rhs);
            // the floating route agrees too
            std::vector<double> corr_d(corr.size());
            for (std::size_t i = 0; i < corr.size(); ++i) corr_d[i] = corr[i].to_double();
            CHECK(hermite_moment(orders, corr_d) ==
                  doctest::Approx(lhs.to_double()).epsilon(1e-10).scale(1.0 + std::abs(lhs.to_double())));
        }
    }
}

TEST_CASE("fourth moment: exact split and limits") {
    auto model = reference_model();
    auto w = WeightSpec::constant();

    SUBCASE("j = 1: no nonregular diagrams, exact 3 sigma_T^4 / sigma^4") {
        auto b = fourth_moment_statistic(model, w, 1, {1.0}, 256);
        CHECK(b.nonregular_part == 0.0);
        CHECK(b.total == doctest::Approx(3.0 * b.sigma_t_sq * b.sigma_t_sq /
                                         (b.sigma_sq * b.sigma_sq))
                             .epsilon(1e-14));
    }

    SUBCASE("j = 2: decomposition equals the brute-force moment at T = 24") {
        const long long T = 24;
        auto b = fourth_moment_statistic(model, w, 2, {1.0}, T);
        // brute force: E pi^4 = sum over t1..t4 of prod r * E prod H_2(xi_t)
        const auto r = weighted_direction(w, {1.0}, static_cast<double>(T));
        double brute = 0.0;
        std::vector<double> corr(16);
        for (long long t1 = 1; t1 <= T; ++t1)
            for (long long t2 = 1; t2 <= T; ++t2)
                for (long long t3 = 1; t3 <= T; ++t3)
                    for (long long t4 = 1; t4 <= T; ++t4) {
                        const long long ts[4] = {t1, t2, t3, t4};
                        for (int a = 0; a < 4; ++a)
                            for (int c = 0; c < 4; ++c)
                                corr[static_cast<std::size_t>(a) * 4 + c] =
                                    covariance(model, static_cast<double>(ts[a] - ts[c]));
                        double prod = 1.0;
                        for (int a = 0; a < 4; ++a)
                            prod *= r[static_cast<std::size_t>(ts[a] - 1)];
                        brute += prod * hermite_moment({2, 2, 2, 2}, corr);
                    }
        brute /= b.sigma_sq * b.sigma_sq;
        CHECK(b.total == doctest::Approx(brute).epsilon(1e-10));
        CHECK(b.total == doctest::Approx(b.regular_part + b.nonregular_part).epsilon(1e-14));
    }

    SUBCASE("j = 2: nonregular sum decreases toward zero") {
        double prev = 1e300;
        for (long long T : {64, 128, 256, 512}) {
            auto b = fourth_moment_statistic(model, w, 2, {1.0}, T);
            CHECK(b.nonregular_part < prev);
            CHECK(b.nonregular_part > 0.0);
            prev = b.nonregular_part;
        }
    }

    SUBCASE("dense supports at j = 3 respect the budget") {
        CHECK_THROWS_AS(fourth_moment_statistic(model, w, 3, {1.0}, 512), numerical_error);
        CHECK_NOTHROW(fourth_moment_statistic(model, w, 3, {1.0}, 64));
    }
}

TEST_CASE("contraction norms") {
    auto model = reference_model();
    auto w = WeightSpec::constant();

    SUBCASE("white-noise hand value at T = 2") {
        const double inv = 1.0 / std::sqrt(2.0);
        CHECK(contraction_norm_sq_lags({1.0, 0.0}, {inv, inv}, 2, 1) ==
              doctest::Approx(0.5).epsilon(1e-14));
    }

    SUBCASE("brute-force 4-fold sum at T = 20") {
        const long long T = 20;
        const auto r = weighted_direction(w, {1.0}, static_cast<double>(T));
        for (int j : {2, 3}) {
            for (int p = 1; p < j; ++p) {
                double brute = 0.0;
                for (long long q = 1; q <= T; ++q)
                    for (long long k = 1; k <= T; ++k)
                        for (long long l = 1; l <= T; ++l)
                            for (long long i = 1; i <= T; ++i)
                                brute += r[q - 1] * r[k - 1] * r[l - 1] * r[i - 1] *
                                         std::pow(covariance(model, static_cast<double>(q - k)), j - p) *
                                         std::pow(covariance(model, static_cast<double>(l - i)), j - p) *
                                         std::pow(covariance(model, static_cast<double>(q - l)), p) *
                                         std::pow(covariance(model, static_cast<double>(k - i)), p);
                CHECK(contraction_norm_sq(model, w, j, p, {1.0}, T) ==
                      doctest::Approx(brute).epsilon(1e-10));
            }
        }
    }

    SUBCASE("p and j - p give the same value for constant weights") {
        for (long long T : {64, 128}) {
            CHECK(contraction_norm_sq(model, w, 3, 1, {1.0}, T) ==
                  doctest::Approx(contraction_norm_sq(model, w, 3, 2, {1.0}, T)).epsilon(1e-12));
        }
    }

    SUBCASE("decay with horizon (precursor of the full slope test)") {
        std::vector<double> logT, logN;
        for (long long T : {64, 128, 256, 512}) {
            logT.push_back(std::log(static_cast<double>(T)));
            logN.push_back(std::log(contraction_norm_sq(model, w, 2, 1, {1.0}, T)));
        }
        CHECK(oracles::fitted_slope(logT, logN) < -0.25);
    }

    SUBCASE("argument validation") {
        CHECK_THROWS_AS(contraction_norm_sq(model, w, 2, 2, {1.0}, 32), domain_error);
        CHECK_THROWS_AS(contraction_norm_sq(model, w, 2, 0, {1.0}, 32), domain_error);
    }
}
