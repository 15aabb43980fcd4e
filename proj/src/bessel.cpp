#include "singspec/bessel.hpp"

#include "singspec/errors.hpp"

#include <cmath>
#include <string>

namespace singspec {

namespace {

// log(cosh(x)) without overflow
double log_cosh(double x) {
    x = std::abs(x);
    return x + std::log1p(std::exp(-2.0 * x)) - 0.6931471805599453094;
}

} // namespace

double bessel_k(double nu, double z) {
    if (!(z > 0.0))
        throw domain_error("bessel_k: argument z must be positive, got z=" + std::to_string(z));
    nu = std::abs(nu); // K_{-nu} = K_nu

    // log of the integrand cosh(nu*u) exp(-z cosh u)
    auto log_g = [&](double u) { return log_cosh(nu * u) - z * std::cosh(u); };

    // peak location: d/du [nu*u - z*sinh(u)] = 0 at sinh(u) = nu/z (for nu>0)
    const double u_star = (nu > 0.0) ? std::asinh(nu / z) : 0.0;
    const double peak = std::max(log_g(0.0), log_g(u_star));
    if (peak > 700.0)
        throw numerical_error("bessel_k: result overflows double range (nu=" +
                              std::to_string(nu) + ", z=" + std::to_string(z) + ")");

    // cutoff where the integrand has fallen 50 e-folds below the peak
    double upper = std::max(1.0, u_star + 1.0);
    while (log_g(upper) > peak - 50.0) upper += 0.5;

    auto g_scaled = [&](double u) { return std::exp(log_g(u) - peak); };

    // trapezoid with step halving; geometric convergence for this integrand
    int n = 64;
    double h = upper / n;
    double sum = 0.5 * (g_scaled(0.0) + g_scaled(upper));
    for (int i = 1; i < n; ++i) sum += g_scaled(i * h);
    double estimate = sum * h;

    const double rel_tol = 1e-13;
    for (int round = 0; round < 14; ++round) {
        double mid_sum = 0.0;
        for (int i = 0; i < n; ++i) mid_sum += g_scaled((i + 0.5) * h);
        const double refined = 0.5 * estimate + 0.5 * h * mid_sum;
        n *= 2;
        h *= 0.5;
        const double change = std::abs(refined - estimate);
        estimate = refined;
        if (change <= rel_tol * std::abs(refined) && round >= 2)
            return std::exp(peak) * estimate;
    }
    throw numerical_error("bessel_k: quadrature did not converge for nu=" + std::to_string(nu) +
                          ", z=" + std::to_string(z) +
                          " (achieved relative tolerance above 1e-13)");
}

} // namespace singspec
