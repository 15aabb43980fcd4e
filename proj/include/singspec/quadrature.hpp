#pragma once

#include "singspec/errors.hpp"

#include <cmath>
#include <cstdint>
#include <functional>

namespace singspec {

namespace detail {

struct QuadBudget {
    std::int64_t remaining;
};

template <typename F>
double simpson_rec(const F& f, double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth, QuadBudget& budget) {
    if ((budget.remaining -= 2) < 0)
        throw numerical_error("adaptive_simpson: evaluation budget exhausted; the integrand is "
                              "rougher than the requested tolerance allows");
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, budget) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, budget);
}

} // namespace detail

/// Adaptive Simpson quadrature on [a,b] with absolute tolerance tol.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 44,
                        std::int64_t max_evals = 4000000) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    detail::QuadBudget budget{max_evals};
    return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth, budget);
}

/// Integral over [a, +inf) of a decaying integrand: maps t = a + u/(1-u)
/// onto u in [0,1) and integrates adaptively.
template <typename F>
double integrate_semi_infinite(const F& f, double a, double tol) {
    auto g = [&](double u) {
        if (u >= 1.0) return 0.0;
        const double s = 1.0 - u;
        const double t = a + u / s;
        return f(t) / (s * s);
    };
    return adaptive_simpson(g, 0.0, 1.0 - 1e-12, tol);
}

} // namespace singspec
