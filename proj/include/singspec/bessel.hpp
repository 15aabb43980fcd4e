#pragma once

namespace singspec {

/// Modified Bessel function of the third kind K_nu(z), z > 0.
///
/// Evaluated from the integral representation
///   K_nu(z) = 1/2 int_0^inf s^(nu-1) exp(-(s + 1/s) z / 2) ds,
/// after the substitution s = e^u, which turns the integrand into
/// cosh(nu*u) exp(-z cosh u) with double-exponential decay. The trapezoid
/// rule with step halving converges geometrically on that form.
///
/// Relative accuracy ~1e-12. Symmetric in nu: K_{-nu}(z) = K_nu(z).
/// Throws domain_error for z <= 0, numerical_error if the quadrature fails
/// to converge or the result would overflow.
double bessel_k(double nu, double z);

} // namespace singspec
