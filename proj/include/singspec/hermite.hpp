#pragma once

#include "singspec/errors.hpp"

#include <functional>
#include <string>
#include <vector>

namespace singspec {

/// Probabilists' Hermite polynomial H_k(x) via the three-term recurrence.
double hermite_poly(int k, double x);

/// H_k(x) / sqrt(k!), numerically stable at large k.
double hermite_poly_normalized(int k, double x);

/// Pointwise transformation psi with metadata the coefficient quadrature needs.
struct PointwiseFn {
    std::function<double(double)> fn;
    std::vector<double> discontinuities; // jump locations, if any
    bool force_adaptive = false;         // tabulated / kinked inputs
    std::string name = "psi";

    double operator()(double x) const { return fn(x); }
};

PointwiseFn psi_hermite(int k);
PointwiseFn psi_sign();
PointwiseFn psi_abs_centered();               // |x| - sqrt(2/pi)
PointwiseFn psi_exp_centered(double s = 1.0); // e^{s x} - e^{s^2/2}
/// Polynomial in the monomial basis: coeffs[i] * x^i.
PointwiseFn psi_polynomial(std::vector<double> monomial_coeffs, std::string name = "poly");
/// Piecewise-linear table; values are held constant outside the grid.
PointwiseFn psi_tabulated(std::vector<double> xs, std::vector<double> ys);

struct HermiteExpansion {
    std::vector<double> coefficients; // C_0 .. C_d
    int rank = 1;                     // m: first k >= 1 with C_k significantly nonzero
    int truncation = 0;               // d
    double second_moment = 0.0;       // E psi^2(xi(0))
    bool centered = false;            // C_0 was removed on request

    /// sum_{k=1..d} C_k^2 / k!
    double parseval_partial(int d) const;
    /// max(0, second_moment - parseval_partial(d)); throws numerical_error if
    /// the estimate is negative beyond tolerance (a quadrature failure signal).
    double coefficient_tail(int d) const;
};

/// Hermite coefficients C_k = int psi(x) H_k(x) phi(x) dx for k = 0..d.
///
/// Smooth inputs go through Gauss-Hermite quadrature (200 nodes, checked
/// against 400); inputs with declared discontinuities or tabulated data use
/// split-domain adaptive quadrature. C_0 must vanish unless auto_center is set.
HermiteExpansion hermite_coefficients(const PointwiseFn& psi, int d, bool auto_center = false,
                                      double tol_rank = 1e-9);

/// Gauss-Hermite rule for the physicists' weight e^{-y^2} (Golub-Welsch).
void gauss_hermite_nodes(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// beta(d) tail bound ingredient: ||z||^2 ||k~||^2 int B^2 nu(dt) * tail(d).
/// The caller supplies the weight/covariance constants; see the weights module
/// for the fully assembled version.
double truncation_tail_bound_scalar(const HermiteExpansion& expansion, int d, double z_norm_sq,
                                    double k_norm_sq, double b2_integral);

} // namespace singspec
