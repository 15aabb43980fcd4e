#include "singspec/hermite.hpp"

#include "singspec/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace singspec {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrtPi = 1.77245385090551602730;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
} // namespace

double hermite_poly(int k, double x) {
    if (k < 0) throw domain_error("hermite_poly: order must be nonnegative");
    if (k == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int i = 1; i < k; ++i) {
        const double next = x * cur - i * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_poly_normalized(int k, double x) {
    if (k < 0) throw domain_error("hermite_poly_normalized: order must be nonnegative");
    if (k == 0) return 1.0;
    double prev = 1.0, cur = x; // H_1 / sqrt(1!)
    for (int i = 1; i < k; ++i) {
        // Htilde_{i+1} = (x Htilde_i - sqrt(i) Htilde_{i-1}) / sqrt(i+1)
        const double next = (x * cur - std::sqrt(static_cast<double>(i)) * prev) /
                            std::sqrt(static_cast<double>(i + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

PointwiseFn psi_hermite(int k) {
    return {[k](double x) { return hermite_poly(k, x); }, {}, false, "H_" + std::to_string(k)};
}

PointwiseFn psi_sign() {
    return {[](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }, {0.0}, false, "sign"};
}

PointwiseFn psi_abs_centered() {
    const double mean = std::sqrt(2.0 / 3.14159265358979323846);
    // |x| is continuous with a kink at 0; adaptive quadrature handles it best
    return {[mean](double x) { return std::abs(x) - mean; }, {}, true, "abs_centered"};
}

PointwiseFn psi_exp_centered(double s) {
    const double mean = std::exp(0.5 * s * s);
    return {[s, mean](double x) { return std::exp(s * x) - mean; }, {}, false, "exp_centered"};
}

PointwiseFn psi_polynomial(std::vector<double> monomial_coeffs, std::string name) {
    return {[c = std::move(monomial_coeffs)](double x) {
                double acc = 0.0;
                for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
                return acc;
            },
            {},
            false,
            std::move(name)};
}

PointwiseFn psi_tabulated(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw domain_error("psi_tabulated: need matching grids with at least two points");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw domain_error("psi_tabulated: grid must be increasing");
    return {[xs = std::move(xs), ys = std::move(ys)](double x) {
                if (x <= xs.front()) return ys.front();
                if (x >= xs.back()) return ys.back();
                const auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t i = static_cast<std::size_t>(it - xs.begin());
                const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                return (1.0 - w) * ys[i - 1] + w * ys[i];
            },
            {},
            true,
            "tabulated"};
}

void gauss_hermite_nodes(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw domain_error("gauss_hermite_nodes: need n >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = std::sqrt(0.5 * i);
        jacobi(i, i - 1) = b;
        jacobi(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    nodes.clear();
    weights.clear();
    nodes.reserve(n);
    weights.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        // beyond this the computed first component is dominated by eigensolver
        // noise, and the garbage weight would be multiplied into very large
        // integrand values at the far nodes
        if (std::abs(v0) < 1e-13) continue;
        nodes.push_back(solver.eigenvalues()(i));
        weights.push_back(kSqrtPi * v0 * v0);
    }
}

namespace {

// C_k / sqrt(k!) for k = 0..d through Gauss-Hermite quadrature with n nodes
std::vector<double> coeffs_gauss_hermite(const PointwiseFn& psi, int d, int n) {
    std::vector<double> y, w;
    gauss_hermite_nodes(n, y, w);
    std::vector<double> c(d + 1, 0.0);
    std::vector<double> h(d + 1);
    const int kept = static_cast<int>(y.size());
    for (int i = 0; i < kept; ++i) {
        const double x = kSqrt2 * y[i];
        const double p = psi(x);
        // normalized Hermite recurrence along the node
        h[0] = 1.0;
        if (d >= 1) h[1] = x;
        for (int k = 1; k < d; ++k)
            h[k + 1] = (x * h[k] - std::sqrt(static_cast<double>(k)) * h[k - 1]) /
                       std::sqrt(static_cast<double>(k + 1));
        const double wi = w[i] / kSqrtPi;
        for (int k = 0; k <= d; ++k) c[k] += wi * p * h[k];
    }
    return c;
}

// window where psi(x) H~_k(x) phi(x) has collected all its mass; the
// normalized-Hermite envelope is exp(x^2/4), so the criterion compares
// |psi(x)| exp(-x^2/4) at the boundary against its running peak
double integration_window(const PointwiseFn& psi) {
    auto envelope = [&](double x) {
        return std::max(std::abs(psi(x)), std::abs(psi(-x))) * std::exp(-0.25 * x * x);
    };
    double peak = 1e-300;
    for (double x = 0.0; x <= 12.0; x += 0.5) peak = std::max(peak, envelope(x));
    double L = 12.0;
    while (L < 40.0) {
        const double env = envelope(L);
        peak = std::max(peak, env);
        if (env < 1e-14 * peak) break;
        L += 2.0;
    }
    return L;
}

bool grows_too_fast_for_gauss_hermite(const PointwiseFn& psi) {
    // relative to the scale psi carries near the bulk of the Gaussian mass
    double scale = 1e-300;
    for (double x = 0.0; x <= 3.0; x += 0.25)
        scale = std::max({scale, std::abs(psi(x)), std::abs(psi(-x))});
    const double x = 10.0;
    const double env = std::max(std::abs(psi(x)), std::abs(psi(-x))) * std::exp(-0.25 * x * x);
    return env > 1e-11 * scale;
}

// split-domain adaptive route for discontinuous, tabulated or fast-growing psi
std::vector<double> coeffs_adaptive(const PointwiseFn& psi, int d, double tol) {
    const double L = integration_window(psi);
    std::vector<double> cuts{-L, L};
    for (double b : psi.discontinuities)
        if (b > -L && b < L) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    std::vector<double> c(d + 1, 0.0);
    for (int k = 0; k <= d; ++k) {
        auto integrand = [&](double x) { return psi(x) * hermite_poly_normalized(k, x) * phi(x); };
        double acc = 0.0;
        for (std::size_t i = 1; i < cuts.size(); ++i)
            acc += adaptive_simpson(integrand, cuts[i - 1], cuts[i], tol);
        c[k] = acc;
    }
    return c;
}

double second_moment_of(const PointwiseFn& psi, bool adaptive_route) {
    if (adaptive_route) {
        const double L = integration_window(psi);
        std::vector<double> cuts{-L, L};
        for (double b : psi.discontinuities)
            if (b > -L && b < L) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        double acc = 0.0;
        for (std::size_t i = 1; i < cuts.size(); ++i)
            acc += adaptive_simpson(
                [&](double x) {
                    const double v = psi(x);
                    return v * v * phi(x);
                },
                cuts[i - 1], cuts[i], 1e-12);
        return acc;
    }
    std::vector<double> y, w;
    gauss_hermite_nodes(400, y, w);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = psi(kSqrt2 * y[i]);
        acc += w[i] / kSqrtPi * v * v;
    }
    return acc;
}

} // namespace

HermiteExpansion hermite_coefficients(const PointwiseFn& psi, int d, bool auto_center,
                                      double tol_rank) {
    if (d < 1) throw domain_error("hermite_coefficients: truncation d must be >= 1");

    // Gauss-Hermite in double precision is only trustworthy while the
    // integrand mass stays inside the rule's honest-weight region: that rules
    // out exponential-type growth, rough inputs, and high truncation orders
    // (H~_d carries mass out to |x| ~ 2 sqrt(d)).
    const bool adaptive_route = psi.force_adaptive || !psi.discontinuities.empty() ||
                                d > 24 || grows_too_fast_for_gauss_hermite(psi);
    std::vector<double> normalized; // C_k / sqrt(k!)
    if (adaptive_route) {
        normalized = coeffs_adaptive(psi, d, 1e-12);
    } else {
        normalized = coeffs_gauss_hermite(psi, d, 200);
        const auto check = coeffs_gauss_hermite(psi, d, 400);
        double worst = 0.0;
        for (int k = 0; k <= d; ++k) worst = std::max(worst, std::abs(check[k] - normalized[k]));
        normalized = check;
        if (worst > 1e-7)
            throw numerical_error(
                "hermite_coefficients: Gauss-Hermite refinement moved a coefficient by " +
                std::to_string(worst) +
                "; declare the discontinuities of psi or tabulate it instead");
    }

    HermiteExpansion exp;
    exp.truncation = d;
    exp.second_moment = second_moment_of(psi, adaptive_route);
    if (!(exp.second_moment > 0.0) || !std::isfinite(exp.second_moment))
        throw domain_error("hermite_coefficients: psi is not square-integrable against the "
                           "Gaussian weight (or is the zero function)");

    const double sm_scale = std::sqrt(exp.second_moment);
    if (std::abs(normalized[0]) > 1e-8 * std::max(1.0, sm_scale)) {
        if (!auto_center)
            throw assumption_error("hermite_coefficients: C_0 = E psi = " +
                                   std::to_string(normalized[0]) +
                                   " violates the zero-mean requirement; pass auto_center to "
                                   "subtract it explicitly");
        exp.second_moment -= normalized[0] * normalized[0];
        exp.centered = true;
    }

    exp.coefficients.resize(d + 1);
    exp.coefficients[0] = 0.0;
    double factorial_sqrt = 1.0;
    int rank = 0;
    for (int k = 1; k <= d; ++k) {
        factorial_sqrt *= std::sqrt(static_cast<double>(k));
        exp.coefficients[k] = normalized[k] * factorial_sqrt;
        if (rank == 0 && std::abs(normalized[k]) > tol_rank * sm_scale) rank = k;
    }
    if (rank == 0)
        throw domain_error("hermite_coefficients: all coefficients up to d=" + std::to_string(d) +
                           " vanish; psi is zero or d is too small for its Hermite rank");
    exp.rank = rank;
    return exp;
}

double HermiteExpansion::parseval_partial(int d) const {
    d = std::min<int>(d, static_cast<int>(coefficients.size()) - 1);
    double acc = 0.0;
    double factorial = 1.0;
    for (int k = 1; k <= d; ++k) {
        factorial *= k;
        acc += coefficients[k] * coefficients[k] / factorial;
    }
    return acc;
}

double HermiteExpansion::coefficient_tail(int d) const {
    const double tail = second_moment - parseval_partial(d);
    if (tail < -1e-8 * std::max(1.0, second_moment))
        throw numerical_error("HermiteExpansion: Parseval partial sum exceeds E psi^2 by " +
                              std::to_string(-tail) + "; coefficient quadrature is inconsistent");
    return std::max(tail, 0.0);
}

double truncation_tail_bound_scalar(const HermiteExpansion& expansion, int d, double z_norm_sq,
                                    double k_norm_sq, double b2_integral) {
    return z_norm_sq * k_norm_sq * b2_integral * expansion.coefficient_tail(d);
}

} // namespace singspec
