#pragma once

#include "singspec/errors.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace singspec {

enum class TimeDomain { Continuous, Discrete };

/// One component of the covariance mixture:
///   amplitude * cos(kappa*t) / (1+t^2)^(alpha/2).
struct SpectralComponent {
    double amplitude = 1.0; // A_j >= 0
    double alpha = 0.7;     // in (0,1)
    double kappa = 0.0;     // >= 0, strictly increasing across components
};

/// Stationary covariance model B(t) = sum_j A_j cos(kappa_j t)/(1+t^2)^(alpha_j/2)
/// with sum_j A_j = 1, together with its spectral density. In discrete time the
/// density lives on (-pi, pi] and is the 2*pi-periodic fold of the continuous one.
class SpectralModel {
public:
    SpectralModel(std::vector<SpectralComponent> components, TimeDomain domain,
                  int fold_terms = 64);

    const std::vector<SpectralComponent>& components() const { return components_; }
    TimeDomain time_domain() const { return time_domain_; }
    int fold_terms() const { return fold_terms_; }

    /// alpha = min_j alpha_j, the exponent entering the rank conditions.
    double min_alpha() const { return min_alpha_; }

    bool discrete() const { return time_domain_ == TimeDomain::Discrete; }

private:
    std::vector<SpectralComponent> components_;
    TimeDomain time_domain_;
    int fold_terms_;
    double min_alpha_;
};

/// Sampled density (f or one of its convolutions) on a frequency grid.
struct DensityGrid {
    enum class Domain { RealLine, Torus };
    std::vector<double> frequencies; // strictly increasing
    std::vector<double> values;      // nonnegative
    Domain domain = Domain::Torus;
};

/// Power-law singularity descriptor: each term contributes
/// coeff * |lambda - location|^(alpha - 1) near the singular point.
struct SingularTerm {
    double alpha;
    double coeff;
};
struct SingularPoint {
    double location; // nonnegative representative; the mirror at -location is implied
    std::vector<SingularTerm> terms;
};

/// One term of the exact expansion B(t)^j = sum_m coeff * cos(freq*t) * (1+t^2)^(-beta/2).
struct CosPowerTerm {
    double coeff;
    double freq; // >= 0
    double beta; // sum of j alphas
};

struct AssumptionReport {
    double alpha_min = 0.0;
    int hermite_rank = 1;
    bool a4_i = false;          // rank 1 and alpha > 1/2
    bool a4_ii = false;         // alpha * m > 1
    bool passed = false;        // a4_i || a4_ii, or conjecture regime admitted
    bool conjecture_mode = false;
    bool conjecture_regime = false; // admitted only because conjecture_mode was on
    std::vector<std::string> lines; // human-readable report
};

/// B(t); even in t, B(0) = 1.
double covariance(const SpectralModel& model, double t);

/// Spectral density f(lambda). Continuous: lambda in R. Discrete: lambda in
/// (-pi, pi], evaluated as the truncated symmetric fold of the continuous
/// density. Throws domain_error at (or numerically on top of) a singular point.
double spectral_density(const SpectralModel& model, double lambda);

/// Singular points of f with their power-law coefficients. Discrete models
/// report fold representatives in [0, pi].
std::vector<SingularPoint> density_singular_points(const SpectralModel& model);

/// Truncated singular expansion of f near the component-j singularity closest
/// to lambda: exact smooth background plus coeff*|u|^(alpha-1)*(1 - h(|u|)).
/// Throws domain_error if lambda is farther than `radius` from that
/// singularity (radius < 0 selects the default neighborhood).
double density_asymptote(const SpectralModel& model, std::size_t component_index, double lambda,
                         double radius = -1.0);

/// Exact finite expansion of B(t)^j into cosine-power terms.
std::vector<CosPowerTerm> covariance_power_terms(const SpectralModel& model, int order);

/// j-th self-convolution of f at one frequency, via the transform of B^j
/// (each cosine-power term maps to a Bessel-K density). For discrete models
/// the continuous result is folded onto the torus.
double convolution_density_at(const SpectralModel& model, int order, double lambda,
                              bool conjecture_mode = false);

/// Same as convolution_density_at, sampled over a caller-provided grid.
DensityGrid convolution_density(const SpectralModel& model, int order,
                                const std::vector<double>& frequencies,
                                bool conjecture_mode = false);

/// Check (A4): (i) rank 1 with alpha > 1/2, or (ii) alpha*m > 1. With
/// conjecture_mode, any alpha in (0,1) is admitted and flagged.
AssumptionReport validate_assumptions(const SpectralModel& model, int hermite_rank,
                                      bool conjecture_mode = false);

/// Integral of f over its full frequency domain via singularity-splitting
/// quadrature; equals B(0) = 1 up to tolerance.
double integrate_density(const SpectralModel& model, double tol = 1e-9);

/// Integral of f over [lo, hi] (principal domain coordinates for discrete
/// models), with power-law heads handled analytically.
double integrate_density_over(const SpectralModel& model, double lo, double hi,
                              double tol = 1e-9);

/// Integral of a smooth callable against f over the full domain, splitting
/// out each power-law singularity analytically. `smooth` must be continuous
/// at the singular points.
double integrate_against_density(const SpectralModel& model,
                                 const std::function<double(double)>& smooth, double tol = 1e-9);

namespace detail {
/// Normalizing constant c1(alpha) of the Bessel-K density form.
double c1_constant(double alpha);
/// Singularity constant c2(alpha) = 1 / (2 Gamma(alpha) cos(alpha pi / 2)).
double c2_constant(double alpha);
/// (1/2pi) * Fourier transform of (1+t^2)^(-beta/2) at frequency u, i.e.
/// c1(beta) K_{(beta-1)/2}(|u|) |u|^((beta-1)/2); finite at u=0 iff beta > 1.
double power_law_density(double beta, double u);
/// Wrap a frequency into (-pi, pi].
double wrap_to_torus(double lambda);
} // namespace detail

} // namespace singspec
