#pragma once

#include "singspec/hermite.hpp"
#include "singspec/spectral_model.hpp"

#include <complex>
#include <vector>

namespace singspec {

using cdouble = std::complex<double>;

/// One weight function w_i(t) = t^degree * sum_p Re-closed( c_p e^{i w_p t} ).
/// The exponential profile drives both closed-form finite Fourier transforms
/// and the closed-form limiting measure.
struct WeightComponent {
    enum class Kind { Constant, Cosine, Sine, PowerCosine, TrigGradient, Tabulated };
    Kind kind = Kind::Constant;
    double degree = 0.0; // polynomial factor t^degree

    struct Exponential {
        cdouble amplitude;
        double freq; // signed; conjugate partners appear explicitly
    };
    std::vector<Exponential> profile; // empty for Tabulated

    std::vector<double> table_t, table_v; // Tabulated only

    double eval(double t) const;
    bool tabulated() const { return kind == Kind::Tabulated; }
    /// degree is an integer small enough for the closed-form sums
    bool closed_form_degree() const;
};

struct TrigGradientParams {
    double A;
    double B;
    double phi; // harmonic frequency, must be > 0
};

/// q-vector of weight functions plus the time domain they live on.
class WeightSpec {
public:
    WeightSpec() = default;
    explicit WeightSpec(TimeDomain domain) : domain_(domain) {}

    static WeightSpec constant(TimeDomain domain = TimeDomain::Discrete);
    static WeightSpec cosine(double delta, double phase = 0.0,
                             TimeDomain domain = TimeDomain::Discrete);
    static WeightSpec sine(double delta, TimeDomain domain = TimeDomain::Discrete);
    static WeightSpec power_cosine(double beta, double delta, double phase = 0.0,
                                   TimeDomain domain = TimeDomain::Discrete);
    /// gradient of sum_k (A_k cos(phi_k t) + B_k sin(phi_k t)): q = 3N components
    static WeightSpec trig_regression_gradient(const std::vector<TrigGradientParams>& params,
                                               TimeDomain domain = TimeDomain::Discrete);
    static WeightSpec tabulated(std::vector<double> ts, std::vector<double> vs,
                                TimeDomain domain = TimeDomain::Discrete);

    WeightSpec& add(WeightComponent component);

    int q() const { return static_cast<int>(components_.size()); }
    TimeDomain time_domain() const { return domain_; }
    bool discrete() const { return domain_ == TimeDomain::Discrete; }
    const WeightComponent& component(int i) const;
    const std::vector<WeightComponent>& components() const { return components_; }
    bool has_closed_limit() const;

    double eval(int i, double t) const { return component(i).eval(t); }

private:
    TimeDomain domain_ = TimeDomain::Discrete;
    std::vector<WeightComponent> components_;
};

/// W_iT = sqrt( int_0^T w_i^2 nu(dt) ); throws on degenerate (zero) norms.
double weight_norm(const WeightSpec& weights, int i, double T);

/// Finite Fourier transform w_T^i(lambda) = int_0^T e^{i t lambda} w_i(t) nu(dt).
cdouble weight_transform(const WeightSpec& weights, int i, double T, double lambda);

/// Cellwise-integrated matrix measures mu_T^{jl}. Discrete time uses the exact
/// lag-correlation identity (no quadrature error beyond roundoff); continuous
/// time integrates the closed-form transforms adaptively over a truncated
/// frequency range and reports the left-out diagonal tail mass.
struct MatrixMeasureGrid {
    std::vector<double> edges; // size cells+1, increasing
    int q = 0;
    double horizon = 0.0;
    bool torus = true;
    std::vector<cdouble> cell_entries; // cells * q * q, row-major within a cell
    double max_diagonal_tail = 0.0;    // continuous-time truncation tail mass

    std::size_t cells() const { return edges.empty() ? 0 : edges.size() - 1; }
    cdouble entry(std::size_t cell, int j, int l) const {
        return cell_entries[(cell * q + j) * q + l];
    }
    /// sum over cells of entry(., j, l)
    cdouble total(int j, int l) const;
};

MatrixMeasureGrid matrix_measure(const WeightSpec& weights, double T,
                                 const std::vector<double>& edges);

/// Atomic limiting measure mu with q x q Hermitian matrix weights per atom.
struct AtomicMeasure {
    struct Atom {
        double freq;
        std::vector<cdouble> matrix; // q*q row-major
    };
    int q = 0;
    std::vector<Atom> atoms;

    cdouble entry(const Atom& a, int j, int l) const { return a.matrix[j * q + l]; }
};

/// Closed-form weak limit of mu_T for the built-in families; throws
/// domain_error for tabulated weights (no closed form is available).
AtomicMeasure limit_measure(const WeightSpec& weights);

/// int f(lambda) mu(dlambda) over an atomic measure. Throws assumption_error
/// if an atom sits on (or within tolerance of) a spectral singularity: the
/// overlapping case Xi_noise cap Xi_regr != 0 is out of scope.
std::vector<cdouble> admissibility_integral(const SpectralModel& model,
                                            const AtomicMeasure& measure);

/// int f(lambda) mu_T(dlambda) approximated cell-by-cell on a measure grid;
/// cells containing a singular point use the integral mean of f.
std::vector<cdouble> admissibility_integral(const SpectralModel& model,
                                            const MatrixMeasureGrid& grid);

/// Exact finite-T integral int f d mu_T for discrete time through the lag
/// identity sum_tau c_jl(tau) B(tau) / (2 pi W_j W_l).
std::vector<cdouble> admissibility_integral_finite_t(const SpectralModel& model,
                                                     const WeightSpec& weights, long long T);

/// Measured (B2)/(B3) ratios across horizons with boundedness verdicts.
struct ConditionReport {
    struct B3Row {
        int component;
        std::vector<double> ratios; // one per horizon
        double constant;            // inferred k_i = max ratio
        bool bounded;
    };
    struct B2Row {
        int component;
        double singularity; // fold representative of the kappa_j neighborhood
        std::vector<double> ratios;
        double constant; // inferred k_ij
        bool bounded;
    };
    std::vector<double> horizons;
    std::vector<B3Row> b3;
    std::vector<B2Row> b2;
    bool all_bounded = true;
};

ConditionReport check_b2_b3(const WeightSpec& weights, const SpectralModel& model,
                            const std::vector<double>& horizons);

/// beta(d) of the truncation lemma: ||z||^2 ||k~||^2 int B^2 nu(dt) tail(d),
/// with k~ the measured (B3) constants.
double truncation_tail_bound(const HermiteExpansion& expansion, const WeightSpec& weights,
                             const SpectralModel& model, const std::vector<double>& z, int d);

/// int B^2(t) nu(dt) over the whole line / lattice.
double covariance_square_integral(const SpectralModel& model);

} // namespace singspec
