#pragma once

#include "singspec/hermite.hpp"
#include "singspec/spectral_model.hpp"
#include "singspec/weights.hpp"

#include <vector>

namespace singspec {

enum class SigmaRoute { TimeDomain, FrequencyDomain };

/// R_T(t) = sum_i z_i w_i(t) / W_iT sampled at t = 1..T (discrete) or on a
/// uniform grid of `grid_points` points over [0, T] (continuous).
std::vector<double> weighted_direction(const WeightSpec& weights, const std::vector<double>& z,
                                       double T, int grid_points = 4096);

/// sigma_T^2(j, z) by either route of the variance identity:
/// TimeDomain evaluates j! sum_{t,s} B^j(t-s) R_T(t) R_T(s) through lag
/// correlations; FrequencyDomain evaluates j! int f^{*(j)}(lambda)
/// |R_T-hat(lambda)|^2 dlambda with the Bessel-form convolution density.
double sigma_t_squared(const SpectralModel& model, const WeightSpec& weights, int order,
                       const std::vector<double>& z, double T, SigmaRoute route);

/// Limit variance sigma^2(j, z) = 2 pi j! int f^{*(j)} m_z(dlambda) against
/// the closed-form atomic limit measure.
double sigma_limit_squared(const SpectralModel& model, const WeightSpec& weights, int order,
                           const std::vector<double>& z);

struct LimitCovarianceResult {
    int q = 0;
    std::vector<double> xi; // q*q row-major, symmetric
    struct OrderTerm {
        int order;
        std::vector<double> matrix; // 2 pi C_j^2/j! int f^{*(j)} dmu
    };
    std::vector<OrderTerm> per_order;
    int truncation = 0;           // d actually used
    double tail_estimate = 0.0;   // bound on what the closure may still miss
    std::vector<double> tail_closure; // flat-spectrum closure matrix (discrete models)
    bool under_truncated = false; // tail estimate exceeded 10% of trace(Xi)

    double entry(int j, int l) const { return xi[static_cast<std::size_t>(j) * q + l]; }
    double quadratic_form(const std::vector<double>& z) const;
};

/// Xi = 2 pi sum_{j >= m} C_j^2/j! int f^{*(j)} dmu, truncated adaptively at
/// the smallest d whose tail estimate drops below tail_fraction of the running
/// trace (hard cap d_cap). For discrete models the dropped orders are closed
/// with the flat-spectrum approximation 2 pi f^{*(j)} ~ 1, which is accurate
/// to sup_t |B(t)|^(d+1); the residual bound is reported as tail_estimate.
/// strict elevates an under-truncation (tail > 10% of trace) to an error.
LimitCovarianceResult limit_covariance(const SpectralModel& model, const WeightSpec& weights,
                                       const HermiteExpansion& expansion,
                                       double tail_fraction = 0.01, int d_cap = 60,
                                       bool strict = false);

struct ConditionCReport {
    struct Row {
        int order;
        double min_eigenvalue;
        bool positive_definite;
    };
    std::vector<Row> rows;
    bool all_positive = true;
};

/// Condition (C): smallest eigenvalue of int f^{*(j)} dmu per requested order.
ConditionCReport check_condition_c(const SpectralModel& model, const WeightSpec& weights,
                                   const std::vector<int>& orders, double tol = 1e-10);

/// int f^{*(j)} dmu as a real symmetric matrix (imaginary parts cancel across
/// mirrored atoms for real weights).
std::vector<double> convolution_measure_integral(const SpectralModel& model,
                                                 const WeightSpec& weights, int order);

} // namespace singspec
