#pragma once

#include "singspec/gaussian_sim.hpp"
#include "singspec/hermite.hpp"
#include "singspec/limit_covariance.hpp"
#include "singspec/spectral_model.hpp"
#include "singspec/weights.hpp"

#include <cstdint>
#include <vector>

namespace singspec {

/// Normality diagnostics for a replicate sample: Kolmogorov-Smirnov distance
/// against the normal with matched mean/variance, moment shape statistics,
/// and the standardized fourth moment with a jackknife standard error.
struct NormalityStats {
    std::size_t n = 0;
    double ks_distance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double standardized_fourth = 0.0; // m4 / m2^2
    double fourth_se = 0.0;           // jackknife
};

NormalityStats normality_tests(const std::vector<double>& samples);

struct ExperimentConfig {
    SpectralModel model;
    WeightSpec weights;
    PointwiseFn psi;
    int psi_truncation = 40;
    std::vector<long long> horizons; // increasing, typically dyadic
    int replicates = 1000;           // >= 100 for any statistical verdict
    std::uint64_t seed = 0;

    bool test_normality = true;
    bool test_covariance = true;
    bool test_fourth_moment = false;
    bool test_contraction = false;
    bool tail_diagnostics = false;

    std::vector<int> fourth_moment_orders;         // default: {Hermite rank}
    std::vector<std::vector<double>> z_directions; // default: canonical basis + all-ones
    bool conjecture_mode = false;
    bool strict = false;
    int threads = 0; // 0 -> hardware concurrency

    SimulationPlan::Method method = SimulationPlan::Method::CirculantEmbedding;
    int padding_factor = 4;
    double embed_tolerance = 1e-8;

    // verdict thresholds; engineering calibrations, not guarantees
    double ks_threshold = 0.02;
    double skew_threshold = 0.1;
    double kurtosis_threshold = 0.2;
    double cov_rel_threshold = 0.10;
    double fourth_moment_gap = 0.15;
};

struct MCReport {
    AssumptionReport assumptions;
    HermiteExpansion expansion;
    LimitCovarianceResult xi;

    struct DirectionResult {
        std::vector<double> z;
        NormalityStats stats;
        bool normal_ok = false;
    };
    struct FourthMomentResult {
        int order = 0;
        double estimate = 0.0; // self-standardized m4/m2^2 of pi_{T,j}
        double se = 0.0;       // jackknife
        double raw_fourth = 0.0; // E pi^4 with the sigma(j,z)-normalized kernel
        double raw_se = 0.0;
    };
    struct HorizonResult {
        long long T = 0;
        std::vector<double> mean;    // q
        std::vector<double> mean_se; // q
        std::vector<double> covariance; // q*q row-major
        double cov_max_rel_gap = 0.0;   // vs Xi, max-entry relative
        std::vector<DirectionResult> directions;
        std::vector<FourthMomentResult> fourth;
        double clipped_mass = 0.0;
        double tail_discrepancy = 0.0; // max |tau - tau(d)| when diagnostics are on
        double tail_bound = 0.0;       // beta(d)
    };
    std::vector<HorizonResult> horizons;

    struct ContractionRow {
        int order = 0;
        int p = 0;
        double slope = 0.0; // fitted log-log slope of the squared norm
        std::vector<double> norms_sq;
    };
    std::vector<ContractionRow> contraction;

    bool mean_zero_ok = true;
    bool covariance_ok = true;
    bool covariance_trend_ok = true;
    bool normality_ok = true;
    bool fourth_moment_ok = true;
    bool contraction_decay_ok = true;
    bool passed = true;

    double runtime_seconds = 0.0; // metadata, not part of determinism
};

/// Simulate R replicates per horizon, form zeta_T, and compare against the
/// asymptotic law: empirical covariance vs Xi, per-direction normality,
/// fourth-moment trend, optional contraction decay. Deterministic given the
/// config (including seed), independent of thread count.
MCReport run_experiment(const ExperimentConfig& config);

} // namespace singspec
