#pragma once

#include "singspec/hermite.hpp"
#include "singspec/spectral_model.hpp"
#include "singspec/weights.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace singspec {

struct SimulationPlan {
    SpectralModel model;
    long long n_points = 0; // N >= 2
    double step = 1.0;      // Delta; forced to 1 in discrete time
    std::uint64_t seed = 0;
    enum class Method { CirculantEmbedding, CholeskyExact } method = Method::CirculantEmbedding;
    int padding_factor = 4;        // circulant size >= padding * N (next power of two)
    double embed_tolerance = 1e-8; // admissible clipped eigenvalue mass fraction
};

/// One realization of xi on the grid. values[i] sits at time i+1 (discrete)
/// or i*step (continuous).
struct SamplePath {
    std::vector<double> values;
    long long replicate_id = 0;
    TimeDomain domain = TimeDomain::Discrete;
    double step = 1.0;

    double time_of(std::size_t i) const {
        return domain == TimeDomain::Discrete ? static_cast<double>(i + 1)
                                              : static_cast<double>(i) * step;
    }
    double max_time() const { return values.empty() ? 0.0 : time_of(values.size() - 1); }
};

/// Prepares the factorization once (circulant eigenvalues or the Cholesky
/// factor) and then draws replicates; simulate() is safe to call concurrently.
class Simulator {
public:
    explicit Simulator(SimulationPlan plan);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    SamplePath simulate(long long replicate_id) const;
    const SimulationPlan& plan() const;
    /// fraction of eigenvalue mass clipped by the embedding (0 for Cholesky)
    double clipped_mass() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around Simulator.
SamplePath simulate(const SimulationPlan& plan, long long replicate_id);

/// zeta_T components W_iT^{-1} int_0^T w_i(t) psi(xi(t)) nu(dt): exact sums in
/// discrete time, trapezoid on the path grid in continuous time.
std::vector<double> weighted_functional(const SamplePath& path, const PointwiseFn& psi,
                                        const WeightSpec& weights, double T);

/// Same, also reporting a step-halving error estimate per component
/// (identically zero for discrete time).
std::vector<double> weighted_functional_with_error(const SamplePath& path, const PointwiseFn& psi,
                                                   const WeightSpec& weights, double T,
                                                   std::vector<double>& quadrature_error);

} // namespace singspec
