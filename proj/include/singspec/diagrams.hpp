#pragma once

#include "singspec/spectral_model.hpp"
#include "singspec/weights.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace singspec {

/// Exact rational value on __int128, for the diagram-formula identities.
struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(__int128 n, __int128 d);

    Rational operator+(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    bool operator==(const Rational& o) const;
    double to_double() const;
};

/// Perfect matching on leveled vertices with no intra-level edges.
/// Vertex (level j, slot i) is numbered offset[j] + i, level-major.
struct Diagram {
    std::vector<int> order;                       // (l_1, ..., l_p)
    std::vector<std::pair<int, int>> edges;       // vertex ids, first < second
    std::vector<int> vertex_level;                // id -> level index

    int levels() const { return static_cast<int>(order.size()); }
    /// q_Gamma(i): number of edges whose lower-level endpoint lies on level i.
    std::vector<int> level_indegrees() const;
};

enum class LevelRole { StrongDonor, Donor, Recipient };

/// All diagrams of the given order (empty when the total vertex count is odd).
/// Throws numerical_error beyond the combinatorial budget sum l_j <= 16.
std::vector<Diagram> enumerate_diagrams(const std::vector<int>& order);

/// True iff the levels split into pairs with every edge inside a pair.
bool classify_regular(const Diagram& diagram);

/// Donor / strong donor / recipient classification of every level.
std::vector<LevelRole> classify_levels(const Diagram& diagram);

/// Diagram formula: E prod_j H_{l_j}(xi_j) for a Gaussian vector with unit
/// variances and correlation matrix B (p x p, row-major).
double hermite_moment(const std::vector<int>& orders, const std::vector<double>& correlation);

/// Same sum in exact rational arithmetic.
Rational hermite_moment_exact(const std::vector<int>& orders,
                              const std::vector<Rational>& correlation);

/// Edge-count matrix representation of the fourth-moment diagrams of order
/// (j,j,j,j): e[i][k] edges between levels i<k, with N(e) wirings each.
struct EdgeCountMatrix {
    int e12, e13, e14, e23, e24, e34;
    double multiplicity; // N(e) = (j!)^4 / prod e_ik!
    bool regular;
};
std::vector<EdgeCountMatrix> fourth_moment_edge_matrices(int order);

/// E pi_{T,j}^4 for pi_{T,j} = sum_t r_{T,j}(t) H_j(xi(t)), r = R_T / sigma(j,z),
/// split into the regular part 3 sigma_T^4/sigma^4 and the nonregular rest.
struct FourthMomentBreakdown {
    double total = 0.0;
    double regular_part = 0.0;
    double nonregular_part = 0.0;
    double sigma_t_sq = 0.0;
    double sigma_sq = 0.0;
};

/// Exact diagram-route fourth moment (discrete time). Cycle-type diagrams run
/// in O(T^2 log T); denser supports (order >= 3) fall back to a direct sum and
/// require T <= generic_budget, else a numerical_error asks for the MC route.
FourthMomentBreakdown fourth_moment_statistic(const SpectralModel& model,
                                              const WeightSpec& weights, int order,
                                              const std::vector<double>& z, long long T,
                                              long long generic_budget = 160);

/// Squared contraction norm ||f_{j,T} (x)_p f_{j,T}||^2 for the kernel built
/// from R_T (no sigma normalization), via the 4-cycle trace identity.
double contraction_norm_sq(const SpectralModel& model, const WeightSpec& weights, int order,
                           int p, const std::vector<double>& z, long long T);

/// Low-level variant on explicit lag values b[tau] = B(tau), tau = 0..T-1,
/// and direction samples r[t-1] = R_T(t).
double contraction_norm_sq_lags(const std::vector<double>& covariance_lags,
                                const std::vector<double>& direction, int order, int p);

} // namespace singspec
