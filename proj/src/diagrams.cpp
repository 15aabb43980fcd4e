#include "singspec/diagrams.hpp"

#include "singspec/fft.hpp"
#include "singspec/limit_covariance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace singspec {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const __int128 t = a % b;
        a = b;
        b = t;
    }
    return a == 0 ? 1 : a;
}

} // namespace

Rational::Rational(__int128 n, __int128 d) : num(n), den(d) {
    if (den == 0) throw domain_error("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const __int128 g = gcd128(num, den);
    num /= g;
    den /= g;
}

Rational Rational::operator+(const Rational& o) const {
    return Rational(num * o.den + o.num * den, den * o.den);
}

Rational Rational::operator*(const Rational& o) const {
    return Rational(num * o.num, den * o.den);
}

bool Rational::operator==(const Rational& o) const { return num == o.num && den == o.den; }

double Rational::to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<int> Diagram::level_indegrees() const {
    std::vector<int> q(order.size(), 0);
    for (const auto& e : edges) {
        const int l1 = vertex_level[static_cast<std::size_t>(e.first)];
        const int l2 = vertex_level[static_cast<std::size_t>(e.second)];
        ++q[static_cast<std::size_t>(std::min(l1, l2))];
    }
    return q;
}

namespace {

void enumerate_rec(const std::vector<int>& vertex_level, std::vector<int>& match,
                   std::vector<std::pair<int, int>>& edges, std::vector<Diagram>& out,
                   const std::vector<int>& order) {
    const int n = static_cast<int>(vertex_level.size());
    int first = -1;
    for (int v = 0; v < n; ++v) {
        if (match[static_cast<std::size_t>(v)] < 0) {
            first = v;
            break;
        }
    }
    if (first < 0) {
        Diagram d;
        d.order = order;
        d.edges = edges;
        d.vertex_level = vertex_level;
        out.push_back(std::move(d));
        return;
    }
    for (int u = first + 1; u < n; ++u) {
        if (match[static_cast<std::size_t>(u)] >= 0) continue;
        if (vertex_level[static_cast<std::size_t>(u)] ==
            vertex_level[static_cast<std::size_t>(first)])
            continue; // edges may connect only different levels
        match[static_cast<std::size_t>(first)] = u;
        match[static_cast<std::size_t>(u)] = first;
        edges.emplace_back(first, u);
        enumerate_rec(vertex_level, match, edges, out, order);
        edges.pop_back();
        match[static_cast<std::size_t>(first)] = -1;
        match[static_cast<std::size_t>(u)] = -1;
    }
}

} // namespace

std::vector<Diagram> enumerate_diagrams(const std::vector<int>& order) {
    long long total = 0;
    for (int l : order) {
        if (l < 0) throw domain_error("enumerate_diagrams: level sizes must be nonnegative");
        total += l;
    }
    if (total > 16) {
        // (total-1)!! is the unconstrained matching count
        double bound = 1.0;
        for (long long k = total - 1; k >= 1; k -= 2) bound *= static_cast<double>(k);
        throw numerical_error("enumerate_diagrams: total vertex count " + std::to_string(total) +
                              " exceeds the combinatorial budget 16 (matching count bound " +
                              std::to_string(bound) + ")");
    }
    if (total % 2 != 0) return {};

    std::vector<int> vertex_level;
    for (std::size_t j = 0; j < order.size(); ++j)
        for (int i = 0; i < order[j]; ++i) vertex_level.push_back(static_cast<int>(j));

    std::vector<Diagram> out;
    std::vector<int> match(vertex_level.size(), -1);
    std::vector<std::pair<int, int>> edges;
    enumerate_rec(vertex_level, match, edges, out, order);
    return out;
}

bool classify_regular(const Diagram& diagram) {
    const int p = diagram.levels();
    if (p % 2 != 0) return false;
    std::vector<int> partner(static_cast<std::size_t>(p), -1);
    for (const auto& e : diagram.edges) {
        const int a = diagram.vertex_level[static_cast<std::size_t>(e.first)];
        const int b = diagram.vertex_level[static_cast<std::size_t>(e.second)];
        for (auto [x, y] : {std::pair<int, int>{a, b}, std::pair<int, int>{b, a}}) {
            if (partner[static_cast<std::size_t>(x)] < 0)
                partner[static_cast<std::size_t>(x)] = y;
            else if (partner[static_cast<std::size_t>(x)] != y)
                return false;
        }
    }
    // every level with vertices must be paired consistently
    for (int j = 0; j < p; ++j) {
        if (diagram.order[static_cast<std::size_t>(j)] == 0) continue;
        const int mate = partner[static_cast<std::size_t>(j)];
        if (mate < 0 || partner[static_cast<std::size_t>(mate)] != j || mate == j) return false;
    }
    return true;
}

std::vector<LevelRole> classify_levels(const Diagram& diagram) {
    const auto q = diagram.level_indegrees();
    std::vector<LevelRole> roles(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 0)
            roles[i] = LevelRole::Recipient;
        else if (q[i] == diagram.order[i])
            roles[i] = LevelRole::StrongDonor;
        else
            roles[i] = LevelRole::Donor;
    }
    return roles;
}

double hermite_moment(const std::vector<int>& orders, const std::vector<double>& correlation) {
    const std::size_t p = orders.size();
    if (correlation.size() != p * p)
        throw domain_error("hermite_moment: correlation must be p x p");
    for (std::size_t i = 0; i < p; ++i) {
        if (std::abs(correlation[i * p + i] - 1.0) > 1e-12)
            throw domain_error("hermite_moment: correlation diagonal must be 1");
        for (std::size_t j = 0; j < p; ++j)
            if (std::abs(correlation[i * p + j] - correlation[j * p + i]) > 1e-12)
                throw domain_error("hermite_moment: correlation must be symmetric");
    }
    double total = 0.0;
    for (const auto& d : enumerate_diagrams(orders)) {
        double prod = 1.0;
        for (const auto& e : d.edges) {
            const std::size_t a =
                static_cast<std::size_t>(d.vertex_level[static_cast<std::size_t>(e.first)]);
            const std::size_t b =
                static_cast<std::size_t>(d.vertex_level[static_cast<std::size_t>(e.second)]);
            prod *= correlation[a * p + b];
        }
        total += prod;
    }
    return total;
}

Rational hermite_moment_exact(const std::vector<int>& orders,
                              const std::vector<Rational>& correlation) {
    const std::size_t p = orders.size();
    if (correlation.size() != p * p)
        throw domain_error("hermite_moment_exact: correlation must be p x p");
    Rational total(0);
    for (const auto& d : enumerate_diagrams(orders)) {
        Rational prod(1);
        for (const auto& e : d.edges) {
            const std::size_t a =
                static_cast<std::size_t>(d.vertex_level[static_cast<std::size_t>(e.first)]);
            const std::size_t b =
                static_cast<std::size_t>(d.vertex_level[static_cast<std::size_t>(e.second)]);
            prod = prod * correlation[a * p + b];
        }
        total = total + prod;
    }
    return total;
}

std::vector<EdgeCountMatrix> fourth_moment_edge_matrices(int order) {
    if (order < 1) throw domain_error("fourth_moment_edge_matrices: order must be >= 1");
    double jfact = 1.0;
    for (int i = 2; i <= order; ++i) jfact *= i;
    const double jfact4 = jfact * jfact * jfact * jfact;
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    std::vector<EdgeCountMatrix> out;
    for (int e12 = 0; e12 <= order; ++e12) {
        for (int e13 = 0; e12 + e13 <= order; ++e13) {
            const int e14 = order - e12 - e13;
            const int e23 = e14;
            const int e24 = order - e12 - e14;
            const int e34 = order - e13 - e14;
            EdgeCountMatrix m;
            m.e12 = e12;
            m.e13 = e13;
            m.e14 = e14;
            m.e23 = e23;
            m.e24 = e24;
            m.e34 = e34;
            m.multiplicity = jfact4 / (fact(e12) * fact(e13) * fact(e14) * fact(e23) *
                                       fact(e24) * fact(e34));
            m.regular = (e12 == order && e34 == order) || (e13 == order && e24 == order) ||
                        (e14 == order && e23 == order);
            out.push_back(m);
        }
    }
    return out;
}

namespace {

// symmetric Toeplitz operator from covariance lags, applied via a cached
// circulant embedding spectrum
class ToeplitzOperator {
public:
    ToeplitzOperator(const std::vector<double>& lags) : T_(lags.size()) {
        M_ = 1;
        while (M_ < 2 * T_) M_ <<= 1;
        std::vector<std::complex<double>> c(M_, 0.0);
        for (std::size_t k = 0; k < T_; ++k) c[k] = lags[k];
        for (std::size_t k = 1; k < T_; ++k) c[M_ - k] = lags[k];
        fft::forward(c);
        spectrum_ = std::move(c);
        lags_ = lags;
    }

    // y = A x
    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        std::vector<std::complex<double>> buf(M_, 0.0);
        for (std::size_t i = 0; i < T_; ++i) buf[i] = x[i];
        fft::forward(buf);
        for (std::size_t i = 0; i < M_; ++i) buf[i] *= spectrum_[i];
        fft::backward(buf);
        y.resize(T_);
        const double scale = 1.0 / static_cast<double>(M_);
        for (std::size_t i = 0; i < T_; ++i) y[i] = buf[i].real() * scale;
    }

    // column s of the Toeplitz matrix
    void column(std::size_t s, std::vector<double>& y) const {
        y.resize(T_);
        for (std::size_t i = 0; i < T_; ++i)
            y[i] = lags_[static_cast<std::size_t>(i > s ? i - s : s - i)];
    }

private:
    std::size_t T_, M_;
    std::vector<std::complex<double>> spectrum_;
    std::vector<double> lags_;
};

std::vector<double> covariance_power_lags(const SpectralModel& model, int power, long long T) {
    std::vector<double> lags(static_cast<std::size_t>(T));
    for (long long tau = 0; tau < T; ++tau)
        lags[static_cast<std::size_t>(tau)] =
            std::pow(covariance(model, static_cast<double>(tau)), power);
    return lags;
}

// trace of (D B_a D B_b)(D B_c D B_d) over the 4-cycle bundles (a, b, c, d);
// stores the first factor and streams rows of the second
double cycle_trace(const std::vector<double>& r, const ToeplitzOperator& Ba,
                   const ToeplitzOperator& Bb, const ToeplitzOperator& Bc,
                   const ToeplitzOperator& Bd) {
    const std::size_t T = r.size();
    // M1 = D Ba D Bb, column by column: col_s = D Ba (D * Bb e_s)
    std::vector<double> M1(T * T);
    std::vector<double> col, tmp;
    for (std::size_t s = 0; s < T; ++s) {
        Bb.column(s, col);
        for (std::size_t i = 0; i < T; ++i) col[i] *= r[i];
        Ba.apply(col, tmp);
        for (std::size_t i = 0; i < T; ++i) M1[i * T + s] = r[i] * tmp[i];
    }
    // row s of M2 = (M2^T e_s) with M2 = D Bc D Bd: M2^T = Bd D Bc D
    double trace = 0.0;
    for (std::size_t s = 0; s < T; ++s) {
        Bc.column(s, col);
        const double rs = r[s];
        for (std::size_t i = 0; i < T; ++i) col[i] *= rs * r[i];
        Bd.apply(col, tmp);
        double acc = 0.0;
        for (std::size_t t = 0; t < T; ++t) acc += M1[t * T + s] * tmp[t];
        trace += acc;
    }
    return trace;
}

// lag quadratic form sum_{t,s} R(t) R(s) b[|t-s|]
double lag_quadratic_form(const std::vector<double>& r, const std::vector<double>& lags) {
    const auto c = fft::cross_correlation(r, r);
    const long long n = static_cast<long long>(r.size());
    double acc = c[static_cast<std::size_t>(n - 1)] * lags[0];
    for (long long tau = 1; tau < n; ++tau)
        acc += 2.0 * lags[static_cast<std::size_t>(tau)] * c[static_cast<std::size_t>(n - 1 + tau)];
    return acc;
}

// F(e) = sum over (t1..t4) prod R(t_i) prod_{i<k} B^{e_ik}(t_i - t_k)
double edge_matrix_value(const EdgeCountMatrix& e, const std::vector<double>& r,
                         const SpectralModel& model, long long T, long long generic_budget) {
    struct Pair {
        int a, b, count;
    };
    std::vector<Pair> support;
    if (e.e12 > 0) support.push_back({0, 1, e.e12});
    if (e.e13 > 0) support.push_back({0, 2, e.e13});
    if (e.e14 > 0) support.push_back({0, 3, e.e14});
    if (e.e23 > 0) support.push_back({1, 2, e.e23});
    if (e.e24 > 0) support.push_back({1, 3, e.e24});
    if (e.e34 > 0) support.push_back({2, 3, e.e34});

    // two disjoint bundles: product of two lag forms
    if (support.size() == 2 && (support[0].a != support[1].a) && (support[0].b != support[1].b) &&
        (support[0].a != support[1].b) && (support[0].b != support[1].a)) {
        const auto la = covariance_power_lags(model, support[0].count, T);
        const auto lb = covariance_power_lags(model, support[1].count, T);
        return lag_quadratic_form(r, la) * lag_quadratic_form(r, lb);
    }

    // 4-cycle support: every node has support-degree exactly 2
    std::vector<int> deg(4, 0);
    for (const auto& p : support) {
        ++deg[static_cast<std::size_t>(p.a)];
        ++deg[static_cast<std::size_t>(p.b)];
    }
    const bool cycle = support.size() == 4 && deg[0] == 2 && deg[1] == 2 && deg[2] == 2 && deg[3] == 2;
    if (cycle) {
        // walk the cycle from node 0
        auto bundle = [&](int x, int y) -> int {
            for (const auto& p : support)
                if ((p.a == x && p.b == y) || (p.a == y && p.b == x)) return p.count;
            return -1;
        };
        std::vector<int> path{0};
        int prev = -1, cur = 0;
        for (int step = 0; step < 3; ++step) {
            for (int nxt = 0; nxt < 4; ++nxt) {
                if (nxt == cur || nxt == prev) continue;
                if (bundle(cur, nxt) >= 0) {
                    path.push_back(nxt);
                    prev = cur;
                    cur = nxt;
                    break;
                }
            }
        }
        const int m0 = bundle(path[0], path[1]);
        const int m1 = bundle(path[1], path[2]);
        const int m2 = bundle(path[2], path[3]);
        const int m3 = bundle(path[3], path[0]);
        ToeplitzOperator B0(covariance_power_lags(model, m0, T));
        ToeplitzOperator B1(covariance_power_lags(model, m1, T));
        ToeplitzOperator B2(covariance_power_lags(model, m2, T));
        ToeplitzOperator B3(covariance_power_lags(model, m3, T));
        return cycle_trace(r, B0, B1, B2, B3);
    }

    // dense support: direct summation at desk scale only
    if (T > generic_budget)
        throw numerical_error(
            "fourth_moment_statistic: a nonregular diagram with dense support needs the direct "
            "O(T^4) sum, budgeted at T <= " +
            std::to_string(generic_budget) + "; use the Monte Carlo route for larger horizons");
    std::vector<std::vector<double>> bp(7);
    auto lag_table = [&](int count) {
        if (bp[static_cast<std::size_t>(count)].empty())
            bp[static_cast<std::size_t>(count)] = covariance_power_lags(model, count, T);
        return &bp[static_cast<std::size_t>(count)];
    };
    const auto* b12 = e.e12 ? lag_table(e.e12) : nullptr;
    const auto* b13 = e.e13 ? lag_table(e.e13) : nullptr;
    const auto* b14 = e.e14 ? lag_table(e.e14) : nullptr;
    const auto* b23 = e.e23 ? lag_table(e.e23) : nullptr;
    const auto* b24 = e.e24 ? lag_table(e.e24) : nullptr;
    const auto* b34 = e.e34 ? lag_table(e.e34) : nullptr;
    auto at = [](const std::vector<double>* b, long long t, long long s) {
        return b ? (*b)[static_cast<std::size_t>(t > s ? t - s : s - t)] : 1.0;
    };
    double total = 0.0;
    for (long long t1 = 0; t1 < T; ++t1) {
        for (long long t2 = 0; t2 < T; ++t2) {
            const double f12 = at(b12, t1, t2);
            if (f12 == 0.0 && b12) continue;
            for (long long t3 = 0; t3 < T; ++t3) {
                const double f123 = f12 * at(b13, t1, t3) * at(b23, t2, t3);
                if (f123 == 0.0) continue;
                const double r123 = r[static_cast<std::size_t>(t1)] *
                                    r[static_cast<std::size_t>(t2)] *
                                    r[static_cast<std::size_t>(t3)] * f123;
                double inner = 0.0;
                for (long long t4 = 0; t4 < T; ++t4)
                    inner += r[static_cast<std::size_t>(t4)] * at(b14, t1, t4) *
                             at(b24, t2, t4) * at(b34, t3, t4);
                total += r123 * inner;
            }
        }
    }
    return total;
}

} // namespace

FourthMomentBreakdown fourth_moment_statistic(const SpectralModel& model,
                                              const WeightSpec& weights, int order,
                                              const std::vector<double>& z, long long T,
                                              long long generic_budget) {
    if (!model.discrete() || !weights.discrete())
        throw domain_error("fourth_moment_statistic: the exact diagram route is discrete-time "
                           "only; use the Monte Carlo route for continuous time");
    if (order < 1) throw domain_error("fourth_moment_statistic: order must be >= 1");

    FourthMomentBreakdown out;
    out.sigma_t_sq = sigma_t_squared(model, weights, order, z, static_cast<double>(T),
                                     SigmaRoute::TimeDomain);
    out.sigma_sq = sigma_limit_squared(model, weights, order, z);
    const double sigma4 = out.sigma_sq * out.sigma_sq;
    out.regular_part = 3.0 * out.sigma_t_sq * out.sigma_t_sq / sigma4;

    const auto r = weighted_direction(weights, z, static_cast<double>(T));

    double nonregular = 0.0;
    // renaming integration variables permutes the levels without changing the
    // value, so evaluate one representative per S4-orbit of edge matrices
    auto canonical_key = [](const EdgeCountMatrix& e) {
        int m[4][4] = {};
        m[0][1] = m[1][0] = e.e12;
        m[0][2] = m[2][0] = e.e13;
        m[0][3] = m[3][0] = e.e14;
        m[1][2] = m[2][1] = e.e23;
        m[1][3] = m[3][1] = e.e24;
        m[2][3] = m[3][2] = e.e34;
        std::array<int, 4> perm{0, 1, 2, 3};
        std::vector<int> best;
        do {
            std::vector<int> key{m[perm[0]][perm[1]], m[perm[0]][perm[2]], m[perm[0]][perm[3]],
                                 m[perm[1]][perm[2]], m[perm[1]][perm[3]], m[perm[2]][perm[3]]};
            if (best.empty() || key < best) best = key;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    };
    std::map<std::vector<int>, double> orbit_cache;
    for (const auto& e : fourth_moment_edge_matrices(order)) {
        if (e.regular) continue;
        auto key = canonical_key(e);
        double value;
        const auto it = orbit_cache.find(key);
        if (it != orbit_cache.end()) {
            value = it->second;
        } else {
            value = edge_matrix_value(e, r, model, T, generic_budget);
            orbit_cache.emplace(std::move(key), value);
        }
        nonregular += e.multiplicity * value;
    }
    out.nonregular_part = nonregular / sigma4;
    out.total = out.regular_part + out.nonregular_part;
    return out;
}

double contraction_norm_sq_lags(const std::vector<double>& covariance_lags,
                                const std::vector<double>& direction, int order, int p) {
    if (p < 1 || p > order - 1)
        throw domain_error("contraction_norm_sq: p must lie in [1, order-1]");
    const std::size_t T = direction.size();
    if (covariance_lags.size() != T)
        throw domain_error("contraction_norm_sq: lag and direction sizes disagree");

    std::vector<double> lag_p(T), lag_jp(T);
    for (std::size_t tau = 0; tau < T; ++tau) {
        lag_p[tau] = std::pow(covariance_lags[tau], p);
        lag_jp[tau] = std::pow(covariance_lags[tau], order - p);
    }
    ToeplitzOperator Bp(lag_p), Bjp(lag_jp);

    // M = D B_p D B_{j-p}; the squared norm is Tr[M^2]
    std::vector<double> M(T * T), col, tmp;
    for (std::size_t s = 0; s < T; ++s) {
        Bjp.column(s, col);
        for (std::size_t i = 0; i < T; ++i) col[i] *= direction[i];
        Bp.apply(col, tmp);
        for (std::size_t i = 0; i < T; ++i) M[i * T + s] = direction[i] * tmp[i];
    }
    double trace = 0.0;
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t s = 0; s < T; ++s) trace += M[t * T + s] * M[s * T + t];
    return trace;
}

double contraction_norm_sq(const SpectralModel& model, const WeightSpec& weights, int order,
                           int p, const std::vector<double>& z, long long T) {
    if (!model.discrete() || !weights.discrete())
        throw domain_error("contraction_norm_sq: discrete-time only (continuous-time kernels "
                           "would need gridded quadrature at matched cost)");
    const auto r = weighted_direction(weights, z, static_cast<double>(T));
    std::vector<double> lags(static_cast<std::size_t>(T));
    for (long long tau = 0; tau < T; ++tau)
        lags[static_cast<std::size_t>(tau)] = covariance(model, static_cast<double>(tau));
    return contraction_norm_sq_lags(lags, r, order, p);
}

} // namespace singspec
