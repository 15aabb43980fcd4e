#include "singspec/weights.hpp"

#include "singspec/fft.hpp"
#include "singspec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace singspec {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;
const cdouble kI(0.0, 1.0);
} // namespace

double WeightComponent::eval(double t) const {
    if (kind == Kind::Tabulated) {
        if (table_t.empty()) return 0.0;
        if (t <= table_t.front()) return table_v.front();
        if (t >= table_t.back()) return table_v.back();
        const auto it = std::upper_bound(table_t.begin(), table_t.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - table_t.begin());
        const double w = (t - table_t[i - 1]) / (table_t[i] - table_t[i - 1]);
        return (1.0 - w) * table_v[i - 1] + w * table_v[i];
    }
    cdouble acc(0.0, 0.0);
    for (const auto& e : profile) acc += e.amplitude * std::exp(kI * (e.freq * t));
    const double poly = (degree == 0.0) ? 1.0 : std::pow(t, degree);
    return poly * acc.real();
}

bool WeightComponent::closed_form_degree() const {
    return degree == std::floor(degree) && degree >= 0.0 && degree <= 2.0;
}

WeightSpec WeightSpec::constant(TimeDomain domain) {
    WeightSpec s(domain);
    WeightComponent c;
    c.kind = WeightComponent::Kind::Constant;
    c.profile = {{cdouble(1.0, 0.0), 0.0}};
    s.add(std::move(c));
    return s;
}

WeightSpec WeightSpec::cosine(double delta, double phase, TimeDomain domain) {
    WeightSpec s(domain);
    WeightComponent c;
    c.kind = WeightComponent::Kind::Cosine;
    if (delta == 0.0) {
        c.profile = {{cdouble(std::cos(phase), 0.0), 0.0}};
    } else {
        c.profile = {{0.5 * std::exp(kI * phase), delta}, {0.5 * std::exp(-kI * phase), -delta}};
    }
    s.add(std::move(c));
    return s;
}

WeightSpec WeightSpec::sine(double delta, TimeDomain domain) {
    WeightSpec s(domain);
    WeightComponent c;
    c.kind = WeightComponent::Kind::Sine;
    c.profile = {{cdouble(0.0, -0.5), delta}, {cdouble(0.0, 0.5), -delta}};
    s.add(std::move(c));
    return s;
}

WeightSpec WeightSpec::power_cosine(double beta, double delta, double phase, TimeDomain domain) {
    if (beta < 0.0) throw domain_error("power_cosine: exponent beta must be nonnegative");
    WeightSpec s(domain);
    WeightComponent c;
    c.kind = WeightComponent::Kind::PowerCosine;
    c.degree = beta;
    if (delta == 0.0) {
        c.profile = {{cdouble(std::cos(phase), 0.0), 0.0}};
    } else {
        c.profile = {{0.5 * std::exp(kI * phase), delta}, {0.5 * std::exp(-kI * phase), -delta}};
    }
    s.add(std::move(c));
    return s;
}

WeightSpec WeightSpec::trig_regression_gradient(const std::vector<TrigGradientParams>& params,
                                                TimeDomain domain) {
    if (params.empty()) throw domain_error("trig_regression_gradient: need at least one harmonic");
    WeightSpec s(domain);
    for (const auto& p : params) {
        if (!(p.phi > 0.0))
            throw domain_error("trig_regression_gradient: harmonic frequencies must be positive");
        if (p.A * p.A + p.B * p.B <= 0.0)
            throw domain_error("trig_regression_gradient: C_k^2 = A_k^2 + B_k^2 must be positive");
        WeightComponent dA; // d/dA: cos(phi t)
        dA.kind = WeightComponent::Kind::TrigGradient;
        dA.profile = {{cdouble(0.5, 0.0), p.phi}, {cdouble(0.5, 0.0), -p.phi}};
        s.add(std::move(dA));
        WeightComponent dB; // d/dB: sin(phi t)
        dB.kind = WeightComponent::Kind::TrigGradient;
        dB.profile = {{cdouble(0.0, -0.5), p.phi}, {cdouble(0.0, 0.5), -p.phi}};
        s.add(std::move(dB));
        WeightComponent dphi; // d/dphi: t(-A sin(phi t) + B cos(phi t)) = t Re[(B+iA) e^{i phi t}]
        dphi.kind = WeightComponent::Kind::TrigGradient;
        dphi.degree = 1.0;
        dphi.profile = {{0.5 * cdouble(p.B, p.A), p.phi}, {0.5 * cdouble(p.B, -p.A), -p.phi}};
        s.add(std::move(dphi));
    }
    return s;
}

WeightSpec WeightSpec::tabulated(std::vector<double> ts, std::vector<double> vs,
                                 TimeDomain domain) {
    if (ts.size() != vs.size() || ts.size() < 2)
        throw domain_error("WeightSpec::tabulated: need matching grids with at least two points");
    WeightSpec s(domain);
    WeightComponent c;
    c.kind = WeightComponent::Kind::Tabulated;
    c.table_t = std::move(ts);
    c.table_v = std::move(vs);
    s.add(std::move(c));
    return s;
}

WeightSpec& WeightSpec::add(WeightComponent component) {
    components_.push_back(std::move(component));
    return *this;
}

const WeightComponent& WeightSpec::component(int i) const {
    if (i < 0 || i >= q()) throw domain_error("WeightSpec: component index out of range");
    return components_[static_cast<std::size_t>(i)];
}

bool WeightSpec::has_closed_limit() const {
    for (const auto& c : components_)
        if (c.tabulated()) return false;
    return true;
}

namespace {

// int_0^T t^b e^{i g t} dt for integer b >= 0 (stable recursion; series for small |g|T)
cdouble continuous_power_integral(int b, double g, double T) {
    if (std::abs(g) * T < 1e-6) {
        // e^{igt} ~ 1 + igt - (gt)^2/2
        const double b1 = static_cast<double>(b) + 1.0;
        return std::pow(T, b1) / b1 + kI * (g * std::pow(T, b1 + 1.0) / (b1 + 1.0)) -
               cdouble(0.5 * g * g * std::pow(T, b1 + 2.0) / (b1 + 2.0), 0.0);
    }
    const cdouble eig = std::exp(kI * (g * T));
    cdouble acc = (eig - 1.0) / (kI * g); // I_0
    for (int m = 1; m <= b; ++m) acc = (std::pow(T, m) * eig - static_cast<double>(m) * acc) / (kI * g);
    return acc;
}

// sum_{t=1}^n t^b e^{i g t} for b in {0, 1}: Dirichlet kernel and its
// derivative, with a series branch where the closed form cancels
cdouble discrete_power_sum(int b, double gamma, long long n) {
    const double g = std::remainder(gamma, kTwoPi); // exact for integer t
    const double nd = static_cast<double>(n);
    if (std::abs(g) * nd < 1e-2) {
        const double s1 = nd * (nd + 1.0) / 2.0;
        const double s2 = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 6.0;
        const double s3 = s1 * s1;
        const double s4 = nd * (nd + 1.0) * (2.0 * nd + 1.0) * (3.0 * nd * nd + 3.0 * nd - 1.0) / 30.0;
        const double s5 = s3 * (2.0 * nd * nd + 2.0 * nd - 1.0) / 3.0;
        if (b == 0)
            return cdouble(nd - 0.5 * g * g * s2, g * s1 - g * g * g / 6.0 * s3);
        return cdouble(s1 - 0.5 * g * g * s3, g * s2 - g * g * g / 6.0 * s4) +
               cdouble(g * g * g * g / 24.0 * s5, 0.0);
    }
    const cdouble E = std::exp(kI * (0.5 * g * (nd + 1.0)));
    const double sT = std::sin(0.5 * g * nd), cT = std::cos(0.5 * g * nd);
    const double s1 = std::sin(0.5 * g), c1 = std::cos(0.5 * g);
    const cdouble S0 = E * (sT / s1);
    if (b == 0) return S0;
    const cdouble dS0 = kI * (0.5 * (nd + 1.0)) * S0 +
                        E * ((0.5 * nd * cT * s1 - 0.5 * c1 * sT) / (s1 * s1));
    return -kI * dS0;
}

// transform of one component at lambda
cdouble component_transform(const WeightComponent& c, bool discrete, double T, double lambda) {
    if (discrete) {
        const long long n = static_cast<long long>(std::llround(T));
        if (!c.tabulated() && (c.degree == 0.0 || c.degree == 1.0)) {
            cdouble acc(0.0, 0.0);
            for (const auto& e : c.profile)
                acc += e.amplitude *
                       discrete_power_sum(static_cast<int>(c.degree), lambda + e.freq, n);
            return acc;
        }
        // direct summation keeps arbitrary degrees exact at desk scale
        cdouble acc(0.0, 0.0);
        for (long long t = 1; t <= n; ++t) {
            const double td = static_cast<double>(t);
            acc += std::exp(kI * (lambda * td)) * c.eval(td);
        }
        return acc;
    }
    if (c.tabulated() || !c.closed_form_degree()) {
        const double re = adaptive_simpson(
            [&](double t) { return std::cos(lambda * t) * c.eval(t); }, 0.0, T, 1e-10);
        const double im = adaptive_simpson(
            [&](double t) { return std::sin(lambda * t) * c.eval(t); }, 0.0, T, 1e-10);
        return {re, im};
    }
    cdouble acc(0.0, 0.0);
    const int b = static_cast<int>(c.degree);
    for (const auto& e : c.profile)
        acc += e.amplitude * continuous_power_integral(b, lambda + e.freq, T);
    return acc;
}

double component_norm_sq(const WeightComponent& c, bool discrete, double T) {
    if (discrete) {
        const long long n = static_cast<long long>(std::llround(T));
        double acc = 0.0;
        for (long long t = 1; t <= n; ++t) {
            const double v = c.eval(static_cast<double>(t));
            acc += v * v;
        }
        return acc;
    }
    if (c.tabulated() || !c.closed_form_degree()) {
        return adaptive_simpson(
            [&](double t) {
                const double v = c.eval(t);
                return v * v;
            },
            0.0, T, 1e-10);
    }
    // w^2 = t^{2b} sum_{p,p'} c_p conj(c_p') e^{i(w_p - w_p')t}, real by symmetry
    cdouble acc(0.0, 0.0);
    const int b2 = 2 * static_cast<int>(c.degree);
    for (const auto& p : c.profile)
        for (const auto& pp : c.profile)
            acc += p.amplitude * std::conj(pp.amplitude) *
                   continuous_power_integral(b2, p.freq - pp.freq, T);
    return acc.real();
}

} // namespace

double weight_norm(const WeightSpec& weights, int i, double T) {
    if (!(T > 0.0)) throw domain_error("weight_norm: horizon T must be positive");
    const double w2 = component_norm_sq(weights.component(i), weights.discrete(), T);
    if (!(w2 > 1e-12))
        throw domain_error("weight_norm: component " + std::to_string(i) +
                           " has (numerically) zero norm on [0, T]; degenerate weight");
    return std::sqrt(w2);
}

cdouble weight_transform(const WeightSpec& weights, int i, double T, double lambda) {
    return component_transform(weights.component(i), weights.discrete(), T, lambda);
}

cdouble MatrixMeasureGrid::total(int j, int l) const {
    cdouble acc(0.0, 0.0);
    for (std::size_t c = 0; c < cells(); ++c) acc += entry(c, j, l);
    return acc;
}

namespace {

MatrixMeasureGrid matrix_measure_discrete(const WeightSpec& weights, double T,
                                          const std::vector<double>& edges) {
    const long long n = static_cast<long long>(std::llround(T));
    const int q = weights.q();
    MatrixMeasureGrid grid;
    grid.edges = edges;
    grid.q = q;
    grid.horizon = T;
    grid.torus = true;

    // weight samples at t = 1..T
    std::vector<std::vector<double>> w(q, std::vector<double>(n));
    std::vector<double> norms(q);
    for (int j = 0; j < q; ++j) {
        for (long long t = 1; t <= n; ++t)
            w[j][static_cast<std::size_t>(t - 1)] = weights.eval(j, static_cast<double>(t));
        double s = 0.0;
        for (double v : w[j]) s += v * v;
        if (!(s > 1e-12))
            throw domain_error("matrix_measure: degenerate weight component " + std::to_string(j));
        norms[j] = std::sqrt(s);
    }

    const std::size_t cells = edges.size() - 1;
    grid.cell_entries.assign(cells * q * q, cdouble(0.0, 0.0));

    // cumulative mass up to each boundary via the exact lag identity:
    // int_a^b w^j conj(w^l) dlambda = sum_tau c_jl(tau) (e^{ib tau}-e^{ia tau})/(i tau)
    for (int j = 0; j < q; ++j) {
        for (int l = j; l < q; ++l) {
            const auto c = fft::cross_correlation(w[j], w[l]); // index tau + (n-1)
            std::vector<cdouble> cumulative(edges.size(), cdouble(0.0, 0.0));
            for (std::size_t g = 0; g < edges.size(); ++g) {
                const double a = edges[g];
                cdouble acc = c[static_cast<std::size_t>(n - 1)] * (a + kPi);
                const cdouble step = std::exp(kI * a);
                cdouble za = step; // e^{i a tau} for tau = 1, incremented below
                for (long long tau = 1; tau < n; ++tau) {
                    const double sign = (tau % 2 == 0) ? 1.0 : -1.0; // e^{-i pi tau}
                    const cdouble e_tau = (za - sign) / (kI * static_cast<double>(tau));
                    // +tau and -tau terms: c(tau) e_tau(a) + c(-tau) conj over -tau
                    const cdouble e_mtau = (std::conj(za) - sign) / (-kI * static_cast<double>(tau));
                    acc += c[static_cast<std::size_t>(n - 1 + tau)] * e_tau +
                           c[static_cast<std::size_t>(n - 1 - tau)] * e_mtau;
                    za *= step;
                }
                cumulative[g] = acc;
            }
            const double denom = kTwoPi * norms[j] * norms[l];
            for (std::size_t cell = 0; cell < cells; ++cell) {
                const cdouble mass = (cumulative[cell + 1] - cumulative[cell]) / denom;
                grid.cell_entries[(cell * q + j) * q + l] = mass;
                grid.cell_entries[(cell * q + l) * q + j] = std::conj(mass);
            }
        }
    }
    return grid;
}

MatrixMeasureGrid matrix_measure_continuous(const WeightSpec& weights, double T,
                                            const std::vector<double>& edges) {
    const int q = weights.q();
    MatrixMeasureGrid grid;
    grid.edges = edges;
    grid.q = q;
    grid.horizon = T;
    grid.torus = false;

    std::vector<double> norms(q);
    for (int j = 0; j < q; ++j) norms[j] = weight_norm(weights, j, T);

    const std::size_t cells = edges.size() - 1;
    grid.cell_entries.assign(cells * q * q, cdouble(0.0, 0.0));

    // panels no wider than a fraction of the transform oscillation scale
    const double panel = kTwoPi / (8.0 * T);
    for (int j = 0; j < q; ++j) {
        for (int l = j; l < q; ++l) {
            const double denom = kTwoPi * norms[j] * norms[l];
            for (std::size_t cell = 0; cell < cells; ++cell) {
                const double a = edges[cell], b = edges[cell + 1];
                const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
                cdouble mass(0.0, 0.0);
                for (int p = 0; p < pieces; ++p) {
                    const double pa = a + (b - a) * p / pieces;
                    const double pb = a + (b - a) * (p + 1) / pieces;
                    // Simpson on the closed-form product
                    auto f = [&](double lam) {
                        return weight_transform(weights, j, T, lam) *
                               std::conj(weight_transform(weights, l, T, lam));
                    };
                    mass += (pb - pa) / 6.0 * (f(pa) + 4.0 * f(0.5 * (pa + pb)) + f(pb));
                }
                grid.cell_entries[(cell * q + j) * q + l] = mass / denom;
                grid.cell_entries[(cell * q + l) * q + j] = std::conj(mass) / denom;
            }
        }
    }
    // exact diagonal tail mass via Parseval: 1 - covered mass
    double worst = 0.0;
    for (int j = 0; j < q; ++j) worst = std::max(worst, 1.0 - grid.total(j, j).real());
    grid.max_diagonal_tail = worst;
    if (worst > 1e-3)
        throw numerical_error("matrix_measure: frequency truncation leaves diagonal tail mass " +
                              std::to_string(worst) + " > 1e-3; widen the grid");
    return grid;
}

} // namespace

MatrixMeasureGrid matrix_measure(const WeightSpec& weights, double T,
                                 const std::vector<double>& edges) {
    if (edges.size() < 2) throw domain_error("matrix_measure: need at least one cell");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw domain_error("matrix_measure: cell edges must be strictly increasing");
    if (weights.discrete()) {
        if (edges.front() < -kPi - 1e-12 || edges.back() > kPi + 1e-12)
            throw domain_error("matrix_measure: discrete-time grid must lie within (-pi, pi]");
        return matrix_measure_discrete(weights, T, edges);
    }
    return matrix_measure_continuous(weights, T, edges);
}

AtomicMeasure limit_measure(const WeightSpec& weights) {
    if (!weights.has_closed_limit())
        throw domain_error("limit_measure: tabulated weights carry no closed-form limit; use "
                           "matrix_measure at growing horizons to check (B1) empirically");
    const int q = weights.q();

    // atom locations: lambda = -freq for every exponential in every profile
    std::vector<double> locs;
    for (const auto& c : weights.components())
        for (const auto& e : c.profile) locs.push_back(-e.freq);
    std::sort(locs.begin(), locs.end());
    locs.erase(std::unique(locs.begin(), locs.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               locs.end());

    // per-component scale S_j = sum |c_p|^2 and degree b_j
    std::vector<double> S(q), deg(q);
    for (int j = 0; j < q; ++j) {
        const auto& c = weights.component(j);
        deg[j] = c.degree;
        double s = 0.0;
        for (const auto& e : c.profile) s += std::norm(e.amplitude);
        if (!(s > 0.0)) throw domain_error("limit_measure: weight component with empty profile");
        S[j] = s;
    }

    AtomicMeasure mu;
    mu.q = q;
    for (double nu : locs) {
        AtomicMeasure::Atom atom;
        atom.freq = nu;
        atom.matrix.assign(static_cast<std::size_t>(q) * q, cdouble(0.0, 0.0));
        bool nonzero = false;
        for (int j = 0; j < q; ++j) {
            for (int l = 0; l < q; ++l) {
                cdouble aj(0.0, 0.0), al(0.0, 0.0);
                for (const auto& e : weights.component(j).profile)
                    if (std::abs(e.freq + nu) < 1e-12) aj += e.amplitude;
                for (const auto& e : weights.component(l).profile)
                    if (std::abs(e.freq + nu) < 1e-12) al += e.amplitude;
                if (aj == cdouble(0.0, 0.0) || al == cdouble(0.0, 0.0)) continue;
                const double K = std::sqrt((2.0 * deg[j] + 1.0) * (2.0 * deg[l] + 1.0)) /
                                 (deg[j] + deg[l] + 1.0);
                atom.matrix[static_cast<std::size_t>(j) * q + l] =
                    K * aj * std::conj(al) / std::sqrt(S[j] * S[l]);
                nonzero = true;
            }
        }
        if (nonzero) mu.atoms.push_back(std::move(atom));
    }
    return mu;
}

namespace {

void check_overlap(const SpectralModel& model, double atom_freq) {
    for (const auto& sp : density_singular_points(model)) {
        double d;
        if (model.discrete()) {
            const double w = detail::wrap_to_torus(atom_freq);
            d = std::min(std::abs(detail::wrap_to_torus(w - sp.location)),
                         std::abs(detail::wrap_to_torus(w + sp.location)));
        } else {
            d = std::min(std::abs(atom_freq - sp.location), std::abs(atom_freq + sp.location));
        }
        if (d < 1e-9)
            throw assumption_error(
                "admissibility_integral: weight atom at " + std::to_string(atom_freq) +
                " overlaps the spectral singularity +/-" + std::to_string(sp.location) +
                "; overlapping weight and noise spectra need different normalizations and are "
                "not supported");
    }
}

} // namespace

std::vector<cdouble> admissibility_integral(const SpectralModel& model,
                                            const AtomicMeasure& measure) {
    const int q = measure.q;
    std::vector<cdouble> out(static_cast<std::size_t>(q) * q, cdouble(0.0, 0.0));
    for (const auto& atom : measure.atoms) {
        check_overlap(model, atom.freq);
        const double lam = model.discrete() ? detail::wrap_to_torus(atom.freq) : atom.freq;
        const double f = spectral_density(model, lam);
        for (int j = 0; j < q; ++j)
            for (int l = 0; l < q; ++l)
                out[static_cast<std::size_t>(j) * q + l] +=
                    f * atom.matrix[static_cast<std::size_t>(j) * q + l];
    }
    return out;
}

std::vector<cdouble> admissibility_integral(const SpectralModel& model,
                                            const MatrixMeasureGrid& grid) {
    const int q = grid.q;
    const auto singular = density_singular_points(model);
    std::vector<cdouble> out(static_cast<std::size_t>(q) * q, cdouble(0.0, 0.0));
    for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
        const double a = grid.edges[cell], b = grid.edges[cell + 1];
        const double mid = 0.5 * (a + b);
        bool has_singularity = false;
        for (const auto& sp : singular) {
            for (double s : {sp.location, -sp.location}) {
                if (s >= a - 1e-12 && s <= b + 1e-12) has_singularity = true;
            }
        }
        const double f = has_singularity ? integrate_density_over(model, a, b, 1e-10) / (b - a)
                                         : spectral_density(model, mid);
        for (int j = 0; j < q; ++j)
            for (int l = 0; l < q; ++l)
                out[static_cast<std::size_t>(j) * q + l] += f * grid.entry(cell, j, l);
    }
    return out;
}

std::vector<cdouble> admissibility_integral_finite_t(const SpectralModel& model,
                                                     const WeightSpec& weights, long long T) {
    if (!model.discrete() || !weights.discrete())
        throw domain_error("admissibility_integral_finite_t: exact lag route is discrete-time "
                           "only; use the measure-grid overload for continuous time");
    const int q = weights.q();
    std::vector<std::vector<double>> w(q, std::vector<double>(static_cast<std::size_t>(T)));
    std::vector<double> norms(q);
    for (int j = 0; j < q; ++j) {
        for (long long t = 1; t <= T; ++t)
            w[j][static_cast<std::size_t>(t - 1)] = weights.eval(j, static_cast<double>(t));
        double s = 0.0;
        for (double v : w[j]) s += v * v;
        norms[j] = std::sqrt(s);
    }
    std::vector<double> bvals(static_cast<std::size_t>(T));
    for (long long tau = 0; tau < T; ++tau)
        bvals[static_cast<std::size_t>(tau)] = covariance(model, static_cast<double>(tau));

    std::vector<cdouble> out(static_cast<std::size_t>(q) * q, cdouble(0.0, 0.0));
    for (int j = 0; j < q; ++j) {
        for (int l = j; l < q; ++l) {
            const auto c = fft::cross_correlation(w[j], w[l]);
            double acc = c[static_cast<std::size_t>(T - 1)] * bvals[0];
            for (long long tau = 1; tau < T; ++tau)
                acc += (c[static_cast<std::size_t>(T - 1 + tau)] +
                        c[static_cast<std::size_t>(T - 1 - tau)]) *
                       bvals[static_cast<std::size_t>(tau)];
            const double v = acc / (kTwoPi * norms[j] * norms[l]);
            out[static_cast<std::size_t>(j) * q + l] = v;
            out[static_cast<std::size_t>(l) * q + j] = v;
        }
    }
    return out;
}

ConditionReport check_b2_b3(const WeightSpec& weights, const SpectralModel& model,
                            const std::vector<double>& horizons) {
    if (horizons.empty()) throw domain_error("check_b2_b3: need at least one horizon");
    ConditionReport rep;
    rep.horizons = horizons;
    const int q = weights.q();

    auto bounded_across = [](const std::vector<double>& r) {
        double running = r.front();
        for (std::size_t k = 1; k < r.size(); ++k) {
            if (r[k] > 1.1 * running + 1e-12) return false;
            running = std::max(running, r[k]);
        }
        return true;
    };

    // (B3): sup_t |w_i(t)| sqrt(T) / W_iT
    for (int i = 0; i < q; ++i) {
        ConditionReport::B3Row row;
        row.component = i;
        for (double T : horizons) {
            double sup = 0.0;
            if (weights.discrete()) {
                const long long n = static_cast<long long>(std::llround(T));
                for (long long t = 1; t <= n; ++t)
                    sup = std::max(sup, std::abs(weights.eval(i, static_cast<double>(t))));
            } else {
                const int samples = 65536;
                for (int s = 0; s <= samples; ++s)
                    sup = std::max(sup, std::abs(weights.eval(i, T * s / samples)));
            }
            row.ratios.push_back(sup * std::sqrt(T) / weight_norm(weights, i, T));
        }
        row.constant = *std::max_element(row.ratios.begin(), row.ratios.end());
        row.bounded = bounded_across(row.ratios);
        rep.all_bounded = rep.all_bounded && row.bounded;
        rep.b3.push_back(std::move(row));
    }

    // (B2): max over the singularity neighborhoods V_j of |w_T^i| / W_iT
    const auto points = density_singular_points(model);
    double gap = 1e300;
    {
        std::vector<double> locs;
        for (const auto& p : points) {
            locs.push_back(p.location);
            if (p.location > 1e-12) locs.push_back(-p.location);
        }
        std::sort(locs.begin(), locs.end());
        for (std::size_t i = 1; i < locs.size(); ++i) gap = std::min(gap, locs[i] - locs[i - 1]);
        if (locs.size() < 2) gap = 1.0;
    }
    const double delta = std::min(0.1, 0.25 * gap);

    for (int i = 0; i < q; ++i) {
        for (const auto& p : points) {
            ConditionReport::B2Row row;
            row.component = i;
            row.singularity = p.location;
            for (double T : horizons) {
                const double norm = weight_norm(weights, i, T);
                double worst = 0.0;
                for (double side : {1.0, -1.0}) {
                    const double center = side * p.location;
                    if (p.location < 1e-12 && side < 0.0) continue;
                    for (int s = 0; s <= 200; ++s) {
                        const double lam = center - delta + 2.0 * delta * s / 200.0;
                        worst = std::max(worst, std::abs(weight_transform(weights, i, T, lam)));
                    }
                }
                row.ratios.push_back(worst / norm);
            }
            row.constant = *std::max_element(row.ratios.begin(), row.ratios.end());
            row.bounded = bounded_across(row.ratios);
            rep.all_bounded = rep.all_bounded && row.bounded;
            rep.b2.push_back(std::move(row));
        }
    }
    return rep;
}

double covariance_square_integral(const SpectralModel& model) {
    if (2.0 * model.min_alpha() <= 1.0)
        throw assumption_error("covariance_square_integral: int B^2 diverges for alpha <= 1/2");
    return kTwoPi * convolution_density_at(model, 2, 0.0);
}

double truncation_tail_bound(const HermiteExpansion& expansion, const WeightSpec& weights,
                             const SpectralModel& model, const std::vector<double>& z, int d) {
    if (static_cast<int>(z.size()) != weights.q())
        throw domain_error("truncation_tail_bound: z has the wrong dimension");
    double z_norm_sq = 0.0;
    for (double v : z) z_norm_sq += v * v;

    // inferred (B3) constants at a dyadic ladder of horizons
    const std::vector<double> ladder{256.0, 1024.0, 4096.0};
    const auto rep = check_b2_b3(weights, model, ladder);
    double k_norm_sq = 0.0;
    for (const auto& row : rep.b3) k_norm_sq += row.constant * row.constant;

    return truncation_tail_bound_scalar(expansion, d, z_norm_sq, k_norm_sq,
                                        covariance_square_integral(model));
}

} // namespace singspec
