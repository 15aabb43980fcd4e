#include "singspec/limit_covariance.hpp"

#include "singspec/fft.hpp"
#include "singspec/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace singspec {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

// linear interpolation table for a convolution density, with geometric
// refinement toward the singular/kink frequencies
class DensityTable {
public:
    DensityTable(const SpectralModel& model, int order, double lo, double hi) {
        std::vector<double> special;
        if (order == 1) {
            for (const auto& p : density_singular_points(model)) {
                special.push_back(p.location);
                if (p.location > 1e-12) special.push_back(-p.location);
            }
        } else {
            for (const auto& t : covariance_power_terms(model, order)) {
                const double w = model.discrete() ? std::abs(detail::wrap_to_torus(t.freq))
                                                  : t.freq;
                special.push_back(w);
                if (w > 1e-12) special.push_back(-w);
            }
        }
        std::vector<double> xs;
        const int base = 8192;
        for (int i = 0; i <= base; ++i) xs.push_back(lo + (hi - lo) * i / base);
        for (double s : special) {
            if (s < lo || s > hi) continue;
            for (double u = 0.3; u > 2e-7; u *= 0.75) {
                if (s + u < hi) xs.push_back(s + u);
                if (s - u > lo) xs.push_back(s - u);
            }
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 xs.end());
        xs_.reserve(xs.size());
        fs_.reserve(xs.size());
        for (double x : xs) {
            double v;
            try {
                v = (order == 1) ? spectral_density(model, torus_clamp(model, x))
                                 : convolution_density_at(model, order, torus_clamp(model, x));
            } catch (const domain_error&) {
                continue; // exactly on a singular point: skip the node
            }
            xs_.push_back(x);
            fs_.push_back(v);
        }
    }

    double operator()(double x) const {
        if (x <= xs_.front()) return fs_.front();
        if (x >= xs_.back()) return fs_.back();
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin());
        const double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
        return (1.0 - w) * fs_[i - 1] + w * fs_[i];
    }

    const std::vector<double>& nodes() const { return xs_; }

private:
    static double torus_clamp(const SpectralModel& model, double x) {
        return model.discrete() ? detail::wrap_to_torus(x) : x;
    }
    std::vector<double> xs_, fs_;
};

} // namespace

std::vector<double> weighted_direction(const WeightSpec& weights, const std::vector<double>& z,
                                       double T, int grid_points) {
    const int q = weights.q();
    if (static_cast<int>(z.size()) != q)
        throw domain_error("weighted_direction: z has the wrong dimension");
    std::vector<double> norms(q);
    for (int i = 0; i < q; ++i) norms[i] = weight_norm(weights, i, T);

    std::vector<double> r;
    if (weights.discrete()) {
        const long long n = static_cast<long long>(std::llround(T));
        r.resize(static_cast<std::size_t>(n));
        for (long long t = 1; t <= n; ++t) {
            double acc = 0.0;
            for (int i = 0; i < q; ++i)
                acc += z[static_cast<std::size_t>(i)] * weights.eval(i, static_cast<double>(t)) /
                       norms[i];
            r[static_cast<std::size_t>(t - 1)] = acc;
        }
    } else {
        r.resize(static_cast<std::size_t>(grid_points) + 1);
        for (int g = 0; g <= grid_points; ++g) {
            const double t = T * g / grid_points;
            double acc = 0.0;
            for (int i = 0; i < q; ++i)
                acc += z[static_cast<std::size_t>(i)] * weights.eval(i, t) / norms[i];
            r[static_cast<std::size_t>(g)] = acc;
        }
    }
    return r;
}

namespace {

double sigma_time_domain(const SpectralModel& model, const WeightSpec& weights, int order,
                         const std::vector<double>& z, double T) {
    double jfact = 1.0;
    for (int i = 2; i <= order; ++i) jfact *= i;

    if (model.discrete()) {
        const auto r = weighted_direction(weights, z, T);
        const auto c = fft::cross_correlation(r, r);
        const long long n = static_cast<long long>(r.size());
        double acc = c[static_cast<std::size_t>(n - 1)]; // B^j(0) = 1
        for (long long tau = 1; tau < n; ++tau) {
            const double b = covariance(model, static_cast<double>(tau));
            acc += 2.0 * std::pow(b, order) * c[static_cast<std::size_t>(n - 1 + tau)];
        }
        return jfact * acc;
    }
    // continuous: trapezoid on a uniform grid, reduced over lags
    const int grid_points = 4096;
    auto r = weighted_direction(weights, z, T, grid_points);
    const double h = T / grid_points;
    r.front() *= 0.5;
    r.back() *= 0.5;
    const auto c = fft::cross_correlation(r, r);
    const long long n = static_cast<long long>(r.size());
    double acc = c[static_cast<std::size_t>(n - 1)];
    for (long long tau = 1; tau < n; ++tau) {
        const double b = covariance(model, static_cast<double>(tau) * h);
        acc += 2.0 * std::pow(b, order) * c[static_cast<std::size_t>(n - 1 + tau)];
    }
    return jfact * acc * h * h;
}

// |R_T-hat(lambda)|^2 evaluator with closed-form transforms
class DirectionTransform {
public:
    DirectionTransform(const WeightSpec& weights, const std::vector<double>& z, double T)
        : weights_(weights), z_(z), T_(T) {
        const int q = weights.q();
        norms_.resize(q);
        for (int i = 0; i < q; ++i) norms_[i] = weight_norm(weights, i, T);
    }

    double operator()(double lambda) const {
        cdouble acc(0.0, 0.0);
        for (int i = 0; i < weights_.q(); ++i) {
            if (z_[static_cast<std::size_t>(i)] == 0.0) continue;
            acc += z_[static_cast<std::size_t>(i)] * weight_transform(weights_, i, T_, lambda) /
                   norms_[i];
        }
        return std::norm(acc);
    }

private:
    const WeightSpec& weights_;
    std::vector<double> z_;
    double T_;
    std::vector<double> norms_;
};

double sigma_frequency_domain(const SpectralModel& model, const WeightSpec& weights, int order,
                              const std::vector<double>& z, double T) {
    double jfact = 1.0;
    for (int i = 2; i <= order; ++i) jfact *= i;

    double lo, hi;
    if (model.discrete()) {
        lo = -kPi;
        hi = kPi;
    } else {
        hi = model.components().back().kappa + 20.0;
        while (spectral_density(model, hi) > 1e-16) hi *= 1.5;
        lo = -hi;
    }

    DensityTable table(model, order, lo, hi);
    DirectionTransform rhat(weights, z, T);

    // panel edges: the table's refinement near singular points, unioned with
    // the |R-hat|^2 oscillation scale 2 pi / T
    const double osc = kTwoPi / (8.0 * T);
    std::vector<double> edges;
    const auto& nodes = table.nodes();
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double a = nodes[i], b = nodes[i + 1];
        edges.push_back(a);
        const int pieces = static_cast<int>(std::floor((b - a) / osc));
        for (int p = 1; p <= pieces; ++p) edges.push_back(a + (b - a) * p / (pieces + 1));
    }
    edges.push_back(nodes.back());

    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = edges[i], b = edges[i + 1], m = 0.5 * (a + b);
        integral += (b - a) / 6.0 *
                    (table(a) * rhat(a) + 4.0 * table(m) * rhat(m) + table(b) * rhat(b));
    }
    return jfact * integral;
}

} // namespace

double sigma_t_squared(const SpectralModel& model, const WeightSpec& weights, int order,
                       const std::vector<double>& z, double T, SigmaRoute route) {
    if (order < 1) throw domain_error("sigma_t_squared: order must be >= 1");
    if (model.discrete() != weights.discrete())
        throw domain_error("sigma_t_squared: model and weights disagree on the time domain");
    bool all_zero = true;
    for (double v : z) all_zero = all_zero && v == 0.0;
    if (all_zero) return 0.0;
    const double value = (route == SigmaRoute::TimeDomain)
                             ? sigma_time_domain(model, weights, order, z, T)
                             : sigma_frequency_domain(model, weights, order, z, T);
    return value;
}

std::vector<double> convolution_measure_integral(const SpectralModel& model,
                                                 const WeightSpec& weights, int order) {
    const auto mu = limit_measure(weights);
    const int q = mu.q;
    std::vector<cdouble> acc(static_cast<std::size_t>(q) * q, cdouble(0.0, 0.0));
    for (const auto& atom : mu.atoms) {
        // overlap guard shares the admissibility tolerance
        for (const auto& sp : density_singular_points(model)) {
            double dist;
            if (model.discrete()) {
                const double w = detail::wrap_to_torus(atom.freq);
                dist = std::min(std::abs(detail::wrap_to_torus(w - sp.location)),
                                std::abs(detail::wrap_to_torus(w + sp.location)));
            } else {
                dist = std::min(std::abs(atom.freq - sp.location),
                                std::abs(atom.freq + sp.location));
            }
            if (dist < 1e-9)
                throw assumption_error("convolution_measure_integral: weight atom at " +
                                       std::to_string(atom.freq) +
                                       " overlaps the spectral singularity +/-" +
                                       std::to_string(sp.location) +
                                       "; the overlapping case is out of scope");
        }
        const double lam = model.discrete() ? detail::wrap_to_torus(atom.freq) : atom.freq;
        const double f = convolution_density_at(model, order, lam);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f * atom.matrix[k];
    }
    std::vector<double> out(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) {
        if (std::abs(acc[k].imag()) > 1e-9 * (1.0 + std::abs(acc[k].real())))
            throw numerical_error("convolution_measure_integral: nonvanishing imaginary part; "
                                  "the weight profile is not conjugate-closed");
        out[k] = acc[k].real();
    }
    return out;
}

double sigma_limit_squared(const SpectralModel& model, const WeightSpec& weights, int order,
                           const std::vector<double>& z) {
    const int q = weights.q();
    if (static_cast<int>(z.size()) != q)
        throw domain_error("sigma_limit_squared: z has the wrong dimension");
    double jfact = 1.0;
    for (int i = 2; i <= order; ++i) jfact *= i;
    const auto m = convolution_measure_integral(model, weights, order);
    double form = 0.0;
    for (int j = 0; j < q; ++j)
        for (int l = 0; l < q; ++l)
            form += z[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(l)] *
                    m[static_cast<std::size_t>(j) * q + l];
    return kTwoPi * jfact * form;
}

double LimitCovarianceResult::quadratic_form(const std::vector<double>& z) const {
    double acc = 0.0;
    for (int j = 0; j < q; ++j)
        for (int l = 0; l < q; ++l)
            acc += z[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(l)] * entry(j, l);
    return acc;
}

namespace {

// sup over lambda of |2 pi f^{*(j)}(lambda) - 1| for all j > d (discrete):
// bounded by 2 sum_{t>=1} |B(t)|^(d+1)
double flat_spectrum_deviation(const SpectralModel& model, int d) {
    const double p = static_cast<double>(d) + 1.0;
    const double alpha = model.min_alpha();
    if (alpha * p <= 1.0) return 1e300;
    double acc = 0.0;
    const long long N = 200000;
    for (long long t = 1; t <= N; ++t)
        acc += std::pow(std::abs(covariance(model, static_cast<double>(t))), p);
    // |B(t)| <= (1+t^2)^(-alpha/2): integral tail
    acc += std::pow(static_cast<double>(N), 1.0 - alpha * p) / (alpha * p - 1.0);
    return 2.0 * acc;
}

} // namespace

LimitCovarianceResult limit_covariance(const SpectralModel& model, const WeightSpec& weights,
                                       const HermiteExpansion& expansion, double tail_fraction,
                                       int d_cap, bool strict) {
    const int q = weights.q();
    LimitCovarianceResult result;
    result.q = q;
    result.xi.assign(static_cast<std::size_t>(q) * q, 0.0);
    result.tail_closure.assign(static_cast<std::size_t>(q) * q, 0.0);

    const int max_order = std::min(d_cap, expansion.truncation);
    if (expansion.rank > max_order)
        throw domain_error("limit_covariance: expansion truncation is below the Hermite rank");

    const auto mu = limit_measure(weights);
    std::vector<double> mu_mass(static_cast<std::size_t>(q) * q, 0.0);
    for (const auto& atom : mu.atoms)
        for (int j = 0; j < q; ++j)
            for (int l = 0; l < q; ++l)
                mu_mass[static_cast<std::size_t>(j) * q + l] +=
                    atom.matrix[static_cast<std::size_t>(j) * q + l].real();

    double factorial = 1.0;
    for (int k = 2; k <= expansion.rank; ++k) factorial *= k;

    double trace = 0.0;
    int d_used = expansion.rank;
    for (int j = expansion.rank; j <= max_order; ++j) {
        if (j > expansion.rank) factorial *= j;
        const double cj = expansion.coefficients[static_cast<std::size_t>(j)];
        d_used = j;
        if (cj != 0.0 && std::abs(cj) > 1e-300) {
            const double scale = kTwoPi * cj * cj / factorial;
            if (scale > 0.0) {
                auto m = convolution_measure_integral(model, weights, j);
                LimitCovarianceResult::OrderTerm term;
                term.order = j;
                term.matrix.resize(m.size());
                for (std::size_t k = 0; k < m.size(); ++k) term.matrix[k] = scale * m[k];
                for (std::size_t k = 0; k < m.size(); ++k) result.xi[k] += term.matrix[k];
                for (int diag = 0; diag < q; ++diag)
                    trace += term.matrix[static_cast<std::size_t>(diag) * q + diag];
                result.per_order.push_back(std::move(term));
            }
        }
        // adaptive stop once the Parseval tail is small relative to the trace
        const double tail = expansion.coefficient_tail(j);
        if (trace > 0.0 && tail <= tail_fraction * trace && j >= expansion.rank) break;
    }
    result.truncation = d_used;

    const double parseval_tail = expansion.coefficient_tail(d_used);
    if (model.discrete()) {
        // orders beyond d: 2 pi f^{*(j)} = 1 + O(sup |B|^(j)); close the series
        // with the flat-spectrum term tail * mu_mass
        for (std::size_t k = 0; k < result.tail_closure.size(); ++k) {
            result.tail_closure[k] = parseval_tail * mu_mass[k];
            result.xi[k] += result.tail_closure[k];
        }
        const double dev = flat_spectrum_deviation(model, d_used);
        double mass_scale = 0.0;
        for (int diag = 0; diag < q; ++diag)
            mass_scale = std::max(mass_scale, std::abs(mu_mass[static_cast<std::size_t>(diag) * q + diag]));
        result.tail_estimate = parseval_tail * std::min(dev, 1e300) * mass_scale;
    } else {
        // continuous time: high-order convolutions flatten to zero instead;
        // report the dropped mass bound without a closure
        double sup_f = 0.0;
        if (parseval_tail > 0.0) {
            const double p = static_cast<double>(d_used) + 1.0;
            if (model.min_alpha() * p > 1.0) {
                double acc = adaptive_simpson(
                    [&](double t) {
                        return std::pow(std::abs(covariance(model, t)), p);
                    },
                    0.0, 200.0, 1e-10);
                acc += std::pow(200.0, 1.0 - model.min_alpha() * p) /
                       (model.min_alpha() * p - 1.0);
                sup_f = 2.0 * acc; // sup 2 pi f^{*(j)} <= int |B|^(d+1)
            } else {
                sup_f = 1e300;
            }
        }
        double mass_scale = 0.0;
        for (int diag = 0; diag < q; ++diag)
            mass_scale = std::max(mass_scale, std::abs(mu_mass[static_cast<std::size_t>(diag) * q + diag]));
        result.tail_estimate = parseval_tail * sup_f * mass_scale;
    }

    // enforce exact symmetry
    for (int j = 0; j < q; ++j)
        for (int l = j + 1; l < q; ++l) {
            const double s = 0.5 * (result.entry(j, l) + result.entry(l, j));
            result.xi[static_cast<std::size_t>(j) * q + l] = s;
            result.xi[static_cast<std::size_t>(l) * q + j] = s;
        }

    double final_trace = 0.0;
    for (int diag = 0; diag < q; ++diag) final_trace += result.entry(diag, diag);
    result.under_truncated = result.tail_estimate > 0.10 * final_trace;
    if (result.under_truncated && strict)
        throw numerical_error("limit_covariance: tail estimate " +
                              std::to_string(result.tail_estimate) + " exceeds 10% of trace(Xi); "
                              "raise the truncation order");
    return result;
}

ConditionCReport check_condition_c(const SpectralModel& model, const WeightSpec& weights,
                                   const std::vector<int>& orders, double tol) {
    ConditionCReport rep;
    for (int j : orders) {
        const auto m = convolution_measure_integral(model, weights, j);
        const int q = weights.q();
        Eigen::MatrixXd mat(q, q);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) mat(a, b) = m[static_cast<std::size_t>(a) * q + b];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
        ConditionCReport::Row row;
        row.order = j;
        row.min_eigenvalue = es.eigenvalues().minCoeff();
        row.positive_definite = row.min_eigenvalue > tol;
        rep.all_positive = rep.all_positive && row.positive_definite;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace singspec
