#include "singspec/gaussian_sim.hpp"

#include "singspec/fft.hpp"
#include "singspec/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace singspec {

struct Simulator::Impl {
    explicit Impl(SimulationPlan p) : plan(std::move(p)) {}

    SimulationPlan plan;
    // circulant route
    std::size_t m = 0;
    std::vector<double> scaled_sqrt_eigen; // sqrt(max(lambda,0) / m)
    double clipped_mass = 0.0;
    // cholesky route
    Eigen::MatrixXd chol;
};

namespace {

void prepare_circulant(Simulator::Impl& impl) {
    const auto& plan = impl.plan;
    const long long n = plan.n_points;
    std::size_t m = 1;
    const std::size_t target =
        static_cast<std::size_t>(std::max<long long>(2 * n, plan.padding_factor * n));
    while (m < target) m <<= 1;
    impl.m = m;

    std::vector<std::complex<double>> row(m, 0.0);
    const std::size_t half = m / 2;
    for (std::size_t k = 0; k <= half; ++k) {
        const double c = covariance(plan.model, plan.step * static_cast<double>(k));
        row[k] = c;
        if (k > 0 && k < half) row[m - k] = c;
    }
    fft::forward(row);

    double negative = 0.0, total = 0.0;
    impl.scaled_sqrt_eigen.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lambda = row[k].real();
        total += std::abs(lambda);
        if (lambda < 0.0) negative += -lambda;
        impl.scaled_sqrt_eigen[k] =
            std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
    }
    impl.clipped_mass = (total > 0.0) ? negative / total : 0.0;
    if (impl.clipped_mass > plan.embed_tolerance)
        throw numerical_error(
            "circulant embedding clipped eigenvalue mass " + std::to_string(impl.clipped_mass) +
            " exceeds the tolerance " + std::to_string(plan.embed_tolerance) +
            "; increase padding_factor (currently " + std::to_string(plan.padding_factor) + ")");
}

void prepare_cholesky(Simulator::Impl& impl) {
    const auto& plan = impl.plan;
    const long long n = plan.n_points;
    if (n > 8192)
        throw numerical_error("CholeskyExact is a desk-scale method; use CirculantEmbedding for "
                              "N > 8192");
    Eigen::MatrixXd cov(n, n);
    for (long long i = 0; i < n; ++i)
        for (long long j = 0; j <= i; ++j) {
            const double c = covariance(plan.model, plan.step * static_cast<double>(i - j));
            cov(i, j) = c;
            cov(j, i) = c;
        }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw numerical_error("CholeskyExact: covariance factorization failed (matrix is "
                              "numerically not positive definite)");
    impl.chol = llt.matrixL();
}

} // namespace

Simulator::Simulator(SimulationPlan plan) {
    if (plan.n_points < 2) throw domain_error("SimulationPlan: need at least N = 2 points");
    if (!(plan.step > 0.0)) throw domain_error("SimulationPlan: step must be positive");
    if (plan.padding_factor < 2) throw domain_error("SimulationPlan: padding_factor must be >= 2");
    if (plan.model.discrete()) plan.step = 1.0;
    impl_ = std::make_unique<Impl>(std::move(plan));
    if (impl_->plan.method == SimulationPlan::Method::CirculantEmbedding)
        prepare_circulant(*impl_);
    else
        prepare_cholesky(*impl_);
}

Simulator::~Simulator() = default;

const SimulationPlan& Simulator::plan() const { return impl_->plan; }

double Simulator::clipped_mass() const { return impl_->clipped_mass; }

SamplePath Simulator::simulate(long long replicate_id) const {
    const auto& plan = impl_->plan;
    SamplePath path;
    path.replicate_id = replicate_id;
    path.domain = plan.model.time_domain();
    path.step = plan.step;
    const std::size_t n = static_cast<std::size_t>(plan.n_points);

    GaussianStream gauss(plan.seed, static_cast<std::uint64_t>(replicate_id));

    if (plan.method == SimulationPlan::Method::CholeskyExact) {
        Eigen::VectorXd z(plan.n_points);
        for (long long i = 0; i < plan.n_points; ++i) z(i) = gauss.next();
        Eigen::VectorXd x = impl_->chol * z;
        path.values.assign(x.data(), x.data() + plan.n_points);
        return path;
    }

    const std::size_t m = impl_->m;
    std::vector<std::complex<double>> buf(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double u = gauss.next();
        const double v = gauss.next();
        buf[k] = impl_->scaled_sqrt_eigen[k] * std::complex<double>(u, v);
    }
    fft::forward(buf);
    path.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) path.values[i] = buf[i].real();
    return path;
}

SamplePath simulate(const SimulationPlan& plan, long long replicate_id) {
    Simulator sim(plan);
    return sim.simulate(replicate_id);
}

namespace {

std::vector<double> functional_impl(const SamplePath& path, const PointwiseFn& psi,
                                    const WeightSpec& weights, double T, int stride,
                                    std::vector<double>* norms_out) {
    const int q = weights.q();
    if ((path.domain == TimeDomain::Discrete) != weights.discrete())
        throw domain_error("weighted_functional: path and weights disagree on the time domain");
    if (T > path.max_time() + 1e-12)
        throw domain_error("weighted_functional: horizon T = " + std::to_string(T) +
                           " exceeds the path length " + std::to_string(path.max_time()));

    std::vector<double> out(static_cast<std::size_t>(q), 0.0);
    std::vector<double> norms(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) norms[static_cast<std::size_t>(i)] = weight_norm(weights, i, T);
    if (norms_out) *norms_out = norms;

    if (path.domain == TimeDomain::Discrete) {
        const long long n = static_cast<long long>(std::llround(T));
        for (long long t = 1; t <= n; ++t) {
            const double p = psi(path.values[static_cast<std::size_t>(t - 1)]);
            for (int i = 0; i < q; ++i)
                out[static_cast<std::size_t>(i)] +=
                    weights.eval(i, static_cast<double>(t)) * p;
        }
    } else {
        const double h = path.step * stride;
        const std::size_t last =
            static_cast<std::size_t>(std::floor(T / path.step + 1e-9));
        for (std::size_t g = 0; g <= last; g += static_cast<std::size_t>(stride)) {
            const double t = path.time_of(g);
            const double p = psi(path.values[g]);
            const double wq = (g == 0 || g + stride > last) ? 0.5 : 1.0;
            for (int i = 0; i < q; ++i)
                out[static_cast<std::size_t>(i)] += wq * h * weights.eval(i, t) * p;
        }
    }
    for (int i = 0; i < q; ++i) out[static_cast<std::size_t>(i)] /= norms[static_cast<std::size_t>(i)];
    return out;
}

} // namespace

std::vector<double> weighted_functional(const SamplePath& path, const PointwiseFn& psi,
                                        const WeightSpec& weights, double T) {
    return functional_impl(path, psi, weights, T, 1, nullptr);
}

std::vector<double> weighted_functional_with_error(const SamplePath& path, const PointwiseFn& psi,
                                                   const WeightSpec& weights, double T,
                                                   std::vector<double>& quadrature_error) {
    auto full = functional_impl(path, psi, weights, T, 1, nullptr);
    quadrature_error.assign(full.size(), 0.0);
    if (path.domain == TimeDomain::Continuous) {
        const auto coarse = functional_impl(path, psi, weights, T, 2, nullptr);
        for (std::size_t i = 0; i < full.size(); ++i)
            quadrature_error[i] = std::abs(full[i] - coarse[i]);
    }
    return full;
}

} // namespace singspec
