#include "singspec/mc_harness.hpp"

#include "singspec/diagrams.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace singspec {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730950488); }

} // namespace

NormalityStats normality_tests(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 100)
        throw domain_error("normality_tests: need at least 100 samples, got " + std::to_string(n));

    NormalityStats stats;
    stats.n = n;

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : samples) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (!(m2 > 0.0))
        throw domain_error("normality_tests: degenerate sample (zero variance)");

    stats.skewness = m3 / std::pow(m2, 1.5);
    stats.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    stats.standardized_fourth = m4 / (m2 * m2);

    // KS distance against the fitted normal
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double sd = std::sqrt(m2);
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = normal_cdf((sorted[i] - mean) / sd);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n) - u;
        const double lo = u - static_cast<double>(i) / static_cast<double>(n);
        ks = std::max({ks, hi, lo});
    }
    stats.ks_distance = ks;

    // jackknife standard error of m4/m2^2 from raw power sums
    double p1 = 0, p2 = 0, p3 = 0, p4 = 0;
    for (double v : samples) {
        p1 += v;
        p2 += v * v;
        p3 += v * v * v;
        p4 += v * v * v * v;
    }
    const double nm1 = static_cast<double>(n - 1);
    double theta_sum = 0.0, theta_sq_sum = 0.0;
    for (double v : samples) {
        const double q1 = (p1 - v) / nm1;
        const double q2 = (p2 - v * v) / nm1;
        const double q3 = (p3 - v * v * v) / nm1;
        const double q4 = (p4 - v * v * v * v) / nm1;
        const double c2 = q2 - q1 * q1;
        const double c4 = q4 - 4.0 * q1 * q3 + 6.0 * q1 * q1 * q2 - 3.0 * q1 * q1 * q1 * q1;
        const double theta = c4 / (c2 * c2);
        theta_sum += theta;
        theta_sq_sum += theta * theta;
    }
    const double theta_bar = theta_sum / static_cast<double>(n);
    const double var_jack =
        nm1 / static_cast<double>(n) * (theta_sq_sum - static_cast<double>(n) * theta_bar * theta_bar);
    stats.fourth_se = std::sqrt(std::max(var_jack, 0.0));
    return stats;
}

namespace {

struct ReplicateOutputs {
    std::vector<double> zeta;          // q
    std::vector<double> pi;            // one per fourth-moment order
    double tau_truncated_gap = 0.0;    // |tau - tau(d)| for the first direction
};

void worker_range(const Simulator& sim, const ExperimentConfig& config,
                  const HermiteExpansion& expansion, long long T,
                  const std::vector<std::vector<double>>& r_over_sigma,
                  const std::vector<int>& orders, int begin, int end,
                  std::vector<ReplicateOutputs>& out) {
    const int q = config.weights.q();
    for (int rep = begin; rep < end; ++rep) {
        const auto path = sim.simulate(rep);
        auto& slot = out[static_cast<std::size_t>(rep)];
        slot.zeta = weighted_functional(path, config.psi, config.weights,
                                        static_cast<double>(T));
        (void)q;
        slot.pi.assign(orders.size(), 0.0);
        for (std::size_t oi = 0; oi < orders.size(); ++oi) {
            const int j = orders[oi];
            double acc = 0.0;
            for (std::size_t t = 0; t < path.values.size(); ++t)
                acc += r_over_sigma[oi][t] * hermite_poly(j, path.values[t]);
            slot.pi[oi] = acc;
        }
        if (config.tail_diagnostics && !r_over_sigma.empty()) {
            // tau(d) via the truncated expansion along the first direction
            const auto& r = r_over_sigma.back(); // plain R_T stored last
            double tau_d = 0.0;
            double factorial = 1.0;
            std::vector<double> hsum(static_cast<std::size_t>(expansion.truncation) + 1, 0.0);
            for (std::size_t t = 0; t < path.values.size(); ++t) {
                const double x = path.values[t];
                double prev = 1.0, cur = x;
                for (int k = 1; k <= expansion.truncation; ++k) {
                    hsum[static_cast<std::size_t>(k)] += r[t] * cur;
                    const double next = x * cur - k * prev;
                    prev = cur;
                    cur = next;
                }
            }
            for (int k = 1; k <= expansion.truncation; ++k) {
                factorial *= k;
                tau_d += expansion.coefficients[static_cast<std::size_t>(k)] / factorial *
                         hsum[static_cast<std::size_t>(k)];
            }
            double tau = 0.0;
            for (std::size_t t = 0; t < path.values.size(); ++t)
                tau += r[t] * config.psi(path.values[t]);
            slot.tau_truncated_gap = std::abs(tau - tau_d);
        }
    }
}

} // namespace

MCReport run_experiment(const ExperimentConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    if (config.replicates < 100)
        throw domain_error("run_experiment: need at least 100 replicates for any verdict");
    if (config.horizons.empty()) throw domain_error("run_experiment: no horizons given");
    for (std::size_t i = 1; i < config.horizons.size(); ++i)
        if (config.horizons[i] <= config.horizons[i - 1])
            throw domain_error("run_experiment: horizons must be increasing");

    MCReport report;
    report.expansion = hermite_coefficients(config.psi, config.psi_truncation);
    report.assumptions =
        validate_assumptions(config.model, report.expansion.rank, config.conjecture_mode);
    if (!report.assumptions.passed)
        throw assumption_error("run_experiment: " + report.assumptions.lines.front());

    report.xi = limit_covariance(config.model, config.weights, report.expansion, 0.01, 60,
                                 config.strict);

    const int q = config.weights.q();
    std::vector<std::vector<double>> directions = config.z_directions;
    if (directions.empty()) {
        for (int i = 0; i < q; ++i) {
            std::vector<double> e(static_cast<std::size_t>(q), 0.0);
            e[static_cast<std::size_t>(i)] = 1.0;
            directions.push_back(std::move(e));
        }
        if (q > 1) directions.emplace_back(static_cast<std::size_t>(q), 1.0);
    }

    std::vector<int> orders = config.fourth_moment_orders;
    if (config.test_fourth_moment && orders.empty()) orders.push_back(report.expansion.rank);

    const double xi_scale = [&] {
        double m = 0.0;
        for (double v : report.xi.xi) m = std::max(m, std::abs(v));
        return m;
    }();

    double beta_d = 0.0;
    if (config.tail_diagnostics)
        beta_d = truncation_tail_bound(report.expansion, config.weights, config.model,
                                       directions.front(), report.expansion.truncation);

    int nthreads = config.threads > 0 ? config.threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;

    double prev_gap = 1e300;
    for (long long T : config.horizons) {
        SimulationPlan plan{config.model, T};
        plan.seed = config.seed;
        plan.method = config.method;
        plan.padding_factor = config.padding_factor;
        plan.embed_tolerance = config.embed_tolerance;
        Simulator sim(plan);

        // r_{T,j}(t) = R_T(t) / sigma(j, z0) for each fourth-moment order,
        // plus the raw R_T appended for the tail diagnostics
        std::vector<std::vector<double>> r_over_sigma;
        for (int j : orders) {
            auto r = weighted_direction(config.weights, directions.front(),
                                        static_cast<double>(T));
            const double sigma =
                std::sqrt(sigma_limit_squared(config.model, config.weights, j, directions.front()));
            for (double& v : r) v /= sigma;
            r_over_sigma.push_back(std::move(r));
        }
        if (config.tail_diagnostics)
            r_over_sigma.push_back(
                weighted_direction(config.weights, directions.front(), static_cast<double>(T)));

        std::vector<ReplicateOutputs> outputs(static_cast<std::size_t>(config.replicates));
        {
            std::vector<std::thread> pool;
            const int chunk = (config.replicates + nthreads - 1) / nthreads;
            for (int w = 0; w < nthreads; ++w) {
                const int begin = w * chunk;
                const int end = std::min(config.replicates, begin + chunk);
                if (begin >= end) break;
                pool.emplace_back(worker_range, std::cref(sim), std::cref(config),
                                  std::cref(report.expansion), T, std::cref(r_over_sigma),
                                  std::cref(orders), begin, end, std::ref(outputs));
            }
            for (auto& th : pool) th.join();
        }

        MCReport::HorizonResult hr;
        hr.T = T;
        hr.clipped_mass = sim.clipped_mass();
        hr.mean.assign(static_cast<std::size_t>(q), 0.0);
        hr.mean_se.assign(static_cast<std::size_t>(q), 0.0);
        hr.covariance.assign(static_cast<std::size_t>(q) * q, 0.0);

        const double R = static_cast<double>(config.replicates);
        for (const auto& o : outputs)
            for (int i = 0; i < q; ++i) hr.mean[static_cast<std::size_t>(i)] += o.zeta[static_cast<std::size_t>(i)];
        for (int i = 0; i < q; ++i) hr.mean[static_cast<std::size_t>(i)] /= R;
        for (const auto& o : outputs) {
            for (int i = 0; i < q; ++i) {
                const double di = o.zeta[static_cast<std::size_t>(i)] - hr.mean[static_cast<std::size_t>(i)];
                hr.mean_se[static_cast<std::size_t>(i)] += di * di;
                for (int l = 0; l < q; ++l) {
                    const double dl =
                        o.zeta[static_cast<std::size_t>(l)] - hr.mean[static_cast<std::size_t>(l)];
                    hr.covariance[static_cast<std::size_t>(i) * q + l] += di * dl;
                }
            }
        }
        for (int i = 0; i < q; ++i)
            hr.mean_se[static_cast<std::size_t>(i)] =
                std::sqrt(hr.mean_se[static_cast<std::size_t>(i)] / (R - 1.0) / R);
        for (auto& v : hr.covariance) v /= R - 1.0;

        double worst = 0.0;
        for (std::size_t k = 0; k < hr.covariance.size(); ++k)
            worst = std::max(worst, std::abs(hr.covariance[k] - report.xi.xi[k]));
        hr.cov_max_rel_gap = (xi_scale > 0.0) ? worst / xi_scale : worst;

        // mean-zero verdict: within 4 standard errors
        for (int i = 0; i < q; ++i) {
            if (std::abs(hr.mean[static_cast<std::size_t>(i)]) >
                4.0 * hr.mean_se[static_cast<std::size_t>(i)])
                report.mean_zero_ok = false;
        }

        if (config.test_normality) {
            for (const auto& z : directions) {
                MCReport::DirectionResult dr;
                dr.z = z;
                std::vector<double> proj(static_cast<std::size_t>(config.replicates));
                for (int rep = 0; rep < config.replicates; ++rep) {
                    double acc = 0.0;
                    for (int i = 0; i < q; ++i)
                        acc += z[static_cast<std::size_t>(i)] *
                               outputs[static_cast<std::size_t>(rep)].zeta[static_cast<std::size_t>(i)];
                    proj[static_cast<std::size_t>(rep)] = acc;
                }
                dr.stats = normality_tests(proj);
                dr.normal_ok = dr.stats.ks_distance < config.ks_threshold &&
                               std::abs(dr.stats.skewness) < config.skew_threshold &&
                               std::abs(dr.stats.excess_kurtosis) < config.kurtosis_threshold;
                hr.directions.push_back(std::move(dr));
            }
        }

        for (std::size_t oi = 0; oi < orders.size(); ++oi) {
            std::vector<double> pis(static_cast<std::size_t>(config.replicates));
            for (int rep = 0; rep < config.replicates; ++rep)
                pis[static_cast<std::size_t>(rep)] = outputs[static_cast<std::size_t>(rep)].pi[oi];
            const auto st = normality_tests(pis);
            MCReport::FourthMomentResult fm;
            fm.order = orders[oi];
            fm.estimate = st.standardized_fourth;
            fm.se = st.fourth_se;
            // the kernel already carries the sigma(j,z) normalization, so the
            // plain fourth moment estimates E[(I_n(f_{j,T}))^4]
            double raw = 0.0, raw_sq = 0.0;
            for (double v : pis) {
                const double p4 = v * v * v * v;
                raw += p4;
                raw_sq += p4 * p4;
            }
            raw /= R;
            raw_sq /= R;
            fm.raw_fourth = raw;
            fm.raw_se = std::sqrt(std::max(raw_sq - raw * raw, 0.0) / R);
            hr.fourth.push_back(fm);
        }

        if (config.tail_diagnostics) {
            double worst_gap = 0.0;
            for (const auto& o : outputs) worst_gap = std::max(worst_gap, o.tau_truncated_gap);
            hr.tail_discrepancy = worst_gap;
            hr.tail_bound = beta_d;
        }

        // covariance gap trend: nonincreasing within twice the MC noise scale
        if (config.test_covariance) {
            if (hr.cov_max_rel_gap > prev_gap + 2.0 * std::sqrt(2.0 / R))
                report.covariance_trend_ok = false;
            prev_gap = hr.cov_max_rel_gap;
        }
        report.horizons.push_back(std::move(hr));
    }

    // final-horizon verdicts
    const auto& last = report.horizons.back();
    if (config.test_covariance)
        report.covariance_ok = last.cov_max_rel_gap <= config.cov_rel_threshold;
    if (config.test_normality) {
        for (const auto& dr : last.directions)
            report.normality_ok = report.normality_ok && dr.normal_ok;
    }
    if (config.test_fourth_moment) {
        for (const auto& fm : last.fourth)
            report.fourth_moment_ok = report.fourth_moment_ok &&
                                      std::abs(fm.raw_fourth - 3.0) <= config.fourth_moment_gap;
    }

    if (config.test_contraction) {
        for (int j : orders) {
            if (j < 2) continue;
            for (int p = 1; p < j; ++p) {
                MCReport::ContractionRow row;
                row.order = j;
                row.p = p;
                std::vector<double> logT, logN;
                for (long long T : config.horizons) {
                    const double nsq = contraction_norm_sq(config.model, config.weights, j, p,
                                                           directions.front(), T);
                    row.norms_sq.push_back(nsq);
                    logT.push_back(std::log(static_cast<double>(T)));
                    logN.push_back(std::log(nsq));
                }
                double mx = 0, my = 0;
                for (std::size_t i = 0; i < logT.size(); ++i) {
                    mx += logT[i];
                    my += logN[i];
                }
                mx /= static_cast<double>(logT.size());
                my /= static_cast<double>(logT.size());
                double sxy = 0, sxx = 0;
                for (std::size_t i = 0; i < logT.size(); ++i) {
                    sxy += (logT[i] - mx) * (logN[i] - my);
                    sxx += (logT[i] - mx) * (logT[i] - mx);
                }
                row.slope = sxy / sxx;
                report.contraction_decay_ok = report.contraction_decay_ok && row.slope < 0.0;
                report.contraction.push_back(std::move(row));
            }
        }
    }

    report.passed = report.mean_zero_ok && report.covariance_ok && report.covariance_trend_ok &&
                    report.normality_ok && report.fourth_moment_ok &&
                    report.contraction_decay_ok;
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

} // namespace singspec
