#include "singspec/spectral_model.hpp"

#include "singspec/bessel.hpp"
#include "singspec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>

namespace singspec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

double torus_distance(double a, double b) {
    double d = std::abs(detail::wrap_to_torus(a - b));
    return d;
}

} // namespace

namespace detail {

double wrap_to_torus(double lambda) {
    double w = std::remainder(lambda, kTwoPi); // in [-pi, pi]
    if (w <= -kPi) w = kPi;
    return w;
}

double c1_constant(double alpha) {
    return std::pow(2.0, 0.5 * (1.0 - alpha)) / (std::sqrt(kPi) * std::tgamma(0.5 * alpha));
}

double c2_constant(double alpha) {
    return 1.0 / (2.0 * std::tgamma(alpha) * std::cos(0.5 * alpha * kPi));
}

double power_law_density(double beta, double u) {
    u = std::abs(u);
    const double nu = 0.5 * (beta - 1.0);
    if (u < 1e-300) {
        if (beta <= 1.0)
            throw domain_error("power_law_density: evaluation at the singular frequency 0 "
                               "with beta <= 1");
        // K_nu(u) u^nu -> Gamma(nu) 2^(nu-1) as u -> 0 for nu > 0
        return c1_constant(beta) * std::tgamma(nu) * std::pow(2.0, nu - 1.0);
    }
    const double k = bessel_k(nu, u);
    if (k == 0.0) return 0.0; // exponential underflow at large u
    return c1_constant(beta) * k * std::pow(u, nu);
}

} // namespace detail

SpectralModel::SpectralModel(std::vector<SpectralComponent> components, TimeDomain domain,
                             int fold_terms)
    : components_(std::move(components)), time_domain_(domain), fold_terms_(fold_terms) {
    if (components_.empty())
        throw domain_error("SpectralModel: at least one component is required");
    if (fold_terms_ < 1) throw domain_error("SpectralModel: fold_terms must be >= 1");
    double total = 0.0;
    double prev_kappa = -1.0;
    min_alpha_ = 1.0;
    for (const auto& c : components_) {
        if (!(c.alpha > 0.0 && c.alpha < 1.0))
            throw assumption_error("SpectralModel: alpha must lie in (0,1), got " +
                                   std::to_string(c.alpha));
        if (c.amplitude < 0.0)
            throw assumption_error("SpectralModel: amplitudes must be nonnegative");
        if (c.kappa < 0.0)
            throw assumption_error("SpectralModel: frequencies kappa must be nonnegative");
        if (c.kappa <= prev_kappa)
            throw assumption_error("SpectralModel: frequencies kappa must be strictly increasing");
        prev_kappa = c.kappa;
        total += c.amplitude;
        min_alpha_ = std::min(min_alpha_, c.alpha);
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw assumption_error("SpectralModel: amplitudes must sum to 1 (got " +
                               std::to_string(total) + "), so that B(0) = 1");
    if (discrete()) {
        for (const auto& c : components_)
            if (c.kappa > kPi + 1e-12)
                throw assumption_error(
                    "SpectralModel: discrete-time components require kappa in [0, pi]");
    }
}

double covariance(const SpectralModel& model, double t) {
    double b = 0.0;
    for (const auto& c : model.components())
        b += c.amplitude * std::cos(c.kappa * t) / std::pow(1.0 + t * t, 0.5 * c.alpha);
    return b;
}

namespace {

// continuous-time density of a single component at frequency lambda
double component_density(const SpectralComponent& c, double lambda) {
    return 0.5 * c.amplitude *
           (detail::power_law_density(c.alpha, lambda + c.kappa) +
            detail::power_law_density(c.alpha, lambda - c.kappa));
}

double continuous_density(const SpectralModel& model, double lambda) {
    double f = 0.0;
    for (const auto& c : model.components()) f += component_density(c, lambda);
    return f;
}

// symmetric fold sum_k g(lambda + 2 pi k); terms decay exponentially
template <typename G>
double fold_to_torus(const G& g, double lambda, int max_terms) {
    double acc = g(lambda);
    for (int k = 1; k <= max_terms; ++k) {
        const double term = g(lambda + kTwoPi * k) + g(lambda - kTwoPi * k);
        acc += term;
        if (k > 2 && std::abs(term) < 1e-16 * std::abs(acc)) break;
    }
    return acc;
}

void check_not_singular(const SpectralModel& model, double lambda) {
    for (const auto& sp : density_singular_points(model)) {
        const double d = model.discrete()
                             ? std::min(torus_distance(lambda, sp.location),
                                        torus_distance(lambda, -sp.location))
                             : std::min(std::abs(lambda - sp.location),
                                        std::abs(lambda + sp.location));
        if (d < 1e-12 * std::max(1.0, sp.location))
            throw domain_error("spectral_density: frequency " + std::to_string(lambda) +
                               " coincides with the singular point +/-" +
                               std::to_string(sp.location));
    }
}

} // namespace

std::vector<SingularPoint> density_singular_points(const SpectralModel& model) {
    std::vector<SingularPoint> points;
    auto add_term = [&](double loc, double alpha, double coeff) {
        for (auto& p : points) {
            if (std::abs(p.location - loc) < 1e-12) {
                p.terms.push_back({alpha, coeff});
                return;
            }
        }
        points.push_back({loc, {{alpha, coeff}}});
    };
    for (const auto& c : model.components()) {
        const double base = 0.5 * c.amplitude * detail::c2_constant(c.alpha);
        if (!model.discrete()) {
            if (c.kappa == 0.0)
                add_term(0.0, c.alpha, 2.0 * base);
            else
                add_term(c.kappa, c.alpha, base);
        } else {
            // torus representative in [0, pi]; +kappa and -kappa images merge
            // at 0 and pi, doubling the local coefficient
            const double rep = std::abs(detail::wrap_to_torus(c.kappa));
            const bool merged = (rep < 1e-12) || (std::abs(rep - kPi) < 1e-12);
            add_term(rep, c.alpha, merged ? 2.0 * base : base);
        }
    }
    std::sort(points.begin(), points.end(),
              [](const SingularPoint& a, const SingularPoint& b) { return a.location < b.location; });
    return points;
}

double spectral_density(const SpectralModel& model, double lambda) {
    if (model.discrete()) {
        if (lambda <= -kPi - 1e-12 || lambda > kPi + 1e-12)
            throw domain_error("spectral_density: discrete-time frequency must lie in (-pi, pi]");
        check_not_singular(model, lambda);
        return fold_to_torus([&](double u) { return continuous_density(model, u); }, lambda,
                             model.fold_terms());
    }
    check_not_singular(model, lambda);
    return continuous_density(model, lambda);
}

namespace {

// correction factor h(z) of the singular expansion, h(0+) = 0
double h_correction(double alpha, double z) {
    const double g1 = std::tgamma(0.5 * (alpha + 1.0));
    const double h1 = g1 / std::tgamma(0.5 * (3.0 - alpha)) * std::pow(0.5 * z, 1.0 - alpha);
    const double h2 = g1 / (4.0 * std::tgamma(0.5 * (3.0 + alpha))) * 0.25 * z * z;
    return h1 + h2;
}

double min_singular_gap(const std::vector<SingularPoint>& pts, bool torus) {
    // gaps among all mirrored locations
    std::vector<double> locs;
    for (const auto& p : pts) {
        locs.push_back(p.location);
        if (p.location > 1e-12) locs.push_back(-p.location);
    }
    std::sort(locs.begin(), locs.end());
    double gap = torus ? kTwoPi : 1e300;
    for (std::size_t i = 1; i < locs.size(); ++i) gap = std::min(gap, locs[i] - locs[i - 1]);
    if (torus && locs.size() >= 2)
        gap = std::min(gap, (kPi - locs.back()) + (locs.front() + kPi)); // wraparound
    return gap;
}

} // namespace

double density_asymptote(const SpectralModel& model, std::size_t component_index, double lambda,
                         double radius) {
    if (component_index >= model.components().size())
        throw domain_error("density_asymptote: component index out of range");
    const auto& comp = model.components()[component_index];

    // nearest singular image of this component (sign* kappa + 2 pi k*)
    double best_dist = 1e300;
    double best_center = 0.0;
    const int k_range = model.discrete() ? 2 : 0;
    for (int sign = -1; sign <= 1; sign += 2) {
        for (int k = -k_range; k <= k_range; ++k) {
            const double center = sign * comp.kappa + kTwoPi * k;
            const double d = std::abs(lambda - center);
            if (d < best_dist) {
                best_dist = d;
                best_center = center;
            }
        }
    }

    if (radius < 0.0) {
        const double gap = min_singular_gap(density_singular_points(model), model.discrete());
        radius = std::min(0.5, 0.25 * gap);
    }
    if (best_dist > radius)
        throw domain_error("density_asymptote: frequency is outside the configured neighborhood "
                           "(distance " +
                           std::to_string(best_dist) + " > radius " + std::to_string(radius) + ")");
    if (best_dist < 1e-300) best_dist = 1e-300;

    const bool at_origin = (comp.kappa == 0.0);
    // exact evaluation of everything except the singular image(s), which are
    // replaced by the truncated power-law expansion
    auto smooth_part = [&](double u) {
        double f = 0.0;
        for (std::size_t i = 0; i < model.components().size(); ++i) {
            const auto& c = model.components()[i];
            if (i == component_index) continue;
            f += component_density(c, u);
        }
        return f;
    };
    // the chosen component, with its nearest image excluded; a term evaluated
    // at u = lambda + 2*pi*k_fold is singular at lambda = sign*kappa - 2*pi*k_fold
    auto own_regular = [&](double u, int k_fold) {
        double f = 0.0;
        for (int sign = -1; sign <= 1; sign += 2) {
            if (at_origin && sign == 1) continue; // kappa=0: +/- terms coincide, handled once
            const double image = sign * comp.kappa - kTwoPi * k_fold;
            if (std::abs(image - best_center) < 1e-9) continue;
            f += 0.5 * comp.amplitude *
                 detail::power_law_density(comp.alpha, u - sign * comp.kappa) *
                 (at_origin ? 2.0 : 1.0);
        }
        return f;
    };

    double background;
    if (model.discrete()) {
        background = fold_to_torus([&](double u) { return smooth_part(u); }, lambda,
                                   model.fold_terms());
        // fold the chosen component by absolute shift index
        double own = own_regular(lambda, 0);
        for (int k = 1; k <= model.fold_terms(); ++k) {
            const double term =
                own_regular(lambda + kTwoPi * k, k) + own_regular(lambda - kTwoPi * k, -k);
            own += term;
            if (k > 2 && std::abs(term) < 1e-16 * (std::abs(own) + 1e-300)) break;
        }
        background += own;
    } else {
        background = smooth_part(lambda) + own_regular(lambda, 0);
    }

    const double mult = at_origin ? 2.0 : 1.0;
    const double coeff = mult * 0.5 * comp.amplitude * detail::c2_constant(comp.alpha);
    const double expansion =
        coeff * std::pow(best_dist, comp.alpha - 1.0) * (1.0 - h_correction(comp.alpha, best_dist));
    return background + expansion;
}

std::vector<CosPowerTerm> covariance_power_terms(const SpectralModel& model, int order) {
    if (order < 1) throw domain_error("covariance_power_terms: order must be >= 1");
    using Key = std::pair<long long, long long>;
    auto quantize = [](double x) { return static_cast<long long>(std::llround(x * 68719476736.0)); };

    std::vector<CosPowerTerm> current;
    for (const auto& c : model.components())
        current.push_back({c.amplitude, c.kappa, c.alpha});

    std::vector<CosPowerTerm> base = current;
    for (int step = 2; step <= order; ++step) {
        std::map<Key, CosPowerTerm> merged;
        auto accumulate = [&](double coeff, double freq, double beta) {
            freq = std::abs(freq);
            Key key{quantize(freq), quantize(beta)};
            auto it = merged.find(key);
            if (it == merged.end())
                merged.emplace(key, CosPowerTerm{coeff, freq, beta});
            else
                it->second.coeff += coeff;
        };
        for (const auto& t : current) {
            for (const auto& b : base) {
                const double coeff = 0.5 * t.coeff * b.coeff;
                const double beta = t.beta + b.beta;
                accumulate(coeff, t.freq + b.freq, beta);
                accumulate(coeff, t.freq - b.freq, beta);
            }
            if (merged.size() > 3000000)
                throw numerical_error("covariance_power_terms: expansion of B^j exceeds the term "
                                      "budget; reduce the truncation order or component count");
        }
        current.clear();
        current.reserve(merged.size());
        for (auto& [key, term] : merged) {
            (void)key;
            if (term.coeff != 0.0) current.push_back(term);
        }
    }
    return current;
}

namespace {

double cos_power_transform(const std::vector<CosPowerTerm>& terms, double lambda) {
    double f = 0.0;
    for (const auto& t : terms)
        f += 0.5 * t.coeff *
             (detail::power_law_density(t.beta, lambda - t.freq) +
              detail::power_law_density(t.beta, lambda + t.freq));
    return f;
}

void check_convolution_order(const SpectralModel& model, int order, bool conjecture_mode) {
    if (order < 1) throw domain_error("convolution_density: order must be >= 1");
    if (order >= 2 && model.min_alpha() * order <= 1.0 && !conjecture_mode)
        throw assumption_error(
            "convolution_density: alpha * j = " + std::to_string(model.min_alpha() * order) +
            " <= 1 violates (A4); the convolution f^*(j) need not be bounded. "
            "Enable conjecture_mode to evaluate anyway.");
}

} // namespace

double convolution_density_at(const SpectralModel& model, int order, double lambda,
                              bool conjecture_mode) {
    check_convolution_order(model, order, conjecture_mode);
    if (order == 1) return spectral_density(model, lambda);
    const auto terms = covariance_power_terms(model, order);
    if (model.discrete()) {
        if (lambda <= -kPi - 1e-12 || lambda > kPi + 1e-12)
            throw domain_error("convolution_density: discrete-time frequency must lie in (-pi, pi]");
        return fold_to_torus([&](double u) { return cos_power_transform(terms, u); }, lambda,
                             model.fold_terms());
    }
    return cos_power_transform(terms, lambda);
}

DensityGrid convolution_density(const SpectralModel& model, int order,
                                const std::vector<double>& frequencies, bool conjecture_mode) {
    check_convolution_order(model, order, conjecture_mode);
    DensityGrid grid;
    grid.domain = model.discrete() ? DensityGrid::Domain::Torus : DensityGrid::Domain::RealLine;
    grid.frequencies = frequencies;
    for (std::size_t i = 1; i < frequencies.size(); ++i)
        if (!(frequencies[i] > frequencies[i - 1]))
            throw domain_error("convolution_density: frequency grid must be strictly increasing");
    grid.values.reserve(frequencies.size());

    if (order == 1) {
        for (double lam : frequencies) grid.values.push_back(spectral_density(model, lam));
        return grid;
    }
    const auto terms = covariance_power_terms(model, order);
    for (double lam : frequencies) {
        double v;
        if (model.discrete())
            v = fold_to_torus([&](double u) { return cos_power_transform(terms, u); }, lam,
                              model.fold_terms());
        else
            v = cos_power_transform(terms, lam);
        grid.values.push_back(v);
    }
    return grid;
}

AssumptionReport validate_assumptions(const SpectralModel& model, int hermite_rank,
                                      bool conjecture_mode) {
    if (hermite_rank < 1) throw domain_error("validate_assumptions: Hermite rank must be >= 1");
    AssumptionReport rep;
    rep.alpha_min = model.min_alpha();
    rep.hermite_rank = hermite_rank;
    rep.conjecture_mode = conjecture_mode;
    rep.a4_i = (hermite_rank == 1 && rep.alpha_min > 0.5);
    rep.a4_ii = (rep.alpha_min * hermite_rank > 1.0);
    rep.passed = rep.a4_i || rep.a4_ii;

    std::ostringstream line;
    line << "(A4) alpha=" << rep.alpha_min << ", m=" << hermite_rank << ": ";
    if (rep.a4_i)
        line << "pass via (i) rank 1 and alpha > 1/2";
    else if (rep.a4_ii)
        line << "pass via (ii) alpha*m = " << rep.alpha_min * hermite_rank << " > 1";
    else
        line << "fail: rank-1 requires alpha > 1/2, otherwise alpha*m > 1";
    rep.lines.push_back(line.str());

    if (!rep.passed && conjecture_mode) {
        rep.passed = true;
        rep.conjecture_regime = true;
        rep.lines.push_back("conjecture regime: alpha in (0,1) admitted WITHOUT a normality "
                            "guarantee (final-comments conjecture)");
    }
    return rep;
}

namespace {

struct Window {
    double center;
    double halfwidth;
    std::vector<SingularTerm> terms;
};

// all singular locations (with mirrors / torus images) inside [lo, hi]
std::vector<Window> singular_windows(const SpectralModel& model, double lo, double hi,
                                     double delta) {
    std::vector<Window> out;
    const auto pts = density_singular_points(model);
    auto push = [&](double loc, const std::vector<SingularTerm>& terms) {
        if (loc > lo - 1e-12 && loc < hi + 1e-12) out.push_back({loc, delta, terms});
    };
    for (const auto& p : pts) {
        if (!model.discrete()) {
            push(p.location, p.terms);
            if (p.location > 1e-12) push(-p.location, p.terms);
        } else {
            for (int k = -2; k <= 2; ++k) {
                push(p.location + kTwoPi * k, p.terms);
                if (p.location > 1e-12) push(-p.location + kTwoPi * k, p.terms);
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Window& a, const Window& b) { return a.center < b.center; });
    // a point at 0 or pi can be reached both directly and through a mirror
    // image; keep a single window per location
    std::vector<Window> dedup;
    for (const auto& w : out) {
        if (!dedup.empty() && std::abs(dedup.back().center - w.center) < 1e-12) continue;
        dedup.push_back(w);
    }
    return dedup;
}

// integral of f * smooth over [lo, hi] with singular windows split out
double integrate_density_interval(const SpectralModel& model,
                                  const std::function<double(double)>& smooth, double lo,
                                  double hi, double tol) {
    const double gap = min_singular_gap(density_singular_points(model), model.discrete());
    const double delta = std::min(0.01 * std::max(1.0, gap), 0.25 * gap);
    auto windows = singular_windows(model, lo, hi, delta);

    auto f = [&](double u) { return spectral_density(model, u) * smooth(u); };

    double total = 0.0;
    double cursor = lo;
    for (const auto& w : windows) {
        const double a = std::max(lo, w.center - w.halfwidth);
        const double b = std::min(hi, w.center + w.halfwidth);
        if (a > cursor) total += adaptive_simpson(f, cursor, a, tol);
        // inside the window: analytic power-law head plus bounded remainders
        for (const auto& st : w.terms) {
            // int |u|^(alpha-1) du over the window, times smooth at the center
            const double left = w.center - a, right = b - w.center;
            const double head = st.coeff / st.alpha *
                                (std::pow(std::max(left, 0.0), st.alpha) +
                                 std::pow(std::max(right, 0.0), st.alpha));
            total += head * smooth(w.center);
            // smooth variation against the power law
            auto variation = [&](double u) {
                const double d = std::abs(u - w.center);
                if (d < 1e-14) return 0.0;
                return st.coeff * std::pow(d, st.alpha - 1.0) * (smooth(u) - smooth(w.center));
            };
            total += adaptive_simpson(variation, a, w.center, tol);
            total += adaptive_simpson(variation, w.center, b, tol);
        }
        auto remainder = [&](double u) {
            const double d = std::abs(u - w.center);
            if (d < 1e-12) return 0.0; // measure-zero point next to the singularity
            double sing = 0.0;
            for (const auto& st : w.terms) sing += st.coeff * std::pow(d, st.alpha - 1.0);
            return (spectral_density(model, u) - sing) * smooth(u);
        };
        const double eps = 1e-9 * std::max(1.0, std::abs(w.center));
        if (w.center - eps > a) total += adaptive_simpson(remainder, a, w.center - eps, tol);
        if (b > w.center + eps) total += adaptive_simpson(remainder, w.center + eps, b, tol);
        cursor = b;
    }
    if (cursor < hi) total += adaptive_simpson(f, cursor, hi, tol);
    return total;
}

} // namespace

double integrate_against_density(const SpectralModel& model,
                                 const std::function<double(double)>& smooth, double tol) {
    if (model.discrete()) {
        // shift the cut point away from singularities: integrate over one period
        const auto pts = density_singular_points(model);
        double cut = kPi;
        double best = -1.0;
        for (int i = 0; i < 64; ++i) {
            const double cand = -kPi + kTwoPi * (i + 0.5) / 64.0;
            double dist = 1e300;
            for (const auto& p : pts) {
                dist = std::min(dist, torus_distance(cand, p.location));
                dist = std::min(dist, torus_distance(cand, -p.location));
            }
            if (dist > best) {
                best = dist;
                cut = cand;
            }
        }
        auto wrapped_smooth = [&](double u) { return smooth(detail::wrap_to_torus(u)); };
        // split the full period at the cut point, staying inside (-pi, pi]
        double total = 0.0;
        total += integrate_density_interval(model, wrapped_smooth, cut, kPi, tol);
        // the remaining piece maps to [-pi, cut]
        total += integrate_density_interval(model, wrapped_smooth, -kPi, cut, tol);
        return total;
    }
    // continuous time: truncate where the exponentially decaying density is negligible
    double cap = model.components().back().kappa + 20.0;
    while (spectral_density(model, cap) > 1e-18) cap *= 1.5;
    return integrate_density_interval(model, smooth, -cap, cap, tol);
}

double integrate_density(const SpectralModel& model, double tol) {
    return integrate_against_density(model, [](double) { return 1.0; }, tol);
}

double integrate_density_over(const SpectralModel& model, double lo, double hi, double tol) {
    if (!(hi > lo)) return 0.0;
    return integrate_density_interval(model, [](double) { return 1.0; }, lo, hi, tol);
}

} // namespace singspec
