#include "singspec/io.hpp"

#include <fstream>
#include <sstream>

namespace singspec::io {

namespace {

TimeDomain domain_from_string(const std::string& s) {
    if (s == "discrete") return TimeDomain::Discrete;
    if (s == "continuous") return TimeDomain::Continuous;
    throw config_error("time_domain must be \"discrete\" or \"continuous\", got \"" + s + "\"");
}

std::string domain_to_string(TimeDomain d) {
    return d == TimeDomain::Discrete ? "discrete" : "continuous";
}

} // namespace

SpectralModel model_from_json(const json& j) {
    if (!j.contains("components") || !j["components"].is_array())
        throw config_error("model: missing \"components\" array");
    std::vector<SpectralComponent> components;
    for (const auto& c : j["components"]) {
        SpectralComponent sc;
        sc.amplitude = c.at("A").get<double>();
        sc.alpha = c.at("alpha").get<double>();
        sc.kappa = c.at("kappa").get<double>();
        components.push_back(sc);
    }
    const TimeDomain domain = domain_from_string(j.value("time_domain", "discrete"));
    const int fold = j.value("fold_terms", 64);
    return SpectralModel(std::move(components), domain, fold);
}

json model_to_json(const SpectralModel& model) {
    json j;
    j["time_domain"] = domain_to_string(model.time_domain());
    j["fold_terms"] = model.fold_terms();
    j["components"] = json::array();
    for (const auto& c : model.components())
        j["components"].push_back({{"A", c.amplitude}, {"alpha", c.alpha}, {"kappa", c.kappa}});
    return j;
}

WeightSpec weights_from_json(const json& j) {
    const TimeDomain domain = domain_from_string(j.value("time_domain", "discrete"));
    if (!j.contains("components") || !j["components"].is_array() || j["components"].empty())
        throw config_error("weights: missing \"components\" array");
    WeightSpec spec(domain);
    for (const auto& c : j["components"]) {
        const std::string kind = c.at("kind").get<std::string>();
        if (kind == "constant") {
            spec.add(WeightSpec::constant(domain).component(0));
        } else if (kind == "cosine") {
            spec.add(WeightSpec::cosine(c.at("delta").get<double>(), c.value("phase", 0.0), domain)
                         .component(0));
        } else if (kind == "sine") {
            spec.add(WeightSpec::sine(c.at("delta").get<double>(), domain).component(0));
        } else if (kind == "power_cosine") {
            spec.add(WeightSpec::power_cosine(c.at("beta").get<double>(),
                                              c.at("delta").get<double>(), c.value("phase", 0.0),
                                              domain)
                         .component(0));
        } else if (kind == "trig_gradient") {
            auto grad = WeightSpec::trig_regression_gradient(
                {{c.at("A").get<double>(), c.at("B").get<double>(), c.at("phi").get<double>()}},
                domain);
            for (int i = 0; i < grad.q(); ++i) spec.add(grad.component(i));
        } else if (kind == "tabulated") {
            spec.add(WeightSpec::tabulated(c.at("t").get<std::vector<double>>(),
                                           c.at("v").get<std::vector<double>>(), domain)
                         .component(0));
        } else {
            throw config_error("weights: unknown component kind \"" + kind + "\"");
        }
    }
    return spec;
}

PointwiseFn psi_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "hermite") return psi_hermite(j.at("order").get<int>());
    if (kind == "sign") return psi_sign();
    if (kind == "abs_centered") return psi_abs_centered();
    if (kind == "exp_centered") return psi_exp_centered(j.value("sigma", 1.0));
    if (kind == "polynomial")
        return psi_polynomial(j.at("coeffs").get<std::vector<double>>());
    if (kind == "tabulated")
        return psi_tabulated(j.at("x").get<std::vector<double>>(),
                             j.at("y").get<std::vector<double>>());
    throw config_error("psi: unknown kind \"" + kind + "\"");
}

json expansion_to_json(const HermiteExpansion& expansion) {
    return json{{"coeffs", expansion.coefficients},
                {"rank", expansion.rank},
                {"second_moment", expansion.second_moment},
                {"centered", expansion.centered}};
}

json limit_covariance_to_json(const LimitCovarianceResult& result) {
    json per_order = json::array();
    for (const auto& term : result.per_order)
        per_order.push_back({{"order", term.order}, {"matrix", term.matrix}});
    return json{{"q", result.q},
                {"xi", result.xi},
                {"per_order", per_order},
                {"truncation", result.truncation},
                {"tail_estimate", result.tail_estimate},
                {"tail_closure", result.tail_closure},
                {"under_truncated", result.under_truncated}};
}

json atomic_measure_to_json(const AtomicMeasure& measure) {
    json atoms = json::array();
    for (const auto& a : measure.atoms) {
        json matrix = json::array();
        for (const auto& v : a.matrix) matrix.push_back({{"re", v.real()}, {"im", v.imag()}});
        atoms.push_back({{"freq", a.freq}, {"matrix", matrix}});
    }
    return json{{"q", measure.q}, {"atoms", atoms}};
}

json mc_report_to_json(const MCReport& report) {
    json j;
    j["assumptions"] = {{"alpha", report.assumptions.alpha_min},
                        {"rank", report.assumptions.hermite_rank},
                        {"passed", report.assumptions.passed},
                        {"conjecture_regime", report.assumptions.conjecture_regime},
                        {"lines", report.assumptions.lines}};
    j["expansion"] = expansion_to_json(report.expansion);
    j["xi"] = limit_covariance_to_json(report.xi);
    j["horizons"] = json::array();
    for (const auto& h : report.horizons) {
        json directions = json::array();
        for (const auto& d : h.directions)
            directions.push_back({{"z", d.z},
                                  {"ks", d.stats.ks_distance},
                                  {"skewness", d.stats.skewness},
                                  {"excess_kurtosis", d.stats.excess_kurtosis},
                                  {"standardized_fourth", d.stats.standardized_fourth},
                                  {"fourth_se", d.stats.fourth_se},
                                  {"normal_ok", d.normal_ok}});
        json fourth = json::array();
        for (const auto& f : h.fourth)
            fourth.push_back({{"order", f.order},
                              {"estimate", f.estimate},
                              {"se", f.se},
                              {"raw_fourth", f.raw_fourth},
                              {"raw_se", f.raw_se}});
        j["horizons"].push_back({{"T", h.T},
                                 {"mean", h.mean},
                                 {"mean_se", h.mean_se},
                                 {"covariance", h.covariance},
                                 {"cov_max_rel_gap", h.cov_max_rel_gap},
                                 {"clipped_mass", h.clipped_mass},
                                 {"directions", directions},
                                 {"fourth", fourth},
                                 {"tail_discrepancy", h.tail_discrepancy},
                                 {"tail_bound", h.tail_bound}});
    }
    json contraction = json::array();
    for (const auto& c : report.contraction)
        contraction.push_back(
            {{"order", c.order}, {"p", c.p}, {"slope", c.slope}, {"norms_sq", c.norms_sq}});
    j["contraction"] = contraction;
    j["verdicts"] = {{"mean_zero", report.mean_zero_ok},
                     {"covariance", report.covariance_ok},
                     {"covariance_trend", report.covariance_trend_ok},
                     {"normality", report.normality_ok},
                     {"fourth_moment", report.fourth_moment_ok},
                     {"contraction_decay", report.contraction_decay_ok},
                     {"passed", report.passed}};
    j["runtime_seconds"] = report.runtime_seconds;
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    ExperimentConfig config{model_from_json(j.at("model")), weights_from_json(j.at("weights")),
                            psi_from_json(j.at("psi"))};
    config.psi_truncation = j.value("truncation", 40);
    for (const auto& t : j.at("horizons")) config.horizons.push_back(t.get<long long>());
    config.replicates = j.value("replicates", 1000);
    config.seed = j.value("seed", 0ULL);
    if (j.contains("tests")) {
        const auto& t = j["tests"];
        config.test_normality = t.value("normality", true);
        config.test_covariance = t.value("covariance", true);
        config.test_fourth_moment = t.value("fourth_moment", false);
        config.test_contraction = t.value("contraction_decay", false);
        config.tail_diagnostics = t.value("tail_diagnostics", false);
    }
    if (j.contains("fourth_moment_orders"))
        config.fourth_moment_orders = j["fourth_moment_orders"].get<std::vector<int>>();
    if (j.contains("z_directions"))
        config.z_directions = j["z_directions"].get<std::vector<std::vector<double>>>();
    config.conjecture_mode = j.value("conjecture_mode", false);
    config.strict = j.value("strict", false);
    config.threads = j.value("threads", 0);
    const std::string method = j.value("method", "circulant");
    if (method == "circulant")
        config.method = SimulationPlan::Method::CirculantEmbedding;
    else if (method == "cholesky")
        config.method = SimulationPlan::Method::CholeskyExact;
    else
        throw config_error("experiment: unknown method \"" + method + "\"");
    config.padding_factor = j.value("padding_factor", 4);
    config.embed_tolerance = j.value("embed_tolerance", 1e-8);
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        config.ks_threshold = t.value("ks", config.ks_threshold);
        config.skew_threshold = t.value("skewness", config.skew_threshold);
        config.kurtosis_threshold = t.value("kurtosis", config.kurtosis_threshold);
        config.cov_rel_threshold = t.value("covariance", config.cov_rel_threshold);
        config.fourth_moment_gap = t.value("fourth_moment", config.fourth_moment_gap);
    }
    return config;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file " + path);
    out << content;
}

std::string density_grid_csv(const DensityGrid& grid) {
    std::ostringstream os;
    os.precision(15);
    os << "lambda,value\n";
    for (std::size_t i = 0; i < grid.frequencies.size(); ++i)
        os << grid.frequencies[i] << "," << grid.values[i] << "\n";
    return os.str();
}

std::string matrix_measure_csv(const MatrixMeasureGrid& grid) {
    std::ostringstream os;
    os.precision(15);
    os << "lambda_low,lambda_high";
    for (int a = 0; a < grid.q; ++a)
        for (int b = 0; b < grid.q; ++b) os << ",re_" << a << b << ",im_" << a << b;
    os << "\n";
    for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
        os << grid.edges[cell] << "," << grid.edges[cell + 1];
        for (int a = 0; a < grid.q; ++a)
            for (int b = 0; b < grid.q; ++b) {
                const auto v = grid.entry(cell, a, b);
                os << "," << v.real() << "," << v.imag();
            }
        os << "\n";
    }
    return os.str();
}

std::string matrix_csv(const std::vector<double>& matrix, int q) {
    std::ostringstream os;
    os.precision(15);
    for (int a = 0; a < q; ++a) {
        for (int b = 0; b < q; ++b) {
            if (b) os << ",";
            os << matrix[static_cast<std::size_t>(a) * q + b];
        }
        os << "\n";
    }
    return os.str();
}

std::string report_plot_csv(const MCReport& report) {
    std::ostringstream os;
    os.precision(15);
    os << "horizon,statistic,value,stderr\n";
    for (const auto& h : report.horizons) {
        os << h.T << ",cov_max_rel_gap," << h.cov_max_rel_gap << ",\n";
        for (std::size_t i = 0; i < h.mean.size(); ++i)
            os << h.T << ",mean_" << i << "," << h.mean[i] << "," << h.mean_se[i] << "\n";
        for (std::size_t d = 0; d < h.directions.size(); ++d) {
            const auto& st = h.directions[d].stats;
            os << h.T << ",ks_dir" << d << "," << st.ks_distance << ",\n";
            os << h.T << ",skewness_dir" << d << "," << st.skewness << ",\n";
            os << h.T << ",excess_kurtosis_dir" << d << "," << st.excess_kurtosis << ",\n";
        }
        for (const auto& f : h.fourth)
            os << h.T << ",fourth_j" << f.order << "," << f.estimate << "," << f.se << "\n"
               << h.T << ",raw_fourth_j" << f.order << "," << f.raw_fourth << "," << f.raw_se << "\n";
    }
    for (const auto& c : report.contraction)
        for (std::size_t i = 0; i < c.norms_sq.size(); ++i)
            os << report.horizons[i].T << ",contraction_j" << c.order << "_p" << c.p << ","
               << c.norms_sq[i] << ",\n";
    return os.str();
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error("cannot parse " + path + ": " + e.what());
    }
    return j;
}

void apply_overrides(json& document, const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("override \"" + kv + "\" is not of the form key=value");
        std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        for (auto& ch : key)
            if (ch == '.') ch = '/';
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (...) {
            parsed = value; // plain string
        }
        document[json::json_pointer("/" + key)] = parsed;
    }
}

} // namespace singspec::io
