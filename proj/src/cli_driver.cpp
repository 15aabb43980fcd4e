#include "singspec/cli.hpp"

#include "singspec/diagrams.hpp"
#include "singspec/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace singspec {

namespace {

namespace fs = std::filesystem;
using io::json;
constexpr double kPi = 3.14159265358979323846;

std::string joined(const fs::path& dir, const std::string& name) {
    return (dir / name).string();
}

std::vector<double> default_grid(const SpectralModel& model, int points) {
    std::vector<double> freqs;
    double hi;
    if (model.discrete()) {
        hi = kPi;
    } else {
        hi = model.components().back().kappa + 10.0;
    }
    // stay off the exact singular frequencies with a half-cell offset
    for (int i = 0; i < points; ++i)
        freqs.push_back(-hi + 2.0 * hi * (i + 0.5) / points);
    return freqs;
}

int run_spectrum(const json& config, const fs::path& out_dir) {
    const auto model = io::model_from_json(config.at("model"));
    const int points = config.value("grid_points", 1024);
    std::vector<int> orders = config.value("orders", std::vector<int>{1, 2});
    const bool conjecture = config.value("conjecture_mode", false);
    for (int order : orders) {
        const auto grid = convolution_density(model, order, default_grid(model, points), conjecture);
        const std::string name = "density_conv" + std::to_string(order) + ".csv";
        io::write_text_file(joined(out_dir, name), io::density_grid_csv(grid));
        std::cout << "spectrum: wrote " << name << " (" << points << " points)"
                  << (conjecture ? " [conjecture regime]" : "") << "\n";
    }
    return 0;
}

int run_simulate(const json& config, const fs::path& out_dir) {
    SimulationPlan plan{io::model_from_json(config.at("model")),
                        config.at("n_points").get<long long>()};
    plan.step = config.value("step", 1.0);
    plan.seed = config.value("seed", 0ULL);
    plan.padding_factor = config.value("padding_factor", 4);
    plan.embed_tolerance = config.value("embed_tolerance", 1e-8);
    if (config.value("method", "circulant") == "cholesky")
        plan.method = SimulationPlan::Method::CholeskyExact;
    const int replicates = config.value("replicates", 1);

    Simulator sim(plan);
    std::ostringstream csv;
    csv.precision(15);
    for (int r = 0; r < replicates; ++r) {
        if (r) csv << ",";
        csv << "replicate_" << r;
    }
    csv << "\n";
    std::vector<SamplePath> paths;
    for (int r = 0; r < replicates; ++r) paths.push_back(sim.simulate(r));
    for (long long i = 0; i < plan.n_points; ++i) {
        for (int r = 0; r < replicates; ++r) {
            if (r) csv << ",";
            csv << paths[static_cast<std::size_t>(r)].values[static_cast<std::size_t>(i)];
        }
        csv << "\n";
    }
    io::write_text_file(joined(out_dir, "paths.csv"), csv.str());

    json echo = config;
    echo["clipped_mass"] = sim.clipped_mass();
    io::write_text_file(joined(out_dir, "plan.json"), echo.dump(2) + "\n");
    std::cout << "simulate: wrote paths.csv (" << replicates << " x " << plan.n_points
              << "), clipped eigenvalue mass " << sim.clipped_mass() << "\n";
    return 0;
}

int run_hermite(const json& config, const fs::path& out_dir) {
    const auto psi = io::psi_from_json(config.at("psi"));
    const int d = config.value("truncation", 40);
    const bool center = config.value("auto_center", false);
    const auto expansion = hermite_coefficients(psi, d, center);
    io::write_text_file(joined(out_dir, "expansion.json"),
                        io::expansion_to_json(expansion).dump(2) + "\n");
    std::cout << "hermite: rank " << expansion.rank << ", E psi^2 = " << expansion.second_moment
              << ", wrote expansion.json\n";
    return 0;
}

int run_measure(const json& config, const fs::path& out_dir) {
    const auto weights = io::weights_from_json(config.at("weights"));
    const int cells = config.value("cells", 256);
    std::vector<double> edges;
    const double hi = weights.discrete() ? kPi : config.value("lambda_max", 16.0);
    for (int i = 0; i <= cells; ++i) edges.push_back(-hi + 2.0 * hi * i / cells);

    for (const auto& t : config.at("horizons")) {
        const double T = t.get<double>();
        const auto grid = matrix_measure(weights, T, edges);
        const std::string name = "measure_T" + std::to_string(static_cast<long long>(T)) + ".csv";
        io::write_text_file(joined(out_dir, name), io::matrix_measure_csv(grid));
        std::cout << "measure: wrote " << name << "\n";
    }

    if (weights.has_closed_limit()) {
        const auto mu = limit_measure(weights);
        io::write_text_file(joined(out_dir, "limit_measure.json"),
                            io::atomic_measure_to_json(mu).dump(2) + "\n");
        std::cout << "measure: wrote limit_measure.json (" << mu.atoms.size() << " atoms)\n";
    }

    if (config.contains("model")) {
        const auto model = io::model_from_json(config["model"]);
        std::vector<double> horizons;
        for (const auto& t : config.at("horizons")) horizons.push_back(t.get<double>());
        const auto rep = check_b2_b3(weights, model, horizons);
        json rows = json::array();
        for (const auto& r : rep.b3)
            rows.push_back({{"condition", "B3"},
                            {"component", r.component},
                            {"ratios", r.ratios},
                            {"constant", r.constant},
                            {"bounded", r.bounded}});
        for (const auto& r : rep.b2)
            rows.push_back({{"condition", "B2"},
                            {"component", r.component},
                            {"singularity", r.singularity},
                            {"ratios", r.ratios},
                            {"constant", r.constant},
                            {"bounded", r.bounded}});
        json out{{"horizons", rep.horizons}, {"rows", rows}, {"all_bounded", rep.all_bounded}};
        io::write_text_file(joined(out_dir, "conditions_b2_b3.json"), out.dump(2) + "\n");
        std::cout << "measure: conditions B2/B3 " << (rep.all_bounded ? "bounded" : "UNBOUNDED")
                  << ", wrote conditions_b2_b3.json\n";
    }
    return 0;
}

int run_limit_cov(const json& config, const fs::path& out_dir, const std::string& format) {
    const auto model = io::model_from_json(config.at("model"));
    const auto weights = io::weights_from_json(config.at("weights"));
    const auto psi = io::psi_from_json(config.at("psi"));
    const auto expansion = hermite_coefficients(psi, config.value("truncation", 40),
                                                config.value("auto_center", false));
    const auto result = limit_covariance(model, weights, expansion,
                                         config.value("tail_fraction", 0.01),
                                         config.value("order_cap", 60),
                                         config.value("strict", false));
    io::write_text_file(joined(out_dir, "xi.json"),
                        io::limit_covariance_to_json(result).dump(2) + "\n");
    if (format == "csv")
        io::write_text_file(joined(out_dir, "xi.csv"), io::matrix_csv(result.xi, result.q));
    std::cout << "limit-cov: q = " << result.q << ", truncation " << result.truncation
              << ", tail estimate " << result.tail_estimate << ", wrote xi.json"
              << (format == "csv" ? " and xi.csv" : "") << "\n";
    if (result.under_truncated)
        std::cout << "limit-cov: WARNING tail estimate exceeds 10% of trace(Xi)\n";
    return 0;
}

int run_diagrams(const json& config, const std::string& order_flag, const fs::path& out_dir) {
    std::vector<int> order;
    std::string source = order_flag;
    if (source.empty() && config.contains("order")) {
        for (const auto& v : config["order"]) order.push_back(v.get<int>());
    } else {
        std::stringstream ss(source);
        std::string tok;
        while (std::getline(ss, tok, ',')) order.push_back(std::stoi(tok));
    }
    if (order.empty()) throw config_error("diagrams: provide --order l1,l2,... or config order");

    const auto diagrams = enumerate_diagrams(order);
    long long regular = 0;
    for (const auto& d : diagrams)
        if (classify_regular(d)) ++regular;
    std::cout << "diagrams: |L| = " << diagrams.size() << ", |L*| = " << regular << "\n";

    json out;
    out["order"] = order;
    out["count"] = diagrams.size();
    out["regular_count"] = regular;
    json list = json::array();
    const std::size_t cap = 4096; // keep fixture dumps small
    for (std::size_t i = 0; i < diagrams.size() && i < cap; ++i) {
        json edges = json::array();
        for (const auto& e : diagrams[i].edges) edges.push_back({e.first, e.second});
        list.push_back({{"edges", edges}, {"regular", classify_regular(diagrams[i])}});
    }
    out["diagrams"] = list;
    io::write_text_file(joined(out_dir, "diagrams.json"), out.dump(2) + "\n");
    return 0;
}

int run_contraction(const json& config, const fs::path& out_dir) {
    const auto model = io::model_from_json(config.at("model"));
    const auto weights = io::weights_from_json(config.at("weights"));
    const int order = config.at("order").get<int>();
    std::vector<double> z = config.value("z", std::vector<double>{});
    if (z.empty()) z.assign(static_cast<std::size_t>(weights.q()), 1.0);

    std::ostringstream csv;
    csv.precision(15);
    csv << "T,p,norm_sq\n";
    for (int p = 1; p < order; ++p) {
        std::vector<double> logT, logN;
        for (const auto& t : config.at("horizons")) {
            const long long T = t.get<long long>();
            const double nsq = contraction_norm_sq(model, weights, order, p, z, T);
            csv << T << "," << p << "," << nsq << "\n";
            logT.push_back(std::log(static_cast<double>(T)));
            logN.push_back(std::log(nsq));
        }
        double mx = 0, my = 0, sxy = 0, sxx = 0;
        for (double v : logT) mx += v;
        for (double v : logN) my += v;
        mx /= static_cast<double>(logT.size());
        my /= static_cast<double>(logN.size());
        for (std::size_t i = 0; i < logT.size(); ++i) {
            sxy += (logT[i] - mx) * (logN[i] - my);
            sxx += (logT[i] - mx) * (logT[i] - mx);
        }
        std::cout << "contraction: j = " << order << ", p = " << p
                  << ", fitted log-log slope " << sxy / sxx << "\n";
    }
    io::write_text_file(joined(out_dir, "contraction.csv"), csv.str());
    return 0;
}

int run_verify(const json& config, const fs::path& out_dir) {
    const auto experiment = io::experiment_from_json(config);
    const auto report = run_experiment(experiment);
    io::write_text_file(joined(out_dir, "report.json"),
                        io::mc_report_to_json(report).dump(2) + "\n");
    io::write_text_file(joined(out_dir, "report.csv"), io::report_plot_csv(report));
    for (const auto& h : report.horizons)
        std::cout << "verify: T = " << h.T << ", cov gap " << h.cov_max_rel_gap
                  << ", mean[0] " << h.mean[0] << "\n";
    std::cout << "verify: verdicts mean_zero=" << report.mean_zero_ok
              << " covariance=" << report.covariance_ok
              << " normality=" << report.normality_ok
              << " fourth_moment=" << report.fourth_moment_ok
              << " overall=" << (report.passed ? "PASS" : "FAIL") << "\n";
    return 0;
}

} // namespace

int dispatch(const CliInvocation& invocation) {
    try {
        fs::path out_dir = invocation.output_dir;
        if (out_dir.empty()) {
            const char* env = std::getenv("SINGSPEC_OUT");
            out_dir = env ? env : ".";
        }
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!fs::is_directory(out_dir))
            throw config_error("output directory " + out_dir.string() + " is not writable");

        json config;
        if (!invocation.config_path.empty()) {
            config = io::load_json_file(invocation.config_path);
            io::apply_overrides(config, invocation.overrides);
            if (invocation.has_seed_override) config["seed"] = invocation.seed_override;
        } else if (invocation.subcommand != "diagrams") {
            throw config_error("subcommand " + invocation.subcommand + " requires --config");
        }

        if (invocation.subcommand == "spectrum") return run_spectrum(config, out_dir);
        if (invocation.subcommand == "simulate") return run_simulate(config, out_dir);
        if (invocation.subcommand == "hermite") return run_hermite(config, out_dir);
        if (invocation.subcommand == "measure") return run_measure(config, out_dir);
        if (invocation.subcommand == "limit-cov")
            return run_limit_cov(config, out_dir, invocation.format);
        if (invocation.subcommand == "diagrams")
            return run_diagrams(config, invocation.order, out_dir);
        if (invocation.subcommand == "contraction") return run_contraction(config, out_dir);
        if (invocation.subcommand == "verify") return run_verify(config, out_dir);
        throw config_error("unknown subcommand \"" + invocation.subcommand + "\"");
    } catch (const assumption_error& e) {
        std::cerr << "assumption violation: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const config_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace singspec
