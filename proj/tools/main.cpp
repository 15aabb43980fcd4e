#include "singspec/cli.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"weighted nonlinear functionals of Gaussian processes with singular spectra"};
    app.require_subcommand(1);

    singspec::CliInvocation invocation;

    const std::vector<std::string> names{"spectrum",  "simulate", "hermite",     "measure",
                                         "limit-cov", "diagrams", "contraction", "verify"};
    const std::vector<std::string> blurbs{
        "evaluate f and its convolutions on a grid",
        "draw sample paths of the Gaussian process",
        "Hermite coefficients and rank of a transformation",
        "matrix measures, limit measure and conditions (B2)/(B3)",
        "limit covariance matrix Xi",
        "enumerate diagrams and count the regular ones",
        "contraction norm decay table",
        "end-to-end Monte Carlo verification"};

    for (std::size_t i = 0; i < names.size(); ++i) {
        auto* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", invocation.config_path, "JSON configuration file");
        sub->add_option("--out", invocation.output_dir,
                        "output directory (default $SINGSPEC_OUT or .)");
        sub->add_option("--set", invocation.overrides,
                        "config overrides as dotted.path=value, repeatable");
        sub->add_option("--format", invocation.format, "primary artifact format: json|csv");
        if (names[i] == "diagrams")
            sub->add_option("--order", invocation.order, "diagram order, e.g. 2,2,2,2");
        auto* seed =
            sub->add_option("--seed", invocation.seed_override, "override the config seed");
        sub->callback([&invocation, sub, seed, name = names[i]] {
            invocation.subcommand = name;
            invocation.has_seed_override = seed->count() > 0;
            (void)sub;
        });
    }

    CLI11_PARSE(app, argc, argv);
    return singspec::dispatch(invocation);
}
