#pragma once

#include "singspec/gaussian_sim.hpp"
#include "singspec/hermite.hpp"
#include "singspec/limit_covariance.hpp"
#include "singspec/mc_harness.hpp"
#include "singspec/spectral_model.hpp"
#include "singspec/weights.hpp"

#include <json.hpp>

#include <string>

namespace singspec::io {

using nlohmann::json;

/// {"time_domain": "discrete"|"continuous",
///  "components": [{"A": .., "alpha": .., "kappa": ..}], "fold_terms": K}
SpectralModel model_from_json(const json& j);
json model_to_json(const SpectralModel& model);

/// {"time_domain": .., "components": [{"kind": "constant"}, {"kind": "cosine",
///  "delta": .., "phase": ..}, {"kind": "sine", "delta": ..}, {"kind":
///  "power_cosine", "beta": .., "delta": .., "phase": ..}, {"kind":
///  "trig_gradient", "A": .., "B": .., "phi": ..}, {"kind": "tabulated",
///  "t": [..], "v": [..]}]}
WeightSpec weights_from_json(const json& j);

/// {"kind": "hermite"|"sign"|"abs_centered"|"exp_centered"|"polynomial"|
///  "tabulated", ...kind-specific parameters}
PointwiseFn psi_from_json(const json& j);

/// {"coeffs": [...], "rank": m, "second_moment": v}
json expansion_to_json(const HermiteExpansion& expansion);

json limit_covariance_to_json(const LimitCovarianceResult& result);
json atomic_measure_to_json(const AtomicMeasure& measure);
json mc_report_to_json(const MCReport& report);

ExperimentConfig experiment_from_json(const json& j);

void write_text_file(const std::string& path, const std::string& content);
std::string density_grid_csv(const DensityGrid& grid);
std::string matrix_measure_csv(const MatrixMeasureGrid& grid);
std::string matrix_csv(const std::vector<double>& matrix, int q);
std::string report_plot_csv(const MCReport& report);

json load_json_file(const std::string& path);
/// apply "dotted.path=value" overrides onto a config document
void apply_overrides(json& document, const std::vector<std::string>& overrides);

} // namespace singspec::io
