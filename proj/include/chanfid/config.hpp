#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "chanfid/channel.hpp"
#include "chanfid/matrix.hpp"
#include "chanfid/noise.hpp"

namespace chanfid {

enum class PredictorKind { generic, closed_form };
enum class ReportFormat { csv, json };

/**
 * A fully validated experiment description. Produced only by parse_config;
 * every invariant (kinds, arities, sweep monotonicity) has been checked with
 * key-level diagnostics by the time an instance exists.
 */
struct ExperimentConfig {
  ParamChannel channel;
  DensityMatrix state;
  ControlVector controls;
  FluctuationModel model;  // unscaled; run_sweep applies the sweep scales
  AveragingSpec averaging;
  PredictorKind predictor = PredictorKind::generic;
  double h1 = 1e-4;  // first-derivative step for the generic predictor
  double h2 = 1e-3;  // second-derivative step
  std::vector<double> sweep;
  std::string output_path;  // empty = stdout
  ReportFormat format = ReportFormat::csv;
};

/**
 * Parses the flat key-value experiment format: one `key = value` per line,
 * dotted section names, '#' comments. Unknown keys, type errors and invariant
 * violations are rejected with the offending key and line number.
 */
ExperimentConfig parse_config(const std::string& text);

/// Convenience: read the file and parse it.
ExperimentConfig load_config(const std::string& path);

}  // namespace chanfid
