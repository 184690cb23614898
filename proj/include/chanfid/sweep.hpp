#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chanfid/config.hpp"
#include "chanfid/metrics.hpp"
#include "chanfid/perturb.hpp"

namespace chanfid {

/// One sweep point; the fields mirror the CSV columns in order.
struct SweepRow {
  double scale = 0.0;
  double p0 = 0.0;
  double p = 0.0;
  double f = 0.0;
  double residual = 0.0;
  double stderr_p = 0.0;
  double stderr_f = 0.0;
  double trace_defect = 0.0;
  double p_pred = 0.0;
  double f_pred = 0.0;
  double pred_defect_p = 0.0;
  double pred_defect_f = 0.0;
};

struct SlopeFit {
  bool valid = false;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points_used = 0;
  int points_excluded = 0;
  std::string note;  // set when the fit is unavailable
};

struct SweepReport {
  std::vector<SweepRow> rows;
  SlopeFit residual_slope;
  SlopeFit p0_minus_p_slope;
  SlopeFit pred_defect_p_slope;
  SlopeFit pred_defect_f_slope;
};

struct SlopePoint {
  double x = 0.0;
  double y = 0.0;
};

/**
 * Ordinary least squares of ln|y| against ln x. Points with |y| <= floor are
 * excluded (and counted); all x must be positive. Throws ErrorKind::domain
 * when fewer than 3 usable points remain.
 */
SlopeFit fit_slope(std::span<const SlopePoint> points, double floor);

/// Per-row noise floor for slope fits: 100x the combined standard error for
/// Monte Carlo rows, 1e-13 for deterministic rows.
double slope_floor(const SweepRow& row);

/// Recomputes the four report slopes from the rows.
void refit_slopes(SweepReport& report);

/**
 * Runs the configured sweep: for each scale the noise model is rescaled, the
 * metrics are evaluated with one averaging pass and the configured predictor
 * is applied. Rows come out in sweep order; the run is deterministic given
 * the config (including the Monte Carlo seed). The exact residual identity is
 * re-checked per row; a violation surfaces as ErrorKind::numerical naming the
 * scale.
 */
SweepReport run_sweep(const ExperimentConfig& cfg);

void write_csv(const SweepReport& report, std::ostream& out);
void write_json(const SweepReport& report, std::ostream& out);

/// Reads rows back from a CSV report (header required, footer lines ignored).
std::vector<SweepRow> read_csv_rows(std::istream& in);

/// %.17g rendering used by both report formats.
std::string format_number(double v);

}  // namespace chanfid
