#include "chanfid/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace chanfid {

namespace {

constexpr const char* kCsvHeader =
    "scale,p0,p,f,residual,stderr_p,stderr_f,trace_defect,p_pred,f_pred,pred_defect_p,"
    "pred_defect_f";

const char* const kColumnNames[] = {"scale",        "p0",          "p",
                                    "f",            "residual",    "stderr_p",
                                    "stderr_f",     "trace_defect", "p_pred",
                                    "f_pred",       "pred_defect_p", "pred_defect_f"};
constexpr int kColumns = 12;

constexpr double SweepRow::* kFields[kColumns] = {
    &SweepRow::scale,        &SweepRow::p0,          &SweepRow::p,
    &SweepRow::f,            &SweepRow::residual,    &SweepRow::stderr_p,
    &SweepRow::stderr_f,     &SweepRow::trace_defect, &SweepRow::p_pred,
    &SweepRow::f_pred,       &SweepRow::pred_defect_p, &SweepRow::pred_defect_f};

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SlopeFit fit_slope(std::span<const SlopePoint> points, double floor) {
  std::vector<double> lx, ly;
  int excluded = 0;
  for (const SlopePoint& p : points) {
    if (!(p.x > 0.0)) fail(ErrorKind::domain, "fit_slope: abscissas must be positive");
    if (std::abs(p.y) <= floor) {
      ++excluded;
      continue;
    }
    lx.push_back(std::log(p.x));
    ly.push_back(std::log(std::abs(p.y)));
  }
  const int n = static_cast<int>(lx.size());
  if (n < 3) fail(ErrorKind::domain, "fit_slope: fewer than 3 points above the noise floor");

  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) fail(ErrorKind::domain, "fit_slope: abscissas are all equal");

  SlopeFit fit;
  fit.valid = true;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssres = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ssres += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ssres / syy : (ssres <= 1e-30 ? 1.0 : 0.0);
  fit.points_used = n;
  fit.points_excluded = excluded;
  return fit;
}

double slope_floor(const SweepRow& row) {
  return std::max(1e-13, 100.0 * (row.stderr_p + row.stderr_f));
}

namespace {

SlopeFit fit_column(const std::vector<SweepRow>& rows, double (*pick)(const SweepRow&)) {
  std::vector<SlopePoint> pts;
  pts.reserve(rows.size());
  // The floor is per-row; pre-filter here and hand fit_slope a floor of 0 so
  // each row is judged against its own estimator noise.
  int excluded = 0;
  for (const SweepRow& r : rows) {
    const double y = pick(r);
    if (std::abs(y) <= slope_floor(r)) {
      ++excluded;
      continue;
    }
    pts.push_back({r.scale, y});
  }
  SlopeFit fit;
  try {
    fit = fit_slope(pts, 0.0);
    fit.points_excluded += excluded;
  } catch (const Error& e) {
    fit.valid = false;
    fit.points_used = static_cast<int>(pts.size());
    fit.points_excluded = excluded;
    fit.note = e.what();
  }
  return fit;
}

}  // namespace

void refit_slopes(SweepReport& report) {
  report.residual_slope = fit_column(report.rows, [](const SweepRow& r) { return r.residual; });
  report.p0_minus_p_slope =
      fit_column(report.rows, [](const SweepRow& r) { return r.p0 - r.p; });
  report.pred_defect_p_slope =
      fit_column(report.rows, [](const SweepRow& r) { return r.pred_defect_p; });
  report.pred_defect_f_slope =
      fit_column(report.rows, [](const SweepRow& r) { return r.pred_defect_f; });
}

SweepReport run_sweep(const ExperimentConfig& cfg) {
  SweepReport report;
  report.rows.reserve(cfg.sweep.size());
  for (const double scale : cfg.sweep) {
    const FluctuationModel model = cfg.model.with_scale(scale);
    MetricsReport m;
    try {
      m = evaluate(cfg.channel, cfg.state, cfg.controls, model, cfg.averaging);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::numerical)
        fail(ErrorKind::numerical,
             std::string(e.what()) + " (at scale " + format_number(scale) + ")");
      throw;
    }

    PredictorOutput pred;
    if (cfg.predictor == PredictorKind::closed_form &&
        cfg.channel.kind() == ParamChannel::Kind::ion_trap) {
      pred = ion_trap_predict(cfg.state, cfg.controls[0], cfg.controls[1], model);
    } else if (cfg.predictor == PredictorKind::closed_form &&
               cfg.channel.kind() == ParamChannel::Kind::depolarizing) {
      const Moments mom = moments(model);
      pred = depolarizing_predict(
          cfg.state, {cfg.controls[0], cfg.controls[1], cfg.controls[2], cfg.controls[3]},
          {mom.mean[0], mom.mean[1], mom.mean[2], mom.mean[3]});
    } else {
      pred = predict(cfg.channel, cfg.state, cfg.controls, model, cfg.h1, cfg.h2);
    }

    SweepRow row;
    row.scale = scale;
    row.p0 = m.p0;
    row.p = m.p;
    row.f = m.f;
    row.residual = m.residual;
    row.stderr_p = m.stderr_p;
    row.stderr_f = m.stderr_f;
    row.trace_defect = m.trace_defect;
    row.p_pred = pred.p_pred;
    row.f_pred = pred.f_pred;
    row.pred_defect_p = std::abs(m.p - pred.p_pred);
    row.pred_defect_f = std::abs(m.f - pred.f_pred);
    report.rows.push_back(row);
  }
  refit_slopes(report);
  return report;
}

namespace {

void write_slope_comment(std::ostream& out, const char* name, const SlopeFit& fit) {
  out << "# slope " << name << ":";
  if (fit.valid) {
    out << " slope=" << format_number(fit.slope) << " intercept=" << format_number(fit.intercept)
        << " r2=" << format_number(fit.r2) << " points=" << fit.points_used
        << " excluded=" << fit.points_excluded;
  } else {
    out << " unavailable (" << fit.note << ")";
  }
  out << "\n";
}

void write_slope_json(std::ostream& out, const char* name, const SlopeFit& fit, bool last) {
  out << "    \"" << name << "\": ";
  if (fit.valid) {
    out << "{\"slope\": " << format_number(fit.slope)
        << ", \"intercept\": " << format_number(fit.intercept)
        << ", \"r2\": " << format_number(fit.r2) << ", \"points\": " << fit.points_used
        << ", \"excluded\": " << fit.points_excluded << "}";
  } else {
    out << "null";
  }
  out << (last ? "\n" : ",\n");
}

}  // namespace

void write_csv(const SweepReport& report, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const SweepRow& r : report.rows) {
    for (int c = 0; c < kColumns; ++c) out << (c ? "," : "") << format_number(r.*kFields[c]);
    out << "\n";
  }
  write_slope_comment(out, "residual", report.residual_slope);
  write_slope_comment(out, "p0_minus_p", report.p0_minus_p_slope);
  write_slope_comment(out, "pred_defect_p", report.pred_defect_p_slope);
  write_slope_comment(out, "pred_defect_f", report.pred_defect_f_slope);
}

void write_json(const SweepReport& report, std::ostream& out) {
  out << "{\n  \"rows\": [\n";
  for (size_t i = 0; i < report.rows.size(); ++i) {
    const SweepRow& r = report.rows[i];
    out << "    {";
    for (int c = 0; c < kColumns; ++c)
      out << (c ? ", " : "") << "\"" << kColumnNames[c] << "\": " << format_number(r.*kFields[c]);
    out << (i + 1 < report.rows.size() ? "},\n" : "}\n");
  }
  out << "  ],\n  \"slopes\": {\n";
  write_slope_json(out, "residual", report.residual_slope, false);
  write_slope_json(out, "p0_minus_p", report.p0_minus_p_slope, false);
  write_slope_json(out, "pred_defect_p", report.pred_defect_p_slope, false);
  write_slope_json(out, "pred_defect_f", report.pred_defect_f_slope, true);
  out << "  }\n}\n";
}

std::vector<SweepRow> read_csv_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    fail(ErrorKind::config, "report: missing or unexpected CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    SweepRow row;
    std::istringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= kColumns) fail(ErrorKind::config, "report: too many columns in a row");
      char* end = nullptr;
      row.*kFields[c] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        fail(ErrorKind::config, "report: malformed number '" + cell + "'");
      ++c;
    }
    if (c != kColumns) fail(ErrorKind::config, "report: wrong column count in a row");
    rows.push_back(row);
  }
  return rows;
}

}  // namespace chanfid
