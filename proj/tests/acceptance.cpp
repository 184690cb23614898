// Acceptance checklist for the library: each criterion prints one PASS/FAIL
// line with the measured quantity; the exit status is nonzero if any fail.

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chanfid/config.hpp"
#include "chanfid/metrics.hpp"
#include "chanfid/perturb.hpp"
#include "chanfid/sweep.hpp"
#include "oracle.hpp"

using namespace chanfid;
using std::numbers::pi;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Criterion 7 runs across the whole suite: every predictor invocation is
// funneled through here.
double g_law_defect = 0.0;
long g_predictor_calls = 0;

void note_predictor(const PredictorOutput& out, double p0) {
  g_law_defect = std::max(g_law_defect, std::abs(out.f_pred - 0.5 * (out.p_pred + p0)));
  ++g_predictor_calls;
}

AveragingSpec gh_spec(int order) {
  AveragingSpec s;
  s.method = AveragingSpec::Method::gauss_hermite;
  s.order = order;
  return s;
}

AveragingSpec affine_spec() {
  AveragingSpec s;
  s.method = AveragingSpec::Method::affine_exact;
  return s;
}

std::vector<double> random_psd_cov(int n, double sigma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> b(static_cast<size_t>(n) * n);
  for (double& x : b) x = u(rng);
  std::vector<double> cov(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += b[i * n + k] * b[j * n + k];
      cov[i * n + j] = s * sigma * sigma / n;
    }
  return cov;
}

void criterion_1() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> angle(-2.0 * pi, 2.0 * pi);
  std::uniform_real_distribution<double> mag(0.01, 0.3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const ParamChannel gate = ParamChannel::ion_trap();
  const ParamChannel depol = ParamChannel::depolarizing({1.0, 0.0, 0.0, 0.0});

  double worst = 0.0;
  int cases = 0;
  for (int it = 0; it < 200; ++it) {
    const DensityMatrix rho = oracle::random_density2(rng, it % 2 == 0);
    MetricsReport rep;
    const int pick = it % 4;
    try {
      if (pick == 0) {
        const FluctuationModel g = FluctuationModel::gaussian(
            {mag(rng), -mag(rng)}, random_psd_cov(2, mag(rng), rng), unit(rng));
        rep = evaluate(gate, rho, std::vector<double>{angle(rng), angle(rng)}, g, gh_spec(10));
      } else if (pick == 1) {
        const ParamChannel ugen =
            ParamChannel::unitary_generator(oracle::random_hermitian(2, 1.5, rng));
        const FluctuationModel g =
            FluctuationModel::gaussian({0.0}, {mag(rng) * mag(rng)}, unit(rng));
        rep = evaluate(ugen, rho, std::vector<double>{angle(rng)}, g, gh_spec(14));
      } else if (pick == 2) {
        double p[4] = {unit(rng), unit(rng), unit(rng), unit(rng)};
        const double tot = p[0] + p[1] + p[2] + p[3];
        const std::vector<double> lam{p[0] / tot, p[1] / tot, p[2] / tot, p[3] / tot};
        const FluctuationModel shift = FluctuationModel::deterministic_shift(
            {-mag(rng), mag(rng), mag(rng), -mag(rng)}, mag(rng));
        rep = evaluate(depol, rho, lam, shift, affine_spec());
      } else {
        const FluctuationModel g = FluctuationModel::gaussian(
            {-mag(rng), mag(rng), 0.0, 0.0}, random_psd_cov(4, 0.1, rng), mag(rng));
        rep = evaluate(depol, rho, std::vector<double>{0.9, 0.05, 0.03, 0.02}, g, gh_spec(8));
      }
    } catch (const Error& e) {
      report(1, "exact residual identity", false, std::string("evaluate threw: ") + e.what());
      return;
    }
    worst = std::max(worst, rep.identity_defect);
    ++cases;
  }
  report(1, "exact residual identity", worst <= 1e-12 && cases == 200,
         std::to_string(cases) + " cases, max defect " + fmt("%.3g", worst));
}

void criterion_2() {
  const ParamChannel depol = ParamChannel::depolarizing({1.0, 0.0, 0.0, 0.0});
  const DensityMatrix ket0 = bloch_to_density({0.0, 0.0, 1.0});
  const std::vector<double> lam{1.0, 0.0, 0.0, 0.0};

  bool exact = true;
  double worst = 0.0;
  std::vector<SlopePoint> pts;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const FluctuationModel shift =
        FluctuationModel::deterministic_shift({-1.0, 1.0, 0.0, 0.0}, eps);
    const MetricsReport rep = evaluate(depol, ket0, lam, shift, affine_spec());
    const double dp = std::abs(rep.p - ((1 - eps) * (1 - eps) + eps * eps));
    const double df = std::abs(rep.f - (1 - eps));
    const double dr = std::abs(rep.residual - (-eps * eps));
    worst = std::max({worst, dp, df, dr});
    exact = exact && dp <= 1e-12 && df <= 1e-12 && dr <= 1e-12;
    pts.push_back({eps, rep.residual});
  }
  const SlopeFit fit = fit_slope(pts, 1e-13);
  const bool slope_ok = fit.valid && std::abs(fit.slope - 2.0) <= 0.02;
  report(2, "closed-form bias case", exact && slope_ok,
         "max value defect " + fmt("%.3g", worst) + ", residual slope " +
             fmt("%.4f", fit.slope));
}

void criterion_3() {
  const ParamChannel depol = ParamChannel::depolarizing({1.0, 0.0, 0.0, 0.0});
  const std::vector<double> eps_grid{0.1, 0.05, 0.025, 0.0125};

  // Two members of the family: the canonical pure-state case and a mixed
  // state with a generic baseline.
  struct Case {
    DensityMatrix rho;
    std::vector<double> lam;
    std::vector<double> mean;
  };
  const std::vector<Case> cases{
      {bloch_to_density({0.0, 0.0, 1.0}), {1.0, 0.0, 0.0, 0.0}, {-1.0, 1.0, 0.0, 0.0}},
      {bloch_to_density({0.3, 0.2, 0.5}),
       {0.9, 0.04, 0.03, 0.03},
       {-1.0, 0.5, 0.25, 0.25}},
  };

  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    std::vector<SlopePoint> pts;
    for (double eps : eps_grid) {
      const FluctuationModel shift = FluctuationModel::deterministic_shift(c.mean, eps);
      const MetricsReport rep = evaluate(depol, c.rho, c.lam, shift, affine_spec());
      const double ratio = std::abs(rep.residual) / std::abs(rep.f - rep.p0);
      pts.push_back({eps, ratio});
    }
    const SlopeFit fit = fit_slope(pts, 1e-13);
    ok = ok && fit.valid && std::abs(fit.slope - 1.0) <= 0.1;
    if (!detail.empty()) detail += ", ";
    detail += "slope " + fmt("%.4f", fit.slope);
  }
  report(3, "first-order vanishing of the relative residual", ok, detail);
}

struct Criterion4Data {
  std::vector<double> sigmas;
  std::vector<MetricsReport> reports;
};

Criterion4Data run_criterion4_grid() {
  Criterion4Data data;
  const ParamChannel gate = ParamChannel::ion_trap();
  const DensityMatrix ket0 = bloch_to_density({0.0, 0.0, 1.0});
  const std::vector<double> lam{1.0, 0.3};
  for (double s : {0.02, 0.04, 0.06, 0.08, 0.10}) {
    const FluctuationModel g = FluctuationModel::gaussian_diag({0.0, 0.0}, {1.0, 1.0}, s);
    data.sigmas.push_back(s);
    data.reports.push_back(evaluate(gate, ket0, lam, g, gh_spec(20)));
  }
  return data;
}

void criterion_4(const Criterion4Data& data) {
  std::vector<SlopePoint> res_pts, dec_pts;
  for (size_t i = 0; i < data.sigmas.size(); ++i) {
    res_pts.push_back({data.sigmas[i], data.reports[i].residual});
    dec_pts.push_back({data.sigmas[i], data.reports[i].p0 - data.reports[i].p});
  }
  const SlopeFit res = fit_slope(res_pts, 1e-13);
  const SlopeFit dec = fit_slope(dec_pts, 1e-13);
  const bool ok = res.valid && std::abs(res.slope - 4.0) <= 0.7 && dec.valid &&
                  std::abs(dec.slope - 2.0) <= 0.3;
  report(4, "zero-mean residual is one order beyond the decoherence", ok,
         "residual slope " + fmt("%.3f", res.slope) + ", p0-p slope " + fmt("%.3f", dec.slope));
}

void criterion_5() {
  const ParamChannel gate = ParamChannel::ion_trap();
  std::mt19937_64 rng(105);
  const FluctuationModel unit = FluctuationModel::gaussian_diag({0.0, 0.0}, {1.0, 1.0});
  const DensityMatrix pure = bloch_to_density({0.0, 0.0, 1.0});
  const DensityMatrix mixed = bloch_to_density({0.25, -0.3, 0.4});

  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double theta0 = 0.2 + (3.0 - 0.2) * i / 4.0;
    for (int j = 0; j < 5; ++j) {
      const double phi0 = 2.0 * pi * j / 5.0;
      for (const DensityMatrix* rho : {&pure, &mixed}) {
        const PredictorOutput closed = ion_trap_predict(*rho, theta0, phi0, unit);
        note_predictor(closed, purity(*rho));
        const PredictorOutput generic =
            predict(gate, *rho, std::vector<double>{theta0, phi0}, unit, 1e-4, 1e-3);
        note_predictor(generic, purity_noiseless(gate, *rho, std::vector<double>{theta0, phi0}));
        worst = std::max(worst, std::abs(closed.correction - generic.correction));
      }
    }
  }
  report(5, "closed-form coefficients match the generic second order", worst <= 1e-6,
         "max correction defect " + fmt("%.3g", worst));
}

void criterion_6(const Criterion4Data& data) {
  const ParamChannel gate = ParamChannel::ion_trap();
  const DensityMatrix ket0 = bloch_to_density({0.0, 0.0, 1.0});
  const std::vector<double> lam{1.0, 0.3};
  const double p0 = purity_noiseless(gate, ket0, lam);

  std::vector<SlopePoint> pts;
  for (size_t i = 0; i < data.sigmas.size(); ++i) {
    const FluctuationModel g =
        FluctuationModel::gaussian_diag({0.0, 0.0}, {1.0, 1.0}, data.sigmas[i]);
    const PredictorOutput pred = predict(gate, ket0, lam, g);
    note_predictor(pred, p0);
    pts.push_back({data.sigmas[i], data.reports[i].f - pred.f_pred});
  }
  const SlopeFit fit = fit_slope(pts, 1e-13);
  report(6, "second-order predictor leaves a fourth-order remainder",
         fit.valid && fit.slope >= 3.5, "defect slope " + fmt("%.3f", fit.slope));
}

void criterion_7() {
  report(7, "predictor outputs satisfy f = (p + p0)/2", g_law_defect <= 1e-14,
         std::to_string(g_predictor_calls) + " invocations, max defect " +
             fmt("%.3g", g_law_defect));
}

void criterion_8() {
  const ParamChannel gate = ParamChannel::ion_trap();
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> angle(-2.0 * pi, 2.0 * pi);
  double worst_purity = 0.0, worst_g0 = 0.0;
  for (int it = 0; it < 100; ++it) {
    const DensityMatrix rho = oracle::random_density2(rng, it % 2 == 0);
    const double theta = angle(rng), phi = angle(rng);
    const std::vector<double> lam{theta, phi};
    const ComplexMatrix out = gate.apply(rho, lam);
    worst_purity = std::max(worst_purity, std::abs(hs_product(out, out) - purity(rho)));
    const IonTrapExpansion e = ion_trap_expansion(rho, theta, phi, 0.01, 0.01, 0.0);
    worst_g0 = std::max(worst_g0, max_abs_diff(e.g0, out));
  }
  report(8, "gate unitarity and unperturbed-term identity",
         worst_purity <= 1e-12 && worst_g0 <= 1e-12,
         "max purity drift " + fmt("%.3g", worst_purity) + ", max g0 defect " +
             fmt("%.3g", worst_g0));
}

void criterion_9(const Criterion4Data& data) {
  const ParamChannel gate = ParamChannel::ion_trap();
  const DensityMatrix ket0 = bloch_to_density({0.0, 0.0, 1.0});
  const std::vector<double> lam{1.0, 0.3};
  const FluctuationModel g = FluctuationModel::gaussian_diag({0.0, 0.0}, {1.0, 1.0}, 0.10);

  AveragingSpec mc;
  mc.method = AveragingSpec::Method::monte_carlo;
  mc.samples = 200000;
  mc.seed = 20240817;
  mc.threads = 1;

  const MetricsReport a = evaluate(gate, ket0, lam, g, mc);
  const MetricsReport b = evaluate(gate, ket0, lam, g, mc);
  const MetricsReport& quad = data.reports.back();  // sigma = 0.10, order 20

  const bool consistent = std::abs(a.p - quad.p) <= 5.0 * a.stderr_p &&
                          std::abs(a.f - quad.f) <= 5.0 * a.stderr_f;

  // Byte-identical rerun: every reported number must match exactly, and so
  // must the rendered report row.
  std::ostringstream ra, rb;
  for (const MetricsReport* r : {&a, &b}) {
    std::ostringstream& os = (r == &a) ? ra : rb;
    for (double v : {r->p0, r->p, r->f, r->residual, r->stderr_p, r->stderr_f, r->trace_defect})
      os << format_number(v) << ",";
  }
  const bool identical = ra.str() == rb.str();

  report(9, "Monte Carlo agrees with quadrature and reruns identically",
         consistent && identical,
         "|P-Pq|/stderr " + fmt("%.2f", std::abs(a.p - quad.p) / a.stderr_p) +
             ", |F-Fq|/stderr " + fmt("%.2f", std::abs(a.f - quad.f) / a.stderr_f) +
             (identical ? ", rerun identical" : ", rerun DIFFERS"));
}

void criterion_10() {
  const ParamChannel gate = ParamChannel::ion_trap();
  const DensityMatrix rho = bloch_to_density({0.2, 0.1, 0.7});
  const FluctuationModel g = FluctuationModel::gaussian_diag({0.0, 0.0}, {0.1, 0.1});
  const double theta0 = 1e-6, phi0 = 0.4;

  const PredictorOutput closed = ion_trap_predict(rho, theta0, phi0, g);
  note_predictor(closed, purity(rho));
  const PredictorOutput generic =
      predict(gate, rho, std::vector<double>{theta0, phi0}, g, 1e-4, 1e-3);
  note_predictor(generic, purity_noiseless(gate, rho, std::vector<double>{theta0, phi0}));
  const double defect = std::abs(closed.f_pred - generic.f_pred);
  report(10, "series branch of the closed form near theta0 = 0", defect <= 1e-6,
         "prediction defect " + fmt("%.3g", defect));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  const Criterion4Data grid = run_criterion4_grid();
  criterion_4(grid);
  criterion_5();
  criterion_6(grid);
  criterion_8();
  criterion_9(grid);
  criterion_10();
  criterion_7();  // aggregates every predictor call above
  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
