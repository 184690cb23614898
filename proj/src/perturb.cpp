#include "chanfid/perturb.hpp"

#include <cmath>
#include <vector>

namespace chanfid {

namespace {

std::vector<double> shifted(std::span<const double> lambda, int mu, double d) {
  std::vector<double> out(lambda.begin(), lambda.end());
  out[mu] += d;
  return out;
}

std::vector<double> shifted2(std::span<const double> lambda, int mu, double dmu, int nu,
                             double dnu) {
  std::vector<double> out(lambda.begin(), lambda.end());
  out[mu] += dmu;
  out[nu] += dnu;
  return out;
}

}  // namespace

ComplexMatrix d1_channel(const ParamChannel& ch, const DensityMatrix& rho,
                         std::span<const double> lambda, int mu, double h) {
  if (!(h > 0.0)) fail(ErrorKind::domain, "d1_channel: step must be positive");
  if (mu < 0 || mu >= ch.arity()) fail(ErrorKind::domain, "d1_channel: parameter index");
  ComplexMatrix out = ch.apply(rho, shifted(lambda, mu, h));
  out -= ch.apply(rho, shifted(lambda, mu, -h));
  out *= cplx(1.0 / (2.0 * h), 0.0);
  return out;
}

ComplexMatrix d2_channel(const ParamChannel& ch, const DensityMatrix& rho,
                         std::span<const double> lambda, int mu, int nu, double h) {
  if (!(h > 0.0)) fail(ErrorKind::domain, "d2_channel: step must be positive");
  if (mu < 0 || mu >= ch.arity() || nu < 0 || nu >= ch.arity())
    fail(ErrorKind::domain, "d2_channel: parameter index");
  ComplexMatrix out(ch.dim());
  if (mu == nu) {
    out = ch.apply(rho, shifted(lambda, mu, h));
    out += ch.apply(rho, shifted(lambda, mu, -h));
    ComplexMatrix center = ch.apply(rho, lambda);
    center *= cplx(2.0, 0.0);
    out -= center;
    out *= cplx(1.0 / (h * h), 0.0);
  } else {
    out = ch.apply(rho, shifted2(lambda, mu, h, nu, h));
    out += ch.apply(rho, shifted2(lambda, mu, -h, nu, -h));
    out -= ch.apply(rho, shifted2(lambda, mu, h, nu, -h));
    out -= ch.apply(rho, shifted2(lambda, mu, -h, nu, h));
    out *= cplx(1.0 / (4.0 * h * h), 0.0);
  }
  return out;
}

PredictorOutput predict(const ParamChannel& ch, const DensityMatrix& rho,
                        std::span<const double> lambda, const FluctuationModel& model,
                        double h1, double h2) {
  const ComplexMatrix t = ch.apply(rho, lambda);
  const double p0 = hs_product(t, t);
  const Moments mom = moments(model);
  const int n = ch.arity();
  if (model.arity() != n)
    fail(ErrorKind::dimension_mismatch, "predict: noise dimension does not match the channel");

  bool biased = false;
  for (double m : mom.mean) biased = biased || m != 0.0;
  bool has_cov = false;
  const double s2 = model.scale() * model.scale();
  for (double c : model.covariance()) has_cov = has_cov || s2 * c != 0.0;

  double correction = 0.0;
  if (biased) {
    for (int mu = 0; mu < n; ++mu) {
      if (mom.mean[mu] == 0.0) continue;
      correction += hs_product(t, d1_channel(ch, rho, lambda, mu, h1)) * mom.mean[mu];
    }
  }
  if (!biased || has_cov) {
    // Second-order term; in the mixed case the full second moment
    // (covariance plus mean outer product) enters.
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu; nu < n; ++nu) {
        const double m2 = mom.second_moment[mu * n + nu];
        if (m2 == 0.0) continue;
        const double sym = (mu == nu) ? 0.5 : 1.0;
        correction += sym * hs_product(t, d2_channel(ch, rho, lambda, mu, nu, h2)) * m2;
      }
  }

  PredictorOutput out;
  out.correction = correction;
  out.p_pred = p0 + 2.0 * correction;
  out.f_pred = p0 + correction;
  out.order = biased ? ExpansionOrder::first : ExpansionOrder::second;
  return out;
}

namespace {

struct AngleCoeffs {
  double f0, f1, f2h;  // f, f', f''/2 of sin(t)/t
  double g0, g1, g2h;  // g, g', g''/2 of (1-cos(t))/t^2
};

// The closed forms lose all precision as theta -> 0 (powers up to theta^-4);
// below the threshold every coefficient uses a four-term Maclaurin series.
AngleCoeffs angle_coeffs(double th) {
  AngleCoeffs c{};
  if (std::abs(th) < 1e-3) {
    const double t2 = th * th;
    const double t4 = t2 * t2;
    const double t6 = t4 * t2;
    c.f0 = 1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0;
    c.f1 = th * (-1.0 / 3.0 + t2 / 30.0 - t4 / 840.0 + t6 / 45360.0);
    c.f2h = -1.0 / 6.0 + t2 / 20.0 - t4 / 336.0 + t6 / 12960.0;
    c.g0 = 0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0;
    c.g1 = th * (-1.0 / 12.0 + t2 / 180.0 - t4 / 6720.0 + t6 / 453600.0);
    c.g2h = -1.0 / 24.0 + t2 / 120.0 - t4 / 2688.0 + t6 / 129600.0;
  } else {
    const double sn = std::sin(th);
    const double cs = std::cos(th);
    const double i1 = 1.0 / th;
    const double i2 = i1 * i1;
    const double i3 = i2 * i1;
    const double i4 = i2 * i2;
    c.f0 = sn * i1;
    c.f1 = cs * i1 - sn * i2;
    c.f2h = 0.5 * (2.0 * sn * i3 - 2.0 * cs * i2 - sn * i1);
    c.g0 = (1.0 - cs) * i2;
    c.g1 = sn * i2 - 2.0 * (1.0 - cs) * i3;
    c.g2h = 0.5 * (6.0 * (1.0 - cs) * i4 - 4.0 * sn * i3 + cs * i2);
  }
  return c;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return multiply(a, b) - multiply(b, a);
}

ComplexMatrix sandwich(const ComplexMatrix& a, const ComplexMatrix& rho, const ComplexMatrix& b) {
  return multiply(multiply(a, rho), b);
}

}  // namespace

IonTrapExpansion ion_trap_expansion(const DensityMatrix& rho, double theta0, double phi0,
                                    double m20, double m02, double m11) {
  if (!std::isfinite(theta0) || !std::isfinite(phi0))
    fail(ErrorKind::domain, "ion_trap_expansion: angles must be finite");
  const AngleCoeffs c = angle_coeffs(theta0);
  const double cs = std::cos(theta0);

  // X0 = cos(phi0) sx - sin(phi0) sy, Xp = d X0 / d phi0.
  ComplexMatrix x_base(2);
  x_base(0, 1) = cplx(std::cos(phi0), std::sin(phi0));
  x_base(1, 0) = cplx(std::cos(phi0), -std::sin(phi0));
  ComplexMatrix x_phase(2);
  x_phase(0, 1) = cplx(0.0, 1.0) * x_base(0, 1);
  x_phase(1, 0) = cplx(0.0, -1.0) * x_base(1, 0);

  IonTrapExpansion e;
  e.h0_coeff = 0.5 * (1.0 + cs);
  e.h2_bar = -0.25 * cs * m20;
  e.f0 = c.f0;
  e.f1_coeff = c.f1;
  e.f2_bar = c.f2h * m20;
  e.g0_coeff = c.g0;
  e.g1_coeff = c.g1;
  e.g2_bar_coeff = c.g2h * m20;
  e.x0 = cplx(theta0, 0.0) * x_base;
  e.x1_dtheta = x_base;
  e.x1_dphi = cplx(theta0, 0.0) * x_phase;
  e.x2_dphi2 = cplx(-0.5 * theta0, 0.0) * x_base;
  e.x2_dtheta_dphi = x_phase;

  const ComplexMatrix& r = rho.mat();
  const cplx half_i(0.0, 0.5);

  e.g0 = cplx(e.h0_coeff, 0.0) * r;
  e.g0 += half_i * cplx(c.f0, 0.0) * commutator(e.x0, r);
  e.g0 += cplx(0.5 * c.g0, 0.0) * sandwich(e.x0, r, e.x0);
  hermitian_symmetrize(e.g0);

  // Moment averages of the first- and second-order operator structures.
  const ComplexMatrix x1_avg_dt = cplx(m20, 0.0) * e.x1_dtheta + cplx(m11, 0.0) * e.x1_dphi;
  const ComplexMatrix x2_avg = cplx(m02, 0.0) * e.x2_dphi2 + cplx(m11, 0.0) * e.x2_dtheta_dphi;
  ComplexMatrix x1_rho_x1 = cplx(m20, 0.0) * sandwich(e.x1_dtheta, r, e.x1_dtheta);
  x1_rho_x1 += cplx(m11, 0.0) *
               (sandwich(e.x1_dtheta, r, e.x1_dphi) + sandwich(e.x1_dphi, r, e.x1_dtheta));
  x1_rho_x1 += cplx(m02, 0.0) * sandwich(e.x1_dphi, r, e.x1_dphi);

  e.g2_bar = cplx(e.h2_bar, 0.0) * r;
  e.g2_bar += half_i * cplx(e.f2_bar, 0.0) * commutator(e.x0, r);
  e.g2_bar += half_i * cplx(c.f1, 0.0) * commutator(x1_avg_dt, r);
  e.g2_bar += half_i * cplx(c.f0, 0.0) * commutator(x2_avg, r);
  e.g2_bar += cplx(0.5 * e.g2_bar_coeff, 0.0) * sandwich(e.x0, r, e.x0);
  e.g2_bar += cplx(0.5 * c.g1, 0.0) * (sandwich(x1_avg_dt, r, e.x0) + sandwich(e.x0, r, x1_avg_dt));
  e.g2_bar += cplx(0.5 * c.g0, 0.0) * (sandwich(x2_avg, r, e.x0) + sandwich(e.x0, r, x2_avg));
  e.g2_bar += cplx(0.5 * c.g0, 0.0) * x1_rho_x1;
  hermitian_symmetrize(e.g2_bar);
  return e;
}

PredictorOutput ion_trap_predict(const DensityMatrix& rho, double theta0, double phi0,
                                 const FluctuationModel& model) {
  if (model.arity() != 2)
    fail(ErrorKind::dimension_mismatch, "ion_trap_predict: model must have two parameters");
  for (double m : model.mean())
    if (model.scale() * m != 0.0)
      fail(ErrorKind::domain, "ion_trap_predict: model must be zero-mean");
  const Moments mom = moments(model);
  const IonTrapExpansion e = ion_trap_expansion(rho, theta0, phi0, mom.second_moment[0],
                                                mom.second_moment[3], mom.second_moment[1]);
  const double correction = hs_product(e.g0, e.g2_bar);
  PredictorOutput out;
  out.correction = correction;
  const double p0 = purity(rho);
  out.p_pred = p0 + 2.0 * correction;
  out.f_pred = p0 + correction;
  out.order = ExpansionOrder::second;
  return out;
}

PredictorOutput depolarizing_predict(const DensityMatrix& rho, const std::array<double, 4>& p,
                                     const std::array<double, 4>& mean_dp) {
  ComplexMatrix t(2);
  ComplexMatrix d(2);
  for (int i = 0; i < 4; ++i) {
    const ComplexMatrix s = sandwich(pauli(i), rho.mat(), pauli(i));
    t += cplx(p[i], 0.0) * s;
    d += cplx(mean_dp[i], 0.0) * s;
  }
  hermitian_symmetrize(t);
  hermitian_symmetrize(d);
  const double p0 = hs_product(t, t);
  const double correction = hs_product(t, d);
  PredictorOutput out;
  out.correction = correction;
  out.p_pred = p0 + 2.0 * correction;
  out.f_pred = p0 + correction;
  out.order = ExpansionOrder::first;
  return out;
}

}  // namespace chanfid
