#include "chanfid/metrics.hpp"

#include <cmath>

namespace chanfid {

double purity_noiseless(const ParamChannel& ch, const DensityMatrix& rho,
                        std::span<const double> lambda) {
  const ComplexMatrix t = ch.apply(rho, lambda);
  return hs_product(t, t);
}

Estimate channel_purity(const ParamChannel& ch, const DensityMatrix& rho,
                        std::span<const double> lambda, const FluctuationModel& model,
                        const AveragingSpec& spec) {
  const AveragedOutput avg = average_output(ch, rho, lambda, model, spec);
  Estimate e;
  e.value = hs_product(avg.mean, avg.mean);
  e.stderr_value = 2.0 * frobenius_norm(avg.mean) * avg.stderr_entry;
  return e;
}

Estimate channel_fidelity(const ParamChannel& ch, const DensityMatrix& rho,
                          std::span<const double> lambda, const FluctuationModel& model,
                          const AveragingSpec& spec) {
  const ComplexMatrix t = ch.apply(rho, lambda);
  const AveragedOutput avg = average_output(ch, rho, lambda, model, spec);
  Estimate e;
  e.value = hs_product(t, avg.mean);
  e.stderr_value = frobenius_norm(t) * avg.stderr_entry;
  return e;
}

MetricsReport evaluate(const ParamChannel& ch, const DensityMatrix& rho,
                       std::span<const double> lambda, const FluctuationModel& model,
                       const AveragingSpec& spec) {
  const ComplexMatrix t = ch.apply(rho, lambda);
  const AveragedOutput avg = average_output(ch, rho, lambda, model, spec);

  MetricsReport rep;
  rep.method = spec.method;
  rep.p0 = hs_product(t, t);
  rep.p = hs_product(avg.mean, avg.mean);
  rep.f = hs_product(t, avg.mean);
  rep.residual = rep.f - 0.5 * (rep.p + rep.p0);
  rep.trace_defect = std::abs(trace(avg.mean) - cplx(1.0, 0.0));
  rep.stderr_p = 2.0 * frobenius_norm(avg.mean) * avg.stderr_entry;
  rep.stderr_f = frobenius_norm(t) * avg.stderr_entry;

  const ComplexMatrix diff = avg.mean - t;
  rep.identity_defect = std::abs(rep.residual + 0.5 * hs_product(diff, diff));
  const double tol = spec.method == AveragingSpec::Method::monte_carlo
                         ? std::max(1e-12, 5.0 * (rep.stderr_p + rep.stderr_f))
                         : 1e-12;
  if (rep.identity_defect > tol)
    fail(ErrorKind::numerical, "metrics: residual identity violated");
  return rep;
}

}  // namespace chanfid
