#pragma once

#include <span>

#include "chanfid/channel.hpp"
#include "chanfid/noise.hpp"

namespace chanfid {

/**
 * The three observables of one channel/state/noise configuration:
 *   p0       noiseless output purity tr[T^2]
 *   p        noisy purity tr[Tbar^2]
 *   f        fidelity tr[T Tbar]
 *   residual f - (p + p0)/2, which equals -tr[(Tbar - T)^2]/2 identically
 * plus the trace defect of the averaged output and the estimator errors.
 */
struct MetricsReport {
  double p0 = 0.0;
  double p = 0.0;
  double f = 0.0;
  double residual = 0.0;
  double trace_defect = 0.0;
  double stderr_p = 0.0;
  double stderr_f = 0.0;
  AveragingSpec::Method method = AveragingSpec::Method::gauss_hermite;
  /// |residual + tr[(Tbar-T)^2]/2|; diagnostic for the identity re-check.
  double identity_defect = 0.0;
};

struct Estimate {
  double value = 0.0;
  double stderr_value = 0.0;
};

/// tr[T(rho, lambda)^2].
double purity_noiseless(const ParamChannel& ch, const DensityMatrix& rho,
                        std::span<const double> lambda);

/// tr[Tbar^2] with Tbar from average_output.
Estimate channel_purity(const ParamChannel& ch, const DensityMatrix& rho,
                        std::span<const double> lambda, const FluctuationModel& model,
                        const AveragingSpec& spec);

/// tr[T Tbar].
Estimate channel_fidelity(const ParamChannel& ch, const DensityMatrix& rho,
                          std::span<const double> lambda, const FluctuationModel& model,
                          const AveragingSpec& spec);

/**
 * All metrics from a single averaging pass (so Monte Carlo noise is shared
 * between p and f and cancels inside the residual). Throws an
 * ErrorKind::numerical error if the exact residual identity fails at the
 * method tolerance: 1e-12 for deterministic averaging, 5 combined standard
 * errors for Monte Carlo.
 */
MetricsReport evaluate(const ParamChannel& ch, const DensityMatrix& rho,
                       std::span<const double> lambda, const FluctuationModel& model,
                       const AveragingSpec& spec);

}  // namespace chanfid
