#pragma once

#include <array>
#include <span>

#include "chanfid/channel.hpp"
#include "chanfid/noise.hpp"

namespace chanfid {

/// First/second partial derivatives of the channel output with respect to the
/// controls, by central differences. Outputs are exactly Hermitian.
ComplexMatrix d1_channel(const ParamChannel& ch, const DensityMatrix& rho,
                         std::span<const double> lambda, int mu, double h);
ComplexMatrix d2_channel(const ParamChannel& ch, const DensityMatrix& rho,
                         std::span<const double> lambda, int mu, int nu, double h);

enum class ExpansionOrder { first, second };

/**
 * Truncated predictions of the noisy purity and fidelity. By construction
 * f_pred = p0 + correction and p_pred = p0 + 2*correction, so the predictor
 * satisfies f_pred = (p_pred + p0)/2 exactly.
 */
struct PredictorOutput {
  double p_pred = 0.0;
  double f_pred = 0.0;
  ExpansionOrder order = ExpansionOrder::second;
  double correction = 0.0;
};

/**
 * Generic finite-difference predictor.
 *   biased noise, zero covariance:  correction = sum_mu tr(T d_mu T) mean_mu
 *   zero mean:                      correction = sum_mu_nu tr(T d_mu d_nu T) M_mu_nu / 2
 *   mixed:                          both terms, with the full second moment M.
 * h1/h2 are the first-/second-derivative step sizes.
 */
PredictorOutput predict(const ParamChannel& ch, const DensityMatrix& rho,
                        std::span<const double> lambda, const FluctuationModel& model,
                        double h1 = 1e-4, double h2 = 1e-3);

/**
 * Closed-form pieces of the rotation-gate output expanded to second order in
 * the angle errors, with the quadratic error monomials replaced by their
 * moments m20 = E[dtheta^2], m02 = E[dphi^2], m11 = E[dtheta dphi].
 *
 * g0 is the unperturbed output (it equals apply(ion_trap, rho, (theta0,
 * phi0))); g2_bar is the moment-averaged second-order term. The scalar
 * coefficients below theta0^-4 are removable-singular at theta0 = 0 and
 * switch to four-term Maclaurin series for |theta0| < 1e-3.
 */
struct IonTrapExpansion {
  ComplexMatrix g0;
  ComplexMatrix g2_bar;
  double h0_coeff = 0.0;    // multiplies rho in g0: (1 + cos theta0)/2
  double h2_bar = 0.0;      // -cos(theta0) m20 / 4
  double f0 = 0.0;          // sin(theta0)/theta0
  double f1_coeff = 0.0;    // d/dtheta of f0 (the dtheta coefficient)
  double f2_bar = 0.0;      // (d2/dtheta2 of f0)/2 * m20
  double g0_coeff = 0.0;    // (1 - cos theta0)/theta0^2
  double g1_coeff = 0.0;    // d/dtheta of g0_coeff
  double g2_bar_coeff = 0.0;  // (d2/dtheta2 of g0_coeff)/2 * m20
  ComplexMatrix x0;         // theta0 (cos phi0 sx - sin phi0 sy)
  ComplexMatrix x1_dtheta;  // dtheta structure of the first-order operator
  ComplexMatrix x1_dphi;    // dphi structure
  ComplexMatrix x2_dphi2;   // dphi^2 structure of the second-order operator
  ComplexMatrix x2_dtheta_dphi;  // dtheta*dphi structure
};

IonTrapExpansion ion_trap_expansion(const DensityMatrix& rho, double theta0, double phi0,
                                    double m20, double m02, double m11);

/// Closed-form second-order predictor for the rotation gate under a zero-mean
/// model: p_pred = tr rho^2 + 2 tr(g0 g2_bar), f_pred = tr rho^2 + tr(g0 g2_bar).
PredictorOutput ion_trap_predict(const DensityMatrix& rho, double theta0, double phi0,
                                 const FluctuationModel& model);

/// Closed-form first-order predictor for the depolarizing family:
/// correction = tr( sum_ij p_i mean_dp_j s_i rho s_i s_j rho s_j ).
PredictorOutput depolarizing_predict(const DensityMatrix& rho, const std::array<double, 4>& p,
                                     const std::array<double, 4>& mean_dp);

}  // namespace chanfid
