#pragma once

#include <array>
#include <span>
#include <vector>

#include "chanfid/matrix.hpp"

namespace chanfid {

/// Classical control parameters (angles in radians, probabilities
/// dimensionless). Finiteness is checked wherever a vector is consumed.
using ControlVector = std::vector<double>;

struct KrausSet {
  std::vector<ComplexMatrix> operators;
  int dim() const { return operators.empty() ? 0 : operators.front().dim(); }
};

struct CompletenessCheck {
  double defect = 0.0;  // max-entry deviation of sum A_i^dag A_i from I
  bool pass = false;
};

/// Trace-preservation check: sum_i A_i^dag A_i == I within tol.
CompletenessCheck check_completeness(const KrausSet& ks, double tol);

/// One monomial of a Kraus-entry polynomial for custom channels:
/// coeff * prod_mu lambda_mu^powers[mu] added to operators[kraus](row, col).
struct PolyTerm {
  int kraus = 0;
  int row = 0;
  int col = 0;
  cplx coeff;
  std::vector<int> powers;  // one exponent per control parameter, each 0..4
};

/**
 * A channel family T(rho, lambda): a generator of Kraus sets from a control
 * vector. Instances are immutable; kraus_at and apply are pure, so concurrent
 * evaluation at different lambda needs no synchronization.
 *
 * The depolarizing family evaluates its map as the affine sum
 * sum_i lambda_i sigma_i rho sigma_i, which stays exact when the control
 * vector leaves the probability simplex (no Kraus square roots involved).
 */
class ParamChannel {
 public:
  enum class Kind { ion_trap, depolarizing, unitary_generator, custom };

  /// Single-qubit rotation gate R(theta, phi); arity 2, one unitary Kraus
  /// operator cos(theta/2) I + i sin(theta/2)(cos(phi) sx - sin(phi) sy).
  static ParamChannel ion_trap();

  /// Pauli channel with probability weights as the controls (arity 4).
  /// `p` is kept as the baseline control point. In strict mode any negative
  /// weight is rejected at evaluation time.
  static ParamChannel depolarizing(const std::array<double, 4>& p, bool strict = false);

  /// One-parameter unitary family exp(i lambda h) for Hermitian h; arity 1.
  static ParamChannel unitary_generator(const ComplexMatrix& h);

  /// Kraus operators given entrywise as polynomials in the controls
  /// (degree <= 4 per parameter).
  static ParamChannel custom(int dim, int arity, int kraus_count, std::vector<PolyTerm> terms);

  Kind kind() const { return kind_; }
  int arity() const { return arity_; }
  int dim() const { return dim_; }
  bool affine_in_controls() const { return affine_; }
  bool strict() const { return strict_; }
  const ControlVector& baseline() const { return baseline_; }

  /// Kraus operators at the given controls; deterministic in lambda.
  KrausSet kraus_at(std::span<const double> lambda) const;

  /// Channel output sum_i A_i rho A_i^dag (affine evaluation for the
  /// depolarizing family); the result is exactly Hermitian.
  ComplexMatrix apply(const DensityMatrix& rho, std::span<const double> lambda) const;

 private:
  ParamChannel() = default;
  void check_controls(std::span<const double> lambda) const;

  Kind kind_ = Kind::ion_trap;
  int arity_ = 0;
  int dim_ = 0;
  bool affine_ = false;
  bool strict_ = false;
  ControlVector baseline_;
  ComplexMatrix generator_;      // unitary_generator
  int kraus_count_ = 0;          // custom
  std::vector<PolyTerm> terms_;  // custom
};

}  // namespace chanfid
