#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "chanfid/channel.hpp"
#include "chanfid/matrix.hpp"

namespace chanfid {

/**
 * Distribution of the control errors delta-lambda. `mean` and `covariance`
 * describe the unscaled model; `scale` multiplies the mean and the square
 * root of the covariance, so second moments scale with scale^2.
 *
 * Construction validates: covariance symmetric (1e-14) and positive
 * semidefinite (eigenvalue floor -1e-12), scale >= 0, diagonal covariance for
 * the uniform kind. deterministic_shift always carries a zero covariance.
 */
class FluctuationModel {
 public:
  enum class Kind { deterministic_shift, gaussian, uniform };

  static FluctuationModel deterministic_shift(std::vector<double> mean, double scale = 1.0);
  /// cov is n x n row-major.
  static FluctuationModel gaussian(std::vector<double> mean, std::vector<double> cov,
                                   double scale = 1.0);
  /// Independent per-component gaussian errors with the given standard deviations.
  static FluctuationModel gaussian_diag(std::vector<double> mean, std::vector<double> sigma,
                                        double scale = 1.0);
  static FluctuationModel uniform(std::vector<double> mean, std::vector<double> cov,
                                  double scale = 1.0);

  Kind kind() const { return kind_; }
  int arity() const { return static_cast<int>(mean_.size()); }
  double scale() const { return scale_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& covariance() const { return cov_; }
  /// Lower Cholesky factor of the unscaled covariance.
  const std::vector<double>& chol() const { return chol_; }

  /// Same model with the scale multiplier replaced.
  FluctuationModel with_scale(double s) const;

 private:
  FluctuationModel() = default;
  void validate();

  Kind kind_ = Kind::deterministic_shift;
  std::vector<double> mean_;
  std::vector<double> cov_;   // n x n row-major
  std::vector<double> chol_;  // lower triangular, n x n row-major
  double scale_ = 1.0;
};

struct Moments {
  std::vector<double> mean;           // E[delta]
  std::vector<double> second_moment;  // E[delta delta^T], n x n row-major
};

/// Scaled first and second moments: mean' = scale*mean,
/// E[dd^T] = scale^2*cov + mean' mean'^T.
Moments moments(const FluctuationModel& model);

/// One draw of delta-lambda from the model.
std::vector<double> sample(const FluctuationModel& model, std::mt19937_64& stream);

struct AveragingSpec {
  enum class Method { monte_carlo, gauss_hermite, affine_exact };
  Method method = Method::gauss_hermite;
  long long samples = 100000;  // monte_carlo
  std::uint64_t seed = 1;      // monte_carlo
  int order = 20;              // gauss_hermite nodes per dimension
  int shards = 0;              // monte_carlo; 0 derives a count from `samples`
  int threads = 1;             // execution hint only; never affects the values
};

struct AveragedOutput {
  ComplexMatrix mean;         // exactly Hermitian
  double stderr_entry = 0.0;  // max-entry standard error (monte_carlo only)
};

/**
 * Mean of T(rho, lambda + delta) over the fluctuation model.
 *
 * monte_carlo   - sharded sampling with per-shard seeds mix64(seed, shard);
 *                 shard partial sums are combined in index order, so the
 *                 result is independent of the thread count.
 * gauss_hermite - tensor-product quadrature after delta = mean + sqrt(2) L t
 *                 (gaussian models only).
 * affine_exact  - T(rho, lambda + scale*mean); requires affine_in_controls.
 */
AveragedOutput average_output(const ParamChannel& ch, const DensityMatrix& rho,
                              std::span<const double> lambda, const FluctuationModel& model,
                              const AveragingSpec& spec);

/// Splittable-stream seed derivation (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t seed, std::uint64_t k);

/// Lower Cholesky factor of a symmetric PSD matrix (n x n row-major);
/// semidefinite directions produce zero columns. Throws for indefinite input.
std::vector<double> cholesky_psd(const std::vector<double>& a, int n);

}  // namespace chanfid
