#include "chanfid/noise.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

#include "chanfid/quadrature.hpp"

namespace chanfid {

std::uint64_t mix64(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> cholesky_psd(const std::vector<double>& a, int n) {
  if (static_cast<int>(a.size()) != n * n)
    fail(ErrorKind::dimension_mismatch, "cholesky_psd: matrix size mismatch");
  double maxdiag = 0.0;
  for (int i = 0; i < n; ++i) maxdiag = std::max(maxdiag, std::abs(a[i * n + i]));
  const double tol = 1e-12 * std::max(1.0, maxdiag);
  std::vector<double> l(static_cast<size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (d < -tol) fail(ErrorKind::domain, "cholesky_psd: matrix is not positive semidefinite");
    if (d <= tol) {
      // Semidefinite direction: the rest of the column must vanish too.
      l[j * n + j] = 0.0;
      for (int i = j + 1; i < n; ++i) {
        double off = a[i * n + j];
        for (int k = 0; k < j; ++k) off -= l[i * n + k] * l[j * n + k];
        if (std::abs(off) > 1e-7 * std::max(1.0, maxdiag))
          fail(ErrorKind::domain, "cholesky_psd: matrix is not positive semidefinite");
      }
      continue;
    }
    l[j * n + j] = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / l[j * n + j];
    }
  }
  return l;
}

void FluctuationModel::validate() {
  const int n = static_cast<int>(mean_.size());
  if (n == 0) fail(ErrorKind::domain, "fluctuation model needs at least one parameter");
  if (static_cast<int>(cov_.size()) != n * n)
    fail(ErrorKind::dimension_mismatch, "covariance size does not match the mean length");
  for (double m : mean_)
    if (!std::isfinite(m)) fail(ErrorKind::domain, "fluctuation mean must be finite");
  if (!(scale_ >= 0.0)) fail(ErrorKind::domain, "fluctuation scale must be nonnegative");
  double mx = 0.0;
  for (double c : cov_) {
    if (!std::isfinite(c)) fail(ErrorKind::domain, "covariance entries must be finite");
    mx = std::max(mx, std::abs(c));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(cov_[i * n + j] - cov_[j * n + i]) > 1e-14 * std::max(1.0, mx))
        fail(ErrorKind::domain, "covariance must be symmetric");
  if (kind_ == Kind::uniform) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && cov_[i * n + j] != 0.0)
          fail(ErrorKind::domain, "uniform errors require a diagonal covariance");
  }
  ComplexMatrix c(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = cov_[i * n + j];
  if (min_hermitian_eigenvalue(c) < -1e-12)
    fail(ErrorKind::domain, "covariance must be positive semidefinite");
  chol_ = cholesky_psd(cov_, n);
}

FluctuationModel FluctuationModel::deterministic_shift(std::vector<double> mean, double scale) {
  FluctuationModel m;
  m.kind_ = Kind::deterministic_shift;
  m.cov_.assign(mean.size() * mean.size(), 0.0);
  m.mean_ = std::move(mean);
  m.scale_ = scale;
  m.validate();
  return m;
}

FluctuationModel FluctuationModel::gaussian(std::vector<double> mean, std::vector<double> cov,
                                            double scale) {
  FluctuationModel m;
  m.kind_ = Kind::gaussian;
  m.mean_ = std::move(mean);
  m.cov_ = std::move(cov);
  m.scale_ = scale;
  m.validate();
  return m;
}

FluctuationModel FluctuationModel::gaussian_diag(std::vector<double> mean,
                                                 std::vector<double> sigma, double scale) {
  const size_t n = mean.size();
  if (sigma.size() != n) fail(ErrorKind::dimension_mismatch, "gaussian_diag: length mismatch");
  std::vector<double> cov(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) cov[i * n + i] = sigma[i] * sigma[i];
  return gaussian(std::move(mean), std::move(cov), scale);
}

FluctuationModel FluctuationModel::uniform(std::vector<double> mean, std::vector<double> cov,
                                           double scale) {
  FluctuationModel m;
  m.kind_ = Kind::uniform;
  m.mean_ = std::move(mean);
  m.cov_ = std::move(cov);
  m.scale_ = scale;
  m.validate();
  return m;
}

FluctuationModel FluctuationModel::with_scale(double s) const {
  if (!(s >= 0.0)) fail(ErrorKind::domain, "fluctuation scale must be nonnegative");
  FluctuationModel m = *this;
  m.scale_ = s;
  return m;
}

Moments moments(const FluctuationModel& model) {
  const int n = model.arity();
  Moments out;
  out.mean.resize(n);
  for (int i = 0; i < n; ++i) out.mean[i] = model.scale() * model.mean()[i];
  out.second_moment.assign(static_cast<size_t>(n) * n, 0.0);
  const double s2 = model.scale() * model.scale();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.second_moment[i * n + j] = s2 * model.covariance()[i * n + j] + out.mean[i] * out.mean[j];
  return out;
}

std::vector<double> sample(const FluctuationModel& model, std::mt19937_64& stream) {
  const int n = model.arity();
  std::vector<double> x(n);
  const double s = model.scale();
  switch (model.kind()) {
    case FluctuationModel::Kind::deterministic_shift:
      for (int i = 0; i < n; ++i) x[i] = s * model.mean()[i];
      break;
    case FluctuationModel::Kind::gaussian: {
      std::normal_distribution<double> nd(0.0, 1.0);
      std::vector<double> z(n);
      for (int i = 0; i < n; ++i) z[i] = nd(stream);
      const std::vector<double>& l = model.chol();
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int k = 0; k <= i; ++k) v += l[i * n + k] * z[k];
        x[i] = s * model.mean()[i] + s * v;
      }
      break;
    }
    case FluctuationModel::Kind::uniform: {
      std::uniform_real_distribution<double> ud(-1.0, 1.0);
      const double half = std::sqrt(3.0);
      for (int i = 0; i < n; ++i) {
        const double sigma = std::sqrt(model.covariance()[i * n + i]);
        x[i] = s * model.mean()[i] + s * half * sigma * ud(stream);
      }
      break;
    }
  }
  return x;
}

namespace {

struct ShardAccumulator {
  std::vector<cplx> sum;       // entrywise sum of T
  std::vector<double> sum_sq;  // entrywise sum of re^2 + im^2
  long long count = 0;

  explicit ShardAccumulator(int dim)
      : sum(static_cast<size_t>(dim) * dim, cplx(0.0, 0.0)),
        sum_sq(static_cast<size_t>(dim) * dim, 0.0) {}

  void add(const ComplexMatrix& t) {
    const auto e = t.entries();
    for (size_t k = 0; k < e.size(); ++k) {
      sum[k] += e[k];
      sum_sq[k] += e[k].real() * e[k].real() + e[k].imag() * e[k].imag();
    }
    ++count;
  }
};

AveragedOutput monte_carlo_average(const ParamChannel& ch, const DensityMatrix& rho,
                                   std::span<const double> lambda, const FluctuationModel& model,
                                   const AveragingSpec& spec) {
  if (spec.samples < 1) fail(ErrorKind::domain, "monte_carlo needs at least one sample");
  const int dim = ch.dim();
  const int arity = ch.arity();
  long long shards = spec.shards > 0 ? spec.shards
                                     : std::clamp<long long>(spec.samples / 16384, 1, 64);
  shards = std::min<long long>(shards, spec.samples);

  std::vector<ShardAccumulator> parts(shards, ShardAccumulator(dim));

  auto run_shard = [&](long long k, ShardAccumulator& acc) {
    const long long n = spec.samples / shards + (k < spec.samples % shards ? 1 : 0);
    std::mt19937_64 rng(mix64(spec.seed, static_cast<std::uint64_t>(k)));
    std::vector<double> local(arity);
    for (long long i = 0; i < n; ++i) {
      const std::vector<double> delta = sample(model, rng);
      for (int mu = 0; mu < arity; ++mu) local[mu] = lambda[mu] + delta[mu];
      acc.add(ch.apply(rho, local));
    }
  };

  const int threads = std::clamp<int>(spec.threads, 1, static_cast<int>(shards));
  if (threads <= 1) {
    for (long long k = 0; k < shards; ++k) run_shard(k, parts[k]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (long long k = t; k < shards; k += threads) run_shard(k, parts[k]);
      });
    for (std::thread& th : pool) th.join();
  }

  // Shards are combined in index order so the reduction is independent of
  // how the shards were scheduled.
  ShardAccumulator total(dim);
  for (const ShardAccumulator& p : parts) {
    for (size_t k = 0; k < total.sum.size(); ++k) {
      total.sum[k] += p.sum[k];
      total.sum_sq[k] += p.sum_sq[k];
    }
    total.count += p.count;
  }

  AveragedOutput out;
  out.mean = ComplexMatrix(dim);
  const double n = static_cast<double>(total.count);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) out.mean(r, c) = total.sum[static_cast<size_t>(r) * dim + c] / n;
  if (total.count > 1) {
    double worst = 0.0;
    for (size_t k = 0; k < total.sum.size(); ++k) {
      const cplx m = total.sum[k] / n;
      const double var =
          std::max(0.0, (total.sum_sq[k] - n * (m.real() * m.real() + m.imag() * m.imag())) /
                            (n - 1.0));
      worst = std::max(worst, std::sqrt(var / n));
    }
    out.stderr_entry = worst;
  }
  return out;
}

AveragedOutput quadrature_average(const ParamChannel& ch, const DensityMatrix& rho,
                                  std::span<const double> lambda, const FluctuationModel& model,
                                  const AveragingSpec& spec) {
  if (model.kind() != FluctuationModel::Kind::gaussian)
    fail(ErrorKind::incompatible, "gauss_hermite averaging requires a gaussian model");
  const int arity = ch.arity();
  const GaussHermiteRule rule = gauss_hermite(spec.order);
  const double s = model.scale();
  const std::vector<double>& l = model.chol();

  // Dimensions whose Cholesky column vanishes (or scale == 0) carry no
  // randomness; they collapse to a single node.
  std::vector<int> active;
  if (s > 0.0) {
    for (int j = 0; j < arity; ++j) {
      bool nonzero = false;
      for (int i = j; i < arity; ++i) nonzero = nonzero || l[i * arity + j] != 0.0;
      if (nonzero) active.push_back(j);
    }
  }

  std::vector<double> base(arity);
  for (int mu = 0; mu < arity; ++mu) base[mu] = lambda[mu] + s * model.mean()[mu];

  AveragedOutput out;
  out.mean = ComplexMatrix(ch.dim());
  if (active.empty()) {
    out.mean = ch.apply(rho, base);
    return out;
  }

  const int nd = static_cast<int>(active.size());
  std::vector<int> index(nd, 0);
  std::vector<double> point(arity);
  const double sqrt2 = std::sqrt(2.0);
  double weight_total = 0.0;
  while (true) {
    double w = 1.0;
    for (int d = 0; d < nd; ++d) w *= rule.weights[index[d]];
    for (int mu = 0; mu < arity; ++mu) {
      double off = 0.0;
      for (int d = 0; d < nd; ++d) off += l[mu * arity + active[d]] * rule.nodes[index[d]];
      point[mu] = base[mu] + sqrt2 * s * off;
    }
    out.mean += cplx(w, 0.0) * ch.apply(rho, point);
    weight_total += w;
    int d = 0;
    for (; d < nd; ++d) {
      if (++index[d] < spec.order) break;
      index[d] = 0;
    }
    if (d == nd) break;
  }
  out.mean *= cplx(1.0 / weight_total, 0.0);
  hermitian_symmetrize(out.mean);
  return out;
}

}  // namespace

AveragedOutput average_output(const ParamChannel& ch, const DensityMatrix& rho,
                              std::span<const double> lambda, const FluctuationModel& model,
                              const AveragingSpec& spec) {
  if (model.arity() != ch.arity())
    fail(ErrorKind::dimension_mismatch, "noise dimension does not match the channel arity");
  AveragedOutput out;
  switch (spec.method) {
    case AveragingSpec::Method::affine_exact: {
      if (!ch.affine_in_controls())
        fail(ErrorKind::incompatible, "affine_exact requires a channel affine in its controls");
      std::vector<double> shifted(lambda.begin(), lambda.end());
      for (int mu = 0; mu < ch.arity(); ++mu) shifted[mu] += model.scale() * model.mean()[mu];
      out.mean = ch.apply(rho, shifted);
      break;
    }
    case AveragingSpec::Method::gauss_hermite:
      out = quadrature_average(ch, rho, lambda, model, spec);
      break;
    case AveragingSpec::Method::monte_carlo:
      out = monte_carlo_average(ch, rho, lambda, model, spec);
      break;
  }
  if (hermiticity_defect(out.mean) > 1e-12)
    fail(ErrorKind::numerical, "average_output: mean is not Hermitian");
  return out;
}

}  // namespace chanfid
