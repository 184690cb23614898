#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "chanfid/metrics.hpp"
#include "chanfid/perturb.hpp"
#include "oracle.hpp"

using namespace chanfid;
using std::numbers::pi;

namespace {

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return multiply(a, b) - multiply(b, a);
}

void check_structural_law(const PredictorOutput& out, double p0) {
  CHECK(std::abs(out.f_pred - 0.5 * (out.p_pred + p0)) <= 1e-14);
}

}  // namespace

TEST_CASE("d1 on the depolarizing family is exact") {
  const ParamChannel depol = ParamChannel::depolarizing({1.0, 0.0, 0.0, 0.0});
  std::mt19937_64 rng(51);
  const DensityMatrix rho = oracle::random_density2(rng, false);
  const std::vector<double> lam{0.8, 0.1, 0.06, 0.04};
  for (int mu = 0; mu < 4; ++mu) {
    const ComplexMatrix expect = multiply(multiply(pauli(mu), rho.mat()), pauli(mu));
    CHECK(max_abs_diff(d1_channel(depol, rho, lam, mu, 1e-4), expect) < 1e-12);
  }
}

TEST_CASE("d1 matches the commutator oracle for unitary families") {
  std::mt19937_64 rng(52);
  const ComplexMatrix h = oracle::random_hermitian(2, 1.0, rng);
  const ParamChannel ch = ParamChannel::unitary_generator(h);
  const DensityMatrix rho = oracle::random_density2(rng, false);
  for (double lam0 : {0.0, 0.4, -1.3}) {
    const std::vector<double> lam{lam0};
    const ComplexMatrix t = ch.apply(rho, lam);
    const ComplexMatrix expect = cplx(0.0, 1.0) * commutator(h, t);
    const double h1 = 1e-4;
    CHECK(max_abs_diff(d1_channel(ch, rho, lam, 0, h1), expect) < 10.0 * h1 * h1);
  }
}

TEST_CASE("d1 of a constant channel is zero") {
  std::vector<PolyTerm> constant;
  constant.push_back({0, 0, 0, cplx(1.0, 0.0), {0}});
  constant.push_back({0, 1, 1, cplx(1.0, 0.0), {0}});
  const ParamChannel ch = ParamChannel::custom(2, 1, 1, constant);
  const DensityMatrix rho = bloch_to_density({0.5, 0.1, 0.2});
  CHECK(max_abs(d1_channel(ch, rho, std::vector<double>{0.7}, 0, 1e-4)) < 1e-12);
}

TEST_CASE("d2 on the depolarizing family vanishes") {
  const ParamChannel depol = ParamChannel::depolarizing({1.0, 0.0, 0.0, 0.0});
  const DensityMatrix rho = bloch_to_density({0.2, -0.1, 0.6});
  const std::vector<double> lam{0.7, 0.1, 0.1, 0.1};
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = mu; nu < 4; ++nu)
      CHECK(max_abs(d2_channel(depol, rho, lam, mu, nu, 1e-3)) < 1e-9);
}

TEST_CASE("d2 matches the double-commutator oracle") {
  const ParamChannel ch = ParamChannel::unitary_generator(pauli(3));
  const DensityMatrix rho = bloch_to_density({1.0, 0.0, 0.0});  // (I + sx)/2
  const std::vector<double> lam{0.0};
  const ComplexMatrix expect =
      cplx(-1.0, 0.0) * commutator(pauli(3), commutator(pauli(3), rho.mat()));
  const double h = 1e-3;
  CHECK(max_abs_diff(d2_channel(ch, rho, lam, 0, 0, h), expect) < 10.0 * h * h);
}

TEST_CASE("d2 cross derivative is exact on a bilinear family and symmetric") {
  // Single Kraus operator (1 + a*b) I: the 4-corner stencil resolves the
  // mixed partial of (1+ab)^2 exactly.
  std::vector<PolyTerm> terms;
  terms.push_back({0, 0, 0, cplx(1.0, 0.0), {0, 0}});
  terms.push_back({0, 1, 1, cplx(1.0, 0.0), {0, 0}});
  terms.push_back({0, 0, 0, cplx(1.0, 0.0), {1, 1}});
  terms.push_back({0, 1, 1, cplx(1.0, 0.0), {1, 1}});
  const ParamChannel ch = ParamChannel::custom(2, 2, 1, terms);
  const DensityMatrix rho = bloch_to_density({0.0, 0.4, 0.5});
  const double a = 0.3, b = -0.2;
  const std::vector<double> lam{a, b};
  const ComplexMatrix expect = cplx(2.0 + 4.0 * a * b, 0.0) * rho.mat();
  const ComplexMatrix d01 = d2_channel(ch, rho, lam, 0, 1, 1e-3);
  const ComplexMatrix d10 = d2_channel(ch, rho, lam, 1, 0, 1e-3);
  CHECK(max_abs_diff(d01, expect) < 1e-9);
  CHECK(max_abs_diff(d01, d10) < 1e-8);
}

TEST_CASE("halving the step quarters the finite-difference defect") {
  std::mt19937_64 rng(53);
  const ComplexMatrix h = oracle::random_hermitian(2, 1.0, rng);
  const ParamChannel ch = ParamChannel::unitary_generator(h);
  const DensityMatrix rho = oracle::random_density2(rng, false);
  const std::vector<double> lam{0.6};
  const ComplexMatrix t = ch.apply(rho, lam);

  const ComplexMatrix oracle_d1 = cplx(0.0, 1.0) * commutator(h, t);
  const double e1a = max_abs_diff(d1_channel(ch, rho, lam, 0, 2e-2), oracle_d1);
  const double e1b = max_abs_diff(d1_channel(ch, rho, lam, 0, 1e-2), oracle_d1);
  CHECK(e1a / e1b >= 3.5);
  CHECK(e1a / e1b <= 4.5);

  const ComplexMatrix oracle_d2 = cplx(-1.0, 0.0) * commutator(h, commutator(h, t));
  const double e2a = max_abs_diff(d2_channel(ch, rho, lam, 0, 0, 8e-2), oracle_d2);
  const double e2b = max_abs_diff(d2_channel(ch, rho, lam, 0, 0, 4e-2), oracle_d2);
  CHECK(e2a / e2b >= 3.5);
  CHECK(e2a / e2b <= 4.5);
}

TEST_CASE("predict: trivial and closed-form bias cases") {
  const ParamChannel depol = ParamChannel::depolarizing({1.0, 0.0, 0.0, 0.0});
  const DensityMatrix ket0 = bloch_to_density({0.0, 0.0, 1.0});
  const std::vector<double> lam{1.0, 0.0, 0.0, 0.0};
  const double p0 = purity_noiseless(depol, ket0, lam);

  const FluctuationModel off = FluctuationModel::deterministic_shift({-1.0, 1.0, 0.0, 0.0}, 0.0);
  const PredictorOutput zero = predict(depol, ket0, lam, off);
  CHECK(zero.correction == 0.0);
  CHECK(zero.p_pred == doctest::Approx(p0).epsilon(1e-14));
  CHECK(zero.f_pred == doctest::Approx(p0).epsilon(1e-14));
  check_structural_law(zero, p0);

  const double eps = 0.01;
  const FluctuationModel shift =
      FluctuationModel::deterministic_shift({-1.0, 1.0, 0.0, 0.0}, eps);
  const PredictorOutput out = predict(depol, ket0, lam, shift);
  CHECK(out.order == ExpansionOrder::first);
  CHECK(out.correction == doctest::Approx(-eps).epsilon(1e-10));
  CHECK(out.f_pred == doctest::Approx(1.0 - eps).epsilon(1e-10));
  CHECK(out.p_pred == doctest::Approx(1.0 - 2.0 * eps).epsilon(1e-10));
  check_structural_law(out, p0);
}

TEST_CASE("predict leaves an O(sigma^4) remainder for symmetric noise") {
  const ParamChannel gate = ParamChannel::ion_trap();
  const DensityMatrix ket0 = bloch_to_density({0.0, 0.0, 1.0});
  const std::vector<double> lam{1.0, 0.3};
  AveragingSpec gh;
  gh.method = AveragingSpec::Method::gauss_hermite;
  gh.order = 20;

  std::vector<std::pair<double, double>> pts;
  for (double s : {0.02, 0.04, 0.06, 0.08, 0.10}) {
    const FluctuationModel g = FluctuationModel::gaussian_diag({0.0, 0.0}, {1.0, 1.0}, s);
    const PredictorOutput pred = predict(gate, ket0, lam, g);
    CHECK(pred.order == ExpansionOrder::second);
    check_structural_law(pred, purity_noiseless(gate, ket0, lam));
    const double f = channel_fidelity(gate, ket0, lam, g, gh).value;
    pts.emplace_back(s, f - pred.f_pred);
  }
  CHECK(oracle::loglog_slope(pts) >= 3.5);
}

TEST_CASE("ion_trap_expansion: g0 equals the channel output") {
  const ParamChannel gate = ParamChannel::ion_trap();
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> u(-2.0 * pi, 2.0 * pi);
  std::uniform_real_distribution<double> m(0.0, 1.0);
  for (int it = 0; it < 100; ++it) {
    const DensityMatrix rho = oracle::random_density2(rng, it % 2 == 0);
    const double theta = u(rng), phi = u(rng);
    const IonTrapExpansion e = ion_trap_expansion(rho, theta, phi, m(rng), m(rng), 0.0);
    CHECK(max_abs_diff(e.g0, gate.apply(rho, std::vector<double>{theta, phi})) < 1e-12);
  }
}

TEST_CASE("ion_trap_predict cross-validates against the generic predictor") {
  const DensityMatrix ket0 = bloch_to_density({0.0, 0.0, 1.0});
  const ParamChannel gate = ParamChannel::ion_trap();
  const FluctuationModel unit = FluctuationModel::gaussian_diag({0.0, 0.0}, {1.0, 1.0});
  const PredictorOutput closed = ion_trap_predict(ket0, 1.0, 0.3, unit);
  const PredictorOutput generic =
      predict(gate, ket0, std::vector<double>{1.0, 0.3}, unit, 1e-4, 1e-4);
  CHECK(std::abs(closed.correction - generic.correction) < 1e-6);
  check_structural_law(closed, purity(ket0));

  // Correlated angle errors exercise the mixed-moment term.
  const FluctuationModel corr =
      FluctuationModel::gaussian({0.0, 0.0}, {1.0, 0.4, 0.4, 0.8});
  const DensityMatrix mixed = bloch_to_density({0.3, -0.2, 0.5});
  const PredictorOutput c2 = ion_trap_predict(mixed, 1.2, -0.7, corr);
  const PredictorOutput g2 =
      predict(gate, mixed, std::vector<double>{1.2, -0.7}, corr, 1e-4, 1e-4);
  CHECK(std::abs(c2.correction - g2.correction) < 1e-6);

  const FluctuationModel biased = FluctuationModel::gaussian_diag({0.1, 0.0}, {1.0, 1.0});
  CHECK_THROWS_AS(ion_trap_predict(ket0, 1.0, 0.3, biased), Error);
}

TEST_CASE("ion_trap_predict scale zero returns the state purity") {
  const DensityMatrix rho = bloch_to_density({0.2, 0.3, 0.4});
  const FluctuationModel off = FluctuationModel::gaussian_diag({0.0, 0.0}, {1.0, 1.0}, 0.0);
  const PredictorOutput out = ion_trap_predict(rho, 1.0, 0.3, off);
  CHECK(out.correction == 0.0);
  CHECK(out.p_pred == doctest::Approx(purity(rho)).epsilon(1e-14));
  CHECK(out.f_pred == doctest::Approx(purity(rho)).epsilon(1e-14));
}

TEST_CASE("ion_trap_predict series branch agrees with the generic predictor") {
  const ParamChannel gate = ParamChannel::ion_trap();
  const FluctuationModel g = FluctuationModel::gaussian_diag({0.0, 0.0}, {0.5, 0.5});
  std::mt19937_64 rng(55);
  for (double theta0 : {0.0, 1e-6, 1e-4, 9e-4, 2e-3}) {
    const DensityMatrix rho = oracle::random_density2(rng, false);
    const PredictorOutput closed = ion_trap_predict(rho, theta0, 0.8, g);
    const PredictorOutput generic =
        predict(gate, rho, std::vector<double>{theta0, 0.8}, g, 1e-4, 1e-3);
    CHECK(std::abs(closed.correction - generic.correction) < 1e-6);
  }
}

TEST_CASE("ion_trap_predict gate-identity invariances") {
  const FluctuationModel g = FluctuationModel::gaussian_diag({0.0, 0.0}, {0.3, 0.7});
  std::mt19937_64 rng(56);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int it = 0; it < 20; ++it) {
    const DensityMatrix rho = oracle::random_density2(rng, it % 2 == 0);
    const double theta = u(rng), phi = u(rng);
    const PredictorOutput base = ion_trap_predict(rho, theta, phi, g);
    const PredictorOutput wrapped = ion_trap_predict(rho, theta, phi + 2.0 * pi, g);
    CHECK(std::abs(base.p_pred - wrapped.p_pred) < 1e-12);
    CHECK(std::abs(base.f_pred - wrapped.f_pred) < 1e-12);
    // R(-theta, phi+pi) = R(theta, phi)
    const PredictorOutput mirrored = ion_trap_predict(rho, -theta, phi + pi, g);
    CHECK(std::abs(base.p_pred - mirrored.p_pred) < 1e-12);
    CHECK(std::abs(base.f_pred - mirrored.f_pred) < 1e-12);
  }
}

TEST_CASE("depolarizing_predict closed-form cases") {
  const DensityMatrix ket0 = bloch_to_density({0.0, 0.0, 1.0});

  const PredictorOutput none = depolarizing_predict(ket0, {0.7, 0.1, 0.1, 0.1}, {0, 0, 0, 0});
  CHECK(none.correction == 0.0);
  CHECK(none.p_pred == doctest::Approx(0.68).epsilon(1e-14));

  const double eps = 0.02;
  const PredictorOutput out =
      depolarizing_predict(ket0, {1.0, 0.0, 0.0, 0.0}, {-eps, eps, 0.0, 0.0});
  CHECK(out.correction == doctest::Approx(-eps).epsilon(1e-13));
  CHECK(out.p_pred == doctest::Approx(1.0 - 2.0 * eps).epsilon(1e-13));
  CHECK(out.f_pred == doctest::Approx(1.0 - eps).epsilon(1e-13));
  CHECK(out.f_pred - 0.5 * (out.p_pred + 1.0) == 0.0);
}

TEST_CASE("depolarizing_predict quadratic remainder bound") {
  const ParamChannel depol = ParamChannel::depolarizing({1.0, 0.0, 0.0, 0.0});
  const DensityMatrix rho = bloch_to_density({0.4, 0.2, 0.6});
  const std::vector<double> lam{0.9, 0.04, 0.03, 0.03};
  AveragingSpec ae;
  ae.method = AveragingSpec::Method::affine_exact;

  double prev_defect = -1.0;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const std::array<double, 4> dp{-eps, 0.5 * eps, 0.25 * eps, 0.25 * eps};
    const FluctuationModel shift =
        FluctuationModel::deterministic_shift({dp[0], dp[1], dp[2], dp[3]});
    const double p_exact = channel_purity(depol, rho, lam, shift, ae).value;
    const PredictorOutput pred =
        depolarizing_predict(rho, {lam[0], lam[1], lam[2], lam[3]}, dp);

    ComplexMatrix d(2);
    for (int j = 0; j < 4; ++j)
      d += cplx(dp[j], 0.0) * multiply(multiply(pauli(j), rho.mat()), pauli(j));
    const double dnorm2 = frobenius_norm(d) * frobenius_norm(d);
    const double defect = std::abs(p_exact - pred.p_pred);
    CHECK(defect <= 2.0 * dnorm2 + 1e-15);
    if (prev_defect > 0.0) {
      // eps drops by 10x per step, so the quadratic remainder drops ~100x.
      const double ratio = prev_defect / defect;
      CHECK(ratio > 50.0);
      CHECK(ratio < 200.0);
    }
    prev_defect = defect;
  }
}

TEST_CASE("predictors depend on the model only through its moments") {
  // A uniform and a gaussian model with identical covariances must give
  // bitwise-identical predictions.
  const ParamChannel gate = ParamChannel::ion_trap();
  const DensityMatrix rho = bloch_to_density({0.1, 0.4, 0.3});
  const std::vector<double> lam{0.9, 1.7};
  const std::vector<double> cov{0.04, 0.0, 0.0, 0.02};
  const FluctuationModel u = FluctuationModel::uniform({0.0, 0.0}, cov);
  const FluctuationModel g = FluctuationModel::gaussian({0.0, 0.0}, cov);
  const PredictorOutput a = predict(gate, rho, lam, u);
  const PredictorOutput b = predict(gate, rho, lam, g);
  CHECK(a.p_pred == b.p_pred);
  CHECK(a.f_pred == b.f_pred);
  CHECK(ion_trap_predict(rho, lam[0], lam[1], u).f_pred ==
        ion_trap_predict(rho, lam[0], lam[1], g).f_pred);
}

TEST_CASE("closed-form gate prediction tracks quadrature to fourth order") {
  const ParamChannel gate = ParamChannel::ion_trap();
  const DensityMatrix rho = bloch_to_density({0.2, -0.1, 0.8});
  const std::vector<double> lam{1.4, 2.1};
  AveragingSpec gh;
  gh.method = AveragingSpec::Method::gauss_hermite;
  gh.order = 20;

  std::vector<std::pair<double, double>> fpts, ppts;
  for (double s : {0.02, 0.04, 0.08}) {
    const FluctuationModel g =
        FluctuationModel::gaussian({0.0, 0.0}, {1.0, 0.25, 0.25, 0.8}, s);
    const PredictorOutput pred = ion_trap_predict(rho, lam[0], lam[1], g);
    const MetricsReport rep = evaluate(gate, rho, lam, g, gh);
    fpts.emplace_back(s, rep.f - pred.f_pred);
    ppts.emplace_back(s, rep.p - pred.p_pred);
  }
  CHECK(oracle::loglog_slope(fpts) >= 3.5);
  CHECK(oracle::loglog_slope(ppts) >= 3.5);
}

TEST_CASE("structural law holds for every predictor on random inputs") {
  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> u(-2.0 * pi, 2.0 * pi);
  std::uniform_real_distribution<double> m(0.0, 0.3);
  const ParamChannel gate = ParamChannel::ion_trap();
  const ParamChannel depol = ParamChannel::depolarizing({1.0, 0.0, 0.0, 0.0});

  for (int it = 0; it < 40; ++it) {
    const DensityMatrix rho = oracle::random_density2(rng, it % 2 == 0);

    const FluctuationModel g = FluctuationModel::gaussian_diag({0.0, 0.0}, {m(rng), m(rng)});
    const std::vector<double> lam{u(rng), u(rng)};
    check_structural_law(predict(gate, rho, lam, g), purity_noiseless(gate, rho, lam));
    check_structural_law(ion_trap_predict(rho, lam[0], lam[1], g), purity(rho));

    const std::array<double, 4> p{0.85, 0.05, 0.05, 0.05};
    const std::array<double, 4> dp{-m(rng), m(rng), 0.0, 0.0};
    const std::vector<double> plam{p[0], p[1], p[2], p[3]};
    check_structural_law(depolarizing_predict(rho, p, dp),
                         purity_noiseless(depol, rho, plam));

    const FluctuationModel mixedmodel = FluctuationModel::gaussian_diag(
        {m(rng), -m(rng), 0.0, 0.0}, {m(rng), m(rng), m(rng), m(rng)}, 0.3);
    check_structural_law(predict(depol, rho, plam, mixedmodel),
                         purity_noiseless(depol, rho, plam));
  }
}
