#include "chanfid/channel.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace chanfid {

CompletenessCheck check_completeness(const KrausSet& ks, double tol) {
  if (ks.operators.empty()) fail(ErrorKind::domain, "check_completeness: empty Kraus set");
  const int n = ks.dim();
  for (const ComplexMatrix& a : ks.operators)
    if (a.dim() != n) fail(ErrorKind::dimension_mismatch, "check_completeness: mixed dimensions");
  ComplexMatrix acc(n);
  for (const ComplexMatrix& a : ks.operators) acc += multiply(adjoint(a), a);
  CompletenessCheck out;
  out.defect = max_abs_diff(acc, ComplexMatrix::identity(n));
  out.pass = out.defect <= tol;
  return out;
}

ParamChannel ParamChannel::ion_trap() {
  ParamChannel ch;
  ch.kind_ = Kind::ion_trap;
  ch.arity_ = 2;
  ch.dim_ = 2;
  ch.baseline_ = {0.0, 0.0};
  return ch;
}

ParamChannel ParamChannel::depolarizing(const std::array<double, 4>& p, bool strict) {
  ParamChannel ch;
  ch.kind_ = Kind::depolarizing;
  ch.arity_ = 4;
  ch.dim_ = 2;
  ch.affine_ = true;
  ch.strict_ = strict;
  ch.baseline_.assign(p.begin(), p.end());
  return ch;
}

ParamChannel ParamChannel::unitary_generator(const ComplexMatrix& h) {
  if (hermiticity_defect(h) > 1e-10)
    fail(ErrorKind::not_hermitian, "unitary_generator: generator must be Hermitian");
  ParamChannel ch;
  ch.kind_ = Kind::unitary_generator;
  ch.arity_ = 1;
  ch.dim_ = h.dim();
  ch.baseline_ = {0.0};
  ch.generator_ = h;
  hermitian_symmetrize(ch.generator_);
  return ch;
}

ParamChannel ParamChannel::custom(int dim, int arity, int kraus_count,
                                  std::vector<PolyTerm> terms) {
  if (dim <= 0 || arity <= 0 || kraus_count <= 0)
    fail(ErrorKind::domain, "custom channel: dim, arity and kraus count must be positive");
  bool constant = true;
  for (const PolyTerm& t : terms) {
    if (t.kraus < 0 || t.kraus >= kraus_count || t.row < 0 || t.row >= dim || t.col < 0 ||
        t.col >= dim)
      fail(ErrorKind::domain, "custom channel: term indexes out of range");
    if (static_cast<int>(t.powers.size()) != arity)
      fail(ErrorKind::dimension_mismatch, "custom channel: exponent list must match arity");
    int total = 0;
    for (int e : t.powers) {
      if (e < 0 || e > 4) fail(ErrorKind::domain, "custom channel: exponents must be 0..4");
      total += e;
    }
    if (total > 0) constant = false;
    if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag()))
      fail(ErrorKind::domain, "custom channel: coefficients must be finite");
  }
  ParamChannel ch;
  ch.kind_ = Kind::custom;
  ch.arity_ = arity;
  ch.dim_ = dim;
  ch.affine_ = constant;  // T is affine (constant) in lambda only if no term depends on it
  ch.baseline_.assign(arity, 0.0);
  ch.kraus_count_ = kraus_count;
  ch.terms_ = std::move(terms);
  return ch;
}

void ParamChannel::check_controls(std::span<const double> lambda) const {
  if (static_cast<int>(lambda.size()) != arity_)
    fail(ErrorKind::dimension_mismatch,
         "control vector length " + std::to_string(lambda.size()) + " does not match arity " +
             std::to_string(arity_));
  for (double x : lambda)
    if (!std::isfinite(x)) fail(ErrorKind::domain, "control vector entries must be finite");
}

namespace {

ComplexMatrix rotation_gate(double theta, double phi) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  ComplexMatrix r(2);
  r(0, 0) = c;
  r(1, 1) = c;
  r(0, 1) = cplx(0.0, s) * cplx(std::cos(phi), std::sin(phi));
  r(1, 0) = cplx(0.0, s) * cplx(std::cos(phi), -std::sin(phi));
  return r;
}

}  // namespace

KrausSet ParamChannel::kraus_at(std::span<const double> lambda) const {
  check_controls(lambda);
  KrausSet ks;
  switch (kind_) {
    case Kind::ion_trap:
      ks.operators.push_back(rotation_gate(lambda[0], lambda[1]));
      break;
    case Kind::depolarizing:
      for (int i = 0; i < 4; ++i) {
        if (strict_ && lambda[i] < 0.0)
          fail(ErrorKind::domain, "depolarizing: negative probability in strict mode");
        // sqrt of a negative weight is imaginary; the operators are still
        // finite but the set is flagged by check_completeness.
        ks.operators.push_back(std::sqrt(cplx(lambda[i], 0.0)) * pauli(i));
      }
      break;
    case Kind::unitary_generator:
      ks.operators.push_back(expm_unitary(generator_, lambda[0]));
      break;
    case Kind::custom: {
      for (int k = 0; k < kraus_count_; ++k) ks.operators.push_back(ComplexMatrix(dim_));
      for (const PolyTerm& t : terms_) {
        cplx v = t.coeff;
        for (int mu = 0; mu < arity_; ++mu)
          for (int e = 0; e < t.powers[mu]; ++e) v *= lambda[mu];
        ks.operators[t.kraus](t.row, t.col) += v;
      }
      break;
    }
  }
  return ks;
}

ComplexMatrix ParamChannel::apply(const DensityMatrix& rho, std::span<const double> lambda) const {
  if (rho.dim() != dim_)
    fail(ErrorKind::dimension_mismatch, "apply: state dimension does not match the channel");
  check_controls(lambda);
  ComplexMatrix out(dim_);
  if (kind_ == Kind::depolarizing) {
    for (int i = 0; i < 4; ++i) {
      if (strict_ && lambda[i] < 0.0)
        fail(ErrorKind::domain, "depolarizing: negative probability in strict mode");
      out += cplx(lambda[i], 0.0) * multiply(multiply(pauli(i), rho.mat()), pauli(i));
    }
  } else {
    const KrausSet ks = kraus_at(lambda);
    for (const ComplexMatrix& a : ks.operators)
      out += multiply(multiply(a, rho.mat()), adjoint(a));
  }
  hermitian_symmetrize(out);
  return out;
}

}  // namespace chanfid
