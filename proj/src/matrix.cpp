#include "chanfid/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

namespace chanfid {

ComplexMatrix::ComplexMatrix(int dim) : dim_(dim) {
  if (dim <= 0) fail(ErrorKind::dimension_mismatch, "matrix dimension must be positive");
  a_.assign(static_cast<size_t>(dim) * dim, cplx(0.0, 0.0));
}

ComplexMatrix::ComplexMatrix(int dim, std::initializer_list<cplx> entries) : ComplexMatrix(dim) {
  if (entries.size() != a_.size())
    fail(ErrorKind::dimension_mismatch, "entry count does not match dim^2");
  size_t k = 0;
  for (const cplx& e : entries) a_[k++] = e;
}

ComplexMatrix ComplexMatrix::identity(int dim) {
  ComplexMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

bool ComplexMatrix::all_finite() const {
  for (const cplx& e : a_)
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
  return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  if (dim_ != o.dim_) fail(ErrorKind::dimension_mismatch, "matrix dimensions differ");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  if (dim_ != o.dim_) fail(ErrorKind::dimension_mismatch, "matrix dimensions differ");
  for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (cplx& e : a_) e *= s;
  return *this;
}

const ComplexMatrix& pauli(int i) {
  static const ComplexMatrix sigma[4] = {
      ComplexMatrix::identity(2),
      ComplexMatrix(2, {0.0, 1.0, 1.0, 0.0}),
      ComplexMatrix(2, {0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0}),
      ComplexMatrix(2, {1.0, 0.0, 0.0, -1.0}),
  };
  if (i < 0 || i > 3) fail(ErrorKind::domain, "pauli index must be 0..3");
  return sigma[i];
}

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) fail(ErrorKind::dimension_mismatch, "multiply: dimensions differ");
  const int n = a.dim();
  ComplexMatrix out(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      cplx s = 0.0;
      for (int k = 0; k < n; ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& a) {
  const int n = a.dim();
  ComplexMatrix out(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = std::conj(a(c, r));
  return out;
}

cplx trace(const ComplexMatrix& a) {
  cplx t = 0.0;
  for (int i = 0; i < a.dim(); ++i) t += a(i, i);
  return t;
}

double hermiticity_defect(const ComplexMatrix& a) {
  double d = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) d = std::max(d, std::abs(a(r, c) - std::conj(a(c, r))));
  return d;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) fail(ErrorKind::dimension_mismatch, "max_abs_diff: dimensions differ");
  double d = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) d = std::max(d, std::abs(a(r, c) - b(r, c)));
  return d;
}

double max_abs(const ComplexMatrix& a) {
  double d = 0.0;
  for (const cplx& e : a.entries()) d = std::max(d, std::abs(e));
  return d;
}

double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const cplx& e : a.entries()) s += std::norm(e);
  return std::sqrt(s);
}

void hermitian_symmetrize(ComplexMatrix& m) {
  const int n = m.dim();
  for (int r = 0; r < n; ++r) {
    m(r, r) = cplx(m(r, r).real(), 0.0);
    for (int c = r + 1; c < n; ++c) {
      const cplx v = 0.5 * (m(r, c) + std::conj(m(c, r)));
      m(r, c) = v;
      m(c, r) = std::conj(v);
    }
  }
}

double hs_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) fail(ErrorKind::dimension_mismatch, "hs_product: dimensions differ");
  if (hermiticity_defect(a) > 1e-10 || hermiticity_defect(b) > 1e-10)
    fail(ErrorKind::not_hermitian, "hs_product: operands must be Hermitian within 1e-10");
  const cplx t = trace(multiply(a, b));
  if (std::abs(t.imag()) > 1e-10)
    fail(ErrorKind::numerical, "hs_product: trace has a non-negligible imaginary part");
  return t.real();
}

namespace {

// One full cyclic sweep of two-sided plane rotations; a is overwritten by the
// rotated matrix and v accumulates the eigenvectors.
void jacobi_sweep(ComplexMatrix& a, ComplexMatrix& v) {
  const int n = a.dim();
  for (int p = 0; p < n - 1; ++p) {
    for (int q = p + 1; q < n; ++q) {
      const cplx w = a(p, q);
      const double r = std::abs(w);
      if (r < 1e-300) continue;
      const double app = a(p, p).real();
      const double aqq = a(q, q).real();
      const double d = 0.5 * (app - aqq);
      const double hyp = std::hypot(d, r);
      // Shift of the larger eigenvalue relative to a(p,p), in a
      // cancellation-free form.
      const double t = (d >= 0.0) ? (r * r) / (d + hyp) : (hyp - d);
      const double nrm = std::hypot(r, t);
      const double c = r / nrm;
      const double s = t / nrm;
      const cplx phase = w / r;
      const cplx gqp = s * std::conj(phase);  // column-p row-q entry of the rotation
      const cplx gpq = -s * phase;            // column-q row-p entry
      for (int k = 0; k < n; ++k) {
        const cplx akp = a(k, p), akq = a(k, q);
        a(k, p) = akp * c + akq * gqp;
        a(k, q) = akp * gpq + akq * c;
      }
      for (int k = 0; k < n; ++k) {
        const cplx apk = a(p, k), aqk = a(q, k);
        a(p, k) = c * apk + s * phase * aqk;
        a(q, k) = -s * std::conj(phase) * apk + c * aqk;
      }
      for (int k = 0; k < n; ++k) {
        const cplx vkp = v(k, p), vkq = v(k, q);
        v(k, p) = vkp * c + vkq * gqp;
        v(k, q) = vkp * gpq + vkq * c;
      }
    }
  }
}

double offdiag_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c)
      if (r != c) s += std::norm(a(r, c));
  return std::sqrt(s);
}

}  // namespace

HermitianEigen hermitian_eigensystem(const ComplexMatrix& h) {
  ComplexMatrix a = h;
  hermitian_symmetrize(a);
  const int n = a.dim();
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double scale = std::max(1.0, frobenius_norm(a));
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (offdiag_norm(a) <= 1e-15 * scale) break;
    jacobi_sweep(a, v);
  }
  HermitianEigen out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = a(i, i).real();
  out.vectors = std::move(v);
  return out;
}

double min_hermitian_eigenvalue(const ComplexMatrix& h) {
  if (h.dim() == 2) {
    const double a = h(0, 0).real();
    const double c = h(1, 1).real();
    const double b = std::abs(0.5 * (h(0, 1) + std::conj(h(1, 0))));
    return 0.5 * (a + c) - std::hypot(0.5 * (a - c), b);
  }
  double lo = 0.0;
  bool first = true;
  for (double ev : hermitian_eigensystem(h).values) {
    if (first || ev < lo) lo = ev;
    first = false;
  }
  return lo;
}

ComplexMatrix expm_unitary(const ComplexMatrix& h, double s) {
  if (hermiticity_defect(h) > 1e-10)
    fail(ErrorKind::not_hermitian, "expm_unitary: generator must be Hermitian within 1e-10");
  ComplexMatrix hm = h;
  hermitian_symmetrize(hm);
  const int n = hm.dim();
  ComplexMatrix u(n);
  if (n == 2) {
    const double a0 = 0.5 * (hm(0, 0).real() + hm(1, 1).real());
    const double az = 0.5 * (hm(0, 0).real() - hm(1, 1).real());
    const double ax = hm(0, 1).real();
    const double ay = -hm(0, 1).imag();
    const double r = std::sqrt(ax * ax + ay * ay + az * az);
    const cplx phase(std::cos(s * a0), std::sin(s * a0));
    if (r == 0.0) {
      u(0, 0) = phase;
      u(1, 1) = phase;
    } else {
      const double c = std::cos(s * r);
      const double sn = std::sin(s * r) / r;
      u(0, 0) = phase * cplx(c, sn * az);
      u(1, 1) = phase * cplx(c, -sn * az);
      u(0, 1) = phase * cplx(sn * ay, sn * ax);
      u(1, 0) = phase * cplx(-sn * ay, sn * ax);
    }
  } else {
    const HermitianEigen eig = hermitian_eigensystem(hm);
    // u = V diag(exp(i s lambda)) V^dagger
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        cplx e = 0.0;
        for (int k = 0; k < n; ++k) {
          const cplx ph(std::cos(s * eig.values[k]), std::sin(s * eig.values[k]));
          e += eig.vectors(r, k) * ph * std::conj(eig.vectors(c, k));
        }
        u(r, c) = e;
      }
  }
  const double defect = max_abs_diff(multiply(adjoint(u), u), ComplexMatrix::identity(n));
  if (defect > 1e-12) fail(ErrorKind::numerical, "expm_unitary: result failed the unitarity check");
  return u;
}

DensityMatrix validate_density(const ComplexMatrix& m, double tol) {
  if (!m.all_finite()) fail(ErrorKind::domain, "density matrix has non-finite entries");
  if (hermiticity_defect(m) > tol)
    fail(ErrorKind::not_hermitian, "density matrix is not Hermitian at the requested tolerance");
  const cplx t = trace(m);
  if (std::abs(t - cplx(1.0, 0.0)) > tol)
    fail(ErrorKind::bad_trace, "density matrix trace differs from 1");
  ComplexMatrix sym = m;
  hermitian_symmetrize(sym);
  if (min_hermitian_eigenvalue(sym) < -100.0 * tol)
    fail(ErrorKind::not_positive, "density matrix has a negative eigenvalue");
  return DensityMatrix(std::move(sym));
}

DensityMatrix bloch_to_density(const std::array<double, 3>& v) {
  const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(len <= 1.0 + 1e-12)) fail(ErrorKind::domain, "Bloch vector must have |v| <= 1");
  ComplexMatrix m(2);
  m(0, 0) = 0.5 * (1.0 + v[2]);
  m(1, 1) = 0.5 * (1.0 - v[2]);
  m(0, 1) = 0.5 * cplx(v[0], -v[1]);
  m(1, 0) = 0.5 * cplx(v[0], v[1]);
  return validate_density(m);
}

double purity(const DensityMatrix& rho) { return hs_product(rho.mat(), rho.mat()); }

}  // namespace chanfid
