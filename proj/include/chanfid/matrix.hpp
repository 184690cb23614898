#pragma once

#include <array>
#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include "chanfid/errors.hpp"

namespace chanfid {

using cplx = std::complex<double>;

/**
 * Dense square complex matrix in row-major order.
 *
 * Sized for few-qubit operators (dim 2..8). All free-function operations
 * below are pure; matrices are plain values and safe to share across threads.
 */
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int dim);
  ComplexMatrix(int dim, std::initializer_list<cplx> entries);

  static ComplexMatrix zero(int dim) { return ComplexMatrix(dim); }
  static ComplexMatrix identity(int dim);

  int dim() const { return dim_; }
  cplx& operator()(int r, int c) { return a_[static_cast<size_t>(r) * dim_ + c]; }
  const cplx& operator()(int r, int c) const { return a_[static_cast<size_t>(r) * dim_ + c]; }
  std::span<const cplx> entries() const { return a_; }

  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

 private:
  int dim_ = 0;
  std::vector<cplx> a_;
};

// Pauli basis: pauli(0) = I, pauli(1) = sigma_x, pauli(2) = sigma_y, pauli(3) = sigma_z.
const ComplexMatrix& pauli(int i);

/// Standard matrix product; dimensions must agree.
ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b);

/// Conjugate transpose.
ComplexMatrix adjoint(const ComplexMatrix& a);

/// Sum of diagonal entries.
cplx trace(const ComplexMatrix& a);

/// max |a(r,c) - conj(a(c,r))| over all entries.
double hermiticity_defect(const ComplexMatrix& a);

/// max |a(r,c) - b(r,c)|.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

/// max |a(r,c)|.
double max_abs(const ComplexMatrix& a);

double frobenius_norm(const ComplexMatrix& a);

/// Replace m by (m + m^dagger)/2, making it Hermitian exactly (bitwise).
void hermitian_symmetrize(ComplexMatrix& m);

/**
 * Real Hilbert-Schmidt pairing Re tr(a b) of two Hermitian matrices.
 * Inputs must be Hermitian within 1e-10; the imaginary part of the trace is
 * required to vanish at the same tolerance.
 */
double hs_product(const ComplexMatrix& a, const ComplexMatrix& b);

/**
 * exp(i s h) for Hermitian h. dim 2 uses the Pauli closed form (exactly
 * unitary up to roundoff); larger dims go through the eigendecomposition.
 * The result is checked unitary within 1e-12.
 */
ComplexMatrix expm_unitary(const ComplexMatrix& h, double s);

struct HermitianEigen {
  std::vector<double> values;  // unsorted
  ComplexMatrix vectors;       // columns are eigenvectors, unitary
};

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix (dims up to ~64).
HermitianEigen hermitian_eigensystem(const ComplexMatrix& h);

double min_hermitian_eigenvalue(const ComplexMatrix& h);

/// Hermitian, unit-trace, positive-semidefinite state. Only obtainable through
/// validate_density / bloch_to_density, so every instance satisfies the
/// invariants; the stored matrix is exactly Hermitian (symmetrized).
class DensityMatrix {
 public:
  const ComplexMatrix& mat() const { return m_; }
  int dim() const { return m_.dim(); }

 private:
  friend DensityMatrix validate_density(const ComplexMatrix&, double);
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/**
 * Checks the three density-matrix invariants and returns the validated state.
 * Hermiticity and trace are checked at `tol`; the eigenvalue floor is -100*tol
 * (so the defaults are 1e-12 / 1e-12 / -1e-10). Throws with a distinct
 * ErrorKind per violated invariant.
 */
DensityMatrix validate_density(const ComplexMatrix& m, double tol = 1e-12);

/// (I + v . sigma)/2 for a Bloch vector with |v| <= 1 + 1e-12.
DensityMatrix bloch_to_density(const std::array<double, 3>& v);

/// tr(rho^2); in (0, 1] for a valid state.
double purity(const DensityMatrix& rho);

}  // namespace chanfid
