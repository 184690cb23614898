#include "chanfid/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chanfid/matrix.hpp"

namespace chanfid {

GaussHermiteRule gauss_hermite(int order) {
  if (order < 1 || order > 64) fail(ErrorKind::domain, "gauss_hermite: order must be 1..64");
  // Jacobi matrix of the Hermite recurrence: zero diagonal, off-diagonal
  // beta_k = sqrt(k/2). Nodes are its eigenvalues; weights come from the
  // first components of the eigenvectors scaled by mu_0 = sqrt(pi).
  ComplexMatrix j(order);
  for (int k = 0; k + 1 < order; ++k) {
    const double beta = std::sqrt(0.5 * (k + 1));
    j(k, k + 1) = beta;
    j(k + 1, k) = beta;
  }
  const HermitianEigen eig = hermitian_eigensystem(j);
  std::vector<int> idx(order);
  for (int i = 0; i < order; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return eig.values[a] < eig.values[b]; });
  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double mu0 = std::sqrt(std::numbers::pi);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = eig.values[idx[i]];
    rule.weights[i] = mu0 * std::norm(eig.vectors(0, idx[i]));
  }
  // The spectrum is symmetric about zero; pairing the nodes exactly makes odd
  // integrands cancel to the last bit.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

}  // namespace chanfid
