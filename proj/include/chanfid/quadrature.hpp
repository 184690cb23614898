#pragma once

#include <vector>

namespace chanfid {

/// Nodes and weights for integration against exp(-x^2) on the real line
/// (physicists' convention): integral f(x) exp(-x^2) dx ~ sum w_i f(x_i).
struct GaussHermiteRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // positive, sum = sqrt(pi)
};

/// Golub-Welsch construction from the Hermite three-term recurrence;
/// order up to 64 is supported.
GaussHermiteRule gauss_hermite(int order);

}  // namespace chanfid
