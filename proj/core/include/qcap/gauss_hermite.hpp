#pragma once

#include <vector>

namespace qcap {

/// Gauss–Hermite rule for the weight exp(-x^2) on the real line.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights by Newton iteration on the orthonormal Hermite
/// recurrence. Exact for polynomials of degree <= 2n - 1.
GaussHermiteRule gauss_hermite(int n);

/// Probabilists' version: E[f(X)] ~ sum w_i f(x_i) for X ~ N(0, variance).
/// Weights sum to one.
GaussHermiteRule gaussian_expectation_rule(int n, double variance);

}  // namespace qcap
