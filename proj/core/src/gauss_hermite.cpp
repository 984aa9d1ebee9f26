#include "qcap/gauss_hermite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "qcap/errors.hpp"

namespace qcap {

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw ContractError("gauss_hermite: need at least one node");
  constexpr double kPiM4 = 0.7511255444649425;  // pi^(-1/4)
  constexpr int kMaxIter = 100;

  const auto un = static_cast<std::size_t>(n);
  // Jacobi-matrix eigenvalues as starting points, then Newton on the
  // orthonormal recurrence for full-precision roots and weights.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int j = 1; j < n; ++j) off[j - 1] = std::sqrt(j / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("gauss_hermite: eigen solver failed");

  std::vector<double> x(un), w(un);
  for (std::size_t i = 0; i < un; ++i) {
    double z = es.eigenvalues()[static_cast<Eigen::Index>(i)];
    double pp = 0.0;
    int scale = 0;  // pp carries a factor 2^scale, for large n in the tails
    for (int it = 0; it < kMaxIter; ++it) {
      double p1 = kPiM4, p2 = 0.0;
      scale = 0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
        if (std::abs(p1) > 0x1p500) {
          p1 = std::ldexp(p1, -500);
          p2 = std::ldexp(p2, -500);
          scale += 500;
        }
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (!std::isfinite(z)) throw NumericalError("gauss_hermite: Newton iteration diverged");
    x[i] = z;
    w[i] = std::ldexp(2.0 / (pp * pp), -2 * scale);
  }
  // Enforce exact symmetry.
  for (std::size_t i = 0; i < un / 2; ++i) {
    const double xs = 0.5 * (x[un - 1 - i] - x[i]);
    const double ws = 0.5 * (w[i] + w[un - 1 - i]);
    x[i] = -xs;
    x[un - 1 - i] = xs;
    w[i] = w[un - 1 - i] = ws;
  }
  if (n % 2 == 1) x[un / 2] = 0.0;
  return {std::move(x), std::move(w)};
}
GaussHermiteRule gaussian_expectation_rule(int n, double variance) {
  if (!(variance >= 0.0)) throw ContractError("gaussian_expectation_rule: negative variance");
  auto rule = gauss_hermite(n);
  const double xs = std::sqrt(2.0 * variance);
  const double ws = 1.0 / std::sqrt(std::numbers::pi);
  for (auto& v : rule.nodes) v *= xs;
  for (auto& v : rule.weights) v *= ws;
  return rule;
}

}  // namespace qcap
