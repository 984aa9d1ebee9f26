#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qcap/quantizer.hpp"
#include "qcap/random.hpp"

namespace qcap {

/// Haar-distributed unitary matrix held in factored form.
///
/// Built as the Householder QR of an i.i.d. CN(0,1) matrix, generated one
/// column at a time: after each reflection the trailing block is again
/// i.i.d. Gaussian, so every reflector comes from a fresh Gaussian vector.
/// The Q factor is multiplied by diag(r_kk / |r_kk|) so that R has a positive
/// diagonal, which makes Q exactly Haar. Products with V and V^H cost O(n^2)
/// and never form the matrix.
class HaarUnitary {
 public:
  static HaarUnitary sample(std::size_t n, Rng& rng);

  std::size_t size() const noexcept { return n_; }

  /// x <- V x
  void apply(std::span<cplx> x) const;
  /// x <- V^H x
  void apply_adjoint(std::span<cplx> x) const;

  Eigen::MatrixXcd dense() const;

 private:
  std::size_t n_ = 0;
  // Unit Householder vectors, reflector k acting on indices [k, n).
  std::vector<cplx> reflectors_;
  std::vector<std::size_t> offsets_;
  std::vector<cplx> phases_;
};

/// Dense Haar unitary from a seed.
Eigen::MatrixXcd sample_haar_unitary(std::size_t n, std::uint64_t seed);

}  // namespace qcap
