#include "qcap/haar.hpp"

#include <cmath>

#include "qcap/errors.hpp"

namespace qcap {

HaarUnitary HaarUnitary::sample(std::size_t n, Rng& rng) {
  if (n == 0) throw ContractError("sample_haar_unitary: n must be >= 1");
  HaarUnitary h;
  h.n_ = n;
  h.offsets_.reserve(n + 1);
  h.phases_.reserve(n);
  h.reflectors_.reserve(n * (n + 1) / 2);
  ComplexNormal cn(1.0);

  std::vector<cplx> v;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t len = n - k;
    v.resize(len);
    for (auto& e : v) e = cn(rng);

    double norm2 = 0.0;
    for (const auto& e : v) norm2 += std::norm(e);
    const double norm = std::sqrt(norm2);
    const double a0 = std::abs(v[0]);
    const cplx phase = a0 > 0.0 ? v[0] / a0 : cplx{1.0, 0.0};

    // H v = beta e_1 with beta = -phase * ||v||; Haar normalisation scales
    // column k of Q by beta / |beta| = -phase.
    h.offsets_.push_back(h.reflectors_.size());
    v[0] += phase * norm;
    double unorm2 = 0.0;
    for (const auto& e : v) unorm2 += std::norm(e);
    const double inv = unorm2 > 0.0 ? 1.0 / std::sqrt(unorm2) : 0.0;
    for (const auto& e : v) h.reflectors_.push_back(e * inv);
    h.phases_.push_back(-phase);
  }
  h.offsets_.push_back(h.reflectors_.size());
  return h;
}

namespace {

// y[k:] <- (I - 2 u u^H) y[k:]
inline void reflect(const cplx* u, cplx* y, std::size_t len) {
  const auto n = static_cast<Eigen::Index>(len);
  Eigen::Map<const Eigen::VectorXcd> uv(u, n);
  Eigen::Map<Eigen::VectorXcd> yv(y, n);
  const cplx dot = 2.0 * uv.dot(yv);  // conjugates u
  yv -= dot * uv;
}

}  // namespace

void HaarUnitary::apply(std::span<cplx> x) const {
  if (x.size() != n_) throw ContractError("HaarUnitary::apply: size mismatch");
  for (std::size_t k = 0; k < n_; ++k) x[k] *= phases_[k];
  for (std::size_t k = n_; k-- > 0;)
    reflect(reflectors_.data() + offsets_[k], x.data() + k, n_ - k);
}

void HaarUnitary::apply_adjoint(std::span<cplx> x) const {
  if (x.size() != n_) throw ContractError("HaarUnitary::apply_adjoint: size mismatch");
  for (std::size_t k = 0; k < n_; ++k)
    reflect(reflectors_.data() + offsets_[k], x.data() + k, n_ - k);
  for (std::size_t k = 0; k < n_; ++k) x[k] *= std::conj(phases_[k]);
}

Eigen::MatrixXcd HaarUnitary::dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXcd m(n, n);
  std::vector<cplx> col(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    std::fill(col.begin(), col.end(), cplx{});
    col[j] = 1.0;
    apply(col);
    for (std::size_t i = 0; i < n_; ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return m;
}

Eigen::MatrixXcd sample_haar_unitary(std::size_t n, std::uint64_t seed) {
  auto rng = make_rng(seed, "haar");
  return HaarUnitary::sample(n, rng).dense();
}

}  // namespace qcap
