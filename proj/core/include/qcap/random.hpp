#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace qcap {

using Rng = std::mt19937_64;

/// Deterministic substream seed for (master seed, purpose tag, index).
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t index = 0) noexcept;

inline Rng make_rng(std::uint64_t master, std::string_view purpose,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(master, purpose, index));
}

/// Circularly-symmetric complex Gaussian sampler, CN(0, variance).
class ComplexNormal {
 public:
  explicit ComplexNormal(double variance = 1.0);

  template <class Engine>
  std::complex<double> operator()(Engine& eng) {
    const double re = normal_(eng);
    const double im = normal_(eng);
    return {scale_ * re, scale_ * im};
  }

 private:
  std::normal_distribution<double> normal_{0.0, 1.0};
  double scale_;
};

}  // namespace qcap
