#pragma once

#include <cstddef>
#include <span>

#include "qcap/quantizer.hpp"

namespace qcap::detail {

/// Unnormalised in-place complex DFT of fixed length. Execution is
/// thread-safe; planning is serialised internally.
class Fft {
 public:
  enum class Direction { forward, backward };

  Fft(std::size_t n, Direction dir);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&& other) noexcept;
  Fft& operator=(Fft&&) = delete;

  std::size_t size() const noexcept { return n_; }
  void operator()(std::span<cplx> data) const;

 private:
  std::size_t n_ = 0;
  void* plan_ = nullptr;
};

}  // namespace qcap::detail
