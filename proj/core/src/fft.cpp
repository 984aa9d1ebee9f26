#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "qcap/errors.hpp"

namespace qcap::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(std::size_t n, Direction dir) : n_(n) {
  if (n == 0) throw ContractError("Fft: length must be >= 1");
  std::vector<cplx> scratch(n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), p, p,
                           dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_) throw NumericalError("Fft: planning failed");
}

Fft::~Fft() {
  if (plan_) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

Fft::Fft(Fft&& other) noexcept : n_(other.n_), plan_(other.plan_) {
  other.plan_ = nullptr;
}

void Fft::operator()(std::span<cplx> data) const {
  if (data.size() != n_) throw ContractError("Fft: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan_), p, p);
}

}  // namespace qcap::detail
