#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qcap {

/// Caller violated a documented precondition (bad sizes, invalid parameters,
/// mismatched power levels).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An expectation or solver produced a non-finite result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rate formula diverges because the effective noise variance is zero.
class InfiniteRateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A power-fraction vector lies outside the linear feasible set.
class FeasibilityError : public std::domain_error {
 public:
  FeasibilityError(std::size_t band, double floor, double value);

  std::size_t band() const noexcept { return band_; }
  double floor() const noexcept { return floor_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t band_;
  double floor_;
  double value_;
};

/// Target energy is outside the [e_min, e_max] range of a constellation.
class InfeasibleEnergyError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Target energy sits exactly on e_min or e_max of a constellation with more
/// than one energy class; the Legendre transform is +infinity there.
class BoundaryEnergyError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A target spectrum puts zero energy in a band with positive width, so the
/// divergence term (and the upper bound) is infinite.
class InfeasibleMaskError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace qcap
