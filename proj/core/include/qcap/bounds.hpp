#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qcap/moments.hpp"
#include "qcap/quantizer.hpp"

namespace qcap {

/// Constellation energies collapsed to distinct (energy, multiplicity) pairs.
class EnergyClasses {
 public:
  explicit EnergyClasses(const Constellation& cset);

  struct Class {
    double energy;
    std::size_t count;
  };

  std::span<const Class> classes() const noexcept { return classes_; }
  std::size_t total() const noexcept { return total_; }
  double e_min() const noexcept { return classes_.front().energy; }
  double e_max() const noexcept { return classes_.back().energy; }
  double e_mean() const noexcept { return e_mean_; }

  /// ln((1/|A|) sum exp(theta e)), max-shift stabilised.
  double cumulant(double theta) const noexcept;
  /// Mean energy of the tilted law P(x) ~ exp(theta |x|^2).
  double tilted_mean(double theta) const noexcept;
  /// Entropy in bits of the tilted law.
  double tilted_entropy_bits(double theta) const noexcept;

 private:
  std::vector<Class> classes_;
  std::size_t total_ = 0;
  double e_mean_ = 0.0;
};

struct RateFunctionValue {
  double value = 0.0;       ///< I_S(s) in nats
  double theta_star = 0.0;  ///< maximising tilt
};

double cumulant(const Constellation& cset, double theta);

/// Legendre transform of the cumulant generating function at s, by bisection
/// on the tilted mean.
RateFunctionValue rate_function(const Constellation& cset, double s);

/// Maximum entropy (bits) of a law on the constellation with E|x|^2 = s.
double h_max(const Constellation& cset, double s);

struct UpperBoundReport {
  double h_max = 0.0;    ///< bits
  double kl_term = 0.0;  ///< D(delta || nu), bits
  double r_upper = 0.0;  ///< h_max - kl_term
  double theta_star = 0.0;
  double s_tot = 0.0;
  std::vector<double> nu_m;
  std::optional<double> gap_vs_linear;  ///< h_max - log2(1 + |alpha|^2/tau)
};

UpperBoundReport rate_upper_bound(const Constellation& cset,
                                  std::span<const double> target_s_m,
                                  std::span<const double> deltas,
                                  const std::optional<AgnMoments>& m_tx = {});

}  // namespace qcap
