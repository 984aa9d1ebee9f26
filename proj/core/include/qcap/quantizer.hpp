#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace qcap {

using cplx = std::complex<double>;

/// Loading factor used when a clip level is derived from the input power.
inline constexpr double kDefaultClipKappa = 3.0;

/// Clip level c = kappa * sqrt(pbar / 2) for a complex input of power pbar.
double default_clip(double pbar, double kappa = kDefaultClipKappa);

/// Output levels of a b-bit midrise quantizer with outermost level +-clip.
std::vector<double> midrise_levels(int bits, double clip);

/// Componentwise complex scalar quantizer (DAC/ADC model).
///
/// The same per-dimension map is applied to the real and imaginary parts.
/// Non-identity quantizers snap to the nearest level; a sample exactly on a
/// decision threshold goes to the upper level.
class QuantizerSpec {
 public:
  struct Identity {};
  struct UniformMidrise {
    int bits;
    double clip;
  };
  struct CustomLevels {
    std::vector<double> levels;
  };
  using Kind = std::variant<Identity, UniformMidrise, CustomLevels>;

  QuantizerSpec() : QuantizerSpec(Identity{}) {}

  static QuantizerSpec identity();
  static QuantizerSpec uniform_midrise(int bits, double clip);
  /// Midrise quantizer whose clip level follows default_clip(pbar, kappa).
  static QuantizerSpec uniform_midrise_loaded(int bits, double pbar,
                                              double kappa = kDefaultClipKappa);
  static QuantizerSpec custom_levels(std::vector<double> levels);

  const Kind& kind() const noexcept { return kind_; }
  bool is_identity() const noexcept { return levels_.empty(); }

  /// Sorted per-dimension output levels; empty for the identity.
  std::span<const double> levels() const noexcept { return levels_; }
  /// Decision thresholds (midpoints between adjacent levels).
  std::span<const double> thresholds() const noexcept { return thresholds_; }

  double quantize_dim(double v) const noexcept;
  cplx operator()(cplx u) const noexcept {
    return {quantize_dim(u.real()), quantize_dim(u.imag())};
  }

  /// Largest output magnitude per dimension (infinite for the identity).
  double max_level() const noexcept;

 private:
  explicit QuantizerSpec(Kind kind);

  Kind kind_;
  std::vector<double> levels_;
  std::vector<double> thresholds_;
};

cplx quantize(const QuantizerSpec& spec, cplx u) noexcept;
void quantize(const QuantizerSpec& spec, std::span<const cplx> in,
              std::span<cplx> out);

/// Finite set of complex output points (the DAC alphabet).
class Constellation {
 public:
  explicit Constellation(std::vector<cplx> points);

  std::span<const cplx> points() const noexcept { return points_; }
  std::span<const double> energies() const noexcept { return energies_; }
  std::size_t size() const noexcept { return points_.size(); }

  double e_min() const noexcept { return e_min_; }
  double e_max() const noexcept { return e_max_; }
  /// Mean energy under uniform weighting of the points.
  double e_mean() const noexcept { return e_mean_; }

 private:
  std::vector<cplx> points_;
  std::vector<double> energies_;
  double e_min_ = 0.0;
  double e_max_ = 0.0;
  double e_mean_ = 0.0;
};

/// Cartesian product of the per-dimension levels. Throws ContractError for
/// the identity quantizer, whose output set is unbounded.
Constellation constellation_of(const QuantizerSpec& spec);

}  // namespace qcap
