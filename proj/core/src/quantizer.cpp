#include "qcap/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qcap/errors.hpp"

namespace qcap {

namespace {

constexpr int kMaxBits = 20;

std::vector<double> midpoints(const std::vector<double>& levels) {
  std::vector<double> t;
  if (levels.size() < 2) return t;
  t.reserve(levels.size() - 1);
  for (std::size_t k = 0; k + 1 < levels.size(); ++k)
    t.push_back(0.5 * (levels[k] + levels[k + 1]));
  return t;
}

}  // namespace

double default_clip(double pbar, double kappa) {
  if (!(pbar > 0.0) || !(kappa > 0.0))
    throw ContractError("default_clip: pbar and kappa must be positive");
  return kappa * std::sqrt(pbar / 2.0);
}

std::vector<double> midrise_levels(int bits, double clip) {
  if (bits < 1 || bits > kMaxBits)
    throw ContractError("midrise quantizer: bits must be in [1, " +
                        std::to_string(kMaxBits) + "]");
  if (!(clip > 0.0) || !std::isfinite(clip))
    throw ContractError("midrise quantizer: clip level must be positive");
  const std::size_t count = std::size_t{1} << bits;
  const double span = static_cast<double>(count - 1);
  std::vector<double> levels(count);
  for (std::size_t k = 0; k < count; ++k)
    levels[k] = clip * (2.0 * static_cast<double>(k) + 1.0 - static_cast<double>(count)) / span;
  return levels;
}

QuantizerSpec::QuantizerSpec(Kind kind) : kind_(std::move(kind)) {
  if (const auto* m = std::get_if<UniformMidrise>(&kind_)) {
    levels_ = midrise_levels(m->bits, m->clip);
  } else if (const auto* c = std::get_if<CustomLevels>(&kind_)) {
    if (c->levels.empty())
      throw ContractError("custom quantizer: level list is empty");
    for (std::size_t k = 0; k < c->levels.size(); ++k) {
      if (std::isnan(c->levels[k]))
        throw ContractError("custom quantizer: NaN level");
      if (k > 0 && !(c->levels[k - 1] < c->levels[k]))
        throw ContractError("custom quantizer: levels must be strictly increasing");
    }
    levels_ = c->levels;
  }
  thresholds_ = midpoints(levels_);
}

QuantizerSpec QuantizerSpec::identity() { return QuantizerSpec(Identity{}); }

QuantizerSpec QuantizerSpec::uniform_midrise(int bits, double clip) {
  return QuantizerSpec(UniformMidrise{bits, clip});
}

QuantizerSpec QuantizerSpec::uniform_midrise_loaded(int bits, double pbar,
                                                    double kappa) {
  return uniform_midrise(bits, default_clip(pbar, kappa));
}

QuantizerSpec QuantizerSpec::custom_levels(std::vector<double> levels) {
  return QuantizerSpec(CustomLevels{std::move(levels)});
}

double QuantizerSpec::quantize_dim(double v) const noexcept {
  if (levels_.empty()) return v;
  const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), v);
  return levels_[static_cast<std::size_t>(it - thresholds_.begin())];
}

double QuantizerSpec::max_level() const noexcept {
  if (levels_.empty()) return std::numeric_limits<double>::infinity();
  return std::max(std::abs(levels_.front()), std::abs(levels_.back()));
}

cplx quantize(const QuantizerSpec& spec, cplx u) noexcept { return spec(u); }

void quantize(const QuantizerSpec& spec, std::span<const cplx> in,
              std::span<cplx> out) {
  if (in.size() != out.size())
    throw ContractError("quantize: input and output sizes differ");
  std::transform(in.begin(), in.end(), out.begin(),
                 [&spec](cplx u) { return spec(u); });
}

Constellation::Constellation(std::vector<cplx> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw ContractError("constellation: no points");
  auto sorted = points_;
  std::sort(sorted.begin(), sorted.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ContractError("constellation: duplicate points");

  energies_.reserve(points_.size());
  double sum = 0.0;
  for (const auto& p : points_) {
    const double e = std::norm(p);
    energies_.push_back(e);
    sum += e;
  }
  const auto [lo, hi] = std::minmax_element(energies_.begin(), energies_.end());
  e_min_ = *lo;
  e_max_ = *hi;
  e_mean_ = std::clamp(sum / static_cast<double>(energies_.size()), e_min_, e_max_);
}

Constellation constellation_of(const QuantizerSpec& spec) {
  if (spec.is_identity())
    throw ContractError("constellation_of: identity quantizer has an unbounded constellation");
  const auto levels = spec.levels();
  std::vector<cplx> pts;
  pts.reserve(levels.size() * levels.size());
  for (double re : levels)
    for (double im : levels) pts.emplace_back(re, im);
  return Constellation(std::move(pts));
}

}  // namespace qcap
