#include "qcap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qcap/analysis.hpp"
#include "qcap/errors.hpp"

namespace qcap {

namespace {

constexpr double kThetaTol = 1e-12;
constexpr int kMaxBracketDoublings = 1000;

double energy_tol(const EnergyClasses& ec) {
  return 1e-12 * std::max(1.0, std::abs(ec.e_max()));
}

}  // namespace

EnergyClasses::EnergyClasses(const Constellation& cset) : total_(cset.size()) {
  std::vector<double> e(cset.energies().begin(), cset.energies().end());
  std::sort(e.begin(), e.end());
  double sum = 0.0;
  for (double v : e) {
    sum += v;
    const double tol = 1e-12 * std::max(1.0, std::abs(v));
    if (!classes_.empty() && v - classes_.back().energy <= tol)
      ++classes_.back().count;
    else
      classes_.push_back({v, 1});
  }
  e_mean_ = std::clamp(sum / static_cast<double>(total_), e_min(), e_max());
}

double EnergyClasses::cumulant(double theta) const noexcept {
  if (theta == 0.0) return 0.0;
  const double ref = theta > 0.0 ? e_max() : e_min();
  double acc = 0.0;
  for (const auto& c : classes_)
    acc += static_cast<double>(c.count) * std::exp(theta * (c.energy - ref));
  return theta * ref + std::log(acc / static_cast<double>(total_));
}

double EnergyClasses::tilted_mean(double theta) const noexcept {
  const double ref = theta > 0.0 ? e_max() : e_min();
  double num = 0.0, den = 0.0;
  for (const auto& c : classes_) {
    const double w = static_cast<double>(c.count) * std::exp(theta * (c.energy - ref));
    num += w * c.energy;
    den += w;
  }
  return num / den;
}

double EnergyClasses::tilted_entropy_bits(double theta) const noexcept {
  const double ref = theta > 0.0 ? e_max() : e_min();
  double z = 0.0;
  for (const auto& c : classes_)
    z += static_cast<double>(c.count) * std::exp(theta * (c.energy - ref));
  double h = 0.0;
  for (const auto& c : classes_) {
    const double p = std::exp(theta * (c.energy - ref)) / z;  // per point
    if (p > 0.0) h -= static_cast<double>(c.count) * p * std::log2(p);
  }
  return h;
}

double cumulant(const Constellation& cset, double theta) {
  if (!std::isfinite(theta)) throw ContractError("cumulant: theta must be finite");
  return EnergyClasses(cset).cumulant(theta);
}

namespace {

RateFunctionValue solve_rate_function(const EnergyClasses& ec, double s) {
  const double tol = energy_tol(ec);
  if (!std::isfinite(s) || s < ec.e_min() - tol || s > ec.e_max() + tol)
    throw InfeasibleEnergyError("target energy " + std::to_string(s) +
                                " is outside the constellation energy range [" +
                                std::to_string(ec.e_min()) + ", " +
                                std::to_string(ec.e_max()) + "]");
  if (ec.classes().size() == 1 || std::abs(s - ec.e_mean()) <= tol) return {0.0, 0.0};
  if (std::abs(s - ec.e_min()) <= tol || std::abs(s - ec.e_max()) <= tol)
    throw BoundaryEnergyError("target energy is at the edge of the energy range; "
                              "the rate function is infinite");

  // The tilted mean is increasing in theta (the cumulant is convex).
  double lo = -1.0, hi = 1.0;
  int guard = 0;
  while (ec.tilted_mean(lo) > s && ++guard < kMaxBracketDoublings) lo *= 2.0;
  while (ec.tilted_mean(hi) < s && ++guard < kMaxBracketDoublings) hi *= 2.0;
  if (guard >= kMaxBracketDoublings)
    throw NumericalError("rate_function: could not bracket the optimal tilt");

  double mid = 0.5 * (lo + hi);
  while (hi - lo > kThetaTol * std::max(1.0, std::abs(mid))) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (ec.tilted_mean(mid) < s)
      lo = mid;
    else
      hi = mid;
  }
  const double theta = 0.5 * (lo + hi);
  const double value = theta * s - ec.cumulant(theta);
  if (!std::isfinite(value)) throw NumericalError("rate_function: non-finite value");
  return {std::max(value, 0.0), theta};
}

double h_max_classes(const EnergyClasses& ec, double s, double* theta_out) {
  const double log_a = std::log2(static_cast<double>(ec.total()));
  const double tol = energy_tol(ec);
  if (theta_out) *theta_out = 0.0;
  if (ec.classes().size() > 1 && std::isfinite(s)) {
    // Degenerate maximiser at the edges: uniform over the extreme class.
    if (std::abs(s - ec.e_min()) <= tol) {
      if (theta_out) *theta_out = -std::numeric_limits<double>::infinity();
      return std::log2(static_cast<double>(ec.classes().front().count));
    }
    if (std::abs(s - ec.e_max()) <= tol) {
      if (theta_out) *theta_out = std::numeric_limits<double>::infinity();
      return std::log2(static_cast<double>(ec.classes().back().count));
    }
  }
  const auto r = solve_rate_function(ec, s);
  if (theta_out) *theta_out = r.theta_star;
  const double h = log_a - r.value / std::numbers::ln2;
  const double check = ec.tilted_entropy_bits(r.theta_star);
  if (std::abs(h - check) > 1e-8 * std::max(1.0, h))
    throw NumericalError("h_max: tilted-law entropy disagrees with the Legendre route");
  return h;
}

}  // namespace

RateFunctionValue rate_function(const Constellation& cset, double s) {
  return solve_rate_function(EnergyClasses(cset), s);
}

double h_max(const Constellation& cset, double s) {
  return h_max_classes(EnergyClasses(cset), s, nullptr);
}

UpperBoundReport rate_upper_bound(const Constellation& cset,
                                  std::span<const double> target_s_m,
                                  std::span<const double> deltas,
                                  const std::optional<AgnMoments>& m_tx) {
  validate_deltas(deltas);
  if (target_s_m.size() != deltas.size())
    throw ContractError("rate_upper_bound: target energies and deltas differ in length");
  UpperBoundReport r;
  for (double s : target_s_m) {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw ContractError("rate_upper_bound: target energies must be finite and >= 0");
    r.s_tot += s;
  }
  if (!(r.s_tot > 0.0)) throw ContractError("rate_upper_bound: total energy is zero");
  for (std::size_t m = 0; m < target_s_m.size(); ++m) {
    r.nu_m.push_back(target_s_m[m] / r.s_tot);
    if (r.nu_m.back() == 0.0)
      throw InfeasibleMaskError("rate_upper_bound: band " + std::to_string(m) +
                                " has zero target energy; the bound is -infinity");
  }

  const EnergyClasses ec(cset);
  r.h_max = h_max_classes(ec, r.s_tot, &r.theta_star);
  r.kl_term = kl_divergence(deltas, r.nu_m);
  r.r_upper = r.h_max - r.kl_term;
  if (m_tx && m_tx->tau > 0.0)
    r.gap_vs_linear = r.h_max - std::log2(1.0 + m_tx->alpha_sq() / m_tx->tau);
  return r;
}

}  // namespace qcap
