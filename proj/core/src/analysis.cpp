#include "qcap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qcap/errors.hpp"

namespace qcap {

namespace {

constexpr double kSimplexTol = 1e-9;

void check_same_pbar(double plan_pbar, const AgnMoments& m) {
  if (std::abs(plan_pbar - m.pbar) > 1e-9 * std::max(plan_pbar, m.pbar))
    throw ContractError("moments were computed at pbar = " + std::to_string(m.pbar) +
                        " but the plan has pbar = " + std::to_string(plan_pbar));
}

void check_fractions(std::span<const double> deltas, std::span<const double> nu) {
  if (nu.size() != deltas.size())
    throw ContractError("power fractions and bandwidth fractions differ in length");
  double sum = 0.0;
  for (double v : nu) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ContractError("power fractions must be finite and non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw ContractError("power fractions must sum to one");
}

}  // namespace

void validate_deltas(std::span<const double> deltas) {
  if (deltas.empty()) throw ContractError("subband plan: no bands");
  double sum = 0.0;
  for (double d : deltas) {
    if (!(d > 0.0) || !std::isfinite(d))
      throw ContractError("subband plan: bandwidth fractions must be positive");
    sum += d;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ContractError("subband plan: bandwidth fractions must sum to one");
}

SubbandPlan::SubbandPlan(std::vector<double> deltas, std::vector<double> powers)
    : deltas_(std::move(deltas)), powers_(std::move(powers)) {
  validate_deltas(deltas_);
  if (powers_.size() != deltas_.size())
    throw ContractError("subband plan: deltas and powers differ in length");
  for (double p : powers_)
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ContractError("subband plan: powers must be finite and non-negative");
  pbar_ = std::inner_product(deltas_.begin(), deltas_.end(), powers_.begin(), 0.0);
  if (!(pbar_ > 0.0)) throw ContractError("subband plan: all band powers are zero");
}

SubbandPlan SubbandPlan::flat(std::vector<double> deltas, double pbar) {
  std::vector<double> powers(deltas.size(), pbar);
  return SubbandPlan(std::move(deltas), std::move(powers));
}

SpectrumReport predict_spectrum(const SubbandPlan& plan, const AgnMoments& m_tx) {
  check_same_pbar(plan.pbar(), m_tx);
  const double a2 = m_tx.alpha_sq();
  const double tau = m_tx.tau;
  const double pbar = plan.pbar();

  SpectrumReport r;
  r.s_tot = (a2 + tau) * pbar;
  r.nu_min_m = feasibility_floors(plan.deltas(), m_tx);
  for (std::size_t m = 0; m < plan.bands(); ++m) {
    const double s = plan.deltas()[m] * (a2 * plan.powers()[m] + tau * pbar);
    r.s_m.push_back(s);
    r.nu_m.push_back(s / r.s_tot);
  }
  return r;
}

std::vector<double> feasibility_floors(std::span<const double> deltas,
                                       const AgnMoments& m_tx) {
  const double share = m_tx.tau / (m_tx.alpha_sq() + m_tx.tau);
  std::vector<double> floors;
  floors.reserve(deltas.size());
  for (double d : deltas) floors.push_back(d * share);
  return floors;
}

bool feasible_fractions(std::span<const double> deltas, const AgnMoments& m_tx,
                        std::span<const double> nu) {
  validate_deltas(deltas);
  check_fractions(deltas, nu);
  const auto floors = feasibility_floors(deltas, m_tx);
  for (std::size_t m = 0; m < nu.size(); ++m)
    if (nu[m] + kFeasibilitySlack < floors[m]) return false;
  return true;
}

std::vector<double> powers_from_fractions(std::span<const double> deltas,
                                          const AgnMoments& m_tx, double pbar,
                                          std::span<const double> nu) {
  validate_deltas(deltas);
  check_fractions(deltas, nu);
  if (!(pbar > 0.0)) throw ContractError("powers_from_fractions: pbar must be positive");
  const double a2 = m_tx.alpha_sq();
  if (!(a2 > 0.0)) throw ContractError("powers_from_fractions: alpha is zero");
  const double tau = m_tx.tau;
  const auto floors = feasibility_floors(deltas, m_tx);

  std::vector<double> p(nu.size());
  for (std::size_t m = 0; m < nu.size(); ++m) {
    if (nu[m] + kFeasibilitySlack < floors[m]) throw FeasibilityError(m, floors[m], nu[m]);
    p[m] = std::max(0.0, (nu[m] / deltas[m] * (a2 + tau) - tau) * pbar / a2);
  }
  return p;
}

RateReport linear_rate(const SubbandPlan& plan, const AgnMoments& m_rx) {
  check_same_pbar(plan.pbar(), m_rx);
  if (m_rx.tau == 0.0)
    throw InfiniteRateError("linear rate is unbounded: effective noise variance is zero");
  RateReport r;
  r.regime = RateRegime::general_chain;
  const double snr_scale = m_rx.alpha_sq() / (m_rx.tau * plan.pbar());
  for (std::size_t m = 0; m < plan.bands(); ++m) {
    const double term = plan.deltas()[m] * std::log2(1.0 + snr_scale * plan.powers()[m]);
    r.per_band_terms.push_back(term);
    r.r_lin += term;
  }
  return r;
}

AgnMoments awgn_rx_moments(const AgnMoments& m_tx, double sigma2) {
  if (!(sigma2 >= 0.0)) throw ContractError("awgn: sigma2 must be non-negative");
  AgnMoments m = m_tx;
  m.tau = m_tx.tau + sigma2 / m_tx.pbar;
  return m;
}

RateReport awgn_linear_rate(const SubbandPlan& plan, const AgnMoments& m_tx,
                            double sigma2) {
  auto r = linear_rate(plan, awgn_rx_moments(m_tx, sigma2));
  r.regime = RateRegime::awgn;
  return r;
}

RateReport noise_free_rate(std::span<const double> deltas,
                           const AgnMoments& m_tx, std::span<const double> nu) {
  validate_deltas(deltas);
  check_fractions(deltas, nu);
  if (m_tx.tau == 0.0)
    throw InfiniteRateError("noise-free linear rate is unbounded for a distortion-free DAC");
  const auto floors = feasibility_floors(deltas, m_tx);
  for (std::size_t m = 0; m < nu.size(); ++m)
    if (nu[m] + kFeasibilitySlack < floors[m]) throw FeasibilityError(m, floors[m], nu[m]);

  RateReport r;
  r.regime = RateRegime::noise_free;
  r.kl_term = kl_divergence(deltas, nu);
  const double a2 = m_tx.alpha_sq();
  const double tau = m_tx.tau;
  // delta_m log2(nu_m (|alpha|^2 + tau) / (delta_m tau)); each term >= 0 on
  // the feasible set and the terms sum to log2(1 + |alpha|^2/tau) - D.
  for (std::size_t m = 0; m < nu.size(); ++m) {
    const double ratio = std::max(1.0, nu[m] * (a2 + tau) / (deltas[m] * tau));
    r.per_band_terms.push_back(deltas[m] * std::log2(ratio));
  }
  r.r_lin = std::log2(1.0 + a2 / tau) - r.kl_term;
  return r;
}

double kl_divergence(std::span<const double> delta, std::span<const double> nu) {
  if (delta.size() != nu.size())
    throw ContractError("kl_divergence: vectors differ in length");
  double d = 0.0;
  for (std::size_t m = 0; m < delta.size(); ++m) {
    if (delta[m] == 0.0) continue;
    if (nu[m] == 0.0) return std::numeric_limits<double>::infinity();
    d += delta[m] * std::log2(delta[m] / nu[m]);
  }
  return std::max(d, 0.0);
}

double max_feasible_aclr_db(std::span<const double> deltas, const AgnMoments& m_tx) {
  if (deltas.size() != 2)
    throw ContractError("max_feasible_aclr_db: needs exactly two bands");
  validate_deltas(deltas);
  const auto floors = feasibility_floors(deltas, m_tx);
  if (floors[1] == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10((1.0 - floors[1]) / floors[1]);
}

}  // namespace qcap
