#pragma once

#include <span>
#include <vector>

#include "qcap/moments.hpp"

namespace qcap {

/// Absolute slack applied to feasibility floors.
inline constexpr double kFeasibilitySlack = 1e-12;

/// Sub-band partition of the spectrum: bandwidth fractions delta_m and the
/// per-band symbol energy P_m.
class SubbandPlan {
 public:
  SubbandPlan(std::vector<double> deltas, std::vector<double> powers);

  /// Plan with all power spread evenly (P_m = pbar).
  static SubbandPlan flat(std::vector<double> deltas, double pbar);

  std::span<const double> deltas() const noexcept { return deltas_; }
  std::span<const double> powers() const noexcept { return powers_; }
  std::size_t bands() const noexcept { return deltas_.size(); }
  /// Average symbol energy sum_m delta_m P_m.
  double pbar() const noexcept { return pbar_; }

 private:
  std::vector<double> deltas_;
  std::vector<double> powers_;
  double pbar_ = 0.0;
};

/// Validates a bandwidth-fraction vector (positive, sums to one).
void validate_deltas(std::span<const double> deltas);

struct SpectrumReport {
  std::vector<double> s_m;       ///< energy per sample in each sub-band
  double s_tot = 0.0;            ///< total energy per sample
  std::vector<double> nu_m;      ///< power fractions s_m / s_tot
  std::vector<double> nu_min_m;  ///< linear-feasibility floor per band
};

enum class RateRegime { awgn, noise_free, general_chain };

struct RateReport {
  double r_lin = 0.0;                 ///< bits per symbol
  std::vector<double> per_band_terms; ///< sums to r_lin
  double kl_term = 0.0;               ///< D(delta || nu) in bits, when used
  RateRegime regime = RateRegime::general_chain;
};

SpectrumReport predict_spectrum(const SubbandPlan& plan, const AgnMoments& m_tx);

/// Floors delta_m tau / (|alpha|^2 + tau) of the linear feasible set.
std::vector<double> feasibility_floors(std::span<const double> deltas,
                                       const AgnMoments& m_tx);

bool feasible_fractions(std::span<const double> deltas, const AgnMoments& m_tx,
                        std::span<const double> nu);

/// Per-band symbol energies that produce the power fractions nu. Throws
/// FeasibilityError carrying the first violated floor.
std::vector<double> powers_from_fractions(std::span<const double> deltas,
                                          const AgnMoments& m_tx, double pbar,
                                          std::span<const double> nu);

RateReport linear_rate(const SubbandPlan& plan, const AgnMoments& m_rx);

/// AWGN shortcut: alpha_rx = alpha_tx, tau_rx = tau_tx + sigma2 / pbar.
AgnMoments awgn_rx_moments(const AgnMoments& m_tx, double sigma2);

RateReport awgn_linear_rate(const SubbandPlan& plan, const AgnMoments& m_tx,
                            double sigma2);

/// log2(1 + |alpha|^2 / tau) - D(delta || nu).
RateReport noise_free_rate(std::span<const double> deltas,
                           const AgnMoments& m_tx, std::span<const double> nu);

/// D(delta || nu) in bits; 0 log 0 = 0 and delta_m > 0 with nu_m = 0 gives
/// +infinity.
double kl_divergence(std::span<const double> delta, std::span<const double> nu);

/// 10 log10(nu_1 / nu_2) at the two-band feasibility boundary.
double max_feasible_aclr_db(std::span<const double> deltas,
                            const AgnMoments& m_tx);

}  // namespace qcap
