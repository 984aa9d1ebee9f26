#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qcap/analysis.hpp"
#include "qcap/moments.hpp"
#include "qcap/quantizer.hpp"

namespace qcap {

enum class TransformKind { haar, fft };
enum class SubbandLayout { contiguous, interleaved, scattered };

/// Sub-band selection vector a_k of length n. Band counts use largest
/// remainders so |count_m / n - delta_m| < 1 / n.
std::vector<int> make_subband_assignment(std::span<const double> deltas,
                                         std::size_t n, SubbandLayout layout,
                                         std::uint64_t seed = 0);

struct SimConfig {
  std::size_t n = 2048;
  TransformKind transform = TransformKind::haar;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  SubbandPlan plan{{1.0}, {1.0}};
  SubbandLayout layout = SubbandLayout::contiguous;
  /// Explicit a_k; generated from plan/layout when empty.
  std::vector<int> subband_assignment;
  QuantizerSpec qtx;
  ChannelSpec channel;
  QuantizerSpec qrx;
  /// Worker threads for independent trials; 0 picks hardware concurrency.
  unsigned workers = 0;
};

struct NoiseDiagnostics {
  double excess_kurtosis_re = 0.0;
  double excess_kurtosis_im = 0.0;
  /// |E[conj(z) w]| / sqrt(E|z|^2 E|w|^2), pooled over components and trials.
  double z_w_correlation = 0.0;
  /// Pearson correlation of Re w and Im w.
  double iq_correlation = 0.0;
  /// Empirical E|w|^2 against the predicted tau * pbar.
  double noise_power = 0.0;
  double predicted_noise_power = 0.0;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::vector<double> s_m;
};

struct SimReport {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  TransformKind transform = TransformKind::haar;

  AgnMoments m_tx;
  std::optional<AgnMoments> m_rx;

  std::vector<double> empirical_s_mean;
  std::vector<double> empirical_s_stderr;
  std::vector<double> empirical_nu;
  double empirical_s_tot_mean = 0.0;
  double empirical_s_tot_stderr = 0.0;

  std::vector<double> predicted_s;
  std::vector<double> predicted_nu;
  double predicted_s_tot = 0.0;
  std::vector<double> relative_errors;  ///< |emp - pred| / pred per band
  double s_tot_relative_error = 0.0;

  NoiseDiagnostics noise;

  /// Chain runs only.
  std::vector<double> empirical_rho;
  std::vector<double> predicted_rho;

  /// max over trials of | ||V^H z|| - ||z|| | / ||z||
  double max_unitarity_error = 0.0;
  /// max over trials of | sum_m phi_m(r) - ||x||^2 / n |
  double max_energy_bookkeeping_error = 0.0;

  std::vector<TrialRecord> per_trial;
};

/// z -> u = V^H z -> x = Q_tx(u) -> r = V x, with sub-band energies of r and
/// diagnostics of w_tx = r - alpha_tx z.
SimReport run_tx_trials(const SimConfig& cfg);

/// Full chain: additionally y = F(x, xi), zhat = V Q_rx(y) and the per-band
/// correlation between z and zhat.
SimReport run_chain_trials(const SimConfig& cfg);

}  // namespace qcap
