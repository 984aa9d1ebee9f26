#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcap/quantizer.hpp"

namespace qcap {

struct InterpolationFilter {
  int taps = 255;
  /// Cutoff in Hz; 0 selects occupied_bandwidth/2 + guard_band/2.
  double cutoff = 0.0;
  /// Kaiser window design target.
  double stopband_db = 70.0;
};

struct WelchParams {
  std::size_t segment_length = 4096;
  double overlap = 0.5;
  std::string window = "hann";
};

/// Oversampled OFDM transmitter: baseband IFFT symbols at
/// sample_rate / interpolation_factor, interpolated to sample_rate and passed
/// through the DAC.
struct WaveformConfig {
  double occupied_bandwidth = 200e6;
  double sample_rate = 983.04e6;
  double guard_band = 10e6;
  int fft_size = 2048;
  int interpolation_factor = 4;
  int num_subcarriers = 1666;
  /// Signed subcarrier indices; overrides num_subcarriers when set.
  std::optional<std::vector<int>> active_subcarriers;
  std::size_t num_symbols = 50;
  QuantizerSpec dac;
  InterpolationFilter interpolation;
  bool zoh = true;
  WelchParams psd;
  std::uint64_t seed = 1;

  double baseband_rate() const { return sample_rate / interpolation_factor; }
  double subcarrier_spacing() const { return baseband_rate() / fft_size; }
  double filter_cutoff() const;
  std::vector<int> active_indices() const;
};

/// Throws ContractError if the configuration cannot be realised.
void validate(const WaveformConfig& cfg);

/// Kaiser-windowed sinc low-pass at the output rate with DC gain
/// interpolation_factor.
std::vector<double> design_interpolation_filter(const WaveformConfig& cfg);

/// |H(f)|^2 of a real FIR at frequency f (Hz) for sample rate fs.
double fir_power_response(const std::vector<double>& taps, double f, double fs);

std::vector<cplx> synthesize_baseband(const WaveformConfig& cfg,
                                      std::size_t num_symbols,
                                      std::uint64_t seed);

struct PsdEstimate {
  std::vector<double> freq_hz;  ///< ascending, -fs/2 .. fs/2
  std::vector<double> psd;      ///< two-sided, power per Hz
  double bin_width = 0.0;
  std::size_t segments = 0;

  /// Sum of psd * bin_width over bins with lo <= f < hi.
  double band_power(double lo, double hi) const;
  double total_power() const;
};

PsdEstimate welch_psd(std::span<const cplx> x, double fs,
                      const WelchParams& params);

/// |sinc(f / fs)|^2 zero-order-hold roll-off.
double zoh_gain(double f, double fs);

struct AclrReport {
  double inband_power = 0.0;
  double adjacent_power = 0.0;
  double aclr_db = 0.0;
  double agn_predicted_aclr_db = 0.0;
  double inband_lo = 0.0, inband_hi = 0.0;
  double adjacent_lo = 0.0, adjacent_hi = 0.0;
  double input_power = 0.0;        ///< mean |u|^2 before the DAC
  double time_domain_power = 0.0;  ///< mean |x|^2 after the DAC
  double psd_power = 0.0;          ///< integral of the (pre-ZOH) PSD
  double saturation_fraction = 0.0;
  bool saturation_warning = false;
  /// (frequency Hz, dBc/Hz relative to in-band power), ZOH applied if set.
  std::vector<std::pair<double, double>> psd_curve;
  PsdEstimate psd;  ///< linear PSD, ZOH applied if set
};

/// Quantize, estimate the PSD, measure ACLR between the occupied band and
/// the upper adjacent channel, and attach the AGN-model prediction.
AclrReport apply_dac_and_measure(const WaveformConfig& cfg,
                                 std::span<const cplx> stream);

/// Max-minus-min of the PSD (dB) over [lo, hi), optionally dividing out the
/// zero-order-hold roll-off first.
double band_flatness_db(const PsdEstimate& psd, double lo, double hi,
                        double fs, bool zoh_compensate);

/// AGN-model ACLR for the given DAC at stream power pbar.
double agn_predicted_aclr_db(const WaveformConfig& cfg, const QuantizerSpec& dac,
                             double pbar);

}  // namespace qcap
