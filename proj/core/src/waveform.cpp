#include "qcap/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fft.hpp"
#include "qcap/analysis.hpp"
#include "qcap/errors.hpp"
#include "qcap/moments.hpp"
#include "qcap/random.hpp"

namespace qcap {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0)
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

std::vector<double> make_window(const std::string& name, std::size_t n) {
  std::vector<double> w(n, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  if (name == "hann") {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.5 - 0.5 * std::cos(two_pi * static_cast<double>(i) / static_cast<double>(n));
  } else if (name == "hamming") {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = 0.54 - 0.46 * std::cos(two_pi * static_cast<double>(i) / static_cast<double>(n));
  } else if (name != "rect") {
    throw ContractError("unknown PSD window '" + name + "' (hann, hamming, rect)");
  }
  return w;
}

void validate_welch(const WelchParams& p) {
  if (!is_pow2(p.segment_length))
    throw ContractError("psd.segment_length must be a power of two");
  if (!(p.overlap >= 0.0 && p.overlap < 1.0))
    throw ContractError("psd.overlap must lie in [0, 1)");
  make_window(p.window, 1);
}

// Average of the ZOH roll-off over [lo, hi].
double mean_zoh(double lo, double hi, double fs) {
  constexpr int kPoints = 2000;
  double acc = 0.0;
  for (int i = 0; i < kPoints; ++i)
    acc += zoh_gain(lo + (hi - lo) * (i + 0.5) / kPoints, fs);
  return acc / kPoints;
}

struct Bands {
  double in_lo, in_hi, adj_lo, adj_hi;
};

Bands measurement_bands(const WaveformConfig& cfg) {
  const double b = cfg.occupied_bandwidth, g = cfg.guard_band;
  return {-b / 2.0, b / 2.0, b / 2.0 + 2.0 * g, 1.5 * b + 2.0 * g};
}

}  // namespace

double WaveformConfig::filter_cutoff() const {
  return interpolation.cutoff > 0.0 ? interpolation.cutoff
                                    : occupied_bandwidth / 2.0 + guard_band / 2.0;
}

std::vector<int> WaveformConfig::active_indices() const {
  if (active_subcarriers) return *active_subcarriers;
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(std::max(num_subcarriers, 0)));
  for (int k = -num_subcarriers / 2; k < num_subcarriers - num_subcarriers / 2; ++k)
    idx.push_back(k);
  return idx;
}

void validate(const WaveformConfig& cfg) {
  if (!(cfg.sample_rate > 0.0) || !std::isfinite(cfg.sample_rate))
    throw ContractError("sample_rate must be positive");
  if (!(cfg.occupied_bandwidth > 0.0)) throw ContractError("occupied_bandwidth must be positive");
  if (!(cfg.guard_band >= 0.0)) throw ContractError("guard_band must be >= 0");
  if (cfg.occupied_bandwidth + 2.0 * cfg.guard_band > cfg.sample_rate)
    throw ContractError("occupied_bandwidth + 2 guard_band exceeds sample_rate");
  const auto bands = measurement_bands(cfg);
  if (bands.adj_hi > cfg.sample_rate / 2.0)
    throw ContractError("adjacent channel extends beyond the Nyquist frequency");
  if (cfg.fft_size < 1) throw ContractError("fft_size must be >= 1");
  if (cfg.interpolation_factor < 1) throw ContractError("interpolation_factor must be >= 1");
  if (cfg.num_subcarriers < 0 || cfg.num_subcarriers > cfg.fft_size)
    throw ContractError("num_subcarriers must lie in [0, fft_size]");
  for (int k : cfg.active_indices())
    if (k < -cfg.fft_size / 2 || k >= cfg.fft_size - cfg.fft_size / 2)
      throw ContractError("active subcarrier index out of range");
  if (cfg.num_symbols < 1) throw ContractError("num_symbols must be >= 1");
  if (cfg.interpolation.taps < 1) throw ContractError("interpolation.taps must be >= 1");
  const double fc = cfg.filter_cutoff();
  if (!(fc > 0.0) || fc >= cfg.sample_rate / 2.0)
    throw ContractError("interpolation cutoff must lie in (0, sample_rate/2)");
  if (cfg.interpolation_factor > 1 && fc >= cfg.baseband_rate())
    throw ContractError("interpolation cutoff passes spectral images");
  if (!(cfg.interpolation.stopband_db > 0.0))
    throw ContractError("interpolation.stopband_db must be positive");
  validate_welch(cfg.psd);
}

std::vector<double> design_interpolation_filter(const WaveformConfig& cfg) {
  const int taps = cfg.interpolation.taps;
  if (taps < 1) throw ContractError("interpolation.taps must be >= 1");
  const double fc = cfg.filter_cutoff() / cfg.sample_rate;  // cycles per sample
  const double beta = kaiser_beta(cfg.interpolation.stopband_db);
  const double i0b = std::cyl_bessel_i(0.0, beta);
  const double mid = (taps - 1) / 2.0;
  std::vector<double> h(static_cast<std::size_t>(taps));
  double sum = 0.0;
  for (int n = 0; n < taps; ++n) {
    const double t = n - mid;
    const double r = mid > 0.0 ? t / mid : 0.0;
    const double win = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    h[static_cast<std::size_t>(n)] = 2.0 * fc * sinc(2.0 * fc * t) * win;
    sum += h[static_cast<std::size_t>(n)];
  }
  if (!(std::abs(sum) > 0.0)) throw NumericalError("interpolation filter has zero DC gain");
  const double g = cfg.interpolation_factor / sum;
  for (auto& v : h) v *= g;
  return h;
}

double fir_power_response(const std::vector<double>& taps, double f, double fs) {
  cplx acc{};
  const double w = -2.0 * std::numbers::pi * f / fs;
  for (std::size_t n = 0; n < taps.size(); ++n)
    acc += taps[n] * std::polar(1.0, w * static_cast<double>(n));
  return std::norm(acc);
}

std::vector<cplx> synthesize_baseband(const WaveformConfig& cfg, std::size_t num_symbols,
                                      std::uint64_t seed) {
  WaveformConfig c = cfg;
  c.num_symbols = num_symbols;
  validate(c);
  const auto n = static_cast<std::size_t>(cfg.fft_size);
  const auto active = cfg.active_indices();
  const auto l = static_cast<std::size_t>(cfg.interpolation_factor);

  std::vector<cplx> base(num_symbols * n);
  if (!active.empty()) {
    detail::Fft ifft(n, detail::Fft::Direction::backward);
    auto rng = make_rng(seed, "waveform_symbols");
    ComplexNormal cn(1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(active.size()));
    std::vector<cplx> sym(n);
    for (std::size_t s = 0; s < num_symbols; ++s) {
      std::fill(sym.begin(), sym.end(), cplx{});
      for (int k : active) {
        const auto bin = static_cast<std::size_t>((k + cfg.fft_size) % cfg.fft_size);
        sym[bin] = cn(rng);
      }
      ifft(sym);
      for (std::size_t i = 0; i < n; ++i) base[s * n + i] = sym[i] * scale;
    }
  }
  if (l == 1 && cfg.interpolation.taps == 1) return base;

  // Zero-stuff by l and filter circularly, compensating the group delay.
  const auto h = design_interpolation_filter(cfg);
  const std::size_t len = base.size() * l;
  const std::size_t delay = (h.size() - 1) / 2;
  std::vector<cplx> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t pos = (i + delay) % len;  // output index before delay removal
    const std::size_t phase = pos % l;
    cplx acc{};
    // taps j with (pos - j) divisible by l
    for (std::size_t j = phase; j < h.size(); j += l) {
      const std::size_t src = (pos + len - j) % len;
      acc += h[j] * base[src / l];
    }
    out[i] = acc;
  }
  return out;
}

double zoh_gain(double f, double fs) {
  const double s = sinc(f / fs);
  return s * s;
}

double PsdEstimate::band_power(double lo, double hi) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < freq_hz.size(); ++k)
    if (freq_hz[k] >= lo && freq_hz[k] < hi) acc += psd[k];
  return acc * bin_width;
}

double PsdEstimate::total_power() const {
  double acc = 0.0;
  for (double p : psd) acc += p;
  return acc * bin_width;
}

PsdEstimate welch_psd(std::span<const cplx> x, double fs, const WelchParams& params) {
  validate_welch(params);
  const std::size_t seg = params.segment_length;
  if (x.size() < seg) throw ContractError("welch_psd: stream shorter than one segment");
  if (!(fs > 0.0)) throw ContractError("welch_psd: fs must be positive");
  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(seg) * (1.0 - params.overlap))));
  const auto w = make_window(params.window, seg);
  double w2 = 0.0;
  for (double v : w) w2 += v * v;

  detail::Fft fft(seg, detail::Fft::Direction::forward);
  std::vector<double> acc(seg, 0.0);
  std::vector<cplx> buf(seg);
  PsdEstimate est;
  for (std::size_t start = 0; start + seg <= x.size(); start += step) {
    for (std::size_t i = 0; i < seg; ++i) buf[i] = w[i] * x[start + i];
    fft(buf);
    for (std::size_t i = 0; i < seg; ++i) acc[i] += std::norm(buf[i]);
    ++est.segments;
  }
  const double norm = 1.0 / (static_cast<double>(est.segments) * fs * w2);
  est.bin_width = fs / static_cast<double>(seg);
  est.freq_hz.resize(seg);
  est.psd.resize(seg);
  const std::size_t half = seg / 2;
  for (std::size_t i = 0; i < seg; ++i) {
    const std::size_t src = (i + half) % seg;
    est.freq_hz[i] = (static_cast<double>(i) - static_cast<double>(half)) * est.bin_width;
    est.psd[i] = acc[src] * norm;
  }
  return est;
}

double agn_predicted_aclr_db(const WaveformConfig& cfg, const QuantizerSpec& dac, double pbar) {
  if (!(pbar > 0.0)) throw ContractError("agn_predicted_aclr_db: pbar must be positive");
  const auto m = tx_moments(dac, pbar);
  const double d = cfg.occupied_bandwidth / cfg.sample_rate;
  const double in = d * (m.alpha_sq() * pbar / d + m.tau * pbar);
  const double adj = d * m.tau * pbar;
  double zin = 1.0, zadj = 1.0;
  if (cfg.zoh) {
    const auto b = measurement_bands(cfg);
    zin = mean_zoh(b.in_lo, b.in_hi, cfg.sample_rate);
    zadj = mean_zoh(b.adj_lo, b.adj_hi, cfg.sample_rate);
  }
  if (adj == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(in * zin / (adj * zadj));
}

AclrReport apply_dac_and_measure(const WaveformConfig& cfg, std::span<const cplx> stream) {
  validate(cfg);
  if (stream.empty()) throw ContractError("apply_dac_and_measure: empty stream");
  AclrReport rep;
  const auto bands = measurement_bands(cfg);
  rep.inband_lo = bands.in_lo;
  rep.inband_hi = bands.in_hi;
  rep.adjacent_lo = bands.adj_lo;
  rep.adjacent_hi = bands.adj_hi;

  double pin = 0.0;
  for (const auto& u : stream) pin += std::norm(u);
  rep.input_power = pin / static_cast<double>(stream.size());

  std::vector<cplx> x(stream.size());
  quantize(cfg.dac, stream, x);
  if (!cfg.dac.is_identity()) {
    const double clip = cfg.dac.max_level();
    std::size_t sat = 0;
    for (const auto& u : stream)
      if (std::abs(u.real()) > clip || std::abs(u.imag()) > clip) ++sat;
    rep.saturation_fraction = static_cast<double>(sat) / static_cast<double>(stream.size());
    rep.saturation_warning = rep.saturation_fraction > 0.99;
  }
  double px = 0.0;
  for (const auto& v : x) px += std::norm(v);
  rep.time_domain_power = px / static_cast<double>(x.size());

  rep.psd = welch_psd(x, cfg.sample_rate, cfg.psd);
  rep.psd_power = rep.psd.total_power();
  if (cfg.zoh)
    for (std::size_t k = 0; k < rep.psd.psd.size(); ++k)
      rep.psd.psd[k] *= zoh_gain(rep.psd.freq_hz[k], cfg.sample_rate);

  rep.inband_power = rep.psd.band_power(bands.in_lo, bands.in_hi);
  rep.adjacent_power = rep.psd.band_power(bands.adj_lo, bands.adj_hi);
  rep.aclr_db = rep.adjacent_power > 0.0
                    ? 10.0 * std::log10(rep.inband_power / rep.adjacent_power)
                    : std::numeric_limits<double>::infinity();
  rep.agn_predicted_aclr_db = rep.input_power > 0.0
                                  ? agn_predicted_aclr_db(cfg, cfg.dac, rep.input_power)
                                  : std::numeric_limits<double>::quiet_NaN();

  rep.psd_curve.reserve(rep.psd.psd.size());
  for (std::size_t k = 0; k < rep.psd.psd.size(); ++k) {
    const double rel = rep.inband_power > 0.0 ? rep.psd.psd[k] / rep.inband_power : 0.0;
    rep.psd_curve.emplace_back(rep.psd.freq_hz[k],
                               rel > 0.0 ? 10.0 * std::log10(rel)
                                         : -std::numeric_limits<double>::infinity());
  }
  return rep;
}

double band_flatness_db(const PsdEstimate& psd, double lo, double hi, double fs,
                        bool zoh_compensate) {
  double mx = -std::numeric_limits<double>::infinity();
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
    const double f = psd.freq_hz[k];
    if (f < lo || f >= hi) continue;
    double v = psd.psd[k];
    if (zoh_compensate) v /= zoh_gain(f, fs);
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    const double db = 10.0 * std::log10(v);
    mx = std::max(mx, db);
    mn = std::min(mn, db);
  }
  if (mx < mn) throw ContractError("band_flatness_db: no PSD bins in the band");
  return mx - mn;
}

}  // namespace qcap
