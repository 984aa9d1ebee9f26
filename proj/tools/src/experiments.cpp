#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "qcap/analysis.hpp"
#include "qcap/bounds.hpp"
#include "qcap/errors.hpp"
#include "qcap/montecarlo.hpp"
#include "qcap/version.hpp"
#include "qcap/waveform.hpp"
#include "qcap_cli/app.hpp"

namespace qcap::cli {

namespace {

const json kDefaultQuantizer = {{"kind", "uniform_midrise"}, {"bits", 3}, {"kappa", 3.0}};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw std::logic_error("csv row width mismatch");
    rows_.push_back(std::move(cells));
  }
  std::string str() const {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Context {
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string version;
  RunOutput out;

  std::string seed_str() const { return std::to_string(seed); }
  void emit(const Csv& csv, const json& doc) {
    if (format == "csv")
      out.files["results.csv"] = csv.str();
    else
      out.files["results.json"] = doc.dump(2) + "\n";
  }
};

json moments_json(const AgnMoments& m) {
  return {{"alpha", {m.alpha.real(), m.alpha.imag()}},
          {"tau", m.tau},
          {"alpha_sq", m.alpha_sq()},
          {"sdr", m.tau > 0.0 ? m.sdr() : std::numeric_limits<double>::infinity()},
          {"pbar", m.pbar},
          {"alpha_stderr", m.alpha_stderr},
          {"tau_stderr", m.tau_stderr}};
}

SubbandPlan parse_plan(Params& p, const std::vector<double>& dd, const std::vector<double>& dp) {
  auto deltas = p.numbers("deltas", dd);
  auto powers = p.numbers("powers", dp);
  return SubbandPlan(std::move(deltas), std::move(powers));
}

bool is_shortcut_chain(const ChannelSpec& ch, const QuantizerSpec& qrx) {
  const auto* a = std::get_if<ChannelSpec::Awgn>(&ch.kind());
  return qrx.is_identity() && a && a->gain == cplx{1.0, 0.0};
}

// ---------------------------------------------------------------- moments

void run_moments(Params& p, Context& ctx) {
  const double pbar = p.number("pbar", 1.0);
  if (!(pbar > 0.0)) throw ConfigError("params.pbar: must be positive");
  auto pq = p.object("qtx", kDefaultQuantizer);
  const auto qtx = parse_quantizer(pq, pbar);
  p.put("qtx", pq.finish());
  auto pc = p.object("channel", json::object());
  const auto ch = parse_channel(pc);
  p.put("channel", pc.finish());
  auto pr = p.object("qrx", json{{"kind", "identity"}});
  const auto qrx = parse_quantizer(pr, pbar);
  p.put("qrx", pr.finish());
  auto pm = p.object("method", json::object());
  const auto method = parse_method(pm, ctx.seed);
  p.put("method", pm.finish());
  p.finish();

  const auto m = chain_moments(qtx, ch, qrx, pbar, method);
  Csv csv({"alpha_re", "alpha_im", "tau", "alpha_sq", "sdr", "pbar", "alpha_stderr",
           "tau_stderr", "seed", "version"});
  csv.row({num(m.alpha.real()), num(m.alpha.imag()), num(m.tau), num(m.alpha_sq()),
           num(m.tau > 0 ? m.sdr() : INFINITY), num(m.pbar), num(m.alpha_stderr),
           num(m.tau_stderr), ctx.seed_str(), ctx.version});
  ctx.emit(csv, {{"moments", moments_json(m)}, {"seed", ctx.seed}, {"version", ctx.version}});
}

// --------------------------------------------------------------- spectrum

void run_spectrum(Params& p, Context& ctx) {
  const auto plan = parse_plan(p, {0.5, 0.5}, {2.0, 0.0});
  auto pq = p.object("qtx", kDefaultQuantizer);
  const auto qtx = parse_quantizer(pq, plan.pbar());
  p.put("qtx", pq.finish());
  p.finish();

  const auto m = tx_moments(qtx, plan.pbar());
  const auto s = predict_spectrum(plan, m);
  Csv csv({"band", "delta", "power", "s_m", "nu_m", "nu_min_m", "s_tot", "seed", "version"});
  for (std::size_t i = 0; i < plan.bands(); ++i)
    csv.row({std::to_string(i), num(plan.deltas()[i]), num(plan.powers()[i]), num(s.s_m[i]),
             num(s.nu_m[i]), num(s.nu_min_m[i]), num(s.s_tot), ctx.seed_str(), ctx.version});
  ctx.emit(csv, {{"moments", moments_json(m)},
                 {"s_m", s.s_m},
                 {"s_tot", s.s_tot},
                 {"nu_m", s.nu_m},
                 {"nu_min_m", s.nu_min_m},
                 {"seed", ctx.seed},
                 {"version", ctx.version}});
}

// ------------------------------------------------------------------- rate

const char* regime_name(RateRegime r) {
  switch (r) {
    case RateRegime::awgn: return "awgn";
    case RateRegime::noise_free: return "noise_free";
    case RateRegime::general_chain: return "general_chain";
  }
  return "?";
}

void run_rate(Params& p, Context& ctx) {
  const auto deltas = p.numbers("deltas", {0.5, 0.5});
  const bool by_fraction = p.has("nu");
  std::vector<double> nu, powers;
  if (by_fraction) {
    if (p.has("powers")) throw ConfigError("params: give either powers or nu, not both");
    nu = p.numbers("nu");
    p.number("pbar", 1.0);
  } else {
    powers = p.numbers("powers", {2.0, 0.0});
  }
  validate_deltas(deltas);
  const double pbar = by_fraction ? p.number("pbar", 1.0) : SubbandPlan(deltas, powers).pbar();
  if (!(pbar > 0.0)) throw ConfigError("params.pbar: must be positive");

  auto pq = p.object("qtx", kDefaultQuantizer);
  const auto qtx = parse_quantizer(pq, pbar);
  p.put("qtx", pq.finish());
  auto pc = p.object("channel", json::object());
  const auto ch = parse_channel(pc);
  p.put("channel", pc.finish());
  auto pr = p.object("qrx", json{{"kind", "identity"}});
  const auto qrx = parse_quantizer(pr, pbar);
  p.put("qrx", pr.finish());
  auto pm = p.object("method", json::object());
  const auto method = parse_method(pm, ctx.seed);
  p.put("method", pm.finish());
  p.finish();
  if (by_fraction && (ch.noise_sigma2() != 0.0 || !is_shortcut_chain(ch, qrx)))
    throw ConfigError("params.nu: the fraction form applies to the noise-free chain only");

  const auto m_tx = tx_moments(qtx, pbar, method);
  RateReport r;
  if (by_fraction) {
    r = noise_free_rate(deltas, m_tx, nu);
    powers = powers_from_fractions(deltas, m_tx, pbar, nu);
  } else if (is_shortcut_chain(ch, qrx)) {
    r = awgn_linear_rate(SubbandPlan(deltas, powers), m_tx, ch.noise_sigma2());
  } else {
    r = linear_rate(SubbandPlan(deltas, powers), chain_moments(qtx, ch, qrx, pbar, method));
  }

  Csv csv({"band", "delta", "power", "term", "r_lin", "kl_term", "regime", "seed", "version"});
  for (std::size_t i = 0; i < deltas.size(); ++i)
    csv.row({std::to_string(i), num(deltas[i]), num(powers[i]), num(r.per_band_terms[i]),
             num(r.r_lin), num(r.kl_term), regime_name(r.regime), ctx.seed_str(), ctx.version});
  ctx.emit(csv, {{"r_lin", r.r_lin},
                 {"per_band_terms", r.per_band_terms},
                 {"kl_term", r.kl_term},
                 {"regime", regime_name(r.regime)},
                 {"powers", powers},
                 {"moments_tx", moments_json(m_tx)},
                 {"seed", ctx.seed},
                 {"version", ctx.version}});
}

// ------------------------------------------------------------ upper-bound

void run_upper_bound(Params& p, Context& ctx) {
  const auto deltas = p.numbers("deltas", {0.5, 0.5});
  const double pbar = p.number("pbar", 1.0);
  if (!(pbar > 0.0)) throw ConfigError("params.pbar: must be positive");
  auto pq = p.object("constellation", json{{"kind", "uniform_midrise"}, {"bits", 1}, {"clip", 1.0}});
  const auto q = parse_quantizer(pq, pbar);
  p.put("constellation", pq.finish());
  if (q.is_identity()) throw ConfigError("params.constellation: identity has no finite constellation");
  std::vector<double> target, nu;
  if (p.has("target_s") && p.has("nu"))
    throw ConfigError("params: give either target_s or nu, not both");
  if (p.has("target_s"))
    target = p.numbers("target_s");
  else
    nu = p.numbers("nu", deltas);
  const bool with_gap = p.boolean("with_gap", true);
  p.finish();

  const auto cset = constellation_of(q);
  std::optional<AgnMoments> m;
  if (with_gap || target.empty()) m = tx_moments(q, pbar);
  if (target.empty()) {
    const double s_tot = (m->alpha_sq() + m->tau) * pbar;
    for (double v : nu) target.push_back(v * s_tot);
  }
  const auto r = rate_upper_bound(cset, target, deltas, with_gap ? m : std::nullopt);
  Csv csv({"h_max", "kl_term", "r_upper", "theta_star", "s_tot", "gap_vs_linear", "seed",
           "version"});
  csv.row({num(r.h_max), num(r.kl_term), num(r.r_upper), num(r.theta_star), num(r.s_tot),
           r.gap_vs_linear ? num(*r.gap_vs_linear) : "", ctx.seed_str(), ctx.version});
  json doc = {{"h_max", r.h_max},       {"kl_term", r.kl_term}, {"r_upper", r.r_upper},
              {"theta_star", r.theta_star}, {"s_tot", r.s_tot},     {"nu_m", r.nu_m},
              {"target_s", target}};
  doc["gap_vs_linear"] = r.gap_vs_linear ? json(*r.gap_vs_linear) : json(nullptr);
  doc["seed"] = ctx.seed;
  doc["version"] = ctx.version;
  ctx.emit(csv, doc);
}

// -------------------------------------------------------------- sweeps

// Bit depths from a JSON list of integers and the string "inf".
std::vector<int> parse_bits(Params& p, const json& def, bool allow_inf) {
  const json& v = p.has("bits") ? p.take("bits") : def;
  if (!p.has("bits")) p.put("bits", def);
  if (!v.is_array() || v.empty()) throw ConfigError(p.path() + ".bits: expected a non-empty array");
  std::vector<int> out;
  for (const auto& e : v) {
    if (e.is_string() && e.get<std::string>() == "inf") {
      if (!allow_inf) throw ConfigError(p.path() + ".bits: 'inf' has no finite constellation here");
      out.push_back(0);
    } else if (e.is_number_integer() && e.get<int>() >= 1 && e.get<int>() <= 20) {
      out.push_back(e.get<int>());
    } else {
      throw ConfigError(p.path() + ".bits: entries must be integers in [1, 20] or \"inf\"");
    }
  }
  return out;
}

QuantizerSpec bits_quantizer(int bits, double pbar, double kappa) {
  return bits == 0 ? QuantizerSpec::identity()
                   : QuantizerSpec::uniform_midrise_loaded(bits, pbar, kappa);
}

std::string bits_label(int bits) { return bits == 0 ? "inf" : std::to_string(bits); }

void run_sweep_snr(Params& p, Context& ctx) {
  const auto plan = parse_plan(p, {0.5, 0.5}, {2.0, 0.0});
  const auto bits = parse_bits(p, json::array({1, 2, 3, 4, "inf"}), true);
  const double kappa = p.number("kappa", kDefaultClipKappa);
  if (!(kappa > 0.0)) throw ConfigError("params.kappa: must be positive");
  auto ps = p.object("snr_db", json::object());
  const double start = ps.number("start", -10.0);
  const double stop = ps.number("stop", 30.0);
  const double step = ps.number("step", 1.0);
  p.put("snr_db", ps.finish());
  const std::string reference = p.string("snr_reference", "tx_power");
  p.finish();
  if (reference != "tx_power" && reference != "input_power")
    throw ConfigError("params.snr_reference: expected tx_power or input_power");
  if (!(step > 0.0) || stop < start) throw ConfigError("params.snr_db: need step > 0 and stop >= start");
  const auto steps = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  if (steps > 1'000'000) throw ConfigError("params.snr_db: too many points");

  Csv csv({"snr_db", "bits", "rate_bps", "seed", "version"});
  json rows = json::array();
  for (int b : bits) {
    const auto m = tx_moments(bits_quantizer(b, plan.pbar(), kappa), plan.pbar());
    for (std::size_t i = 0; i <= steps; ++i) {
      const double snr_db = start + static_cast<double>(i) * step;
      // tx_power: SNR is measured against the DAC output power.
      const double ptx = reference == "tx_power" ? (std::norm(m.alpha) + m.tau) * plan.pbar() : plan.pbar();
      const double sigma2 = ptx / std::pow(10.0, snr_db / 10.0);
      const double rate = awgn_linear_rate(plan, m, sigma2).r_lin;
      csv.row({num(snr_db), bits_label(b), num(rate), ctx.seed_str(), ctx.version});
      rows.push_back({{"snr_db", snr_db}, {"bits", bits_label(b)}, {"rate_bps", rate}});
    }
  }
  ctx.emit(csv, {{"rows", rows}, {"seed", ctx.seed}, {"version", ctx.version}});
}

void run_sweep_aclr(Params& p, Context& ctx) {
  const auto deltas = p.numbers("deltas", {0.5, 0.5});
  validate_deltas(deltas);
  if (deltas.size() != 2) throw ConfigError("params.deltas: the ACLR sweep needs exactly two bands");
  const auto bits = parse_bits(p, json::array({1, 2, 3}), false);
  const double kappa = p.number("kappa", kDefaultClipKappa);
  const double pbar = p.number("pbar", 1.0);
  const double nu2_stop = p.number("nu2_min", 0.01);
  const auto points = p.integer("points", 50);
  p.finish();
  if (!(kappa > 0.0) || !(pbar > 0.0)) throw ConfigError("params: kappa and pbar must be positive");
  if (!(nu2_stop > 0.0) || nu2_stop >= deltas[1])
    throw ConfigError("params.nu2_min: must lie in (0, deltas[1])");
  if (points < 2 || points > 100000) throw ConfigError("params.points: must lie in [2, 100000]");

  Csv csv({"bits", "nu2", "aclr_db", "r_lin", "r_upper", "feasible", "seed", "version"});
  json rows = json::array();
  json boundaries = json::array();
  for (int b : bits) {
    const auto q = bits_quantizer(b, pbar, kappa);
    const auto m = tx_moments(q, pbar);
    const auto cset = constellation_of(q);
    const double s_tot = (m.alpha_sq() + m.tau) * pbar;
    const double floor2 = feasibility_floors(deltas, m)[1];

    std::vector<double> grid;
    for (std::int64_t i = 0; i < points; ++i)
      grid.push_back(deltas[1] + (nu2_stop - deltas[1]) * static_cast<double>(i) /
                                     static_cast<double>(points - 1));
    if (floor2 > 0.0 && floor2 < deltas[1]) grid.push_back(floor2);
    std::sort(grid.begin(), grid.end(), std::greater<>());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    boundaries.push_back({{"bits", bits_label(b)},
                          {"nu2_floor", floor2},
                          {"max_feasible_aclr_db", max_feasible_aclr_db(deltas, m)}});
    for (double nu2 : grid) {
      const std::vector<double> nu = {1.0 - nu2, nu2};
      const bool feasible = feasible_fractions(deltas, m, nu);
      const double aclr = 10.0 * std::log10(nu[0] / nu[1]);
      std::optional<double> r_lin;
      if (feasible) r_lin = noise_free_rate(deltas, m, nu).r_lin;
      const double r_up = rate_upper_bound(cset, std::vector<double>{s_tot * nu[0], s_tot * nu[1]},
                                           deltas).r_upper;
      csv.row({bits_label(b), num(nu2), num(aclr), r_lin ? num(*r_lin) : "", num(r_up),
               feasible ? "1" : "0", ctx.seed_str(), ctx.version});
      rows.push_back({{"bits", bits_label(b)},
                      {"nu2", nu2},
                      {"aclr_db", aclr},
                      {"r_lin", r_lin ? json(*r_lin) : json(nullptr)},
                      {"r_upper", r_up},
                      {"feasible", feasible}});
    }
  }
  ctx.emit(csv, {{"rows", rows}, {"boundaries", boundaries}, {"seed", ctx.seed},
                 {"version", ctx.version}});
}

// ------------------------------------------------------------ montecarlo

json sim_json(const SimReport& r) {
  json j = {{"n", r.n},
            {"trials", r.trials},
            {"seed", r.seed},
            {"transform", r.transform == TransformKind::haar ? "haar" : "fft"},
            {"moments_tx", moments_json(r.m_tx)},
            {"empirical_s_mean", r.empirical_s_mean},
            {"empirical_s_stderr", r.empirical_s_stderr},
            {"empirical_nu", r.empirical_nu},
            {"empirical_s_tot_mean", r.empirical_s_tot_mean},
            {"empirical_s_tot_stderr", r.empirical_s_tot_stderr},
            {"predicted_s", r.predicted_s},
            {"predicted_nu", r.predicted_nu},
            {"predicted_s_tot", r.predicted_s_tot},
            {"relative_errors", r.relative_errors},
            {"s_tot_relative_error", r.s_tot_relative_error},
            {"noise_diagnostics",
             {{"excess_kurtosis_re", r.noise.excess_kurtosis_re},
              {"excess_kurtosis_im", r.noise.excess_kurtosis_im},
              {"z_w_correlation", r.noise.z_w_correlation},
              {"iq_correlation", r.noise.iq_correlation},
              {"noise_power", r.noise.noise_power},
              {"predicted_noise_power", r.noise.predicted_noise_power}}},
            {"max_unitarity_error", r.max_unitarity_error},
            {"max_energy_bookkeeping_error", r.max_energy_bookkeeping_error}};
  if (r.m_rx) {
    j["moments_rx"] = moments_json(*r.m_rx);
    j["empirical_rho"] = r.empirical_rho;
    j["predicted_rho"] = r.predicted_rho;
  }
  return j;
}

void run_montecarlo(Params& p, Context& ctx) {
  SimConfig cfg;
  cfg.seed = ctx.seed;
  const auto n = p.integer("n", 2048);
  const auto trials = p.integer("trials", 20);
  if (n < 1 || n > (1 << 16)) throw ConfigError("params.n: must lie in [1, 65536]");
  if (trials < 1 || trials > 100000) throw ConfigError("params.trials: must lie in [1, 100000]");
  cfg.n = static_cast<std::size_t>(n);
  cfg.trials = static_cast<std::size_t>(trials);
  const auto transform = p.string("transform", "haar");
  if (transform == "haar")
    cfg.transform = TransformKind::haar;
  else if (transform == "fft")
    cfg.transform = TransformKind::fft;
  else
    throw ConfigError("params.transform: expected 'haar' or 'fft'");
  const auto layout = p.string("layout", "contiguous");
  if (layout == "contiguous")
    cfg.layout = SubbandLayout::contiguous;
  else if (layout == "interleaved")
    cfg.layout = SubbandLayout::interleaved;
  else if (layout == "scattered")
    cfg.layout = SubbandLayout::scattered;
  else
    throw ConfigError("params.layout: expected contiguous, interleaved or scattered");
  cfg.plan = parse_plan(p, {0.5, 0.5}, {2.0, 0.0});
  if (p.has("subband_assignment")) cfg.subband_assignment = p.integers("subband_assignment");
  auto pq = p.object("qtx", kDefaultQuantizer);
  cfg.qtx = parse_quantizer(pq, cfg.plan.pbar());
  p.put("qtx", pq.finish());
  const bool chain = p.boolean("chain", false);
  auto pc = p.object("channel", json::object());
  cfg.channel = parse_channel(pc);
  p.put("channel", pc.finish());
  auto pr = p.object("qrx", json{{"kind", "identity"}});
  cfg.qrx = parse_quantizer(pr, cfg.plan.pbar());
  p.put("qrx", pr.finish());
  const auto workers = p.integer("workers", 0);
  if (workers < 0 || workers > 1024) throw ConfigError("params.workers: must lie in [0, 1024]");
  cfg.workers = static_cast<unsigned>(workers);
  p.finish();

  const auto r = chain ? run_chain_trials(cfg) : run_tx_trials(cfg);
  Csv csv({"trial", "band", "empirical_s", "predicted_s", "seed", "version"});
  for (const auto& t : r.per_trial)
    for (std::size_t m = 0; m < t.s_m.size(); ++m)
      csv.row({std::to_string(t.trial), std::to_string(m), num(t.s_m[m]), num(r.predicted_s[m]),
               ctx.seed_str(), ctx.version});
  json doc = sim_json(r);
  doc["version"] = ctx.version;
  ctx.emit(csv, doc);
}

// -------------------------------------------------------------- waveform

void run_waveform(Params& p, Context& ctx) {
  WaveformConfig cfg;
  cfg.seed = ctx.seed;
  cfg.occupied_bandwidth = p.number("occupied_bandwidth", cfg.occupied_bandwidth);
  cfg.sample_rate = p.number("sample_rate", cfg.sample_rate);
  cfg.guard_band = p.number("guard_band", cfg.guard_band);
  cfg.fft_size = static_cast<int>(p.integer("fft_size", cfg.fft_size));
  cfg.interpolation_factor = static_cast<int>(p.integer("interpolation_factor", cfg.interpolation_factor));
  cfg.num_subcarriers = static_cast<int>(p.integer("num_subcarriers", cfg.num_subcarriers));
  if (p.has("active_subcarriers")) cfg.active_subcarriers = p.integers("active_subcarriers");
  const auto symbols = p.integer("num_symbols", static_cast<std::int64_t>(cfg.num_symbols));
  if (symbols < 1 || symbols > 100000) throw ConfigError("params.num_symbols: must lie in [1, 100000]");
  cfg.num_symbols = static_cast<std::size_t>(symbols);
  cfg.zoh = p.boolean("zoh", cfg.zoh);
  auto pi = p.object("interpolation", json::object());
  cfg.interpolation.taps = static_cast<int>(pi.integer("taps", cfg.interpolation.taps));
  cfg.interpolation.cutoff = pi.number("cutoff", cfg.interpolation.cutoff);
  cfg.interpolation.stopband_db = pi.number("stopband_db", cfg.interpolation.stopband_db);
  p.put("interpolation", pi.finish());
  auto pw = p.object("psd", json::object());
  const auto seg = pw.integer("segment_length", static_cast<std::int64_t>(cfg.psd.segment_length));
  if (seg < 2 || seg > (1 << 24)) throw ConfigError("params.psd.segment_length: out of range");
  cfg.psd.segment_length = static_cast<std::size_t>(seg);
  cfg.psd.overlap = pw.number("overlap", cfg.psd.overlap);
  cfg.psd.window = pw.string("window", cfg.psd.window);
  p.put("psd", pw.finish());

  // DAC list; kappa-loaded quantizers are resolved against the measured
  // stream power once the stream exists.
  json dac_cfg = p.has("dac") ? p.take("dac")
                              : json{{"kind", "uniform_midrise"}, {"bits", 4}, {"kappa", 3.0}};
  if (dac_cfg.is_object()) dac_cfg = json::array({dac_cfg});
  if (!dac_cfg.is_array() || dac_cfg.empty())
    throw ConfigError("params.dac: expected a quantizer object or a non-empty array of them");
  std::vector<json> resolved_dacs;
  for (std::size_t i = 0; i < dac_cfg.size(); ++i) {
    Params pd(dac_cfg[i], "params.dac[" + std::to_string(i) + "]");
    parse_quantizer(pd, 1.0);  // schema check only
    resolved_dacs.push_back(pd.finish());
  }
  p.put("dac", resolved_dacs);
  p.finish();
  try {
    validate(cfg);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }

  const auto stream = synthesize_baseband(cfg, cfg.num_symbols, cfg.seed);
  double pin = 0.0;
  for (const auto& u : stream) pin += std::norm(u);
  pin /= static_cast<double>(stream.size());
  if (!(pin > 0.0)) throw ConfigError("params: no active subcarriers, the stream is silent");

  Csv csv({"dac", "bits", "aclr_db", "agn_predicted_aclr_db", "inband_power", "adjacent_power",
           "saturation_fraction", "seed", "version"});
  json reports = json::array();
  for (std::size_t i = 0; i < resolved_dacs.size(); ++i) {
    Params pd(resolved_dacs[i], "params.dac[" + std::to_string(i) + "]");
    cfg.dac = parse_quantizer(pd, pin);
    const auto r = apply_dac_and_measure(cfg, stream);
    const auto* um = std::get_if<QuantizerSpec::UniformMidrise>(&cfg.dac.kind());
    const std::string bits = um ? std::to_string(um->bits) : "";
    if (r.saturation_warning)
      ctx.out.warnings.push_back("dac[" + std::to_string(i) + "]: more than 99% of samples clip");
    csv.row({describe(cfg.dac), bits, num(r.aclr_db), num(r.agn_predicted_aclr_db),
             num(r.inband_power), num(r.adjacent_power), num(r.saturation_fraction),
             ctx.seed_str(), ctx.version});

    Csv psd({"freq_hz", "psd_db"});
    json curve = json::array();
    for (const auto& [f, db] : r.psd_curve) {
      psd.row({num(f), num(db)});
      curve.push_back({f, std::isfinite(db) ? json(db) : json(nullptr)});
    }
    if (ctx.format == "csv") ctx.out.files["psd_" + std::to_string(i) + ".csv"] = psd.str();
    reports.push_back({{"dac", describe(cfg.dac)},
                       {"clip", um ? json(um->clip) : json(nullptr)},
                       {"aclr_db", std::isfinite(r.aclr_db) ? json(r.aclr_db) : json(nullptr)},
                       {"agn_predicted_aclr_db", std::isfinite(r.agn_predicted_aclr_db)
                                                     ? json(r.agn_predicted_aclr_db)
                                                     : json(nullptr)},
                       {"inband_power", r.inband_power},
                       {"adjacent_power", r.adjacent_power},
                       {"inband_hz", {r.inband_lo, r.inband_hi}},
                       {"adjacent_hz", {r.adjacent_lo, r.adjacent_hi}},
                       {"input_power", r.input_power},
                       {"time_domain_power", r.time_domain_power},
                       {"psd_power", r.psd_power},
                       {"saturation_fraction", r.saturation_fraction},
                       {"saturation_warning", r.saturation_warning},
                       {"psd_segments", r.psd.segments},
                       {"psd_curve", curve}});
  }
  ctx.emit(csv, {{"numerology",
                  {{"baseband_rate", cfg.baseband_rate()},
                   {"subcarrier_spacing", cfg.subcarrier_spacing()},
                   {"filter_cutoff", cfg.filter_cutoff()}}},
                 {"reports", reports},
                 {"seed", ctx.seed},
                 {"version", ctx.version}});
}

}  // namespace

RunOutput run_experiment(const json& config) {
  Params top(config, "");
  const auto schema = top.integer("schema_version", kSchemaVersion);
  if (schema != kSchemaVersion)
    throw ConfigError("schema_version " + std::to_string(schema) + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
  if (!top.has("experiment")) throw ConfigError("experiment: missing required key");
  const auto experiment = top.string("experiment", "");
  if (std::find(kExperiments.begin(), kExperiments.end(), experiment) == kExperiments.end())
    throw ConfigError("experiment: unknown experiment '" + experiment + "'");

  Context ctx;
  ctx.version = std::string(version());
  ctx.seed = top.unsigned_integer("seed", 1);
  auto po = top.object("output", json::object());
  ctx.format = po.string("format", "csv");
  if (ctx.format != "csv" && ctx.format != "json")
    throw ConfigError("output.format: expected csv or json");
  po.string("path", ".");
  top.put("output", po.finish());

  auto pp = top.object("params", json::object());
  static const std::map<std::string, void (*)(Params&, Context&)> table = {
      {"moments", run_moments},       {"spectrum", run_spectrum},
      {"rate", run_rate},             {"upper-bound", run_upper_bound},
      {"sweep-snr", run_sweep_snr},   {"sweep-aclr", run_sweep_aclr},
      {"montecarlo", run_montecarlo}, {"waveform", run_waveform}};
  table.at(experiment)(pp, ctx);
  top.put("params", pp.finish());

  json resolved = top.finish();
  ctx.out.files["resolved_config.json"] = resolved.dump(2) + "\n";
  return ctx.out;
}

}  // namespace qcap::cli
