#include "qcap_cli/app.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qcap/analysis.hpp"
#include "qcap/errors.hpp"
#include "qcap/moments.hpp"
#include "qcap/montecarlo.hpp"
#include "qcap/quantizer.hpp"
#include "qcap/version.hpp"
#include "qcap/waveform.hpp"

namespace qcap::cli {

json defaults_document() {
  const SimConfig sim;
  const WaveformConfig wf;
  const MonteCarloMethod mc;
  return {
      {"version", std::string(version())},
      {"schema_version", kSchemaVersion},
      {"seed", 1},
      {"quantizer",
       {{"clip_kappa", kDefaultClipKappa},
        {"level_placement", "c*(2k+1-2^b)/(2^b-1)"},
        {"tie_rule", "toward +inf"}}},
      {"quadrature_nodes", kDefaultQuadratureNodes},
      {"noise_quadrature_nodes", kDefaultNoiseQuadratureNodes},
      {"moments_montecarlo_samples", mc.samples},
      {"feasibility_slack", kFeasibilitySlack},
      {"rate_unit", "bits"},
      {"snr_reference", "tx_power"},
      {"upper_bound", {{"initial_bracket", {-1.0, 1.0}}, {"theta_tolerance", 1e-12}}},
      {"montecarlo",
       {{"n", sim.n},
        {"trials", sim.trials},
        {"transform", "haar"},
        {"layout", "contiguous"}}},
      {"waveform",
       {{"occupied_bandwidth", wf.occupied_bandwidth},
        {"sample_rate", wf.sample_rate},
        {"guard_band", wf.guard_band},
        {"fft_size", wf.fft_size},
        {"interpolation_factor", wf.interpolation_factor},
        {"num_subcarriers", wf.num_subcarriers},
        {"num_symbols", wf.num_symbols},
        {"zoh", wf.zoh},
        {"interpolation",
         {{"taps", wf.interpolation.taps},
          {"cutoff", wf.filter_cutoff()},
          {"window", "kaiser"},
          {"stopband_db", wf.interpolation.stopband_db}}},
        {"psd",
         {{"segment_length", wf.psd.segment_length},
          {"overlap", wf.psd.overlap},
          {"window", wf.psd.window}}}}},
      {"output", {{"format", "csv"}, {"path", "."}}}};
}

namespace {

void flatten(const json& j, const std::string& prefix, std::ostringstream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
    return;
  }
  std::string v = j.is_string() ? j.get<std::string>() : j.dump();
  if (v.find_first_of(",\"") != std::string::npos) {
    std::string q = "\"";
    for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    v = q + "\"";
  }
  os << prefix << ',' << v << '\n';
}

void write_files(const RunOutput& out, const std::filesystem::path& dir, std::ostream& log) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : out.files) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + path.string());
    log << "wrote " << path.string() << '\n';
  }
}

}  // namespace

std::string flatten_csv(const json& doc) {
  std::ostringstream os;
  os << "key,value\n";
  flatten(doc, "", os);
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantized linear transceiver analysis"};
  app.set_version_flag("--version", std::string(version()));
  std::string config_path, out_dir, format;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.require_subcommand(0, 1);
  app.fallthrough();
  for (const auto& name : kExperiments)
    app.add_subcommand(name, "Run the " + name + " experiment");
  app.add_subcommand("defaults", "Print every documented default");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e, out, err) == 0) return kExitOk;
    return kExitConfig;
  }

  const auto subs = app.get_subcommands();
  const std::string sub = subs.empty() ? "" : subs[0]->get_name();
  if (sub == "defaults") {
    const auto doc = defaults_document();
    out << (format == "csv" ? flatten_csv(doc) : doc.dump(2) + "\n");
    return kExitOk;
  }

  RunOutput result;
  std::filesystem::path dir;
  try {
    json cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      try {
        cfg = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ConfigError(config_path + ": " + e.what());
      }
      if (!cfg.is_object()) throw ConfigError(config_path + ": expected a JSON object");
    } else {
      cfg["schema_version"] = kSchemaVersion;
    }
    if (!sub.empty()) {
      if (cfg.contains("experiment") && cfg["experiment"] != sub)
        throw ConfigError("config experiment '" + cfg["experiment"].dump() +
                          "' does not match subcommand '" + sub + "'");
      cfg["experiment"] = sub;
    } else if (!cfg.contains("experiment")) {
      throw ConfigError("no experiment given (use a subcommand or a config file)");
    }
    if (seed) cfg["seed"] = *seed;
    if (!format.empty()) cfg["output"]["format"] = format;
    if (!out_dir.empty()) cfg["output"]["path"] = out_dir;

    result = run_experiment(cfg);
    const auto resolved = json::parse(result.files.at("resolved_config.json"));
    dir = resolved["output"]["path"].get<std::string>();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FeasibilityError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleEnergyError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BoundaryEnergyError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleMaskError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfiniteRateError& e) {
    err << "infinite rate: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << '\n';
    return kExitNumerical;
  }

  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  try {
    write_files(result, dir, out);
  } catch (const std::exception& e) {
    err << "output failed: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace qcap::cli
