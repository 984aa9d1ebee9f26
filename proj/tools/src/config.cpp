#include "qcap_cli/config.hpp"

#include <cmath>
#include <sstream>

namespace qcap::cli {

Params::Params(const json& j, std::string path) : path_(std::move(path)) {
  if (j.is_null())
    src_ = json::object();
  else if (j.is_object())
    src_ = j;
  else
    throw ConfigError(path_ + ": expected an object");
}

std::string Params::where(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool Params::has(const std::string& key) const { return src_.contains(key); }

const json& Params::lookup(const std::string& key) const {
  auto it = src_.find(key);
  if (it == src_.end()) throw ConfigError(where(key) + ": missing required key");
  return *it;
}

const json& Params::raw(const std::string& key) const { return lookup(key); }

double Params::number(const std::string& key) {
  const json& v = lookup(key);
  if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where(key) + ": must be finite");
  resolved_[key] = d;
  return d;
}

double Params::number(const std::string& key, double def) {
  if (!has(key)) {
    resolved_[key] = def;
    return def;
  }
  return number(key);
}

std::int64_t Params::integer(const std::string& key, std::int64_t def) {
  if (!has(key)) {
    resolved_[key] = def;
    return def;
  }
  const json& v = lookup(key);
  if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
  const auto i = v.get<std::int64_t>();
  resolved_[key] = i;
  return i;
}

std::uint64_t Params::unsigned_integer(const std::string& key, std::uint64_t def) {
  if (!has(key)) {
    resolved_[key] = def;
    return def;
  }
  const json& v = lookup(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(where(key) + ": expected a non-negative integer");
  const auto u = v.get<std::uint64_t>();
  resolved_[key] = u;
  return u;
}

bool Params::boolean(const std::string& key, bool def) {
  if (!has(key)) {
    resolved_[key] = def;
    return def;
  }
  const json& v = lookup(key);
  if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
  resolved_[key] = v.get<bool>();
  return v.get<bool>();
}

std::string Params::string(const std::string& key, const std::string& def) {
  if (!has(key)) {
    resolved_[key] = def;
    return def;
  }
  const json& v = lookup(key);
  if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
  resolved_[key] = v.get<std::string>();
  return v.get<std::string>();
}

std::vector<double> Params::numbers(const std::string& key) {
  const json& v = lookup(key);
  if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where(key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) throw ConfigError(where(key) + ": entries must be finite");
  }
  resolved_[key] = out;
  return out;
}

std::vector<double> Params::numbers(const std::string& key, const std::vector<double>& def) {
  if (!has(key)) {
    resolved_[key] = def;
    return def;
  }
  return numbers(key);
}

std::vector<int> Params::integers(const std::string& key) {
  const json& v = lookup(key);
  if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError(where(key) + ": expected an array of integers");
    out.push_back(e.get<int>());
  }
  resolved_[key] = out;
  return out;
}

Params Params::object(const std::string& key, const json& def) {
  return Params(has(key) ? lookup(key) : def, where(key));
}

void Params::put(const std::string& key, json value) { resolved_[key] = std::move(value); }

const json& Params::take(const std::string& key) {
  const json& v = lookup(key);
  resolved_[key] = v;
  return v;
}

json Params::finish() {
  std::ostringstream unknown;
  for (auto it = src_.begin(); it != src_.end(); ++it)
    if (!resolved_.contains(it.key())) unknown << (unknown.tellp() > 0 ? ", " : "") << where(it.key());
  if (unknown.tellp() > 0) throw ConfigError("unknown configuration key(s): " + unknown.str());
  return resolved_;
}

QuantizerSpec parse_quantizer(Params& p, double pbar) {
  const auto kind = p.string("kind", "identity");
  if (kind == "identity") return QuantizerSpec::identity();
  if (kind == "uniform_midrise") {
    const auto bits = p.integer("bits", 3);
    if (bits < 1 || bits > 20)
      throw ConfigError(p.path() + ".bits: must lie in [1, 20]");
    if (p.has("clip") && p.has("kappa"))
      throw ConfigError(p.path() + ": give either clip or kappa, not both");
    if (p.has("clip")) {
      const double c = p.number("clip");
      if (!(c > 0.0)) throw ConfigError(p.path() + ".clip: must be positive");
      return QuantizerSpec::uniform_midrise(static_cast<int>(bits), c);
    }
    const double kappa = p.number("kappa", kDefaultClipKappa);
    if (!(kappa > 0.0)) throw ConfigError(p.path() + ".kappa: must be positive");
    return QuantizerSpec::uniform_midrise_loaded(static_cast<int>(bits), pbar, kappa);
  }
  if (kind == "custom_levels") return QuantizerSpec::custom_levels(p.numbers("levels"));
  throw ConfigError(p.path() + ".kind: unknown quantizer '" + kind +
                    "' (identity, uniform_midrise, custom_levels)");
}

std::string describe(const QuantizerSpec& q) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, QuantizerSpec::Identity>) {
          return "identity";
        } else if constexpr (std::is_same_v<K, QuantizerSpec::UniformMidrise>) {
          return "uniform_midrise(" + std::to_string(k.bits) + ")";
        } else {
          return "custom_levels(" + std::to_string(k.levels.size()) + ")";
        }
      },
      q.kind());
}

ChannelSpec parse_channel(Params& p) {
  const auto kind = p.string("kind", "awgn");
  if (kind != "awgn") throw ConfigError(p.path() + ".kind: only 'awgn' channels are configurable");
  const double sigma2 = p.number("sigma2", 0.0);
  if (!(sigma2 >= 0.0)) throw ConfigError(p.path() + ".sigma2: must be >= 0");
  const auto g = p.numbers("gain", {1.0, 0.0});
  if (g.size() != 2) throw ConfigError(p.path() + ".gain: expected [re, im]");
  return ChannelSpec::awgn(sigma2, {g[0], g[1]});
}

MomentMethod parse_method(Params& p, std::uint64_t seed) {
  const auto kind = p.string("kind", "quadrature");
  if (kind == "quadrature") {
    QuadratureMethod m;
    m.nodes = static_cast<int>(p.integer("nodes", kDefaultQuadratureNodes));
    m.noise_nodes = static_cast<int>(p.integer("noise_nodes", kDefaultNoiseQuadratureNodes));
    if (m.nodes < 1 || m.noise_nodes < 1)
      throw ConfigError(p.path() + ": node counts must be >= 1");
    return m;
  }
  if (kind == "montecarlo") {
    MonteCarloMethod m;
    m.samples = p.unsigned_integer("samples", m.samples);
    if (m.samples < 2) throw ConfigError(p.path() + ".samples: must be >= 2");
    m.seed = seed;
    return m;
  }
  throw ConfigError(p.path() + ".kind: unknown method '" + kind + "' (quadrature, montecarlo)");
}

}  // namespace qcap::cli
