#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcap/moments.hpp"
#include "qcap/quantizer.hpp"

namespace qcap::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or schema-invalid configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Typed view over one JSON object. Every read records the value actually
/// used (defaults included) so the resolved document can be written back;
/// finish() rejects keys that were never read.
class Params {
 public:
  Params(const json& j, std::string path);

  bool has(const std::string& key) const;
  const json& raw(const std::string& key) const;

  double number(const std::string& key, double def);
  double number(const std::string& key);
  std::int64_t integer(const std::string& key, std::int64_t def);
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def);
  bool boolean(const std::string& key, bool def);
  std::string string(const std::string& key, const std::string& def);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& def);
  std::vector<double> numbers(const std::string& key);
  std::vector<int> integers(const std::string& key);

  /// Nested object (or default) for a sub-reader; store its result with put().
  Params object(const std::string& key, const json& def);
  void put(const std::string& key, json value);
  /// Marks a key as read and echoes it verbatim.
  const json& take(const std::string& key);

  const std::string& path() const noexcept { return path_; }
  json finish();

 private:
  const json& lookup(const std::string& key) const;
  std::string where(const std::string& key) const;

  json src_;
  std::string path_;
  json resolved_ = json::object();
};

/// Quantizer from {"kind": ...}. Uniform quantizers take either "clip" or a
/// loading factor "kappa" (default 3) resolved against pbar.
QuantizerSpec parse_quantizer(Params& p, double pbar);
std::string describe(const QuantizerSpec& q);

ChannelSpec parse_channel(Params& p);
MomentMethod parse_method(Params& p, std::uint64_t seed);

}  // namespace qcap::cli
