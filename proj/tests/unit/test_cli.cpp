#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qcap_cli/app.hpp"

namespace fs = std::filesystem;
using qcap::cli::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qcap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return qcap::cli::run_cli(args, out_, err_);
  }
  std::string write_config(const std::string& name, const json& j) {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump();
    return p.string();
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
  }
  static std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, DefaultsJson) {
  ASSERT_EQ(run({"defaults"}), 0);
  const auto doc = json::parse(out_.str());
  EXPECT_EQ(doc["quadrature_nodes"], 129);
  EXPECT_EQ(doc["quantizer"]["clip_kappa"], 3.0);
  EXPECT_EQ(doc["waveform"]["psd"]["segment_length"], 4096);
}

TEST_F(CliTest, DefaultsCsv) {
  ASSERT_EQ(run({"defaults", "--format", "csv"}), 0);
  const auto l = lines(out_.str());
  EXPECT_EQ(l[0], "key,value");
  EXPECT_NE(std::find(l.begin(), l.end(), "quadrature_nodes,129"), l.end());
  EXPECT_NE(std::find(l.begin(), l.end(), "waveform.psd.window,hann"), l.end());
}

TEST_F(CliTest, MalformedConfigWritesNothing) {
  const auto out = dir_ / "out";
  const auto bad = dir_ / "bad.json";
  std::ofstream(bad) << "{ not json";
  EXPECT_EQ(run({"--config", bad.string(), "--out", out.string()}), 2);
  EXPECT_FALSE(fs::exists(out));
  const auto cfg = write_config("unknown.json", {{"schema_version", 1},
                                                 {"experiment", "spectrum"},
                                                 {"params", {{"deltaz", {0.5, 0.5}}}}});
  EXPECT_EQ(run({"--config", cfg, "--out", out.string()}), 2);
  EXPECT_NE(err_.str().find("params.deltaz"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, SchemaVersionChecked) {
  const auto cfg = write_config("v.json", {{"schema_version", 7}, {"experiment", "spectrum"}});
  EXPECT_EQ(run({"--config", cfg, "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, SubcommandMustMatchConfig) {
  const auto cfg = write_config("m.json", {{"schema_version", 1}, {"experiment", "spectrum"}});
  EXPECT_EQ(run({"rate", "--config", cfg, "--out", (dir_ / "o").string()}), 2);
}

TEST_F(CliTest, InfeasibleInputIsConfigError) {
  const auto cfg = write_config("nu.json", {{"schema_version", 1},
                                            {"experiment", "rate"},
                                            {"params",
                                             {{"nu", {0.95, 0.05}},
                                              {"qtx", {{"kind", "uniform_midrise"}, {"bits", 1}, {"clip", 1.0}}}}}});
  EXPECT_EQ(run({"--config", cfg, "--out", (dir_ / "o").string()}), 2);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(CliTest, InfiniteRateIsNumericalFailure) {
  const auto cfg = write_config("inf.json", {{"schema_version", 1},
                                             {"experiment", "rate"},
                                             {"params", {{"qtx", {{"kind", "identity"}}}}}});
  EXPECT_EQ(run({"--config", cfg, "--out", (dir_ / "o").string()}), 3);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(CliTest, KappaOverrideIsLogged) {
  const auto cfg = write_config("k.json", {{"schema_version", 1},
                                           {"experiment", "spectrum"},
                                           {"params", {{"qtx", {{"kind", "uniform_midrise"}, {"bits", 2}, {"kappa", 2.25}}}}}});
  ASSERT_EQ(run({"--config", cfg, "--out", (dir_ / "o").string()}), 0) << err_.str();
  const auto resolved = json::parse(slurp(dir_ / "o" / "resolved_config.json"));
  EXPECT_EQ(resolved["params"]["qtx"]["kappa"], 2.25);
  EXPECT_EQ(resolved["params"]["deltas"], json({0.5, 0.5}));
}

TEST_F(CliTest, ResolvedConfigReproducesResults) {
  ASSERT_EQ(run({"montecarlo", "--out", (dir_ / "a").string(), "--seed", "4", "--format", "json"}), 0)
      << err_.str();
  // Shrink the run through the config itself, then replay the resolved document.
  auto resolved = json::parse(slurp(dir_ / "a" / "resolved_config.json"));
  EXPECT_EQ(resolved["seed"], 4);
  resolved["params"]["n"] = 128;
  resolved["params"]["trials"] = 3;
  resolved["output"]["path"] = (dir_ / "b").string();
  ASSERT_EQ(run({"--config", write_config("r1.json", resolved)}), 0) << err_.str();
  auto replay = json::parse(slurp(dir_ / "b" / "resolved_config.json"));
  replay["output"]["path"] = (dir_ / "c").string();
  ASSERT_EQ(run({"--config", write_config("r2.json", replay)}), 0) << err_.str();
  EXPECT_EQ(slurp(dir_ / "b" / "results.json"), slurp(dir_ / "c" / "results.json"));
}

TEST_F(CliTest, SweepSnrColumns) {
  ASSERT_EQ(run({"sweep-snr", "--out", dir_.string(), "--seed", "9"}), 0) << err_.str();
  const auto l = lines(slurp(dir_ / "results.csv"));
  EXPECT_EQ(l[0], "snr_db,bits,rate_bps,seed,version");
  EXPECT_EQ(l.size(), 1u + 5u * 41u);
  EXPECT_EQ(l[1].substr(0, 6), "-10,1,");
  EXPECT_NE(l[1].find(",9,"), std::string::npos);
  EXPECT_EQ(lines(slurp(dir_ / "results.csv")).back().substr(0, 6), "30,inf");
}

TEST_F(CliTest, SweepAclrStopsLinearRateAtBoundary) {
  const auto cfg = write_config("a.json", {{"schema_version", 1},
                                           {"experiment", "sweep-aclr"},
                                           {"params", {{"bits", {1}}, {"points", 20}}}});
  ASSERT_EQ(run({"--config", cfg, "--out", dir_.string()}), 0) << err_.str();
  const auto l = lines(slurp(dir_ / "results.csv"));
  ASSERT_EQ(l[0], "bits,nu2,aclr_db,r_lin,r_upper,feasible,seed,version");
  bool boundary = false;
  for (std::size_t i = 1; i < l.size(); ++i) {
    std::vector<std::string> cells;
    std::istringstream is(l[i]);
    for (std::string c; std::getline(is, c, ',');) cells.push_back(c);
    const double aclr = std::stod(cells[2]);
    EXPECT_EQ(cells[3].empty(), aclr > 6.5359 + 1e-9) << l[i];
    EXPECT_FALSE(cells[4].empty());
    if (std::abs(aclr - 6.53587) < 1e-4) boundary = true;
  }
  EXPECT_TRUE(boundary);
}

TEST_F(CliTest, ShippedPresetsAreValid) {
  for (const auto& entry : fs::directory_iterator(QCAP_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream f(entry.path());
    const auto cfg = json::parse(f);
    ASSERT_TRUE(cfg.contains("experiment")) << entry.path();
    EXPECT_NO_THROW(qcap::cli::run_experiment(cfg)) << entry.path();
  }
}

TEST_F(CliTest, MomentsMonteCarloOutputIsDeterministic) {
  const json cfg = {{"schema_version", 1},
                    {"experiment", "moments"},
                    {"seed", 12},
                    {"params", {{"method", {{"kind", "montecarlo"}, {"samples", 20000}}}}}};
  const auto a = qcap::cli::run_experiment(cfg);
  const auto b = qcap::cli::run_experiment(cfg);
  EXPECT_EQ(a.files, b.files);
}

TEST_F(CliTest, WaveformWritesPsdPerDac) {
  const json cfg = {{"schema_version", 1},
                    {"experiment", "waveform"},
                    {"params",
                     {{"num_symbols", 4},
                      {"dac", json::array({{{"kind", "uniform_midrise"}, {"bits", 3}},
                                           {{"kind", "identity"}}})}}}};
  const auto out = qcap::cli::run_experiment(cfg);
  EXPECT_TRUE(out.files.count("psd_0.csv"));
  EXPECT_TRUE(out.files.count("psd_1.csv"));
  const auto l = lines(out.files.at("results.csv"));
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0], "dac,bits,aclr_db,agn_predicted_aclr_db,inband_power,adjacent_power,saturation_fraction,seed,version");
}
