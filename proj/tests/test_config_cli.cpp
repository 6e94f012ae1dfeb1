#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcov/cli.hpp"
#include "dcov/config.hpp"

using namespace dcov;
namespace fs = std::filesystem;

namespace {

Json base_config() {
  return Json::parse(R"({
    "dims": {"dimA": 2, "dimB": 2},
    "operators": {
      "hA": {"preset": "pauli_z", "scale": 0.4},
      "hB": "zero",
      "lOps": ["pauli_z"],
      "mOps": ["pauli_z"]
    },
    "noise": {
      "sigmaAA": [[[0.5, 0.0]]],
      "sigmaBB": [[[0.0, 0.0]]],
      "sigmaAB": [[[0.0, 0.0]]],
      "kind": "real"
    },
    "initial": {
      "kind": "fixed",
      "x": [[0.70710678118654752, 0.0], [0.70710678118654752, 0.0]],
      "y": [[1.0, 0.0], [0.0, 0.0]]
    },
    "micro": {"mode": "free"},
    "window": {"epsilon": 0.2, "cDelta": 1.0, "cDeltaT": 0.25,
               "tauGrid": [0.0, 0.2, 0.4]},
    "reference": {"variant": "generic_gksl"},
    "ensembleSize": 200,
    "seed": 99,
    "workers": 1,
    "outputDir": "test_out"
  })");
}

std::string write_temp(const Json& j, const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("bundled configs parse and validate", "[config]") {
  for (const char* name :
       {"configs/dephasing.json", "configs/closed_two_qubit.json",
        "configs/interacting_feedback.json"}) {
    const fs::path p = fs::path(DCOV_SOURCE_DIR) / name;
    REQUIRE(fs::exists(p));
    CHECK_NOTHROW(load_config(p.string()));
  }
}

TEST_CASE("operator presets and literals", "[config]") {
  Json j = base_config();
  j["operators"]["hA"] = Json::parse(
      R"([[[0.7, 0.0], [0.3, 0.0]], [[0.3, 0.0], [-0.7, 0.0]]])");
  const ExperimentConfig cfg = parse_config(j);
  CHECK(std::abs(cfg.spec.h_a(0, 1) - Complex(0.3, 0)) < 1e-15);
  CHECK(cfg.spec.l_ops.size() == 1);
}

TEST_CASE("validation failures carry the offending field", "[config]") {
  // non-Hermitian Hamiltonian
  Json j = base_config();
  j["operators"]["hA"] = Json::parse(
      R"([[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]])");
  CHECK_THROWS_WITH(parse_config(j),
                    Catch::Matchers::ContainsSubstring("hA"));

  // Cauchy-Schwarz violating cross covariance names the noise block
  j = base_config();
  j["noise"]["sigmaAA"] = Json::parse("[[[1.0, 0.0]]]");
  j["noise"]["sigmaBB"] = Json::parse("[[[1.0, 0.0]]]");
  j["noise"]["sigmaAB"] = Json::parse("[[[2.0, 0.0]]]");
  CHECK_THROWS_AS(parse_config(j), IndefiniteCovarianceError);
  CHECK_THROWS_WITH(parse_config(j),
                    Catch::Matchers::ContainsSubstring("noise"));

  // dt stability guard
  j = base_config();
  j["operators"]["hA"] = Json::object({{"preset", "pauli_z"}, {"scale", 40.0}});
  CHECK_THROWS_WITH(parse_config(j),
                    Catch::Matchers::ContainsSubstring("guard"));

  // scale separation
  j = base_config();
  j["window"]["epsilon"] = 0.9;
  CHECK_THROWS_WITH(parse_config(j),
                    Catch::Matchers::ContainsSubstring("scale separation"));
}

TEST_CASE("17-digit serialization round-trips", "[config]") {
  for (double v : {M_PI, 1.0 / 3.0, 0.1, 12345.678901234567}) {
    const std::string s = fmt17(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("cmd_validate exit codes", "[cli]") {
  const std::string good = write_temp(base_config(), "dcov_good.json");
  CHECK(cmd_validate(good) == 0);

  Json bad = base_config();
  bad["noise"]["sigmaAB"] = Json::parse("[[[2.0, 0.0]]]");
  bad["noise"]["sigmaAA"] = Json::parse("[[[1.0, 0.0]]]");
  const std::string badp = write_temp(bad, "dcov_bad.json");
  CHECK(cmd_validate(badp) == 2);

  // dt above the stability guard is a validation failure
  Json fast = base_config();
  fast["operators"]["hA"] =
      Json::object({{"preset", "pauli_z"}, {"scale", 40.0}});
  CHECK(cmd_validate(write_temp(fast, "dcov_fast.json")) == 2);

  CHECK(cmd_validate("/nonexistent/config.json") == 2);
}

TEST_CASE("cmd_simulate writes reproducible artifacts", "[cli]") {
  Json j = base_config();
  const fs::path out = fs::temp_directory_path() / "dcov_sim_out";
  fs::remove_all(out);
  j["outputDir"] = out.string();
  const std::string p = write_temp(j, "dcov_sim.json");

  REQUIRE(cmd_simulate(p) == 0);
  REQUIRE(fs::exists(out / "series.csv"));
  REQUIRE(fs::exists(out / "series.json"));
  REQUIRE(fs::exists(out / "reference.csv"));

  const std::string first = slurp(out / "series.csv");
  CHECK(first.find("tau,C_re_0_0") != std::string::npos);
  CHECK(first.find("max_SE") != std::string::npos);
  // identical config + seed: byte-identical outputs
  REQUIRE(cmd_simulate(p) == 0);
  CHECK(slurp(out / "series.csv") == first);

  // provenance embedded
  const Json doc = Json::parse(slurp(out / "series.json"));
  CHECK(doc["meta"]["version"] == kVersion);
  CHECK(doc["meta"]["config"].contains("window"));
}

TEST_CASE("micro.steps must cover the last window", "[config]") {
  Json j = base_config();
  j["micro"]["steps"] = 5;
  CHECK_THROWS_WITH(parse_config(j),
                    Catch::Matchers::ContainsSubstring("micro.steps"));
  j["micro"]["steps"] = 100000;
  CHECK_NOTHROW(parse_config(j));
}

TEST_CASE("cmd_reference matches the closed-form dephasing decay", "[cli]") {
  Json j = base_config();
  const double gamma = 0.5;
  const fs::path out = fs::temp_directory_path() / "dcov_refcsv_out";
  fs::remove_all(out);
  j["outputDir"] = out.string();
  const std::string p = write_temp(j, "dcov_refcsv.json");
  REQUIRE(cmd_reference(p) == 0);

  std::ifstream in(out / "reference.csv");
  std::string line, header;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  // locate the rho_re_0_2 / rho_im_0_2 columns by name
  std::vector<std::string> names;
  std::stringstream hs(header);
  std::string name;
  while (std::getline(hs, name, ',')) names.push_back(name);
  const auto re_it = std::find(names.begin(), names.end(), "rho_re_0_2");
  const auto im_it = std::find(names.begin(), names.end(), "rho_im_0_2");
  REQUIRE(re_it != names.end());
  const std::size_t re_col = re_it - names.begin();
  const std::size_t im_col = im_it - names.begin();
  REQUIRE_FALSE(rows.empty());
  for (const auto& row : rows) {
    const double tau = row[0];
    const double coh = std::hypot(row[re_col], row[im_col]);
    CHECK(std::abs(coh - 0.5 * std::exp(-2.0 * gamma * tau)) < 1e-8);
  }
}

TEST_CASE("cmd_sweep maps inconclusive statistics to exit 4", "[cli]") {
  Json j = base_config();
  j["operators"].erase("lOps");
  j["operators"].erase("mOps");
  j.erase("noise");
  j["initial"] = Json::object({{"kind", "random_haar"}});
  j["sweep"] = Json::parse(
      R"({"epsilons": [0.4, 0.2, 0.1], "ensembleSize": 200,
          "referenceVariant": "von_neumann", "bootstrapResamples": 0})");
  const fs::path out = fs::temp_directory_path() / "dcov_sweep_out";
  fs::remove_all(out);
  j["outputDir"] = out.string();
  const std::string p = write_temp(j, "dcov_sweep.json");
  CHECK(cmd_sweep(p) == 4);
}

TEST_CASE("cmd_noise_check with zero covariance", "[cli]") {
  Json j = base_config();
  j["noise"]["sigmaAA"] = Json::parse("[[[0.0, 0.0]]]");
  const fs::path out = fs::temp_directory_path() / "dcov_noise_out";
  fs::remove_all(out);
  j["outputDir"] = out.string();
  j["noiseCheck"] = Json::parse(R"({"samples": 5000, "lags": 2, "dt": 0.001})");
  const std::string p = write_temp(j, "dcov_noise.json");
  REQUIRE(cmd_noise_check(p) == 0);
  // every estimate row is exactly zero
  std::ifstream in(out / "noise_check.csv");
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 6);
    CHECK(std::stod(cells[3]) == 0.0);
    CHECK(std::stod(cells[4]) == 0.0);
  }
  CHECK(header_seen);
}

TEST_CASE("numerical failures map to exit 3", "[cli]") {
  Json j = base_config();
  // interacting mode with a near-zero initial norm trips the norm floor
  j["micro"]["mode"] = "interacting";
  j["operators"]["interaction"] =
      Json::parse(R"([{"a": "pauli_z", "b": "pauli_z"}])");
  j["initial"]["x"] = Json::parse("[[1e-8, 0.0], [0.0, 0.0]]");
  const fs::path out = fs::temp_directory_path() / "dcov_blowup_out";
  fs::remove_all(out);
  j["outputDir"] = out.string();
  const std::string p = write_temp(j, "dcov_blowup.json");
  CHECK(cmd_simulate(p) == 3);
}

TEST_CASE("seed override changes outputs deterministically", "[cli]") {
  Json j = base_config();
  const fs::path out = fs::temp_directory_path() / "dcov_seed_out";
  fs::remove_all(out);
  j["outputDir"] = out.string();
  const std::string p = write_temp(j, "dcov_seed.json");
  CliOverrides ov;
  ov.seed = 1234;
  REQUIRE(cmd_simulate(p, ov) == 0);
  const std::string a = slurp(out / "series.csv");
  REQUIRE(cmd_simulate(p, ov) == 0);
  CHECK(slurp(out / "series.csv") == a);
}
