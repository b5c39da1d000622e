#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "observer/runner.hpp"

using namespace observer;

namespace {

// Small, fast scenario for file-format and determinism checks.
const char* kTinyConfig = R"(
dim = 2
lengths = 1, 1
bc = neumann
nu = 0.1
ell = 2
sensors_S = 2
lambda = 0.05
cover_r = 0.25
aux_kind = sin2
nodes_per_dim = 9
dt = 1e-3
t_end = 0.12
a = -1
b1 = x2
b2 = -x1
a_tilde = -1
r_exp = 4
b_tilde1 = 1
b_tilde2 = -2
s_exp = 1
f = 0
z0 = 2 - x1*x2
mode = error
output_stride = 2
fit_start = 0.02
)";

std::filesystem::path temp_dir(const std::string& leaf) {
  const auto dir = std::filesystem::temp_directory_path() / ("observer_test_" + leaf);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("presets carry the section-5 parameters") {
  const ScenarioConfig nine = load_config("preset:paper-sec5-9sensors");
  CHECK(nine.ell == 2.0);
  CHECK(nine.nu == 0.1);
  CHECK(nine.lambda == 0.02);
  CHECK(nine.dt == 1e-4);
  CHECK(nine.s_sigma() == 9);
  CHECK(nine.coeffs.r_exp == 4.0);
  CHECK(nine.a_src == "-2 + x1 - abs(sin(t + x1))");

  const ScenarioConfig free_dyn = load_config("free-dynamics");
  CHECK(free_dyn.lambda == 0.0);

  CHECK(load_config("preset:paper-sec5-4sensors").s_sigma() == 4);
  CHECK(load_config("preset:paper-sec5-16sensors").s_sigma() == 16);
}

TEST_CASE("config rejects unknown keys, duplicates, types, missing keys") {
  CHECK_THROWS_AS(parse_config_text("dim = 2\nwavelength = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("dim = two\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("dim = 2\ndim = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("dim = 2\n"), ConfigError);  // missing keys
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);

  std::string bad(kTinyConfig);
  bad += "z0 = x1 +\n";  // duplicate key with a parse error
  CHECK_THROWS_AS(parse_config_text(bad), ConfigError);

  // Sampled boundedness guard: 1/x1 diverges at the domain corner.
  std::string unbounded(kTinyConfig);
  unbounded.replace(unbounded.find("a = -1"), 6, "a = 1/x1");
  CHECK_THROWS_AS(parse_config_text(unbounded), ConfigError);
}

TEST_CASE("config guards expression dimensions and mode-specific keys") {
  std::string one_d = R"(
dim = 1
lengths = 1
bc = dirichlet
nu = 0.1
ell = 1
sensors_S = 2
lambda = 0.0
cover_r = 0.5
aux_kind = sin2
nodes_per_dim = 17
dt = 1e-3
t_end = 0.05
a = 0
b1 = 0
a_tilde = 0
b_tilde1 = 0
r_exp = 2
s_exp = 1
f = 0
z0 = x1
mode = error
output_stride = 1
fit_start = 0.01
)";
  CHECK_NOTHROW(parse_config_text(one_d));
  std::string bad = one_d;
  bad.replace(bad.find("z0 = x1"), 7, "z0 = x2");
  CHECK_THROWS_AS(parse_config_text(bad), ConfigError);

  std::string coupled(kTinyConfig);
  coupled.replace(coupled.find("mode = error"), 12, "mode = coupled");
  CHECK_THROWS_AS(parse_config_text(coupled), ConfigError);  // z0 with coupled
}

TEST_CASE("run artifacts: csv format, summary round-trip, determinism") {
  const ScenarioConfig cfg = parse_config_text(kTinyConfig);
  const auto dir1 = temp_dir("run1");
  const auto dir2 = temp_dir("run2");
  const RunArtifacts a1 = run_scenario(cfg, dir1);
  const RunArtifacts a2 = run_scenario(cfg, dir2);

  for (const char* name : {"run.csv", "summary.json", "sensors.json", "plot.gp"})
    CHECK(std::filesystem::exists(dir1 / name));

  // Header and 17-significant-digit format.
  std::ifstream csv(dir1 / "run.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,norm_V,norm_H,inj_norm_H");

  // Determinism: identical bytes.
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir1 / "run.csv") == slurp(dir2 / "run.csv"));

  // Round-trip: refitting the emitted series reproduces mu_hat to 1e-12.
  const auto series = read_run_csv(dir1 / "run.csv");
  REQUIRE(series.size() == a1.summary.series.size());
  const FitResult refit = fit_decay(series, cfg.fit_start);
  CHECK(refit.mu_hat == doctest::Approx(a1.summary.mu_hat).epsilon(1e-12));

  // z0 was normalized to unit V norm.
  CHECK(a1.summary.series.front().norm_v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("summary json carries the exact key set") {
  const ScenarioConfig cfg = parse_config_text(kTinyConfig);
  const auto dir = temp_dir("summary");
  run_scenario(cfg, dir);
  std::ifstream in(dir / "summary.json");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  for (const char* key : {"blowup", "t_blowup", "mu_hat", "rho_hat", "inj_norm_t0",
                          "S_sigma", "lambda", "ell", "nodes_per_dim", "dt"})
    CHECK(text.find('"' + std::string(key) + '"') != std::string::npos);
}

TEST_CASE("sensors json lists index, corner and widths per region") {
  const ScenarioConfig cfg = parse_config_text(kTinyConfig);
  const auto dir = temp_dir("sensors");
  run_scenario(cfg, dir);
  std::ifstream in(dir / "sensors.json");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("\"lower_corner\"") != std::string::npos);
  CHECK(text.find("\"widths\"") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '{') == cfg.s_sigma());
}

TEST_CASE("sweep writes one row per run and a monotonicity report") {
  ScenarioConfig cfg = parse_config_text(kTinyConfig);
  const auto dir = temp_dir("sweep");
  const auto rows = run_sweep(cfg, {4, 9}, {0.02, 0.1}, dir, 2);
  CHECK(rows.size() == 4);
  CHECK(std::filesystem::exists(dir / "sweep.csv"));
  std::ifstream csv(dir / "sweep.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "S_sigma,lambda,blowup,t_blowup,mu_hat,rho_hat,inj_norm_t0");
  int count = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++count;
  CHECK(count == 4);
  CHECK_THROWS_AS(run_sweep(cfg, {5}, {0.1}, dir, 1), ConfigError);
  const std::string report = sweep_monotonicity_report(rows);
  CHECK(report.find("mu_hat") != std::string::npos);
}

TEST_CASE("constants report emits the spec keys") {
  ScenarioConfig cfg = parse_config_text(kTinyConfig);
  cfg.nodes_per_dim = 17;
  const auto dir = temp_dir("constants");
  write_constants_report(cfg, dir);
  std::ifstream in(dir / "constants.json");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  for (const char* key :
       {"S", "beta", "alpha_l0", "alpha_l1", "alpha_l2", "gram_condition_numbers"})
    CHECK(text.find('"' + std::string(key) + '"') != std::string::npos);
  CHECK(std::filesystem::exists(dir / "injection.json"));
}
