// observer: run the Luenberger-observer experiments from the command line.
//   observer run <config> [--expect-stable] [--out DIR]
//   observer sweep <config> --S-list 4,9,16 --lambda-list 0.02,0.1 [--jobs N] [--out DIR]
//   observer constants <config> [--out DIR]
//   observer ode-check [--tuples N] [--seed S]

#include <iostream>

#include <CLI11.hpp>

#include "observer/runner.hpp"
#include "observer/scalar_ode.hpp"

using namespace observer;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir, bool expect_stable) {
  const ScenarioConfig cfg = load_config(config_path);
  const RunArtifacts art = run_scenario(cfg, out_dir);
  if (art.summary.blowup) {
    std::cout << "blow-up at t = " << art.summary.t_blowup << "\n";
  } else {
    std::cout << "stable run: mu_hat = " << art.summary.mu_hat
              << ", rho_hat = " << art.summary.rho_hat << "\n";
  }
  std::cout << "artifacts in " << art.out_dir.string() << "\n";
  return expect_stable && art.summary.blowup ? 1 : 0;
}

int cmd_sweep(const std::string& config_path, const std::string& s_list,
              const std::string& lambda_list, int jobs, const std::string& out_dir) {
  const ScenarioConfig base = load_config(config_path);
  std::vector<int> s_values;
  std::vector<double> lam_values;
  {
    std::stringstream ss(s_list);
    for (std::string item; std::getline(ss, item, ',');)
      s_values.push_back(std::stoi(item));
    std::stringstream sl(lambda_list);
    for (std::string item; std::getline(sl, item, ',');)
      lam_values.push_back(std::stod(item));
  }
  const auto rows = run_sweep(base, s_values, lam_values, out_dir, jobs);
  std::cout << sweep_monotonicity_report(rows);
  std::cout << "sweep table: " << (std::filesystem::path(out_dir) / "sweep.csv").string()
            << "\n";
  return 0;
}

int cmd_constants(const std::string& config_path, const std::string& out_dir) {
  const ScenarioConfig cfg = load_config(config_path);
  write_constants_report(cfg, out_dir);
  std::cout << "constants.json and injection.json in " << out_dir << "\n";
  return 0;
}

int cmd_ode_check(int tuples, uint64_t seed) {
  const CertResult lin = certify_linear(tuples, seed);
  const CertResult non = certify_nonlinear(tuples, seed + 1);
  std::cout << "linear bound:    " << lin.runs << " tuples, " << lin.violations
            << " violations, worst relative excess " << lin.worst << "\n";
  std::cout << "nonlinear bound: " << non.runs << " tuples, " << non.violations
            << " violations, worst relative excess " << non.worst << "\n";
  return (lin.violations == 0 && non.violations == 0) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oblique-projection dynamical observer experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  bool expect_stable = false;
  auto* run = app.add_subcommand("run", "integrate one scenario");
  run->add_option("config", config_path, "config file or preset name")->required();
  run->add_flag("--expect-stable", expect_stable, "exit nonzero on blow-up");
  run->add_option("--out", out_dir, "output directory");

  std::string s_list, lambda_list;
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "grid of (S_sigma, lambda) runs");
  sweep->add_option("config", config_path, "base config or preset")->required();
  sweep->add_option("--S-list", s_list, "comma list of S_sigma values")->required();
  sweep->add_option("--lambda-list", lambda_list, "comma list of lambdas")->required();
  sweep->add_option("--jobs", jobs, "concurrent runs");
  sweep->add_option("--out", out_dir, "output directory");

  auto* constants = app.add_subcommand("constants", "beta / alpha / norm report");
  constants->add_option("config", config_path, "config file or preset")->required();
  constants->add_option("--out", out_dir, "output directory");

  int tuples = 200;
  uint64_t seed = 20240617;
  auto* ode = app.add_subcommand("ode-check", "scalar-ODE certification suite");
  ode->add_option("--tuples", tuples, "random tuples per proposition");
  ode->add_option("--seed", seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, expect_stable);
    if (sweep->parsed()) return cmd_sweep(config_path, s_list, lambda_list, jobs, out_dir);
    if (constants->parsed()) return cmd_constants(config_path, out_dir);
    if (ode->parsed()) return cmd_ode_check(tuples, seed);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
