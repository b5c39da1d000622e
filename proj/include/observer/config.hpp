#pragma once

#include <map>
#include <string>

#include "observer/dynamics.hpp"

namespace observer {

enum class RunMode { Error, Coupled };

/// One experiment: domain, discretization, sensing/injection parameters and
/// the coefficient expressions. `sensors_S` is the per-dimension sensor count
/// (S_sigma = sensors_S^d); even values are the (2S)^d construction with
/// S = sensors_S/2.
struct ScenarioConfig {
  int dim = 2;
  std::vector<double> lengths{1.0, 1.0};
  BoundaryCondition bc = BoundaryCondition::Neumann;
  double nu = 0.1;
  double ell = 2.0;
  int sensors_S = 3;
  double lambda = 0.02;
  double cover_r = 0.25;
  AuxKind aux_kind = AuxKind::Sin2;
  int nodes_per_dim = 33;
  double dt = 1e-4;
  double t_end = 15.0;
  Coefficients coeffs;
  std::string a_src, b1_src, b2_src, a_tilde_src, b_tilde1_src, b_tilde2_src, f_src;
  std::string z0_src, y0_src, yhat0_src;
  RunMode mode = RunMode::Error;
  int output_stride = 100;
  double fit_start = 3.0;

  int s_sigma() const { return dim == 1 ? sensors_S : sensors_S * sensors_S; }
  RectDomain domain() const { return RectDomain(dim, lengths); }
  SensorLayout layout() const {
    return sensor_layout_grid(sensors_S, cover_r, domain());
  }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// key = value file with '#' comments; unknown and missing keys are errors.
/// `path` may also name a builtin preset ("preset:paper-sec5-9sensors").
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

/// Builtin presets: paper-sec5-4sensors / -9sensors / -16sensors,
/// free-dynamics. Returns the config text.
const std::map<std::string, std::string>& builtin_presets();

}  // namespace observer
