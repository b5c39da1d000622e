#pragma once

#include <filesystem>
#include <optional>

#include "observer/config.hpp"

namespace observer {

struct RunArtifacts {
  RunSummary summary;                 // error trajectory
  std::optional<RunSummary> plant;    // coupled mode only
  std::filesystem::path out_dir;
};

/// Build the full chain (grid -> sensors -> aux family -> projections ->
/// injection), integrate, and write run.csv / summary.json / sensors.json /
/// plot.gp under out_dir.
RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                          Exec exec = Exec::Parallel);

struct SweepRow {
  int s_sigma = 0;
  double lambda = 0.0;
  RunSummary summary;
};

/// Cartesian sweep over sensor counts (S_sigma values, d-th roots must be
/// integral) and lambdas; per-run artifacts in isolated subdirectories,
/// aggregated rows in sweep.csv. Runs execute concurrently up to `jobs`.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base,
                                const std::vector<int>& s_sigma_list,
                                const std::vector<double>& lambda_list,
                                const std::filesystem::path& out_dir, int jobs);

/// Flags (does not assert) whether mu_hat grows with lambda at fixed S and
/// with S at fixed lambda.
std::string sweep_monotonicity_report(const std::vector<SweepRow>& rows);

/// beta / alpha constants and Gram condition numbers -> constants.json, plus
/// the injection norm report -> injection.json.
void write_constants_report(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                            Exec exec = Exec::Parallel);

// Shared serialization helpers (also used by tests).
void write_run_csv(const std::filesystem::path& path, const std::vector<NormSample>& series);
std::vector<NormSample> read_run_csv(const std::filesystem::path& path);
void write_summary_json(const std::filesystem::path& path, const RunSummary& summary,
                        const ScenarioConfig& cfg);
void write_sensors_json(const std::filesystem::path& path, const SensorLayout& layout);

/// Initial condition fields for a config (error mode: z0 normalized to unit
/// V-norm; coupled mode: y0 / yhat0 as given).
Vector initial_error_field(const ScenarioConfig& cfg, const FemSpace& space);

}  // namespace observer
