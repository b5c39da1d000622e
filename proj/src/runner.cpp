#include "observer/runner.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace observer {

namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

Vector field_from_expr(const ScenarioConfig& cfg, const FemSpace& space,
                       const std::string& src) {
  const Expr e = Expr::parse(src);
  return space.project_field([&](double x1, double x2) { return e(x1, x2, 0.0); });
}

struct Chain {
  FemSpacePtr space;
  SensorLayout layout;
  std::optional<OutputOperator> output;
  std::optional<AuxFamily> aux;
  std::optional<InjectionOperator> injection;
};

Chain build_chain(const ScenarioConfig& cfg, Exec exec, bool want_injection) {
  Chain chain;
  chain.space = assemble(build_grid(cfg.domain(), cfg.nodes_per_dim, cfg.bc), cfg.nu, exec);
  chain.layout = cfg.layout();
  chain.output.emplace(chain.layout, chain.space, exec);
  if (want_injection) {
    chain.aux = build_aux_family(cfg.aux_kind, chain.layout, chain.space);
    chain.injection.emplace(cfg.lambda, cfg.ell,
                            ObliqueProjector(*chain.output, *chain.aux));
  }
  return chain;
}

void write_plot_script(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "set datafile separator ','\n"
         "set logscale y\n"
         "set xlabel 't'\n"
         "set ylabel '|z|_V'\n"
         "plot 'run.csv' using 1:2 with lines title 'V norm', \\\n"
         "     'run.csv' using 1:3 with lines title 'H norm'\n";
}

}  // namespace

Vector initial_error_field(const ScenarioConfig& cfg, const FemSpace& space) {
  Vector z0 = field_from_expr(cfg, space, cfg.z0_src);
  const double nv = space.norm_v(z0);
  if (!(nv > 0.0)) throw ConfigError("z0 projects to the zero field");
  return z0 / nv;
}

void write_run_csv(const std::filesystem::path& path, const std::vector<NormSample>& series) {
  std::ofstream out(path, std::ios::binary);
  out << "t,norm_V,norm_H,inj_norm_H\n";
  for (const auto& s : series)
    out << fmt17(s.t) << ',' << fmt17(s.norm_v) << ',' << fmt17(s.norm_h) << ','
        << fmt17(s.inj_norm_h) << '\n';
}

std::vector<NormSample> read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<NormSample> series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    NormSample s;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &s.t, &s.norm_v, &s.norm_h,
                    &s.inj_norm_h) == 4)
      series.push_back(s);
  }
  return series;
}

void write_summary_json(const std::filesystem::path& path, const RunSummary& summary,
                        const ScenarioConfig& cfg) {
  json j;
  j["blowup"] = summary.blowup;
  j["t_blowup"] = summary.blowup ? json(summary.t_blowup) : json(nullptr);
  j["mu_hat"] = summary.blowup ? json(nullptr) : number_or_null(summary.mu_hat);
  j["rho_hat"] = summary.blowup ? json(nullptr) : number_or_null(summary.rho_hat);
  j["inj_norm_t0"] = summary.inj_norm_t0;
  j["S_sigma"] = cfg.s_sigma();
  j["lambda"] = cfg.lambda;
  j["ell"] = cfg.ell;
  j["nodes_per_dim"] = cfg.nodes_per_dim;
  j["dt"] = cfg.dt;
  std::ofstream(path) << j.dump(2) << '\n';
}

void write_sensors_json(const std::filesystem::path& path, const SensorLayout& layout) {
  json arr = json::array();
  for (int i = 0; i < layout.count(); ++i) {
    json item;
    item["index"] = i;
    json lower = json::array(), widths = json::array();
    for (int j = 0; j < layout.domain.dim; ++j) {
      lower.push_back(layout.regions[i].lower[j]);
      widths.push_back(layout.regions[i].widths[j]);
    }
    item["lower_corner"] = lower;
    item["widths"] = widths;
    arr.push_back(item);
  }
  std::ofstream(path) << arr.dump(2) << '\n';
}

RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                          Exec exec) {
  std::filesystem::create_directories(out_dir);
  const bool with_injection = cfg.lambda > 0.0;
  Chain chain = build_chain(cfg, exec, with_injection);

  RunArtifacts art;
  art.out_dir = out_dir;
  if (cfg.mode == RunMode::Error) {
    const Vector z0 = initial_error_field(cfg, *chain.space);
    art.summary = simulate_error(chain.space, cfg.coeffs,
                                 with_injection ? &*chain.injection : nullptr, z0,
                                 cfg.dt, cfg.t_end, cfg.output_stride,
                                 cfg.fit_start, exec);
  } else {
    if (!with_injection)
      throw ConfigError("coupled mode requires lambda > 0");
    const Vector y0 = field_from_expr(cfg, *chain.space, cfg.y0_src);
    const Vector yhat0 = field_from_expr(cfg, *chain.space, cfg.yhat0_src);
    auto [plant, error] = simulate_plant_observer(
        chain.space, cfg.coeffs, *chain.injection, y0, yhat0, cfg.dt, cfg.t_end,
        cfg.output_stride, cfg.fit_start, exec);
    art.summary = std::move(error);
    art.plant = std::move(plant);
  }

  write_run_csv(out_dir / "run.csv", art.summary.series);
  write_summary_json(out_dir / "summary.json", art.summary, cfg);
  write_sensors_json(out_dir / "sensors.json", chain.layout);
  write_plot_script(out_dir / "plot.gp");
  if (art.plant) write_run_csv(out_dir / "plant.csv", art.plant->series);
  return art;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& base,
                                const std::vector<int>& s_sigma_list,
                                const std::vector<double>& lambda_list,
                                const std::filesystem::path& out_dir, int jobs) {
  struct Task {
    ScenarioConfig cfg;
    int s_sigma;
    double lambda;
    std::filesystem::path dir;
  };
  std::vector<Task> tasks;
  for (int ss : s_sigma_list)
    for (double lam : lambda_list) {
      Task t;
      t.cfg = base;
      const int per_dim =
          base.dim == 1 ? ss : static_cast<int>(std::llround(std::sqrt(double(ss))));
      if ((base.dim == 1 ? per_dim : per_dim * per_dim) != ss)
        throw ConfigError("sweep: S_sigma " + std::to_string(ss) +
                          " is not a d-th power of a sensor-per-dimension count");
      t.cfg.sensors_S = per_dim;
      t.cfg.lambda = lam;
      t.s_sigma = ss;
      t.lambda = lam;
      char sub[64];
      std::snprintf(sub, sizeof(sub), "S%d_lam%g", ss, lam);
      t.dir = out_dir / sub;
      tasks.push_back(std::move(t));
    }

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<size_t> next{0};
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  const Exec exec = n_workers > 1 ? Exec::Serial : Exec::Parallel;
  auto worker = [&] {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= tasks.size()) return;
      const RunArtifacts art = run_scenario(tasks[k].cfg, tasks[k].dir, exec);
      rows[k] = SweepRow{tasks[k].s_sigma, tasks[k].lambda, art.summary};
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "sweep.csv", std::ios::binary);
  csv << "S_sigma,lambda,blowup,t_blowup,mu_hat,rho_hat,inj_norm_t0\n";
  for (const auto& row : rows) {
    csv << row.s_sigma << ',' << fmt17(row.lambda) << ',' << (row.summary.blowup ? 1 : 0)
        << ',' << (row.summary.blowup ? fmt17(row.summary.t_blowup) : "")
        << ',' << (row.summary.blowup ? "" : fmt17(row.summary.mu_hat))
        << ',' << (row.summary.blowup ? "" : fmt17(row.summary.rho_hat))
        << ',' << fmt17(row.summary.inj_norm_t0) << '\n';
  }
  return rows;
}

std::string sweep_monotonicity_report(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  auto mu_of = [&](int ss, double lam) -> std::optional<double> {
    for (const auto& r : rows)
      if (r.s_sigma == ss && r.lambda == lam && !r.summary.blowup)
        return r.summary.mu_hat;
    return std::nullopt;
  };
  std::set<int> s_values;
  std::set<double> lam_values;
  for (const auto& r : rows) {
    s_values.insert(r.s_sigma);
    lam_values.insert(r.lambda);
  }
  for (int ss : s_values) {
    std::optional<double> prev;
    double prev_lam = 0.0;
    for (double lam : lam_values) {
      const auto mu = mu_of(ss, lam);
      if (prev && mu)
        out << "S_sigma=" << ss << ": mu_hat " << (*mu >= *prev ? "grew" : "DID NOT grow")
            << " from lambda=" << prev_lam << " to " << lam << "\n";
      if (mu) {
        prev = mu;
        prev_lam = lam;
      }
    }
  }
  for (double lam : lam_values) {
    std::optional<double> prev;
    int prev_s = 0;
    for (int ss : s_values) {
      const auto mu = mu_of(ss, lam);
      if (prev && mu)
        out << "lambda=" << lam << ": mu_hat " << (*mu >= *prev ? "grew" : "DID NOT grow")
            << " from S_sigma=" << prev_s << " to " << ss << "\n";
      if (mu) {
        prev = mu;
        prev_s = ss;
      }
    }
  }
  return out.str();
}

void write_constants_report(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                            Exec exec) {
  std::filesystem::create_directories(out_dir);
  Chain chain = build_chain(cfg, exec, true);

  json j;
  j["S"] = cfg.sensors_S;
  j["beta"] = poincare_beta(*chain.output, *chain.space);
  j["alpha_l0"] = poincare_alpha(*chain.aux, *chain.space, 0.0);
  j["alpha_l1"] = poincare_alpha(*chain.aux, *chain.space, 1.0);
  j["alpha_l2"] = poincare_alpha(*chain.aux, *chain.space, 2.0);
  {
    ObliqueProjector proj(*chain.output, *chain.aux);
    Eigen::JacobiSVD<Matrix> svd(chain.aux->gram_h);
    json conds;
    conds["vandermonde"] = chain.output->vandermonde_condition();
    conds["cross_gram"] = proj.cross_gram_condition();
    conds["aux_gram_h"] =
        svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    j["gram_condition_numbers"] = conds;
  }
  std::ofstream(out_dir / "constants.json") << j.dump(2) << '\n';

  const auto rep = chain.injection->operator_norm_report();
  json ji;
  ji["lambda"] = rep.lambda;
  ji["ell"] = rep.ell;
  ji["computed_norm"] = rep.computed_norm;
  ji["norm_Z"] = rep.norm_Z;
  ji["c_tilde"] = rep.c_tilde;
  ji["factored_bound"] = rep.factored_bound;
  ji["factors"] = {
      {"embed_low", rep.factor_embed_low},
      {"proj_sensors", rep.factor_proj_sensors},
      {"embed_aux", rep.factor_embed_aux},
      {"proj_aux", rep.factor_proj_aux},
  };
  ji["continuum_embedding_norms"] = 1.0;  // the section-3.3 idealization
  std::ofstream(out_dir / "injection.json") << ji.dump(2) << '\n';
}

}  // namespace observer
