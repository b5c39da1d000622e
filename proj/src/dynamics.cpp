#include "observer/dynamics.hpp"

#include <cmath>

namespace observer {

namespace {

constexpr double kBlowupFactor = 1e6;

bool expr_is_zero(const Expr& e) {
  return !e.valid() || (e.is_constant() && e.constant_value() == 0.0);
}

}  // namespace

SparseMatrix assemble_reaction_convection(const Coefficients& coeffs,
                                          const FemSpace& space, double t, Exec exec) {
  const ElementKernels& kk = space.kernels();
  const Eigen::Index nq = kk.qpoints().rows();
  std::vector<double> a_q(nq), b1_q(nq), b2_q(nq, 0.0);
  if (coeffs.a.valid()) coeffs.a.eval_batch(kk.qpoints(), t, a_q.data());
  else std::fill(a_q.begin(), a_q.end(), 0.0);
  if (coeffs.b[0].valid()) coeffs.b[0].eval_batch(kk.qpoints(), t, b1_q.data());
  else std::fill(b1_q.begin(), b1_q.end(), 0.0);
  if (space.grid().dim() == 2 && coeffs.b[1].valid())
    coeffs.b[1].eval_batch(kk.qpoints(), t, b2_q.data());

  SparseMatrix out = kk.make_matrix();
  kk.add_weighted_mass(a_q, 1.0, out, exec);
  kk.add_convection(b1_q, b2_q, 1.0, out, exec);
  return out;
}

Vector nonlinear_rhs(const Coefficients& coeffs, const FemSpace& space,
                     const SimState& state, Exec exec) {
  const ElementKernels& kk = space.kernels();
  const Eigen::Index nq = kk.qpoints().rows();
  std::vector<double> at_q(nq, 0.0), bt1_q(nq, 0.0), bt2_q(nq, 0.0);
  if (coeffs.a_tilde.valid()) coeffs.a_tilde.eval_batch(kk.qpoints(), state.t, at_q.data());
  if (coeffs.b_tilde[0].valid())
    coeffs.b_tilde[0].eval_batch(kk.qpoints(), state.t, bt1_q.data());
  if (space.grid().dim() == 2 && coeffs.b_tilde[1].valid())
    coeffs.b_tilde[1].eval_batch(kk.qpoints(), state.t, bt2_q.data());
  return kk.nonlinear_load(state.current, at_q, bt1_q, bt2_q, coeffs.r_exp,
                           coeffs.s_exp, exec);
}

bool detect_blowup(const FemSpace& space, const Vector& u, double norm_v0) {
  if (!u.allFinite()) return true;
  return space.norm_v(u) > kBlowupFactor * norm_v0;
}

FitResult fit_decay(const std::vector<NormSample>& series, double t_start) {
  std::vector<std::pair<double, double>> pts;  // (t, log norm_v)
  for (const auto& s : series)
    if (s.t >= t_start && std::isfinite(s.norm_v) && s.norm_v > 0.0)
      pts.emplace_back(s.t, std::log(s.norm_v));
  if (pts.size() < 10)
    throw std::invalid_argument("fit_decay: fewer than 10 usable points");

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (const auto& [t, y] : pts) {
    st += t; sy += y; stt += t * t; sty += t * y;
  }
  const double n = static_cast<double>(pts.size());
  const double slope = (n * sty - st * sy) / (n * stt - st * st);

  FitResult fit;
  fit.mu_hat = -slope;

  // Transient bound over a decimated (t, s) pair grid of the full series.
  std::vector<std::pair<double, double>> all;
  for (const auto& s : series)
    if (std::isfinite(s.norm_v) && s.norm_v > 0.0) all.emplace_back(s.t, s.norm_v);
  const size_t stride = std::max<size_t>(1, all.size() / 400);
  double rho = 0.0;
  for (size_t i = 0; i < all.size(); i += stride)
    for (size_t j = i; j < all.size(); j += stride) {
      const double ratio =
          all[j].second * std::exp(fit.mu_hat * (all[j].first - all[i].first)) /
          all[i].second;
      rho = std::max(rho, ratio);
    }
  fit.rho_hat = rho;
  return fit;
}

Stepper::Stepper(FemSpacePtr space, Coefficients coeffs, Options opts)
    : space_(std::move(space)), coeffs_(std::move(coeffs)), opts_(std::move(opts)) {
  const ElementKernels& kk = space_->kernels();
  const size_t nq = static_cast<size_t>(kk.qpoints().rows());
  buf_a_.assign(nq, 0.0);
  buf_b1_.assign(nq, 0.0);
  buf_b2_.assign(nq, 0.0);
  buf_at_.assign(nq, 0.0);
  buf_bt1_.assign(nq, 0.0);
  buf_bt2_.assign(nq, 0.0);
  buf_f_.assign(nq, 0.0);

  a_static_ = !coeffs_.a.valid() || !coeffs_.a.uses_time();
  b_static_ = (!coeffs_.b[0].valid() || !coeffs_.b[0].uses_time()) &&
              (!coeffs_.b[1].valid() || !coeffs_.b[1].uses_time());
  at_static_ = !coeffs_.a_tilde.valid() || !coeffs_.a_tilde.uses_time();
  bt_static_ = (!coeffs_.b_tilde[0].valid() || !coeffs_.b_tilde[0].uses_time()) &&
               (!coeffs_.b_tilde[1].valid() || !coeffs_.b_tilde[1].uses_time());
  f_static_ = !coeffs_.f.valid() || !coeffs_.f.uses_time();

  ma_curr_ = weighted_mass_at(0.0);
  ma_next_ = ma_curr_;
  if (a_static_) {
    SparseMatrix lhs = space_->a_full();
    lhs.coeffs() = space_->mass().coeffs() / opts_.dt + 0.5 * space_->a_full().coeffs() +
                   0.5 * ma_curr_.coeffs();
    lhs_llt_.compute(lhs);
    if (lhs_llt_.info() != Eigen::Success)
      throw std::runtime_error("Stepper: LHS factorization failed");
    lhs_ready_ = true;
  }
}

void Stepper::eval_at(const Expr& e, double t, std::vector<double>& buf) const {
  if (!e.valid()) {
    std::fill(buf.begin(), buf.end(), 0.0);
    return;
  }
  e.eval_batch(space_->kernels().qpoints(), t, buf.data());
}

SparseMatrix Stepper::weighted_mass_at(double t) {
  eval_at(coeffs_.a, t, buf_a_);
  SparseMatrix out = space_->kernels().make_matrix();
  space_->kernels().add_weighted_mass(buf_a_, 1.0, out, opts_.exec);
  return out;
}

Vector Stepper::rhs_terms(double t, const Vector& u) {
  const ElementKernels& kk = space_->kernels();
  Vector r = Vector::Zero(space_->n_dofs());

  // Convection load C(t) u.
  if (!expr_is_zero(coeffs_.b[0]) || !expr_is_zero(coeffs_.b[1])) {
    eval_at(coeffs_.b[0], t, buf_b1_);
    eval_at(coeffs_.b[1], t, buf_b2_);
    SparseMatrix C = kk.make_matrix();
    kk.add_convection(buf_b1_, buf_b2_, 1.0, C, opts_.exec);
    r += C * u;
  }

  // Nonlinearity load.
  if (!expr_is_zero(coeffs_.a_tilde) || !expr_is_zero(coeffs_.b_tilde[0]) ||
      !expr_is_zero(coeffs_.b_tilde[1])) {
    eval_at(coeffs_.a_tilde, t, buf_at_);
    eval_at(coeffs_.b_tilde[0], t, buf_bt1_);
    eval_at(coeffs_.b_tilde[1], t, buf_bt2_);
    r += kk.nonlinear_load(u, buf_at_, buf_bt1_, buf_bt2_, coeffs_.r_exp,
                           coeffs_.s_exp, opts_.exec);
  }

  // Output injection (enters the dynamics with a plus sign, so R subtracts it).
  if (opts_.inj && opts_.injection_residual)
    r -= opts_.inj->apply_load(opts_.injection_residual(t, u));

  // Forcing.
  if (opts_.use_expression_forcing && !expr_is_zero(coeffs_.f)) {
    eval_at(coeffs_.f, t, buf_f_);
    r -= kk.load(buf_f_, opts_.exec);
  }
  if (opts_.discrete_forcing) r -= opts_.discrete_forcing(t);
  return r;
}

SimState Stepper::start(const Vector& u0) const {
  SimState s;
  s.t = 0.0;
  s.current = u0;
  s.previous = u0;
  s.step_index = 0;
  return s;
}

void Stepper::step(SimState& state) {
  const double t0 = state.t;
  const double t1 = t0 + opts_.dt;
  const SparseMatrix& M = space_->mass();
  const SparseMatrix& A = space_->a_full();

  Vector r_now = rhs_terms(t0, state.current);
  if (!have_r_prev_) {
    r_prev_ = r_now;  // bootstrap: R(t_-1) := R(t_0), explicit Euler on R
    have_r_prev_ = true;
  }

  if (!a_static_) {
    ma_next_ = weighted_mass_at(t1);
    SparseMatrix lhs = A;
    lhs.coeffs() =
        M.coeffs() / opts_.dt + 0.5 * A.coeffs() + 0.5 * ma_next_.coeffs();
    if (!lhs_ready_) {
      lhs_llt_.analyzePattern(lhs);
      lhs_ready_ = true;
    }
    lhs_llt_.factorize(lhs);
    if (lhs_llt_.info() != Eigen::Success)
      throw std::runtime_error("Stepper: LHS factorization failed at t = " +
                               std::to_string(t1));
  }

  Vector rhs = M * (state.current / opts_.dt) -
               0.5 * (A * state.current + ma_curr_ * state.current) -
               0.5 * (3.0 * r_now - r_prev_);
  Vector next = lhs_llt_.solve(rhs);

  state.previous = std::move(state.current);
  state.current = std::move(next);
  state.t = t1;
  ++state.step_index;
  if (!a_static_) ma_curr_.coeffs() = ma_next_.coeffs();
  r_prev_ = std::move(r_now);
}

double Stepper::injection_norm(const SimState& state) const {
  if (!opts_.inj || !opts_.injection_residual) return 0.0;
  return opts_.inj->field_norm_h(opts_.injection_residual(state.t, state.current));
}

namespace {

struct SeriesRecorder {
  const FemSpace& space;
  const Stepper& stepper;
  RunSummary& summary;

  void record(const SimState& s) {
    NormSample sample;
    sample.t = s.t;
    sample.norm_v = space.norm_v(s.current);
    sample.norm_h = space.norm_h(s.current);
    sample.inj_norm_h = stepper.injection_norm(s);
    summary.series.push_back(sample);
  }
};

}  // namespace

RunSummary simulate_error(FemSpacePtr space, const Coefficients& coeffs,
                          const InjectionOperator* inj, const Vector& z0,
                          double dt, double t_end, int output_stride,
                          double fit_start, Exec exec) {
  Stepper::Options opts;
  opts.dt = dt;
  opts.exec = exec;
  opts.use_expression_forcing = false;  // the error system carries no forcing
  if (inj) {
    opts.inj = inj;
    const OutputOperator& sensing = inj->projector().sensing();
    opts.injection_residual = [&sensing](double, const Vector& u) {
      return sensing.measure(u);
    };
  }
  Stepper stepper(space, coeffs, std::move(opts));
  SimState state = stepper.start(z0);
  const double norm_v0 = space->norm_v(z0);

  RunSummary summary;
  SeriesRecorder rec{*space, stepper, summary};
  rec.record(state);
  summary.inj_norm_t0 = stepper.injection_norm(state);

  const long n_steps = std::lround(t_end / dt);
  for (long j = 0; j < n_steps; ++j) {
    stepper.step(state);
    if (detect_blowup(*space, state.current, norm_v0)) {
      summary.blowup = true;
      summary.t_blowup = state.t;
      break;
    }
    if ((j + 1) % output_stride == 0 || j + 1 == n_steps) rec.record(state);
  }
  if (!summary.blowup) {
    try {
      const FitResult fit = fit_decay(summary.series, fit_start);
      summary.mu_hat = fit.mu_hat;
      summary.rho_hat = fit.rho_hat;
    } catch (const std::invalid_argument&) {
      // Vanishing or too-short tail (e.g. an exact-start observer run):
      // leave the fit unset rather than failing the run.
    }
  }
  return summary;
}

std::pair<RunSummary, RunSummary> simulate_plant_observer(
    FemSpacePtr space, const Coefficients& coeffs, const InjectionOperator& inj,
    const Vector& y0, const Vector& yhat0, double dt, double t_end,
    int output_stride, double fit_start, Exec exec) {
  const OutputOperator& sensing = inj.projector().sensing();

  Stepper::Options plant_opts;
  plant_opts.dt = dt;
  plant_opts.exec = exec;
  Stepper plant(space, coeffs, std::move(plant_opts));

  Vector w_shared = Vector::Zero(sensing.count());
  Stepper::Options obs_opts;
  obs_opts.dt = dt;
  obs_opts.exec = exec;
  obs_opts.inj = &inj;
  obs_opts.injection_residual = [&sensing, &w_shared](double, const Vector& u) -> Vector {
    return sensing.measure(u) - w_shared;
  };
  Stepper obs(space, coeffs, std::move(obs_opts));

  SimState ys = plant.start(y0);
  SimState yhs = obs.start(yhat0);
  const double norm_y0 = std::max(space->norm_v(y0), 1e-300);
  const double norm_z0 = std::max(space->norm_v(Vector(yhat0 - y0)), 1e-300);

  RunSummary plant_summary, error_summary;
  plant_summary.window_tau = 1.0;
  std::vector<double> da_series;  // plant D(A) norms at sample times

  auto record = [&](bool force) {
    if (!force && ys.step_index % output_stride != 0) return;
    NormSample py{ys.t, space->norm_v(ys.current), space->norm_h(ys.current), 0.0};
    plant_summary.series.push_back(py);
    da_series.push_back(space->norm_da(ys.current));
    const Vector z = yhs.current - ys.current;
    NormSample pz{ys.t, space->norm_v(z), space->norm_h(z), obs.injection_norm(yhs)};
    error_summary.series.push_back(pz);
  };

  record(true);
  error_summary.inj_norm_t0 = obs.injection_norm(yhs);

  const long n_steps = std::lround(t_end / dt);
  for (long j = 0; j < n_steps; ++j) {
    w_shared = sensing.measure(ys.current);  // the only plant data the observer sees
    obs.step(yhs);
    plant.step(ys);
    const bool plant_bu = detect_blowup(*space, ys.current, norm_y0);
    const bool err_bu =
        !yhs.current.allFinite() ||
        space->norm_v(Vector(yhs.current - ys.current)) > 1e6 * norm_z0;
    if (plant_bu || err_bu) {
      (plant_bu ? plant_summary : error_summary).blowup = true;
      (plant_bu ? plant_summary : error_summary).t_blowup = ys.t;
      break;
    }
    record(j + 1 == n_steps);
  }

  // Persistent-boundedness witnesses for the plant trajectory.
  for (const auto& s : plant_summary.series)
    plant_summary.sup_norm_v = std::max(plant_summary.sup_norm_v, s.norm_v);
  const auto& ps = plant_summary.series;
  double sup_win = 0.0;
  for (size_t i = 0; i < ps.size(); ++i) {
    double acc = 0.0;
    for (size_t k = i; k + 1 < ps.size() && ps[k].t < ps[i].t + plant_summary.window_tau; ++k) {
      const double dt_k = ps[k + 1].t - ps[k].t;
      acc += 0.5 * dt_k * (da_series[k] * da_series[k] + da_series[k + 1] * da_series[k + 1]);
    }
    sup_win = std::max(sup_win, std::sqrt(acc));
  }
  plant_summary.sup_window_l2_da = sup_win;

  if (!error_summary.blowup && !plant_summary.blowup) {
    try {
      const FitResult fit = fit_decay(error_summary.series, fit_start);
      error_summary.mu_hat = fit.mu_hat;
      error_summary.rho_hat = fit.rho_hat;
    } catch (const std::invalid_argument&) {
    }
  }
  return {plant_summary, error_summary};
}

}  // namespace observer
