#pragma once

#include <functional>
#include <optional>

#include "observer/expr.hpp"
#include "observer/injection.hpp"

namespace observer {

/// Coefficient bundle of the semilinear equation
///   dz/dt + A z + a z + b.grad z + at*|z|^(r-1) z + (bt.grad z)|z|^(s-1) z = f.
struct Coefficients {
  Expr a;
  std::array<Expr, 2> b;
  Expr a_tilde;
  std::array<Expr, 2> b_tilde;
  Expr f;
  double r_exp = 2.0;  // > 1
  double s_exp = 1.0;  // >= 1
};

struct SimState {
  double t = 0.0;
  Vector current;
  Vector previous;
  long step_index = 0;
};

struct NormSample {
  double t = 0.0;
  double norm_v = 0.0;
  double norm_h = 0.0;
  double inj_norm_h = 0.0;
};

struct RunSummary {
  bool blowup = false;
  double t_blowup = std::numeric_limits<double>::quiet_NaN();
  double mu_hat = std::numeric_limits<double>::quiet_NaN();
  double rho_hat = std::numeric_limits<double>::quiet_NaN();
  double inj_norm_t0 = 0.0;
  std::vector<NormSample> series;
  // Persistent-boundedness witnesses (populated for plant trajectories).
  double sup_norm_v = 0.0;
  double sup_window_l2_da = 0.0;
  double window_tau = 0.0;
};

/// Galerkin matrix of u -> a(.,t) u + b(.,t).grad u (fresh assembly; the
/// stepper keeps its own cached buffers for the hot loop).
SparseMatrix assemble_reaction_convection(const Coefficients& coeffs,
                                          const FemSpace& space, double t,
                                          Exec exec = Exec::Parallel);

/// Load vector of the nonlinearity at the current state.
Vector nonlinear_rhs(const Coefficients& coeffs, const FemSpace& space,
                     const SimState& state, Exec exec = Exec::Parallel);

bool detect_blowup(const FemSpace& space, const Vector& u, double norm_v0);

struct FitResult {
  double mu_hat = 0.0;
  double rho_hat = 0.0;
};
/// Least-squares exponential rate on (t, log norm_v) over [t_start, end];
/// rho_hat maximizes norm(t) e^{mu(t-s)} / norm(s) over a decimated pair grid.
FitResult fit_decay(const std::vector<NormSample>& series, double t_start);

/// Crank-Nicolson on A + a(t), Adams-Bashforth 2 on convection, nonlinearity,
/// injection and forcing. The first step bootstraps with R(t_-1) := R(t_0).
class Stepper {
 public:
  struct Options {
    double dt = 1e-4;
    Exec exec = Exec::Parallel;
    /// Output residual fed to the injection at time t_j, given the state;
    /// unset means no injection term even if `inj` is present.
    std::function<Vector(double t, const Vector& u)> injection_residual;
    const InjectionOperator* inj = nullptr;
    /// Extra discrete load added to the right-hand side (manufactured runs).
    std::function<Vector(double t)> discrete_forcing;
    bool use_expression_forcing = true;  // assemble f from coeffs.f
  };

  Stepper(FemSpacePtr space, Coefficients coeffs, Options opts);

  const FemSpace& space() const { return *space_; }
  double dt() const { return opts_.dt; }

  SimState start(const Vector& u0) const;
  void step(SimState& state);

  /// H-norm of the injected field at the state's time (0 without injection).
  double injection_norm(const SimState& state) const;

 private:
  FemSpacePtr space_;
  Coefficients coeffs_;
  Options opts_;

  // Cached per-step machinery.
  Eigen::SimplicialLLT<SparseMatrix> lhs_llt_;
  bool lhs_ready_ = false;
  bool a_static_ = false;      // a has no time dependence: factor LHS once
  SparseMatrix ma_next_;       // a-weighted mass at t_{j+1}
  SparseMatrix ma_curr_;       // a-weighted mass at t_j
  Vector r_prev_;              // R(t_{j-1}, u_{j-1})
  bool have_r_prev_ = false;
  std::vector<double> buf_a_, buf_b1_, buf_b2_, buf_at_, buf_bt1_, buf_bt2_, buf_f_;
  bool bt_static_ = false, b_static_ = false, at_static_ = false, f_static_ = false;

  void eval_at(const Expr& e, double t, std::vector<double>& buf) const;
  SparseMatrix weighted_mass_at(double t);
  Vector rhs_terms(double t, const Vector& u);  // R(t, u)
};

/// Error-system integration: dz/dt + A z + A_rc z + N(z) = I Z z.
RunSummary simulate_error(FemSpacePtr space, const Coefficients& coeffs,
                          const InjectionOperator* inj, const Vector& z0,
                          double dt, double t_end, int output_stride,
                          double fit_start, Exec exec = Exec::Parallel);

/// Coupled plant/observer integration sharing only the measurement vector.
/// Returns (plant trajectory summary, error trajectory summary).
std::pair<RunSummary, RunSummary> simulate_plant_observer(
    FemSpacePtr space, const Coefficients& coeffs, const InjectionOperator& inj,
    const Vector& y0, const Vector& yhat0, double dt, double t_end,
    int output_stride, double fit_start, Exec exec = Exec::Parallel);

}  // namespace observer
