#pragma once

#include <cstdint>
#include <vector>

#include "observer/types.hpp"

namespace observer {

/// Inputs of the scalar-ODE stability thresholds.
struct OdeBoundInputs {
  double T = 1.0;       // window length
  double C_h = 1.0;     // sup of window L^r norms of h
  double r_frak = 2.0;  // > 1
  double mu = 1.0;      // target rate > 0
  double rho = 2.0;     // transient bound > 1
  double p = 1.0;       // nonlinearity power
  double R = 1.0;       // initial-norm bound
  double c = 2.0;       // contraction margin > 1
};

struct MaxPoly {
  double tau_star = 0.0;
  double max_value = 0.0;
};

/// Closed-form maximizer of g(tau) = -eta1 tau + eta2 tau^s over tau >= 0.
MaxPoly maxpoly(double eta1, double eta2, double s_frak);

/// Threshold for dv/dt = -(mu_bar - |h|) v to be exponentially stable with
/// rate -mu and transient bound rho.
double mu_bar_linear(const OdeBoundInputs& in);

struct Mu0Result {
  double mu0 = 0.0;
  double mu_bar_star = 0.0;
};
/// Rate -mu0 and threshold for dw/dt = -(mu_bar - |h|(1+|w|^p)) w, |w0| < R.
Mu0Result mu0_nonlinear(const OdeBoundInputs& in);

/// Nonnegative piecewise-constant h, periodic with period T over equal slots,
/// so every window of length T has exactly the same L^r integral (the sup of
/// window norms is exact, not sampled).
struct PiecewiseH {
  double period = 1.0;
  std::vector<double> values;

  double at(double t) const {
    const double tau = t - period * std::floor(t / period);
    const double slot = period / static_cast<double>(values.size());
    size_t k = static_cast<size_t>(tau / slot);
    if (k >= values.size()) k = values.size() - 1;
    return values[k];
  }
  double window_lr_norm(double r) const {
    const double slot = period / static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += std::pow(v, r) * slot;
    return std::pow(acc, 1.0 / r);
  }
  std::vector<double> breakpoints(double t_end) const;
};

/// Random periodic pattern rescaled so the window L^r norm equals C_h exactly.
PiecewiseH make_periodic_h(double T, double C_h, double r_frak, int slots,
                           uint64_t seed);

struct OdeSeries {
  std::vector<double> t;
  std::vector<double> w;
  bool overflow = false;
};

/// RK4 on dw/dt = -(mu_bar - h(t)(1+|w|^p)) w with steps aligned to the
/// discontinuities of h and per-step doubling control at 1e-10.
OdeSeries integrate_scalar(double mu_bar, double p, const PiecewiseH& h,
                           double w0, double dt, double t_end);

/// Worst relative violation of |w(t)| <= rho e^{-mu (t-s)} |w(s)| over a
/// decimated pair grid; <= 0 means the envelope holds everywhere sampled.
double envelope_violation(const OdeSeries& series, double mu, double rho);

struct CertResult {
  int runs = 0;
  int violations = 0;
  double worst = 0.0;  // largest relative violation observed
};

/// Monte-Carlo certification of the two propositions under their computed
/// thresholds; tolerance is the integrator allowance.
CertResult certify_linear(int n_tuples, uint64_t seed, double tol = 1e-7);
CertResult certify_nonlinear(int n_tuples, uint64_t seed, double tol = 1e-7);

}  // namespace observer
