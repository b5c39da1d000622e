#include "observer/scalar_ode.hpp"

#include <cmath>
#include <random>

namespace observer {

MaxPoly maxpoly(double eta1, double eta2, double s_frak) {
  if (!(eta1 > 0.0) || !(eta2 > 0.0) || !(s_frak > 0.0 && s_frak < 1.0))
    throw std::invalid_argument("maxpoly: need eta1 > 0, eta2 > 0, s in (0,1)");
  MaxPoly out;
  out.tau_star = std::pow(s_frak * eta2, 1.0 / (1.0 - s_frak)) *
                 std::pow(eta1, 1.0 / (s_frak - 1.0));
  out.max_value = (1.0 - s_frak) * std::pow(s_frak, s_frak / (1.0 - s_frak)) *
                  std::pow(eta2, 1.0 / (1.0 - s_frak)) *
                  std::pow(eta1, s_frak / (s_frak - 1.0));
  return out;
}

namespace {

void check_common(const OdeBoundInputs& in) {
  if (!(in.T > 0.0) || !(in.C_h >= 0.0) || !(in.r_frak > 1.0) || !(in.mu > 0.0) ||
      !(in.rho > 1.0))
    throw std::invalid_argument("scalar-ode inputs: need T>0, C_h>=0, r>1, mu>0, rho>1");
}

}  // namespace

double mu_bar_linear(const OdeBoundInputs& in) {
  check_common(in);
  const double r = in.r_frak;
  const double head =
      2.0 * (r - 1.0) / r *
      std::pow(std::pow(in.C_h, r) / (r * std::log(in.rho)), 1.0 / (r - 1.0));
  return std::max(head, 2.0 * in.mu) + std::pow(in.T, -1.0 / r) * in.C_h;
}

Mu0Result mu0_nonlinear(const OdeBoundInputs& in) {
  check_common(in);
  if (!(in.p > 0.0) || !(in.R > 0.0) || !(in.c > 1.0))
    throw std::invalid_argument("mu0_nonlinear: need p>0, R>0, c>1");
  const double r = in.r_frak;
  const double term1 = in.mu;
  const double term2 = std::log(2.0) / (in.p * in.T);
  const double term3 =
      std::pow(std::pow(in.rho, 2.0 * in.p + 1.0) * std::pow(in.R, in.p) * in.C_h /
                   (std::sqrt(in.rho) - 1.0),
               r / (r - 1.0)) *
      ((r - 1.0) / r) * std::pow(2.0, 1.0 / (r - 1.0));
  const double term4 =
      std::pow(2.0, (r + 1.0) / (r - 1.0)) *
      std::pow(std::pow(in.rho, 2.0 * in.p + 0.5) * in.C_h * (in.p + 1.0) / in.p *
                   std::pow(in.R, in.p) * in.c,
               r / (r - 1.0)) *
      std::pow(in.p, 1.0 / (r - 1.0));

  Mu0Result out;
  out.mu0 = std::max({term1, term2, term3, term4});
  const double head =
      2.0 * (r - 1.0) / r *
      std::pow(2.0 * std::pow(in.C_h, r) / (r * std::log(in.rho)), 1.0 / (r - 1.0));
  out.mu_bar_star = std::max(head, 4.0 * out.mu0) + std::pow(in.T, -1.0 / r) * in.C_h;
  return out;
}

std::vector<double> PiecewiseH::breakpoints(double t_end) const {
  std::vector<double> bp{0.0};
  const double slot = period / static_cast<double>(values.size());
  for (double t = slot; t < t_end - 1e-15 * std::max(1.0, t_end); t += slot)
    bp.push_back(t);
  bp.push_back(t_end);
  return bp;
}

PiecewiseH make_periodic_h(double T, double C_h, double r_frak, int slots,
                           uint64_t seed) {
  PiecewiseH h;
  h.period = T;
  h.values.resize(slots);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double acc = 0.0;
  const double slot = T / slots;
  for (int k = 0; k < slots; ++k) {
    h.values[k] = uni(rng);
    acc += std::pow(h.values[k], r_frak) * slot;
  }
  // Every length-T window of a T-periodic pattern carries the same integral,
  // so one rescale pins the sup of window norms exactly.
  const double scale = C_h / std::pow(acc, 1.0 / r_frak);
  for (double& v : h.values) v *= scale;
  return h;
}

namespace {

double rk4_step(double w, double dt, double mu_bar, double p, double hval) {
  auto f = [&](double x) {
    return -(mu_bar - hval * (1.0 + std::pow(std::abs(x), p))) * x;
  };
  const double k1 = f(w);
  const double k2 = f(w + 0.5 * dt * k1);
  const double k3 = f(w + 0.5 * dt * k2);
  const double k4 = f(w + dt * k3);
  return w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

OdeSeries integrate_scalar(double mu_bar, double p, const PiecewiseH& h, double w0,
                           double dt, double t_end) {
  OdeSeries out;
  out.t.push_back(0.0);
  out.w.push_back(w0);
  double w = w0;
  const auto bp = h.breakpoints(t_end);
  for (size_t seg = 0; seg + 1 < bp.size(); ++seg) {
    const double a = bp[seg], b = bp[seg + 1];
    const double hval = h.at(0.5 * (a + b));
    double t = a;
    double step = std::min(dt, b - a);
    while (t < b - 1e-15 * t_end) {
      step = std::min(step, b - t);
      // Step-doubling control: accept the halved solution at local 1e-10.
      for (;;) {
        const double one = rk4_step(w, step, mu_bar, p, hval);
        const double half =
            rk4_step(rk4_step(w, 0.5 * step, mu_bar, p, hval), 0.5 * step, mu_bar, p, hval);
        if (std::abs(one - half) <= 1e-10 * std::max(1.0, std::abs(half)) ||
            step <= 1e-12 * t_end) {
          w = half;
          break;
        }
        step *= 0.5;
      }
      t += step;
      if (!std::isfinite(w) || std::abs(w) > 1e200) {
        out.overflow = true;
        out.t.push_back(t);
        out.w.push_back(w);
        return out;
      }
      out.t.push_back(t);
      out.w.push_back(w);
    }
  }
  return out;
}

double envelope_violation(const OdeSeries& series, double mu, double rho) {
  const size_t n = series.t.size();
  const size_t stride = std::max<size_t>(1, n / 300);
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; i += stride) {
    const double ws = std::abs(series.w[i]);
    if (!(ws > 1e-250)) continue;
    for (size_t j = i; j < n; j += stride) {
      const double bound = rho * std::exp(-mu * (series.t[j] - series.t[i])) * ws;
      if (!(bound > 1e-250)) continue;
      worst = std::max(worst, std::abs(series.w[j]) / bound - 1.0);
    }
  }
  return worst;
}

namespace {

OdeBoundInputs random_inputs(std::mt19937_64& rng) {
  auto uni = [&](double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  };
  OdeBoundInputs in;
  in.T = uni(0.3, 2.0);
  in.C_h = uni(0.2, 1.5);
  in.r_frak = uni(1.5, 3.0);
  in.mu = uni(0.2, 2.0);
  in.rho = uni(1.3, 3.0);
  in.p = uni(0.3, 2.0);
  in.R = uni(0.3, 2.0);
  in.c = uni(1.5, 3.0);
  return in;
}

}  // namespace

CertResult certify_linear(int n_tuples, uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  CertResult res;
  for (int k = 0; k < n_tuples; ++k) {
    OdeBoundInputs in = random_inputs(rng);
    const double mu_bar = mu_bar_linear(in);
    const PiecewiseH h = make_periodic_h(in.T, in.C_h, in.r_frak,
                                         3 + static_cast<int>(rng() % 5), rng());
    const double w0 =
        (rng() % 2 ? 1.0 : -1.0) * (0.1 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng));
    // Cap the horizon by the decay scale: past ~500/mu_bar the trajectory has
    // underflowed and pairs are skipped anyway.
    const double t_end = std::min({std::max(3.0 * in.T, 20.0 / in.mu),
                                   500.0 / std::max(1.0, mu_bar), 40.0});
    const double dt = std::min(0.05 / std::max(1.0, mu_bar), in.T / 16.0);
    // p = 0 makes the factor (1 + |w|^0) = 2 constant: the linear system with
    // h doubled, i.e. dv/dt = -(mu_bar - |h|) v realized via p=0 and h/2.
    PiecewiseH h_half = h;
    for (double& v : h_half.values) v *= 0.5;
    const OdeSeries series = integrate_scalar(mu_bar, 0.0, h_half, w0, dt, t_end);
    ++res.runs;
    if (series.overflow) {
      ++res.violations;
      continue;
    }
    const double viol = envelope_violation(series, in.mu, in.rho);
    res.worst = std::max(res.worst, viol);
    if (viol > tol) ++res.violations;
  }
  return res;
}

CertResult certify_nonlinear(int n_tuples, uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  CertResult res;
  for (int k = 0; k < n_tuples; ++k) {
    OdeBoundInputs in = random_inputs(rng);
    const Mu0Result th = mu0_nonlinear(in);
    const PiecewiseH h = make_periodic_h(in.T, in.C_h, in.r_frak,
                                         3 + static_cast<int>(rng() % 5), rng());
    const double w0 = (rng() % 2 ? 1.0 : -1.0) * in.R *
                      (0.999 * std::uniform_real_distribution<double>(0, 1)(rng));
    const double t_end = std::min({std::max(3.0 * in.T, 20.0 / th.mu0),
                                   500.0 / std::max(1.0, th.mu_bar_star), 40.0});
    const double dt = std::min(0.05 / std::max(1.0, th.mu_bar_star), in.T / 16.0);
    const OdeSeries series = integrate_scalar(th.mu_bar_star, in.p, h, w0, dt, t_end);
    ++res.runs;
    if (series.overflow) {
      ++res.violations;
      continue;
    }
    const double viol = envelope_violation(series, th.mu0, in.rho);
    res.worst = std::max(res.worst, viol);
    if (viol > tol) ++res.violations;
  }
  return res;
}

}  // namespace observer
