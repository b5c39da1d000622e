// Timing comparison of the serial reference kernels against the OpenMP
// variants: assembly, loads, and full CN+AB2 step throughput.

#include <chrono>
#include <cstdio>

#include "observer/dynamics.hpp"

using namespace observer;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, seconds(t0, t1));
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.3f ms %10.3f ms   x%.2f\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 129;
  const RectDomain box(2, {1.0, 1.0});
  const Grid grid = build_grid(box, n, BoundaryCondition::Neumann);
  const auto space = assemble(grid, 0.1);
  const ElementKernels& kk = space->kernels();

  const Eigen::Index nq = kk.qpoints().rows();
  std::vector<double> aq(nq), b1(nq), b2(nq);
  const Expr ea = Expr::parse("-2 + x1 - abs(sin(t + x1))");
  const Expr eb1 = Expr::parse("x1 + x2");
  const Expr eb2 = Expr::parse("cos(t)*x1*x2");
  ea.eval_batch(kk.qpoints(), 0.37, aq.data());
  eb1.eval_batch(kk.qpoints(), 0.37, b1.data());
  eb2.eval_batch(kk.qpoints(), 0.37, b2.data());
  Vector u = space->project_field([](double x, double y) {
    return std::cos(3 * x) * (1 + y) + 0.2 * x * y;
  });

  std::printf("grid %dx%d (%d dofs, %d elements)\n", n, n, space->n_dofs(),
              grid.n_elements());
  std::printf("%-28s %13s %13s %7s\n", "kernel", "serial", "openmp", "speedup");

  row("mass+stiffness assembly",
      time_best([&] {
        SparseMatrix M = kk.make_matrix();
        kk.add_mass(1.0, M, Exec::Serial);
        kk.add_stiffness(0.1, M, Exec::Serial);
      }, 5),
      time_best([&] {
        SparseMatrix M = kk.make_matrix();
        kk.add_mass(1.0, M, Exec::Parallel);
        kk.add_stiffness(0.1, M, Exec::Parallel);
      }, 5));

  row("weighted mass (a(x,t))",
      time_best([&] {
        SparseMatrix M = kk.make_matrix();
        kk.add_weighted_mass(aq, 1.0, M, Exec::Serial);
      }, 5),
      time_best([&] {
        SparseMatrix M = kk.make_matrix();
        kk.add_weighted_mass(aq, 1.0, M, Exec::Parallel);
      }, 5));

  row("convection (b . grad)",
      time_best([&] {
        SparseMatrix M = kk.make_matrix();
        kk.add_convection(b1, b2, 1.0, M, Exec::Serial);
      }, 5),
      time_best([&] {
        SparseMatrix M = kk.make_matrix();
        kk.add_convection(b1, b2, 1.0, M, Exec::Parallel);
      }, 5));

  row("nonlinear load",
      time_best([&] { kk.nonlinear_load(u, aq, b1, b2, 4.0, 1.0, Exec::Serial); }, 5),
      time_best([&] { kk.nonlinear_load(u, aq, b1, b2, 4.0, 1.0, Exec::Parallel); }, 5));

  // Expression sweep over the quadrature points.
  row("coefficient evaluation",
      time_best([&] { ea.eval_batch(kk.qpoints(), 1.23, aq.data()); }, 5),
      time_best([&] { ea.eval_batch(kk.qpoints(), 1.23, aq.data()); }, 5));

  // Full step throughput of the section-5 scenario on this grid.
  {
    Coefficients coeffs;
    coeffs.a = ea;
    coeffs.b = {eb1, eb2};
    coeffs.a_tilde = Expr::parse("-1");
    coeffs.b_tilde = {Expr::parse("1"), Expr::parse("-2")};
    coeffs.r_exp = 4.0;
    coeffs.s_exp = 1.0;

    auto run_steps = [&](Exec exec) {
      Stepper::Options opts;
      opts.dt = 1e-4;
      opts.exec = exec;
      Stepper stepper(space, coeffs, std::move(opts));
      SimState st = stepper.start(u);
      const auto t0 = std::chrono::steady_clock::now();
      for (int k = 0; k < 50; ++k) stepper.step(st);
      const auto t1 = std::chrono::steady_clock::now();
      return seconds(t0, t1) / 50.0;
    };
    row("CN+AB2 step", run_steps(Exec::Serial), run_steps(Exec::Parallel));
  }
  return 0;
}
