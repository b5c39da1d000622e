#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "observer/fem.hpp"

using namespace observer;

namespace {

constexpr double kPi = std::numbers::pi;

// High-order 1d Gauss-Legendre for error integrals, independent of the
// assembly quadrature.
double gl8_integrate(const std::function<double(double)>& g, double a, double b) {
  static const double xs[4] = {0.1834346424956498, 0.5255324099163290,
                               0.7966664774136267, 0.9602898564975363};
  static const double ws[4] = {0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int k = 0; k < 4; ++k)
    acc += ws[k] * (g(mid + half * xs[k]) + g(mid - half * xs[k]));
  return acc * half;
}

}  // namespace

TEST_CASE("build_grid basic shapes") {
  const Grid g1 = build_grid(RectDomain(1, {1.0}), 3, BoundaryCondition::Neumann);
  CHECK(g1.n_nodes() == 3);
  CHECK(g1.node_coords(0, 0) == doctest::Approx(0.0));
  CHECK(g1.node_coords(1, 0) == doctest::Approx(0.5));
  CHECK(g1.node_coords(2, 0) == doctest::Approx(1.0));
  CHECK(g1.n_elements() == 2);
  CHECK(g1.n_free == 3);

  const Grid g2 = build_grid(RectDomain(2, {1.0, 1.0}), 3, BoundaryCondition::Neumann);
  CHECK(g2.n_nodes() == 9);
  CHECK(g2.n_elements() == 8);

  const Grid g2d = build_grid(RectDomain(2, {1.0, 1.0}), 3, BoundaryCondition::Dirichlet);
  CHECK(g2d.n_free == 1);
  CHECK(g2d.free_nodes[0] == 4);  // the center node

  CHECK_THROWS_AS(build_grid(RectDomain(2, {1.0, 1.0}), 2, BoundaryCondition::Neumann),
                  std::invalid_argument);
}

TEST_CASE("uniform spacing and positive triangle orientation") {
  const Grid g = build_grid(RectDomain(2, {2.0, 3.0}), 5, BoundaryCondition::Neumann);
  CHECK(g.h[0] == doctest::Approx(0.5));
  CHECK(g.h[1] == doctest::Approx(0.75));
  for (int e = 0; e < g.n_elements(); ++e) {
    const auto X = g.element_coords(e);
    const double det = (X(1, 0) - X(0, 0)) * (X(2, 1) - X(0, 1)) -
                       (X(2, 0) - X(0, 0)) * (X(1, 1) - X(0, 1));
    CHECK(det > 0.0);
    CHECK(det == doctest::Approx(2.0 * g.element_volume()));
  }
}

TEST_CASE("P1 mass matrix row sums are nodal cell volumes (d=1, n=3)") {
  const auto space = assemble(build_grid(RectDomain(1, {1.0}), 3, BoundaryCondition::Neumann), 1.0);
  Vector ones = Vector::Ones(3);
  const Vector rowsum = space->mass() * ones;
  CHECK(rowsum[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(rowsum[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rowsum[2] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(ones.dot(space->mass() * ones) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((space->stiffness() * ones).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("partition of unity and stiffness kernel in 2d") {
  const auto space =
      assemble(build_grid(RectDomain(2, {1.5, 0.5}), 9, BoundaryCondition::Neumann), 0.3);
  const Vector ones = Vector::Ones(space->n_dofs());
  CHECK(ones.dot(space->mass() * ones) == doctest::Approx(0.75).epsilon(1e-13));
  CHECK((space->stiffness() * ones).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("assembly is exactly symmetric") {
  const auto space =
      assemble(build_grid(RectDomain(2, {1.0, 1.0}), 17, BoundaryCondition::Neumann), 0.1);
  const Matrix M(space->mass()), K(space->stiffness());
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble rejects nonpositive nu") {
  CHECK_THROWS_AS(assemble(build_grid(RectDomain(1, {1.0}), 5, BoundaryCondition::Neumann), 0.0),
                  std::invalid_argument);
}

TEST_CASE("Neumann spectrum: constant first mode, analytic second mode") {
  const auto space =
      assemble(build_grid(RectDomain(2, {1.0, 1.0}), 33, BoundaryCondition::Neumann), 0.1);
  const auto pairs = space->eigenpairs(3);
  CHECK(pairs[0].value == doctest::Approx(1.0).epsilon(1e-10));
  // A constant eigenvector (normalized in M): all entries equal.
  const Vector& e0 = pairs[0].vector;
  CHECK((e0.array() - e0[0]).abs().maxCoeff() < 1e-8 * std::abs(e0[0]));
  const double analytic = 0.1 * kPi * kPi + 1.0;  // nu pi^2 (1^2+0^2) + 1
  CHECK(pairs[1].value == doctest::Approx(analytic).epsilon(2e-3));
  CHECK(pairs[2].value == doctest::Approx(analytic).epsilon(2e-3));
}

TEST_CASE("Dirichlet d=1 spectrum approaches the sine spectrum") {
  const auto space =
      assemble(build_grid(RectDomain(1, {1.0}), 129, BoundaryCondition::Dirichlet), 0.1);
  const auto pairs = space->eigenpairs(2);
  CHECK(pairs[0].value == doctest::Approx(0.1 * kPi * kPi + 1.0).epsilon(1e-3));
  CHECK(pairs[1].value == doctest::Approx(0.1 * 4 * kPi * kPi + 1.0).epsilon(1e-3));
}

TEST_CASE("spectral convergence: five smallest modes within 1% on the 65x65 grid") {
  const auto space =
      assemble(build_grid(RectDomain(2, {1.0, 1.0}), 65, BoundaryCondition::Neumann), 0.1);
  // nu pi^2 (k1^2 + k2^2) + 1 over integer pairs, ascending.
  std::vector<double> analytic;
  for (int k1 = 0; k1 <= 3; ++k1)
    for (int k2 = 0; k2 <= 3; ++k2)
      analytic.push_back(0.1 * kPi * kPi * (k1 * k1 + k2 * k2) + 1.0);
  std::sort(analytic.begin(), analytic.end());
  const auto pairs = space->eigenpairs(5);
  for (int k = 0; k < 5; ++k)
    CHECK(pairs[k].value == doctest::Approx(analytic[k]).epsilon(0.01));
  // M-orthonormality.
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double ip = pairs[i].vector.dot(space->mass() * pairs[j].vector);
      CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("projection reproduces constants and linears") {
  const auto sp1 = assemble(build_grid(RectDomain(1, {1.0}), 9, BoundaryCondition::Neumann), 0.5);
  const Vector u1 = sp1->project_field([](double, double) { return 1.0; });
  CHECK((u1.array() - 1.0).abs().maxCoeff() < 1e-13);
  const Vector ux = sp1->project_field([](double x, double) { return x; });
  for (int k = 0; k < sp1->n_dofs(); ++k)
    CHECK(ux[k] == doctest::Approx(sp1->grid().node_coords(k, 0)).epsilon(1e-12));
}

TEST_CASE("L2 projection error decays at second order") {
  auto error_for = [&](int n) {
    const Grid grid = build_grid(RectDomain(1, {1.0}), n, BoundaryCondition::Neumann);
    const auto space = assemble(grid, 1.0);
    auto f = [](double x) { return std::sin(2.0 * x) + 0.3 * std::cos(5.0 * x); };
    const Vector u = space->project_field([&](double x, double) { return f(x); });
    double err2 = 0.0;
    for (int e = 0; e < grid.n_elements(); ++e) {
      const double xa = grid.node_coords(grid.elements[e][0], 0);
      const double xb = grid.node_coords(grid.elements[e][1], 0);
      const double ua = u[grid.elements[e][0]], ub = u[grid.elements[e][1]];
      err2 += gl8_integrate(
          [&](double x) {
            const double uh = ua + (ub - ua) * (x - xa) / (xb - xa);
            const double d = uh - f(x);
            return d * d;
          },
          xa, xb);
    }
    return std::sqrt(err2);
  };
  const double e1 = error_for(17), e2 = error_for(33);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("norm ordering H <= V <= D(A) on random vectors") {
  const auto space =
      assemble(build_grid(RectDomain(2, {1.0, 1.0}), 17, BoundaryCondition::Neumann), 0.1);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  double min_ratio = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    Vector u(space->n_dofs());
    for (int k = 0; k < u.size(); ++k) u[k] = gauss(rng);
    const double h = space->norm_h(u), v = space->norm_v(u), da = space->norm_da(u);
    CHECK(h <= v * (1 + 1e-12));
    CHECK(v <= da * (1 + 1e-12));
    min_ratio = std::min(min_ratio, v * v / (h * h));
  }
  // Discrete Poincare with alpha_1 = 1 under Neumann.
  CHECK(min_ratio >= 1.0 - 1e-12);
}

TEST_CASE("eigenpairs rejects bad counts") {
  const auto space = assemble(build_grid(RectDomain(1, {1.0}), 5, BoundaryCondition::Neumann), 1.0);
  CHECK_THROWS_AS(space->eigenpairs(0), std::invalid_argument);
  CHECK_THROWS_AS(space->eigenpairs(99), std::invalid_argument);
}
