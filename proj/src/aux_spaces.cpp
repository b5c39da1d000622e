#include "observer/aux_spaces.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>

namespace observer {

namespace {

constexpr double kPi = std::numbers::pi;

double sin2_bump(double x, double a, double cell) {
  if (x <= a || x >= a + cell) return 0.0;
  const double s = std::sin(kPi * (x - a) / cell);
  return s * s;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Integral of g over (0, len) by composite Gauss-Legendre.
template <typename G>
double integrate(const G& g, double len, int panels, int points) {
  std::vector<double> x, w;
  gauss_legendre(points, x, w);
  const double h = len / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int q = 0; q < points; ++q) total += 0.5 * h * w[q] * g(mid + 0.5 * h * x[q]);
  }
  return total;
}

}  // namespace

AuxFamily build_aux_family(AuxKind kind, const SensorLayout& layout, FemSpacePtr space) {
  AuxFamily fam;
  fam.kind = kind;
  fam.per_dim = layout.per_dim;
  fam.space = space;

  const Grid& grid = space->grid();
  const int d = grid.dim();
  const int m = layout.count();
  const int N = layout.per_dim;
  fam.members.resize(space->n_dofs(), m);

  switch (kind) {
    case AuxKind::Sin2: {
      // One bump per sensor on the cell that tiles the domain; vanishes with
      // zero derivative on the cell boundary, so it sits in D(A) for both
      // boundary conditions.
      for (int i = 0; i < m; ++i) {
        std::array<double, 2> a{0.0, 0.0}, cell{1.0, 1.0};
        const std::array<int, 2> mi{i % N, d == 2 ? i / N : 0};
        for (int j = 0; j < d; ++j) {
          cell[j] = layout.domain.lengths[j] / N;
          a[j] = mi[j] * cell[j];
        }
        fam.members.col(i) = interpolate(grid, [&](double x1, double x2) {
          double v = sin2_bump(x1, a[0], cell[0]);
          if (d == 2) v *= sin2_bump(x2, a[1], cell[1]);
          return v;
        });
      }
      break;
    }
    case AuxKind::Eigenfunctions: {
      const bool neumann = grid.bc == BoundaryCondition::Neumann;
      for (int i = 0; i < m; ++i) {
        const std::array<int, 2> mi{i % N + 1, d == 2 ? i / N + 1 : 1};
        fam.members.col(i) = space->project_field([&](double x1, double x2) {
          double v;
          if (neumann)
            v = std::cos((mi[0] - 1) * kPi * x1 / layout.domain.lengths[0]);
          else
            v = std::sin(mi[0] * kPi * x1 / layout.domain.lengths[0]);
          if (d == 2) {
            if (neumann)
              v *= std::cos((mi[1] - 1) * kPi * x2 / layout.domain.lengths[1]);
            else
              v *= std::sin(mi[1] * kPi * x2 / layout.domain.lengths[1]);
          }
          return v;
        });
      }
      break;
    }
    case AuxKind::InvA2Indicators: {
      const OutputOperator out(layout, space, Exec::Serial);
      for (int i = 0; i < m; ++i) {
        const Vector load = out.indicator_loads().row(i).transpose();
        // (nu K + M) M^{-1} (nu K + M) q = load.
        fam.members.col(i) =
            space->solve_a(space->mass() * space->solve_a(load));
      }
      break;
    }
  }

  fam.gram_h = gram_h(*space, fam.members);
  Eigen::FullPivLU<Matrix> lu(fam.gram_h);
  if (!lu.isInvertible())
    throw AssumptionViolation("build_aux_family: members are linearly dependent");
  return fam;
}

ObliqueProjector::ObliqueProjector(OutputOperator sensing, AuxFamily aux)
    : sensing_(std::move(sensing)), aux_(std::move(aux)) {
  if (sensing_.count() != aux_.count())
    throw std::invalid_argument("ObliqueProjector: family sizes differ");
  G_ = sensing_.indicator_loads() * aux_.members;
  Eigen::FullPivLU<Matrix> probe(G_);
  if (!probe.isInvertible())
    throw AssumptionViolation(
        "ObliqueProjector: singular cross Gram (direct sum H = W + W~_perp fails)");
  g_lu_.compute(G_);
  gt_lu_.compute(G_.transpose().eval());
}

double ObliqueProjector::cross_gram_condition() const {
  Eigen::JacobiSVD<Matrix> svd(G_);
  return svd.singularValues()(0) / svd.singularValues().tail(1)(0);
}

Matrix gram_h(const FemSpace& space, const Matrix& members) {
  return members.transpose() * (space.mass() * members);
}

Matrix gram_v(const FemSpace& space, const Matrix& members) {
  return members.transpose() * (space.a_full() * members);
}

Matrix gram_da(const FemSpace& space, const Matrix& members) {
  const Matrix Y = space.a_full() * members;
  Matrix Z(Y.rows(), Y.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j) Z.col(j) = space.solve_mass(Y.col(j));
  return Y.transpose() * Z;
}

Matrix gram_fractional(const FemSpace& space, const Matrix& members, double ell,
                       int n_modes, double* tail_estimate) {
  n_modes = std::min<int>(n_modes, space.n_dofs());
  const auto pairs = space.eigenpairs(n_modes);
  const Matrix MW = space.mass() * members;
  Matrix C(n_modes, members.cols());  // C_ki = (e_k, member_i)_H
  for (int k = 0; k < n_modes; ++k)
    C.row(k) = pairs[k].vector.transpose() * MW;
  Matrix G = Matrix::Zero(members.cols(), members.cols());
  for (int k = 0; k < n_modes; ++k)
    G += std::pow(pairs[k].value, ell) * (C.row(k).transpose() * C.row(k));
  if (tail_estimate) {
    // Captured D(A) mass vs the exact one bounds the truncated tail:
    // tail_ell <= alpha_N^(ell-2) * tail_DA for ell < 2.
    Matrix G_da_trunc = Matrix::Zero(members.cols(), members.cols());
    for (int k = 0; k < n_modes; ++k)
      G_da_trunc += std::pow(pairs[k].value, 2.0) * (C.row(k).transpose() * C.row(k));
    const double tail_da = (gram_da(space, members) - G_da_trunc).norm();
    *tail_estimate = std::pow(pairs[n_modes - 1].value, ell - 2.0) * tail_da;
  }
  return G;
}

double poincare_beta_dense(const OutputOperator& out, const FemSpace& space) {
  return poincare_beta_dense_rows(out.indicator_loads(), space);
}

double poincare_beta_dense_rows(const Matrix& B, const FemSpace& space) {
  if (B.rows() >= B.cols())
    throw std::invalid_argument("poincare_beta: constraint count >= DOFs");
  const Matrix N = nullspace_basis(B);
  const Matrix Y = space.a_full() * N;
  Matrix GV = N.transpose() * Y;
  GV = 0.5 * (GV + GV.transpose()).eval();

  // GD = Y^T M^{-1} Y, column blocks through the sparse Cholesky of M.
  const Eigen::Index nc = Y.cols();
  Matrix GD(nc, nc);
  const Eigen::Index blk = 256;
  Matrix Z(Y.rows(), std::min(blk, nc));
  for (Eigen::Index j0 = 0; j0 < nc; j0 += blk) {
    const Eigen::Index w = std::min(blk, nc - j0);
    for (Eigen::Index j = 0; j < w; ++j) Z.col(j) = space.solve_mass(Y.col(j0 + j));
    GD.middleCols(j0, w) = Y.transpose() * Z.leftCols(w);
  }
  GD = 0.5 * (GD + GD.transpose()).eval();

  return dense_pencil_smallest(std::move(GD), std::move(GV), 1, false).values[0];
}

namespace {

// Constrained-eigenvalue count below sigma for the pencil (D, V) on ker B,
// via inertia additivity on the bordered matrix [D - sigma V, B^T; B, 0]:
//   nu_c(sigma) = nu(A - sigma M) + pi(S0(sigma)) - m,
// using that D - sigma V = A M^{-1} (A - sigma M) is congruent to
// M^{-1} - sigma A^{-1}, whose inertia matches A - sigma M.
struct BetaBisection {
  const FemSpace& space;
  const Matrix& B;
  Matrix MX;  // M A^{-1} B^T

  explicit BetaBisection(const OutputOperator& out, const FemSpace& sp)
      : space(sp), B(out.indicator_loads()) {
    Matrix X(B.cols(), B.rows());
    for (Eigen::Index i = 0; i < B.rows(); ++i)
      X.col(i) = space.solve_a(B.row(i).transpose());
    MX = space.mass() * X;
  }

  int count_below(double sigma) const {
    for (int attempt = 0; attempt < 4; ++attempt) {
      SparseMatrix W = space.a_full();
      W -= sigma * space.mass();
      Eigen::SimplicialLDLT<SparseMatrix> ldlt(W);
      if (ldlt.info() == Eigen::Success) {
        const Vector Dd = ldlt.vectorD();
        const double dmax = Dd.cwiseAbs().maxCoeff();
        if (Dd.cwiseAbs().minCoeff() > 1e-12 * dmax) {
          int neg = 0;
          for (Eigen::Index k = 0; k < Dd.size(); ++k)
            if (Dd[k] < 0.0) ++neg;
          Matrix S0 = B * ldlt.solve(MX);
          S0 = 0.5 * (S0 + S0.transpose()).eval();
          Eigen::SelfAdjointEigenSolver<Matrix> es(S0, Eigen::EigenvaluesOnly);
          int pos = 0;
          const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
          for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
            if (es.eigenvalues()[k] > 1e-13 * scale) ++pos;
          return neg + pos - static_cast<int>(B.rows());
        }
      }
      sigma *= 1.0 + 1e-9;  // nudge off a pivot breakdown
    }
    throw std::runtime_error("poincare_beta_bisection: LDLT breakdown persisted");
  }

  // Rayleigh quotient of a deterministic feasible vector: an upper bound.
  double upper_bound() const {
    const Eigen::Index n = B.cols();
    Vector z(n);
    for (Eigen::Index k = 0; k < n; ++k)
      z[k] = std::sin(0.37 * static_cast<double>(k + 1)) + 1.1;
    // Euclidean projection onto ker B.
    const Matrix BBt = B * B.transpose();
    z -= B.transpose() * BBt.ldlt().solve(B * z);
    const double num = (space.a_full() * z).dot(space.solve_mass(space.a_full() * z));
    const double den = z.dot(space.a_full() * z);
    return num / den;
  }
};

}  // namespace

double poincare_beta_bisection(const OutputOperator& out, const FemSpace& space,
                               double rel_tol) {
  if (out.indicator_loads().rows() >= out.indicator_loads().cols())
    throw std::invalid_argument("poincare_beta: constraint count >= DOFs");
  BetaBisection ctx(out, space);
  double lo = 0.0;
  double hi = ctx.upper_bound() * (1.0 + 1e-8);
  if (ctx.count_below(hi) < 1)
    throw std::runtime_error("poincare_beta_bisection: upper bound not valid");
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (ctx.count_below(mid) >= 1) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

double poincare_beta(const OutputOperator& out, const FemSpace& space,
                     const PoincareBetaOptions& opts) {
  if (opts.force_dense || space.n_dofs() <= opts.dense_threshold)
    return poincare_beta_dense(out, space);
  return poincare_beta_bisection(out, space, opts.bisect_rel_tol);
}

double poincare_alpha(const AuxFamily& aux, const FemSpace& space, double ell) {
  if (ell < 0.0 || ell > 2.0)
    throw std::invalid_argument("poincare_alpha: ell must lie in [0,2]");
  const Matrix den = gram_da(space, aux.members);
  Matrix num;
  if (ell == 0.0) num = aux.gram_h;
  else if (ell == 1.0) num = gram_v(space, aux.members);
  else if (ell == 2.0) num = den;
  else num = gram_fractional(space, aux.members, ell, std::min(space.n_dofs(), 400));
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(num, den,
                                                      Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return es.eigenvalues().minCoeff();
}

Sin2Ratios analytic_sin2_ratios(int S, double nu, const std::vector<double>& lengths) {
  if (S < 1) throw std::invalid_argument("analytic_sin2_ratios: S >= 1 required");
  const int d = static_cast<int>(lengths.size());
  Sin2Ratios R;

  double inv_l2 = 0.0, inv_l4 = 0.0;
  for (double L : lengths) {
    inv_l2 += 1.0 / (L * L);
    inv_l4 += 1.0 / (L * L * L * L);
  }
  R.c1 = 4.0 * nu * kPi * kPi / 3.0 * inv_l2;
  R.c2_paper = nu * nu * 16.0 * std::pow(kPi, 4) / 3.0 * inv_l2;
  R.ratio_v_h = R.c1 * S * S + 1.0;
  R.ratio_da_h_paper = R.c2_paper * std::pow(S, 4) + 2.0 * R.c1 * S * S + 1.0;

  // Exact tensor algebra with the d>=2 cross terms of (sum_i d^2_i)^2.
  // Per-dimension ratios for f = sin^2(S pi x / L) on (0, L/S):
  //   rho1 = I(f'^2)/I(f^2) = (4 pi^2/3)(S/L)^2
  //   rho2 = I(f'' f)/I(f^2) = -rho1
  //   rho4 = I(f''^2)/I(f^2) = (16 pi^4/3)(S/L)^4
  double lap2 = 0.0;
  for (int i = 0; i < d; ++i) {
    const double Li = lengths[i];
    lap2 += 16.0 * std::pow(kPi, 4) / 3.0 * std::pow(S / Li, 4);
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const double rho2i = -4.0 * kPi * kPi / 3.0 * std::pow(S / lengths[i], 2);
      const double rho2j = -4.0 * kPi * kPi / 3.0 * std::pow(S / lengths[j], 2);
      lap2 += rho2i * rho2j;
    }
  }
  const double grad = 4.0 * kPi * kPi / 3.0 * S * S * inv_l2;
  R.ratio_da_h = nu * nu * lap2 + 2.0 * nu * grad + 1.0;

  // Independent oracle: the same tensor assembly from 1D integrals computed
  // by composite Gauss-Legendre instead of the closed forms.
  std::vector<double> I0(d), I1(d), I2(d), I12(d);
  for (int i = 0; i < d; ++i) {
    const double len = lengths[i] / S;
    const double k = S * kPi / lengths[i];
    auto f = [&](double x) { const double s = std::sin(k * x); return s * s; };
    auto fp = [&](double x) { return k * std::sin(2.0 * k * x); };
    auto fpp = [&](double x) { return 2.0 * k * k * std::cos(2.0 * k * x); };
    I0[i] = integrate([&](double x) { return f(x) * f(x); }, len, 16, 10);
    I1[i] = integrate([&](double x) { return fp(x) * fp(x); }, len, 16, 10);
    I2[i] = integrate([&](double x) { return fpp(x) * fpp(x); }, len, 16, 10);
    I12[i] = integrate([&](double x) { return fpp(x) * f(x); }, len, 16, 10);
  }
  auto prod_except = [&](int skip1, int skip2) {
    double p = 1.0;
    for (int j = 0; j < d; ++j)
      if (j != skip1 && j != skip2) p *= I0[j];
    return p;
  };
  const double h_mass = prod_except(-1, -1);
  double grad_q = 0.0, lap2_q = 0.0;
  for (int i = 0; i < d; ++i) {
    grad_q += I1[i] * prod_except(i, -1);
    lap2_q += I2[i] * prod_except(i, -1);
    for (int j = 0; j < d; ++j)
      if (j != i) lap2_q += I12[i] * I12[j] * prod_except(i, j);
  }
  R.ratio_v_h_quadrature = (nu * grad_q + h_mass) / h_mass;
  R.ratio_da_h_quadrature = (nu * nu * lap2_q + 2.0 * nu * grad_q + h_mass) / h_mass;
  return R;
}

P1NormCheck p1_norm_check(const SensorLayout& layout) {
  const int d = layout.domain.dim;
  if (layout.per_dim < 2)
    throw std::invalid_argument("p1_norm_check: needs at least 2 sensors per dimension");

  // Designated multi-indices in {1,2}^d with sum <= d+1: (1,..,1) and its
  // single-increment neighbors; exactly d+1 regions.
  std::vector<int> designated;
  designated.push_back(0);
  for (int j = 0; j < d; ++j)
    designated.push_back(j == 0 ? 1 : layout.per_dim);

  P1NormCheck out;
  out.moments.resize(d + 1, d + 1);
  for (int rrow = 0; rrow <= d; ++rrow) {
    const Box& box = layout.regions[designated[rrow]];
    const double vol = box.volume(d);
    out.moments(rrow, 0) = vol;
    for (int j = 0; j < d; ++j)
      out.moments(rrow, j + 1) = vol * (box.lower[j] + 0.5 * box.widths[j]);
  }
  Eigen::JacobiSVD<Matrix> svd(out.moments);
  const double smin = svd.singularValues().tail(1)(0);
  const double smax = svd.singularValues()(0);
  out.is_norm = smin > 1e-12 * smax;
  out.condition = out.is_norm ? smax / smin : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace observer
