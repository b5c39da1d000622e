#pragma once

#include <functional>
#include <memory>

#include <Eigen/SparseCholesky>

#include "observer/kernels.hpp"
#include "observer/linalg.hpp"

namespace observer {

/// Generalized eigenpair of (nu*K + M, M): A e = alpha M e, M-orthonormal e.
struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// P1 discretization of A = -nu*Laplace + 1 on a Grid: mass M, stiffness K,
/// a_full = nu*K + M, and the discrete H / V / D(A) geometry
///   (u,v)_H = u^T M v,  (u,v)_V = u^T a_full v,  |u|_D(A) = |M^{-1} a_full u|_H.
class FemSpace {
 public:
  FemSpace(Grid grid, double nu, Exec exec = Exec::Parallel);

  FemSpace(const FemSpace&) = delete;
  FemSpace& operator=(const FemSpace&) = delete;

  const Grid& grid() const { return grid_; }
  const ElementKernels& kernels() const { return *kernels_; }
  double nu() const { return nu_; }
  int n_dofs() const { return grid_.n_free; }

  const SparseMatrix& mass() const { return M_; }
  const SparseMatrix& stiffness() const { return K_; }
  const SparseMatrix& a_full() const { return A_; }

  double inner_h(const Vector& u, const Vector& v) const { return u.dot(M_ * v); }
  double inner_v(const Vector& u, const Vector& v) const { return u.dot(A_ * v); }
  double norm_h(const Vector& u) const { return std::sqrt(inner_h(u, u)); }
  double norm_v(const Vector& u) const { return std::sqrt(inner_v(u, u)); }

  /// Strong operator: M^{-1} a_full u (coefficients of A u).
  Vector strong_a(const Vector& u) const { return solve_mass(A_ * u); }
  double norm_da(const Vector& u) const { return norm_h(strong_a(u)); }
  double inner_da(const Vector& u, const Vector& v) const {
    return (A_ * u).dot(solve_mass(A_ * v));
  }

  /// Solve M x = rhs (rhs a load vector); L2 projection of the functional.
  Vector solve_mass(const Vector& rhs) const { return llt_m_.solve(rhs); }
  /// Solve a_full x = rhs (rhs a load vector); weak inverse of A.
  Vector solve_a(const Vector& rhs) const { return llt_a_.solve(rhs); }

  /// L2 projection of a pointwise function f(x1, x2) onto the P1 space.
  Vector project_field(const std::function<double(double, double)>& f) const;

  /// Load vector of f by element quadrature (2-pt segments / 3-pt triangles).
  Vector load_field(const std::function<double(double, double)>& f) const;

  /// Smallest `count` eigenpairs of (a_full, M) via a dense symmetric solver.
  std::vector<EigenPair> eigenpairs(int count) const;

 private:
  Grid grid_;
  double nu_;
  std::unique_ptr<ElementKernels> kernels_;
  SparseMatrix M_, K_, A_;
  Eigen::SimplicialLLT<SparseMatrix> llt_m_, llt_a_;
};

using FemSpacePtr = std::shared_ptr<const FemSpace>;

inline FemSpacePtr assemble(Grid grid, double nu, Exec exec = Exec::Parallel) {
  return std::make_shared<const FemSpace>(std::move(grid), nu, exec);
}

}  // namespace observer
