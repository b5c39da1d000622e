#pragma once

#include <span>

#include "observer/grid.hpp"

namespace observer {

/// Execution policy for element loops. Parallel runs the per-element compute
/// phase under OpenMP and scatters serially in element order, so results are
/// bit-identical to Serial for any thread count.
enum class Exec { Serial, Parallel };

/// Sparsity skeleton shared by every element-assembled matrix on a grid,
/// with per-element slot lookup for direct scatter into the value array.
struct AssemblyPattern {
  SparseMatrix skeleton;          // compressed, free DOFs, zero values
  std::vector<int> slots;         // e*(vpe*vpe) + a*vpe + b -> value index (-1: eliminated)
  int vpe = 0;
};

/// Element-loop assembly kernels on one grid. The quadrature point table is
/// precomputed; coefficient arrays are indexed e*n_qpts + q.
class ElementKernels {
 public:
  explicit ElementKernels(const Grid& grid);

  const Grid& grid() const { return *grid_; }
  const AssemblyPattern& pattern() const { return pattern_; }
  const Matrix& qpoints() const { return qpts_; }
  int n_qpts() const { return quad_.n_points; }

  /// Zero matrix on the shared skeleton.
  SparseMatrix make_matrix() const { return pattern_.skeleton; }

  // All add_* routines accumulate scale * (element integral) into `out`,
  // which must carry the shared skeleton.
  void add_mass(double scale, SparseMatrix& out, Exec exec) const;
  void add_stiffness(double scale, SparseMatrix& out, Exec exec) const;
  void add_weighted_mass(std::span<const double> a_q, double scale,
                         SparseMatrix& out, Exec exec) const;
  void add_convection(std::span<const double> b1_q, std::span<const double> b2_q,
                      double scale, SparseMatrix& out, Exec exec) const;

  /// Load vector of a coefficient sampled at quadrature points.
  Vector load(std::span<const double> f_q, Exec exec) const;

  /// Load of N(u) = at*|u|^(r-1)*u + (bt . grad u)*|u|^(s-1)*u with P1 values
  /// and element-constant gradients at the quadrature points.
  Vector nonlinear_load(const Vector& u, std::span<const double> at_q,
                        std::span<const double> bt1_q, std::span<const double> bt2_q,
                        double r_exp, double s_exp, Exec exec) const;

 private:
  const Grid* grid_;
  AssemblyPattern pattern_;
  ElementQuadrature quad_;
  Matrix qpts_;
  std::vector<Eigen::Matrix<double, 3, 2>> grads_;  // per-element P1 gradients

  void scatter_matrix(const std::vector<double>& local, double scale,
                      SparseMatrix& out) const;
  void scatter_vector(const std::vector<double>& local, Vector& out) const;
};

}  // namespace observer
