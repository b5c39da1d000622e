#pragma once

#include <cstdint>

#include "observer/types.hpp"

namespace observer {

/// Uniform P1 grid on a RectDomain: segments in 1d, each cell split into two
/// triangles (SW-NE diagonal) in 2d. Dirichlet boundary nodes are flagged and
/// removed from the free-DOF index set.
struct Grid {
  RectDomain domain;
  int nodes_per_dim = 0;
  BoundaryCondition bc = BoundaryCondition::Neumann;

  // Node coordinates, lexicographic with x1 fastest: node = ix + iy*n.
  Matrix node_coords;                    // n_nodes x dim
  std::vector<std::array<int, 3>> elements;  // 1d uses entries [0],[1]; [2] = -1
  std::vector<int> free_index;           // node -> free DOF index, -1 if eliminated
  std::vector<int> free_nodes;           // free DOF -> node
  int n_free = 0;

  std::array<double, 2> h{0.0, 0.0};     // spacing per dimension

  int dim() const { return domain.dim; }
  int n_nodes() const { return static_cast<int>(node_coords.rows()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int verts_per_element() const { return dim() + 1; }

  /// Element measure (length/area); uniform across the grid.
  double element_volume() const {
    return dim() == 1 ? h[0] : 0.5 * h[0] * h[1];
  }

  /// Coordinates of the element's vertices, row per vertex.
  Eigen::Matrix<double, 3, 2> element_coords(int e) const {
    Eigen::Matrix<double, 3, 2> X = Eigen::Matrix<double, 3, 2>::Zero();
    for (int v = 0; v < verts_per_element(); ++v) {
      const int node = elements[e][v];
      for (int j = 0; j < dim(); ++j) X(v, j) = node_coords(node, j);
    }
    return X;
  }

  /// Constant gradients of the P1 basis on element e, row per vertex.
  Eigen::Matrix<double, 3, 2> element_gradients(int e) const;
};

Grid build_grid(const RectDomain& domain, int nodes_per_dim, BoundaryCondition bc);

/// Quadrature rule on the reference element mapped to a physical element:
/// 2-point Gauss on segments, 3-point (degree 2) rule on triangles.
struct ElementQuadrature {
  int n_points = 0;
  std::array<std::array<double, 3>, 3> shape{};   // shape[q][v] = phi_v(x_q)
  std::array<double, 3> weights{};                // physical weights (sum = |E|)
};

ElementQuadrature reference_quadrature(int dim, double element_volume);

/// Physical coordinates of every quadrature point, flattened element-major:
/// row index = e * n_qpts + q.
Matrix quadrature_points(const Grid& grid);

/// Nodal values of a pointwise function (free DOFs only).
template <typename F>
Vector interpolate(const Grid& grid, F&& f) {
  Vector u(grid.n_free);
  for (int k = 0; k < grid.n_free; ++k) {
    const int node = grid.free_nodes[k];
    double x1 = grid.node_coords(node, 0);
    double x2 = grid.dim() == 2 ? grid.node_coords(node, 1) : 0.0;
    u[k] = f(x1, x2);
  }
  return u;
}

}  // namespace observer
