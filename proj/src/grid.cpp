#include "observer/grid.hpp"

namespace observer {

Eigen::Matrix<double, 3, 2> Grid::element_gradients(int e) const {
  Eigen::Matrix<double, 3, 2> G = Eigen::Matrix<double, 3, 2>::Zero();
  if (dim() == 1) {
    G(0, 0) = -1.0 / h[0];
    G(1, 0) = 1.0 / h[0];
    return G;
  }
  const auto X = element_coords(e);
  // Affine map: grad phi_v rows of inv(J)^T with reference gradients.
  const double x21 = X(1, 0) - X(0, 0), y21 = X(1, 1) - X(0, 1);
  const double x31 = X(2, 0) - X(0, 0), y31 = X(2, 1) - X(0, 1);
  const double det = x21 * y31 - x31 * y21;
  G(1, 0) = y31 / det;
  G(1, 1) = -x31 / det;
  G(2, 0) = -y21 / det;
  G(2, 1) = x21 / det;
  G(0, 0) = -G(1, 0) - G(2, 0);
  G(0, 1) = -G(1, 1) - G(2, 1);
  return G;
}

Grid build_grid(const RectDomain& domain, int nodes_per_dim, BoundaryCondition bc) {
  if (nodes_per_dim < 3)
    throw std::invalid_argument("build_grid: nodes_per_dim must be >= 3");

  Grid g;
  g.domain = domain;
  g.nodes_per_dim = nodes_per_dim;
  g.bc = bc;

  const int n = nodes_per_dim;
  const int d = domain.dim;
  for (int j = 0; j < d; ++j) g.h[j] = domain.lengths[j] / (n - 1);

  if (d == 1) {
    g.node_coords.resize(n, 1);
    for (int i = 0; i < n; ++i) g.node_coords(i, 0) = i * g.h[0];
    g.elements.reserve(n - 1);
    for (int i = 0; i + 1 < n; ++i) g.elements.push_back({i, i + 1, -1});
  } else {
    g.node_coords.resize(n * n, 2);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int node = ix + iy * n;
        g.node_coords(node, 0) = ix * g.h[0];
        g.node_coords(node, 1) = iy * g.h[1];
      }
    g.elements.reserve(2 * (n - 1) * (n - 1));
    for (int iy = 0; iy + 1 < n; ++iy)
      for (int ix = 0; ix + 1 < n; ++ix) {
        const int a = ix + iy * n;
        const int b = (ix + 1) + iy * n;
        const int c = (ix + 1) + (iy + 1) * n;
        const int e = ix + (iy + 1) * n;
        g.elements.push_back({a, b, c});
        g.elements.push_back({a, c, e});
      }
  }

  const int n_nodes = g.n_nodes();
  g.free_index.assign(n_nodes, -1);
  auto on_boundary = [&](int node) {
    if (d == 1) return node == 0 || node == n - 1;
    const int ix = node % n, iy = node / n;
    return ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1;
  };
  for (int node = 0; node < n_nodes; ++node) {
    if (bc == BoundaryCondition::Dirichlet && on_boundary(node)) continue;
    g.free_index[node] = static_cast<int>(g.free_nodes.size());
    g.free_nodes.push_back(node);
  }
  g.n_free = static_cast<int>(g.free_nodes.size());
  return g;
}

ElementQuadrature reference_quadrature(int dim, double element_volume) {
  ElementQuadrature Q;
  if (dim == 1) {
    Q.n_points = 2;
    const double s = 1.0 / std::sqrt(3.0);
    const double p0 = 0.5 * (1.0 - s), p1 = 0.5 * (1.0 + s);
    Q.shape[0] = {1.0 - p0, p0, 0.0};
    Q.shape[1] = {1.0 - p1, p1, 0.0};
    Q.weights = {0.5 * element_volume, 0.5 * element_volume, 0.0};
  } else {
    Q.n_points = 3;
    // Degree-2 interior rule: barycentric (2/3,1/6,1/6) and permutations.
    const double a = 2.0 / 3.0, b = 1.0 / 6.0;
    Q.shape[0] = {a, b, b};
    Q.shape[1] = {b, a, b};
    Q.shape[2] = {b, b, a};
    const double w = element_volume / 3.0;
    Q.weights = {w, w, w};
  }
  return Q;
}

Matrix quadrature_points(const Grid& grid) {
  const auto Q = reference_quadrature(grid.dim(), grid.element_volume());
  Matrix pts(grid.n_elements() * Q.n_points, grid.dim());
  for (int e = 0; e < grid.n_elements(); ++e) {
    const auto X = grid.element_coords(e);
    for (int q = 0; q < Q.n_points; ++q) {
      for (int j = 0; j < grid.dim(); ++j) {
        double x = 0.0;
        for (int v = 0; v < grid.verts_per_element(); ++v)
          x += Q.shape[q][v] * X(v, j);
        pts(e * Q.n_points + q, j) = x;
      }
    }
  }
  return pts;
}

}  // namespace observer
