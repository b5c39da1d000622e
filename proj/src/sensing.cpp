#include "observer/sensing.hpp"

#include <cmath>

namespace observer {

namespace {

// Sutherland-Hodgman clip of a convex polygon against an axis-aligned
// half-plane (keep side: sign*(coord - c) <= 0).
struct Poly {
  int n = 0;
  std::array<std::array<double, 2>, 8> pts{};
};

void clip_axis(const Poly& in, int axis, double c, double sign, Poly& out) {
  out.n = 0;
  for (int i = 0; i < in.n; ++i) {
    const auto& P = in.pts[i];
    const auto& Q = in.pts[(i + 1) % in.n];
    const double dp = sign * (P[axis] - c);
    const double dq = sign * (Q[axis] - c);
    const bool pin = dp <= 0.0, qin = dq <= 0.0;
    if (pin) out.pts[out.n++] = P;
    if (pin != qin) {
      const double s = dp / (dp - dq);
      out.pts[out.n][0] = P[0] + s * (Q[0] - P[0]);
      out.pts[out.n][1] = P[1] + s * (Q[1] - P[1]);
      ++out.n;
    }
  }
}

// Area and centroid of a convex polygon (shoelace); exact for the clipped
// box-triangle intersections, so integrating a linear function reduces to
// area * value(centroid).
void area_centroid(const Poly& p, double& area, double& cx, double& cy) {
  area = 0.0; cx = 0.0; cy = 0.0;
  for (int i = 0; i < p.n; ++i) {
    const auto& A = p.pts[i];
    const auto& B = p.pts[(i + 1) % p.n];
    const double cross = A[0] * B[1] - B[0] * A[1];
    area += cross;
    cx += (A[0] + B[0]) * cross;
    cy += (A[1] + B[1]) * cross;
  }
  area *= 0.5;
  if (std::abs(area) < 1e-300) { area = 0.0; return; }
  cx /= 6.0 * area;
  cy /= 6.0 * area;
}

}  // namespace

SensorLayout sensor_layout_grid(int per_dim, double r, const RectDomain& domain) {
  if (per_dim < 1) throw std::invalid_argument("sensor_layout: per_dim must be >= 1");
  if (!(r > 0.0 && r < 1.0))
    throw std::invalid_argument("sensor_layout: r must be in (0,1)");

  SensorLayout layout;
  layout.domain = domain;
  layout.r = r;
  layout.per_dim = per_dim;

  const int d = domain.dim;
  const int count = d == 1 ? per_dim : per_dim * per_dim;
  layout.regions.resize(count);
  for (int idx = 0; idx < count; ++idx) {
    std::array<int, 2> m{idx % per_dim + 1, d == 2 ? idx / per_dim + 1 : 1};
    Box box;
    for (int j = 0; j < d; ++j) {
      const double L = domain.lengths[j];
      box.widths[j] = r * L / per_dim;
      box.lower[j] = (2.0 * m[j] - 1.0) * L / (2.0 * per_dim) - 0.5 * box.widths[j];
    }
    layout.regions[idx] = box;
  }
  return layout;
}

SensorLayout sensor_layout(int S, double r, const RectDomain& domain) {
  if (S < 1) throw std::invalid_argument("sensor_layout: S must be >= 1");
  return sensor_layout_grid(2 * S, r, domain);
}

OutputOperator::OutputOperator(SensorLayout layout, FemSpacePtr space, Exec exec)
    : layout_(std::move(layout)), space_(std::move(space)) {
  const Grid& grid = space_->grid();
  if (grid.domain.dim != layout_.domain.dim)
    throw std::invalid_argument("assemble_output: layout/grid dimension mismatch");

  const int m = layout_.count();
  const int d = grid.dim();
  B_.setZero(m, grid.n_free);

  // Exact integration of each P1 basis function over the clipped sensor box.
  // Rows are independent; the sensor loop parallelizes without reductions.
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int i = 0; i < m; ++i) {
    const Box& box = layout_.regions[i];
    // Cell range overlapped by the box in the structured grid.
    std::array<int, 2> c0{0, 0}, c1{0, 0};
    for (int j = 0; j < d; ++j) {
      c0[j] = std::max(0, static_cast<int>(std::floor(box.lower[j] / grid.h[j] - 1e-12)));
      c1[j] = std::min(grid.nodes_per_dim - 2,
                       static_cast<int>(std::ceil((box.lower[j] + box.widths[j]) / grid.h[j] + 1e-12)));
    }
    if (d == 1) {
      for (int ix = c0[0]; ix <= c1[0]; ++ix) {
        const double xa = std::max(ix * grid.h[0], box.lower[0]);
        const double xb = std::min((ix + 1) * grid.h[0], box.lower[0] + box.widths[0]);
        if (xb <= xa) continue;
        const double len = xb - xa, mid = 0.5 * (xa + xb);
        const double phi_right = (mid - ix * grid.h[0]) / grid.h[0];
        const int nl = grid.free_index[ix], nr = grid.free_index[ix + 1];
        if (nl >= 0) B_(i, nl) += len * (1.0 - phi_right);
        if (nr >= 0) B_(i, nr) += len * phi_right;
      }
      continue;
    }
    const int n = grid.nodes_per_dim;
    for (int iy = c0[1]; iy <= c1[1]; ++iy)
      for (int ix = c0[0]; ix <= c1[0]; ++ix)
        for (int sub = 0; sub < 2; ++sub) {
          const int e = 2 * (ix + iy * (n - 1)) + sub;
          const auto X = grid.element_coords(e);
          Poly poly, tmp;
          poly.n = 3;
          for (int v = 0; v < 3; ++v) poly.pts[v] = {X(v, 0), X(v, 1)};
          clip_axis(poly, 0, box.lower[0], -1.0, tmp);
          clip_axis(tmp, 0, box.lower[0] + box.widths[0], 1.0, poly);
          clip_axis(poly, 1, box.lower[1], -1.0, tmp);
          clip_axis(tmp, 1, box.lower[1] + box.widths[1], 1.0, poly);
          if (poly.n < 3) continue;
          double area, cx, cy;
          area_centroid(poly, area, cx, cy);
          if (area <= 0.0) continue;
          const auto G = grid.element_gradients(e);
          for (int v = 0; v < 3; ++v) {
            const int dof = grid.free_index[grid.elements[e][v]];
            if (dof < 0) continue;
            const double phi = 1.0 + G(v, 0) * (cx - X(v, 0)) + G(v, 1) * (cy - X(v, 1));
            B_(i, dof) += area * phi;
          }
        }
  }

  // Exact sensor Gram: volumes of pairwise box intersections.
  V_.setZero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double v = 1.0;
      for (int k = 0; k < d; ++k) {
        const double lo = std::max(layout_.regions[i].lower[k], layout_.regions[j].lower[k]);
        const double hi = std::min(layout_.regions[i].lower[k] + layout_.regions[i].widths[k],
                                   layout_.regions[j].lower[k] + layout_.regions[j].widths[k]);
        v *= std::max(0.0, hi - lo);
      }
      V_(i, j) = v;
    }
  v_lu_.compute(V_);
  if (!v_lu_.isInvertible())
    throw AssumptionViolation("assemble_output: sensors are not linearly independent"
                              " (singular Vandermonde)");
}

double OutputOperator::vandermonde_condition() const {
  Eigen::JacobiSVD<Matrix> svd(V_);
  return svd.singularValues()(0) / svd.singularValues().tail(1)(0);
}

WsField OutputOperator::lift(const Vector& w) const {
  if (w.size() != count())
    throw std::invalid_argument("lift: output vector has wrong length");
  return WsField{v_lu_.solve(w)};
}

OutputOperator assemble_output(const SensorLayout& layout, FemSpacePtr space, Exec exec) {
  return OutputOperator(layout, std::move(space), exec);
}

}  // namespace observer
