#include "observer/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace observer {

namespace {

AssemblyPattern build_pattern(const Grid& grid) {
  AssemblyPattern pat;
  pat.vpe = grid.verts_per_element();
  const int vpe = pat.vpe;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(grid.n_elements() * vpe * vpe);
  for (int e = 0; e < grid.n_elements(); ++e)
    for (int a = 0; a < vpe; ++a)
      for (int b = 0; b < vpe; ++b) {
        const int i = grid.free_index[grid.elements[e][a]];
        const int j = grid.free_index[grid.elements[e][b]];
        if (i >= 0 && j >= 0) trips.emplace_back(i, j, 0.0);
      }
  pat.skeleton.resize(grid.n_free, grid.n_free);
  pat.skeleton.setFromTriplets(trips.begin(), trips.end());
  pat.skeleton.makeCompressed();

  // Slot lookup: position of (i,j) inside the compressed column j.
  const auto* outer = pat.skeleton.outerIndexPtr();
  const auto* inner = pat.skeleton.innerIndexPtr();
  pat.slots.assign(static_cast<size_t>(grid.n_elements()) * vpe * vpe, -1);
  for (int e = 0; e < grid.n_elements(); ++e)
    for (int a = 0; a < vpe; ++a)
      for (int b = 0; b < vpe; ++b) {
        const int i = grid.free_index[grid.elements[e][a]];
        const int j = grid.free_index[grid.elements[e][b]];
        if (i < 0 || j < 0) continue;
        int lo = outer[j], hi = outer[j + 1] - 1;
        while (lo < hi) {
          const int mid = (lo + hi) / 2;
          if (inner[mid] < i) lo = mid + 1; else hi = mid;
        }
        pat.slots[(static_cast<size_t>(e) * vpe + a) * vpe + b] = lo;
      }
  return pat;
}

}  // namespace

ElementKernels::ElementKernels(const Grid& grid)
    : grid_(&grid),
      pattern_(build_pattern(grid)),
      quad_(reference_quadrature(grid.dim(), grid.element_volume())),
      qpts_(quadrature_points(grid)) {
  grads_.resize(grid.n_elements());
  for (int e = 0; e < grid.n_elements(); ++e) grads_[e] = grid.element_gradients(e);
}

void ElementKernels::scatter_matrix(const std::vector<double>& local, double scale,
                                    SparseMatrix& out) const {
  double* values = out.valuePtr();
  for (size_t s = 0; s < pattern_.slots.size(); ++s) {
    const int slot = pattern_.slots[s];
    if (slot >= 0) values[slot] += scale * local[s];
  }
}

void ElementKernels::scatter_vector(const std::vector<double>& local, Vector& out) const {
  const int vpe = pattern_.vpe;
  for (int e = 0; e < grid_->n_elements(); ++e)
    for (int a = 0; a < vpe; ++a) {
      const int i = grid_->free_index[grid_->elements[e][a]];
      if (i >= 0) out[i] += local[static_cast<size_t>(e) * vpe + a];
    }
}

void ElementKernels::add_mass(double scale, SparseMatrix& out, Exec exec) const {
  const int vpe = pattern_.vpe;
  const double vol = grid_->element_volume();
  std::vector<double> local(static_cast<size_t>(grid_->n_elements()) * vpe * vpe);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int e = 0; e < grid_->n_elements(); ++e) {
    double* L = &local[static_cast<size_t>(e) * vpe * vpe];
    if (vpe == 2) {
      L[0] = vol / 3.0; L[1] = vol / 6.0;
      L[2] = vol / 6.0; L[3] = vol / 3.0;
    } else {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) L[a * 3 + b] = (a == b ? 2.0 : 1.0) * vol / 12.0;
    }
  }
  scatter_matrix(local, scale, out);
}

void ElementKernels::add_stiffness(double scale, SparseMatrix& out, Exec exec) const {
  const int vpe = pattern_.vpe;
  const double vol = grid_->element_volume();
  std::vector<double> local(static_cast<size_t>(grid_->n_elements()) * vpe * vpe);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int e = 0; e < grid_->n_elements(); ++e) {
    double* L = &local[static_cast<size_t>(e) * vpe * vpe];
    const auto& G = grads_[e];
    for (int a = 0; a < vpe; ++a)
      for (int b = 0; b < vpe; ++b) {
        double dot = G(a, 0) * G(b, 0);
        if (grid_->dim() == 2) dot += G(a, 1) * G(b, 1);
        L[a * vpe + b] = vol * dot;
      }
  }
  scatter_matrix(local, scale, out);
}

void ElementKernels::add_weighted_mass(std::span<const double> a_q, double scale,
                                       SparseMatrix& out, Exec exec) const {
  const int vpe = pattern_.vpe;
  const int nq = quad_.n_points;
  std::vector<double> local(static_cast<size_t>(grid_->n_elements()) * vpe * vpe);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int e = 0; e < grid_->n_elements(); ++e) {
    double* L = &local[static_cast<size_t>(e) * vpe * vpe];
    for (int a = 0; a < vpe; ++a)
      for (int b = 0; b < vpe; ++b) {
        double s = 0.0;
        for (int q = 0; q < nq; ++q)
          s += quad_.weights[q] * a_q[e * nq + q] * quad_.shape[q][a] * quad_.shape[q][b];
        L[a * vpe + b] = s;
      }
  }
  scatter_matrix(local, scale, out);
}

void ElementKernels::add_convection(std::span<const double> b1_q, std::span<const double> b2_q,
                                    double scale, SparseMatrix& out, Exec exec) const {
  const int vpe = pattern_.vpe;
  const int nq = quad_.n_points;
  std::vector<double> local(static_cast<size_t>(grid_->n_elements()) * vpe * vpe);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int e = 0; e < grid_->n_elements(); ++e) {
    double* L = &local[static_cast<size_t>(e) * vpe * vpe];
    const auto& G = grads_[e];
    for (int a = 0; a < vpe; ++a)
      for (int b = 0; b < vpe; ++b) {
        double s = 0.0;
        for (int q = 0; q < nq; ++q) {
          double bdg = b1_q[e * nq + q] * G(b, 0);
          if (grid_->dim() == 2) bdg += b2_q[e * nq + q] * G(b, 1);
          s += quad_.weights[q] * bdg * quad_.shape[q][a];
        }
        L[a * vpe + b] = s;
      }
  }
  scatter_matrix(local, scale, out);
}

Vector ElementKernels::load(std::span<const double> f_q, Exec exec) const {
  const int vpe = pattern_.vpe;
  const int nq = quad_.n_points;
  std::vector<double> local(static_cast<size_t>(grid_->n_elements()) * vpe);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int e = 0; e < grid_->n_elements(); ++e) {
    double* L = &local[static_cast<size_t>(e) * vpe];
    for (int a = 0; a < vpe; ++a) {
      double s = 0.0;
      for (int q = 0; q < nq; ++q)
        s += quad_.weights[q] * f_q[e * nq + q] * quad_.shape[q][a];
      L[a] = s;
    }
  }
  Vector out = Vector::Zero(grid_->n_free);
  scatter_vector(local, out);
  return out;
}

Vector ElementKernels::nonlinear_load(const Vector& u, std::span<const double> at_q,
                                      std::span<const double> bt1_q,
                                      std::span<const double> bt2_q, double r_exp,
                                      double s_exp, Exec exec) const {
  const int vpe = pattern_.vpe;
  const int nq = quad_.n_points;
  std::vector<double> local(static_cast<size_t>(grid_->n_elements()) * vpe);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int e = 0; e < grid_->n_elements(); ++e) {
    double* L = &local[static_cast<size_t>(e) * vpe];
    const auto& G = grads_[e];
    double uv[3] = {0.0, 0.0, 0.0};
    double gx = 0.0, gy = 0.0;
    for (int a = 0; a < vpe; ++a) {
      const int i = grid_->free_index[grid_->elements[e][a]];
      uv[a] = i >= 0 ? u[i] : 0.0;
      gx += uv[a] * G(a, 0);
      gy += uv[a] * G(a, 1);
    }
    for (int a = 0; a < vpe; ++a) L[a] = 0.0;
    for (int q = 0; q < nq; ++q) {
      double z = 0.0;
      for (int a = 0; a < vpe; ++a) z += uv[a] * quad_.shape[q][a];
      const double az = std::abs(z);
      double bdg = bt1_q[e * nq + q] * gx;
      if (grid_->dim() == 2) bdg += bt2_q[e * nq + q] * gy;
      const double val = at_q[e * nq + q] * std::pow(az, r_exp - 1.0) * z +
                         bdg * std::pow(az, s_exp - 1.0) * z;
      for (int a = 0; a < vpe; ++a) L[a] += quad_.weights[q] * val * quad_.shape[q][a];
    }
  }
  Vector out = Vector::Zero(grid_->n_free);
  scatter_vector(local, out);
  return out;
}

}  // namespace observer
