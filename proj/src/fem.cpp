#include "observer/fem.hpp"

namespace observer {

FemSpace::FemSpace(Grid grid, double nu, Exec exec)
    : grid_(std::move(grid)), nu_(nu) {
  if (!(nu_ > 0.0)) throw std::invalid_argument("assemble: nu must be positive");
  kernels_ = std::make_unique<ElementKernels>(grid_);
  M_ = kernels_->make_matrix();
  kernels_->add_mass(1.0, M_, exec);
  K_ = kernels_->make_matrix();
  kernels_->add_stiffness(1.0, K_, exec);
  A_ = kernels_->make_matrix();
  A_.coeffs() = nu_ * K_.coeffs() + M_.coeffs();

  llt_m_.compute(M_);
  if (llt_m_.info() != Eigen::Success)
    throw std::runtime_error("FemSpace: mass factorization failed");
  llt_a_.compute(A_);
  if (llt_a_.info() != Eigen::Success)
    throw std::runtime_error("FemSpace: a_full factorization failed");
}

Vector FemSpace::load_field(const std::function<double(double, double)>& f) const {
  const Matrix& pts = kernels_->qpoints();
  std::vector<double> fq(pts.rows());
  const bool two_d = grid_.dim() == 2;
  for (Eigen::Index q = 0; q < pts.rows(); ++q)
    fq[q] = f(pts(q, 0), two_d ? pts(q, 1) : 0.0);
  return kernels_->load(fq, Exec::Serial);
}

Vector FemSpace::project_field(const std::function<double(double, double)>& f) const {
  return solve_mass(load_field(f));
}

std::vector<EigenPair> FemSpace::eigenpairs(int count) const {
  if (count < 1 || count > n_dofs())
    throw std::invalid_argument("eigenpairs: count must be in [1, n_dofs]");
  PencilEigs eigs = dense_pencil_smallest(Matrix(A_), Matrix(M_), count, true);
  std::vector<EigenPair> out(count);
  for (int k = 0; k < count; ++k) {
    out[k].value = eigs.values[k];
    out[k].vector = eigs.vectors.col(k);
    // Report solver trouble through the generalized residual.
    const double res = (A_ * out[k].vector - eigs.values[k] * (M_ * out[k].vector)).norm();
    const double scale = (A_ * out[k].vector).norm();
    if (!(res <= 1e-8 * std::max(1.0, scale)))
      throw std::runtime_error("eigenpairs: residual " + std::to_string(res) +
                               " for mode " + std::to_string(k));
  }
  return out;
}

}  // namespace observer
