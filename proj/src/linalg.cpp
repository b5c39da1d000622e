#include "observer/linalg.hpp"

#include <algorithm>

#include <lapacke.h>

namespace observer {

namespace {

void check_info(lapack_int info, const char* routine) {
  if (info != 0)
    throw std::runtime_error(std::string(routine) + " failed, info = " +
                             std::to_string(info));
}

}  // namespace

PencilEigs dense_pencil_smallest(Matrix A, Matrix B, int count, bool with_vectors) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (count < 1 || count > n)
    throw std::invalid_argument("dense_pencil_smallest: bad count");
  PencilEigs out;
  out.values.resize(count);
  lapack_int m = 0;
  std::vector<lapack_int> ifail(n);
  Matrix Z;
  if (with_vectors) Z.resize(n, count);
  const lapack_int info = LAPACKE_dsygvx(
      LAPACK_COL_MAJOR, 1, with_vectors ? 'V' : 'N', 'I', 'L', n, A.data(), n,
      B.data(), n, 0.0, 0.0, 1, count, 2 * LAPACKE_dlamch('S'), &m,
      out.values.data(), with_vectors ? Z.data() : nullptr, n, ifail.data());
  check_info(info, "dsygvx");
  if (m < count)
    throw std::runtime_error("dsygvx returned fewer eigenvalues than requested");
  if (with_vectors) out.vectors = std::move(Z);
  return out;
}

Vector dense_pencil_eigenvalues(Matrix A, Matrix B) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Vector w(n);
  const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'N', 'L', n,
                                         A.data(), n, B.data(), n, w.data());
  check_info(info, "dsygvd");
  return w;
}

double dense_pencil_largest(const Matrix& A, const Matrix& B) {
  Matrix Ac = A, Bc = B;
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Vector w(1);
  lapack_int m = 0;
  std::vector<lapack_int> ifail(n);
  const lapack_int info = LAPACKE_dsygvx(
      LAPACK_COL_MAJOR, 1, 'N', 'I', 'L', n, Ac.data(), n, Bc.data(), n, 0.0,
      0.0, n, n, 2 * LAPACKE_dlamch('S'), &m, w.data(), nullptr, n, ifail.data());
  check_info(info, "dsygvx");
  return w[0];
}

Matrix nullspace_basis(const Matrix& B) {
  const lapack_int n = static_cast<lapack_int>(B.cols());
  const lapack_int m = static_cast<lapack_int>(B.rows());
  if (m >= n)
    throw std::invalid_argument("nullspace_basis: constraint count >= dimension");

  Matrix Bt = B.transpose();  // n x m
  std::vector<double> tau(m);
  check_info(LAPACKE_dgeqrf(LAPACK_COL_MAJOR, n, m, Bt.data(), n, tau.data()),
             "dgeqrf");
  // Guard against rank deficiency (dependent sensors).
  for (lapack_int j = 0; j < m; ++j)
    if (std::abs(Bt(j, j)) < 1e-13 * std::max(1.0, std::abs(Bt(0, 0))))
      throw AssumptionViolation("nullspace_basis: B is rank deficient");

  Matrix N = Matrix::Zero(n, n - m);
  for (lapack_int j = 0; j < n - m; ++j) N(m + j, j) = 1.0;
  check_info(LAPACKE_dormqr(LAPACK_COL_MAJOR, 'L', 'N', n, n - m, m, Bt.data(),
                            n, tau.data(), N.data(), n),
             "dormqr");
  return N;
}

}  // namespace observer
