#pragma once

#include "observer/types.hpp"

namespace observer {

/// Smallest eigenpairs of the dense symmetric pencil A x = lambda B x
/// (B positive definite). Values ascending; vectors B-orthonormal.
struct PencilEigs {
  Vector values;
  Matrix vectors;  // empty when vectors were not requested
};

PencilEigs dense_pencil_smallest(Matrix A, Matrix B, int count, bool with_vectors);

/// All eigenvalues (ascending) of a small dense symmetric pencil.
Vector dense_pencil_eigenvalues(Matrix A, Matrix B);

/// Largest eigenvalue of a small dense symmetric pencil.
double dense_pencil_largest(const Matrix& A, const Matrix& B);

/// Euclidean-orthonormal basis of ker(B) for a wide full-row-rank B (m x n),
/// computed by Householder QR of B^T. Returns n x (n-m).
Matrix nullspace_basis(const Matrix& B);

/// Signs of the diagonal of a symmetric tridiagonal-free LDL^T run are not
/// exposed here; inertia helpers for sparse shifted matrices live with the
/// Poincare solvers (aux_spaces).

}  // namespace observer
