#pragma once

#include "observer/sensing.hpp"

namespace observer {

enum class AuxKind { Eigenfunctions, Sin2, InvA2Indicators };

/// Auxiliary family W~_S spanning the oblique complement: one member per
/// sensor, stored as coefficient vectors in the P1 space.
///  - Eigenfunctions: analytic cosine (Neumann) / sine (Dirichlet) tensor
///    products with per-dimension indices 1..per_dim, L2-projected.
///  - Sin2: compactly supported bumps prod_j sin^2(N pi (x_j - a_j)/L_j) on
///    the width-L_j/N cell around each sensor (N = per_dim), interpolated;
///    pairwise disjoint supports, so gram_h is diagonal on aligned grids.
///  - InvA2Indicators: q_i solving the discrete A^2 q = 1_{omega_i}.
struct AuxFamily {
  AuxKind kind = AuxKind::Sin2;
  int per_dim = 2;
  FemSpacePtr space;
  Matrix members;  // n_dofs x count
  Matrix gram_h;   // count x count

  int count() const { return static_cast<int>(members.cols()); }
};

AuxFamily build_aux_family(AuxKind kind, const SensorLayout& layout, FemSpacePtr space);

/// The oblique pair P_{W~}^{W_perp} (range W~, kernel W_perp) and its adjoint
/// P_W^{W~_perp} (range W, kernel W~_perp), realized through the cross Gram
/// G_ij = (w_i, w~_j)_H. G singular means H = W (+) W~_perp fails.
class ObliqueProjector {
 public:
  ObliqueProjector(OutputOperator sensing, AuxFamily aux);

  const OutputOperator& sensing() const { return sensing_; }
  const AuxFamily& aux() const { return aux_; }
  const FemSpace& space() const { return *aux_.space; }
  const Matrix& cross_gram() const { return G_; }
  double cross_gram_condition() const;

  /// theta = P_{W~}^{W_perp} z: the member combination with (w_i, z-theta)_H = 0.
  Vector onto_aux(const Vector& z) const { return aux_.members * onto_aux_coeffs(z); }
  Vector onto_aux_coeffs(const Vector& z) const { return g_lu_.solve(sensing_.measure(z)); }
  /// Same projection applied to a field already in span{1_omega} (exact measurements).
  Vector onto_aux_coeffs(const WsField& f) const { return g_lu_.solve(sensing_.measure(f)); }

  /// P_W^{W~_perp} q, returned in the indicator basis: (w~_j, q - sum d_i w_i)_H = 0.
  WsField onto_sensors(const Vector& q) const {
    return WsField{gt_lu_.solve(aux_.members.transpose() * (space().mass() * q))};
  }

 private:
  OutputOperator sensing_;
  AuxFamily aux_;
  Matrix G_;
  Eigen::PartialPivLU<Matrix> g_lu_, gt_lu_;
};

// Gram matrices of a column family in the discrete geometries.
Matrix gram_h(const FemSpace& space, const Matrix& members);
Matrix gram_v(const FemSpace& space, const Matrix& members);
Matrix gram_da(const FemSpace& space, const Matrix& members);
/// D(A^{ell/2}) Gram by spectral truncation over n_modes eigenpairs
/// (exploratory path for non-integer ell). Returns the Gram and a tail bound.
Matrix gram_fractional(const FemSpace& space, const Matrix& members, double ell,
                       int n_modes, double* tail_estimate = nullptr);

struct PoincareBetaOptions {
  bool force_dense = false;
  int dense_threshold = 4500;   // free DOFs above which bisection takes over
  double bisect_rel_tol = 1e-10;
};

/// beta_{S sigma +} = min ||Q||_DA^2 / ||Q||_V^2 over {Q : B Q = 0}.
double poincare_beta(const OutputOperator& out, const FemSpace& space,
                     const PoincareBetaOptions& opts = {});
/// Null-space basis + dense symmetric pencil (the reference path).
double poincare_beta_dense(const OutputOperator& out, const FemSpace& space);
/// Same, on raw constraint rows (each row an H-pairing load vector).
double poincare_beta_dense_rows(const Matrix& B, const FemSpace& space);
/// Inertia-certified bisection on the bordered matrix; exact to rel_tol.
double poincare_beta_bisection(const OutputOperator& out, const FemSpace& space,
                               double rel_tol = 1e-10);

/// underline-alpha_{S,ell} = min ||q||^2_{D(A^{ell/2})} / ||q||^2_{D(A)} over W~.
double poincare_alpha(const AuxFamily& aux, const FemSpace& space, double ell);

/// Prop-style closed forms for the sin^2 bumps of width L_j/S, plus an
/// independent high-order quadrature recomputation. ratio_da_h keeps the
/// d>=2 cross terms; ratio_da_h_paper is the printed C2 formula.
struct Sin2Ratios {
  double c1 = 0.0;
  double c2_paper = 0.0;
  double ratio_v_h = 0.0;
  double ratio_da_h = 0.0;
  double ratio_da_h_paper = 0.0;
  double ratio_v_h_quadrature = 0.0;
  double ratio_da_h_quadrature = 0.0;
};
Sin2Ratios analytic_sin2_ratios(int S, double nu, const std::vector<double>& lengths);

/// Measurement matrix of the monomials {1, x_1..x_d} over the d+1 designated
/// S=1 regions (multi-indices with sum <= d+1); nonsingularity makes the
/// sensor seminorm a norm on P1 polynomials.
struct P1NormCheck {
  bool is_norm = false;
  double condition = 0.0;
  Matrix moments;
};
P1NormCheck p1_norm_check(const SensorLayout& layout);

}  // namespace observer
