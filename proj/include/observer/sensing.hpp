#pragma once

#include <Eigen/LU>

#include "observer/fem.hpp"

namespace observer {

/// Family of disjoint rectangular sensor supports. `per_dim` sensors per
/// dimension, centered at odd multiples of L_j/(2*per_dim) with widths
/// r*L_j/per_dim; the construction with (2S)^d sensors is per_dim = 2S.
struct SensorLayout {
  RectDomain domain;
  double r = 0.25;
  int per_dim = 2;
  std::vector<Box> regions;  // lexicographic in the multi-index, x1 fastest

  int count() const { return static_cast<int>(regions.size()); }
  double covered_volume() const {
    double v = 0.0;
    for (const auto& b : regions) v += b.volume(domain.dim);
    return v;
  }
  /// Paper parameter S when per_dim is even (layout == the (2S)^d family).
  int paper_S() const { return per_dim % 2 == 0 ? per_dim / 2 : 0; }
};

/// The (2S)^d construction: corners p_j = (2 m_j - 1) L_j/(4S) - r L_j/(4S).
SensorLayout sensor_layout(int S, double r, const RectDomain& domain);

/// N-grid variant with N sensors per dimension (odd N gives e.g. 3x3 = 9).
SensorLayout sensor_layout_grid(int per_dim, double r, const RectDomain& domain);

/// A field in W_S = span of the sensor indicators, kept in that basis.
/// Measurements and Gram pairings of such fields are exact.
struct WsField {
  Vector coeffs;
};

/// Measurement rows (exact integrals of P1 basis functions over each sensor),
/// the exact Vandermonde [V]_ij = vol(omega_i . omega_j), and the lift.
class OutputOperator {
 public:
  OutputOperator(SensorLayout layout, FemSpacePtr space, Exec exec = Exec::Parallel);

  const SensorLayout& layout() const { return layout_; }
  const FemSpace& space() const { return *space_; }
  int count() const { return layout_.count(); }

  /// Row i = H-pairing of 1_{omega_i} against the P1 basis.
  const Matrix& indicator_loads() const { return B_; }
  const Matrix& vandermonde() const { return V_; }
  double vandermonde_condition() const;

  Vector measure(const Vector& z) const { return B_ * z; }
  Vector measure(const WsField& f) const { return V_ * f.coeffs; }

  /// Z^{W_S}: w -> sum_i ([V]^{-1} w)_i 1_{omega_i}.
  WsField lift(const Vector& w) const;

  /// L2 projection of a WsField onto the P1 space: M^{-1} B^T c.
  Vector materialize(const WsField& f) const {
    return space_->solve_mass(B_.transpose() * f.coeffs);
  }

  /// Orthogonal projection onto span{1_omega} of an H-field, in that basis.
  WsField project_ws(const Vector& z) const { return lift(measure(z)); }

 private:
  SensorLayout layout_;
  FemSpacePtr space_;
  Matrix B_;  // count x n_dofs
  Matrix V_;  // count x count, exact
  Eigen::FullPivLU<Matrix> v_lu_;
};

OutputOperator assemble_output(const SensorLayout& layout, FemSpacePtr space,
                               Exec exec = Exec::Parallel);

}  // namespace observer
