#pragma once

#include "observer/aux_spaces.hpp"

namespace observer {

/// Output-injection operator
///   I w = -lambda * A^{-1} P_W^{W~perp} A^ell P_{W~}^{Wperp} Z^{W_S} w,
/// cached as a DOFs x S_sigma matrix so apply() is a small mat-vec. Each
/// factor is realized discretely: A^{-1} as the a_full solve against the mass
/// pairing, A^ell applied to the (regular) members only, the lift Z through
/// the exact Vandermonde.
class InjectionOperator {
 public:
  InjectionOperator(double lambda, double ell, ObliqueProjector proj);

  double lambda() const { return lambda_; }
  double ell() const { return ell_; }
  const ObliqueProjector& projector() const { return proj_; }
  const FemSpace& space() const { return proj_.space(); }
  int outputs() const { return static_cast<int>(J_.cols()); }

  /// Injected field for an output residual (Z yhat - w).
  Vector apply(const Vector& residual) const { return J_ * residual; }
  /// Mass-weighted load of the injected field (what the time stepper adds).
  Vector apply_load(const Vector& residual) const { return JM_ * residual; }
  double field_norm_h(const Vector& residual) const {
    return std::sqrt(std::max(0.0, (J_ * residual).dot(JM_ * residual)));
  }

  /// D(A^{ell/2}) Gram of the aux members (the dissipation quadratic form).
  const Matrix& member_gram_ell() const { return gram_ell_; }

  struct NormReport {
    double lambda = 0.0;
    double ell = 0.0;
    double computed_norm = 0.0;    // ||I||_{L(R^m, H)}
    double norm_Z = 0.0;           // ||Z^{W_S}||, exact in the indicator basis
    double c_tilde = 0.0;          // product of the discrete sub-factor norms
    double factored_bound = 0.0;   // lambda * c_tilde * norm_Z
    double factor_embed_low = 0.0;     // span embedding into D(A^{-1}) or H
    double factor_proj_sensors = 0.0;  // P_W on the processed span
    double factor_embed_aux = 0.0;     // W~ embedding H -> D(A)
    double factor_proj_aux = 0.0;      // P_{W~} on the lifted span
  };
  NormReport operator_norm_report() const;

 private:
  double lambda_;
  double ell_;
  ObliqueProjector proj_;
  Matrix gram_ell_;  // m x m
  Matrix J_;         // n x m
  Matrix JM_;        // n x m
};

InjectionOperator build_injection(double lambda, double ell, ObliqueProjector proj);

}  // namespace observer
