#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace observer {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class BoundaryCondition { Neumann, Dirichlet };

/// Axis-aligned box domain Omega = (0,L_1) x ... x (0,L_d), d in {1,2}.
struct RectDomain {
  int dim = 2;
  std::vector<double> lengths;

  RectDomain() = default;
  RectDomain(int d, std::vector<double> L) : dim(d), lengths(std::move(L)) {
    if (dim < 1 || dim > 2)
      throw std::invalid_argument("RectDomain: dim must be 1 or 2");
    if (static_cast<int>(lengths.size()) != dim)
      throw std::invalid_argument("RectDomain: lengths.size() != dim");
    for (double L : lengths)
      if (!(L > 0.0))
        throw std::invalid_argument("RectDomain: lengths must be positive");
  }

  double volume() const {
    double v = 1.0;
    for (double L : lengths) v *= L;
    return v;
  }
};

/// Axis-aligned box, as used for sensor regions.
struct Box {
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> widths{0.0, 0.0};

  double volume(int dim) const {
    double v = 1.0;
    for (int j = 0; j < dim; ++j) v *= widths[j];
    return v;
  }
};

/// Thrown when a spec-level assumption fails at runtime (e.g. a singular
/// Vandermonde or cross Gram, meaning the direct-sum condition is violated).
struct AssumptionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace observer
