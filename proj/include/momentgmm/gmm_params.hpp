#pragma once

#include <Eigen/Dense>

namespace momentgmm {

/// Spherical Gaussian mixture: component j has weight weights[j], mean
/// means.row(j) and covariance variances[j] * I.
struct GmmParams {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;  // r x m
  Eigen::VectorXd variances;

  int components() const noexcept { return static_cast<int>(weights.size()); }
  int dim() const noexcept { return static_cast<int>(means.cols()); }

  /// Throws InputError on inconsistent shapes, non-positive variances,
  /// negative weights or weights not summing to one (within tol).
  void validate(double tol = 1e-9) const;
};

}  // namespace momentgmm
