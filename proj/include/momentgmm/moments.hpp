#pragma once

// Moment tensors of a spherical Gaussian mixture and recovery of its
// parameters from them.
//
// With sigma_bar^2 the smallest eigenvalue of the covariance and v a unit
// eigenvector for it:
//   M1(X) = E[(x.X) (v.(x - E x))^2]          = sum_i w_i s_i^2 (mu_i.X)
//   M2(X) = E[(x.X)^2] - sigma_bar^2 |X|^2     = sum_i w_i (mu_i.X)^2
//   M3(X) = E[(x.X)^3] - 3 |X|^2 M1(X)         = sum_i w_i (mu_i.X)^3

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "momentgmm/gmm_params.hpp"
#include "momentgmm/symtensor.hpp"
#include "momentgmm/waring.hpp"

namespace momentgmm {

struct MomentSet {
  Eigen::VectorXd m1;
  Eigen::MatrixXd m2;
  SymmetricTensor m3{1, 3};
  double sigma_bar_sq = 0.0;
  Eigen::VectorXd v;
  /// Sample count, empty for moments computed from known parameters.
  std::optional<std::int64_t> n_samples;
  /// The smallest covariance eigenvalue is (numerically) repeated, so v is not unique.
  bool multiplicity_warning = false;
};

MomentSet empirical_moments(const Eigen::Ref<const Eigen::MatrixXd>& data);

MomentSet exact_moments(const GmmParams& theta);

struct RecoveryOptions {
  DecompositionOptions decomposition = [] {
    DecompositionOptions o;
    o.k = 2;
    return o;
  }();
};

struct RecoveredParams {
  GmmParams params;
  /// Relative least-squares residuals of the quadratic (lambda) and linear (sigma^2) systems.
  double m2_residual = 0.0;
  double m1_residual = 0.0;
  /// Relative apolar residual of the Waring decomposition of M3.
  double m3_residual = 0.0;
  Eigen::VectorXd scales;  // lambda_i
  int clamped_variances = 0;
  int clamped_weights = 0;
  bool complex_warning = false;
};

RecoveredParams recover_parameters(const MomentSet& moments, int r, const RecoveryOptions& opts = {});

}  // namespace momentgmm
