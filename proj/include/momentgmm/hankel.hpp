#pragma once

#include <vector>

#include <Eigen/Dense>

#include "momentgmm/symtensor.hpp"

namespace momentgmm {

/// Catalecticant matrix H_T^{k,d-k}: rows are degree-k monomials, columns
/// degree-(d-k) monomials, entry (a, b) = T_{a+b}.
struct HankelMatrix {
  int k = 0;
  int order = 0;
  int dim = 0;
  Eigen::MatrixXd matrix;
};

using PointSet = std::vector<Eigen::VectorXd>;

/// Relative singular value threshold used when no rank is supplied.
inline constexpr double kDefaultRankTolerance = 1e-8;

HankelMatrix hankel(const SymmetricTensor& t, int k);

/// Row i holds (xi_i^a)_{|a|=k} in graded-lex order.
Eigen::MatrixXd evaluation_matrix(const PointSet& points, int k);

/// Number of singular values above tol * sigma_max (0 for the zero matrix).
int numerical_rank(const Eigen::MatrixXd& m, double tol = kDefaultRankTolerance);

/// Smallest k for which the degree-k evaluation map is onto R^r.
/// Searches k = 1..r and throws NumericalError if the rank never reaches r.
int interpolation_degree(const PointSet& points, double tol = kDefaultRankTolerance);

}  // namespace momentgmm
