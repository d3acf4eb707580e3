#pragma once

// Waring decomposition of identifiable symmetric tensors.
//
// The column space of H_T^{k,d-k} is spanned by the Veronese vectors
// xi_j^(k) of the decomposition points. Restricting an orthonormal basis U of
// that space to the rows of monomials divisible by X_i gives slices U_i that
// are simultaneously diagonalisable, with the i-th coordinates of the points
// on the diagonals. Weights then follow from a linear least-squares fit.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "momentgmm/hankel.hpp"
#include "momentgmm/symtensor.hpp"

namespace momentgmm {

struct DecompositionOptions {
  std::optional<int> rank;
  double rank_tolerance = kDefaultRankTolerance;
  /// Row degree of the catalecticant; defaults to 2 (or d-1 when d < 3).
  std::optional<int> k;
  int refine_iterations = 5;
  std::uint64_t rng_seed = 0;
  /// Noisy input: take real parts of complex points instead of failing.
  bool empirical = false;

  void validate(int order) const;
};

struct PencilSlices {
  Eigen::MatrixXd basis;                // s_k x r, orthonormal columns
  std::vector<Eigen::MatrixXd> slices;  // m matrices, s_{k-1} x r
  int k = 0;
  int rank = 0;
  Eigen::VectorXd singular_values;
};

struct DiagonalizationResult {
  std::vector<Eigen::VectorXd> points;  // unit norm, largest-magnitude coordinate positive
  double imaginary_ratio = 0.0;         // max |Im| / max |Re| before realification
  bool complex_warning = false;
  int attempts = 0;
};

struct WeightFit {
  Eigen::VectorXd weights;
  double relative_residual = 0.0;
};

struct RefineResult {
  WaringDecomposition decomposition;
  std::vector<double> residual_trace;  // relative apolar residual, one entry per accepted state
  int iterations = 0;
};

struct DecompositionReport {
  WaringDecomposition decomposition;
  double residual = 0.0;  // relative apolar residual of the returned decomposition
  int rank = 0;
  int k = 0;
  Eigen::VectorXd singular_values;
  bool complex_warning = false;
  std::vector<double> refine_trace;
};

/// Flip/scale each point to unit norm with positive largest-magnitude
/// coordinate, moving the scale into the weight.
void normalize_points(WaringDecomposition& w);

/// Truncated SVD of the catalecticant and the shifted row slices.
PencilSlices truncated_svd_basis(const HankelMatrix& h, const DecompositionOptions& opts);

/// Recover the points (lines) from the slices via a random pencil.
DiagonalizationResult simultaneous_diagonalize(const PencilSlices& slices, std::uint64_t rng_seed,
                                               bool empirical = false);

WeightFit solve_weights(const SymmetricTensor& t, const std::vector<Eigen::VectorXd>& points);

/// Damped Gauss-Newton (Levenberg) on ||reconstruct(w) - t||^2 in the apolar norm.
RefineResult refine(const SymmetricTensor& t, const WaringDecomposition& w, int iterations);

double relative_residual(const SymmetricTensor& t, const WaringDecomposition& w);

DecompositionReport decompose_report(const SymmetricTensor& t, const DecompositionOptions& opts = {});

WaringDecomposition decompose(const SymmetricTensor& t, const DecompositionOptions& opts = {});

}  // namespace momentgmm
