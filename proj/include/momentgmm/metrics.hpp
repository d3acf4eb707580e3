#pragma once

#include <vector>

#include <Eigen/Dense>

namespace momentgmm {

/// Number of free parameters of a spherical mixture with component-specific variances.
int spherical_parameter_count(int r, int m);

/// 2 loglik - nu log n; larger is better.
double bic(double loglik, long long n, int nu);

double ari(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

/// Minimum over relabelings of pred of the misclassification fraction.
double error_rate(const std::vector<int>& pred, const std::vector<int>& truth, int r);

/// Maximum-weight perfect matching on a square matrix (Hungarian algorithm).
/// Returns assignment[row] = column.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weights);

struct MetricReport {
  double bic = 0.0;
  double ari = 0.0;
  double error_rate = 0.0;
  double loglik = 0.0;
  int nu = 0;
};

}  // namespace momentgmm
