#pragma once

#include <Eigen/Dense>

namespace momentgmm {

struct PcaResult {
  Eigen::MatrixXd scores;     // n x q, centred data projected on the loadings
  Eigen::MatrixXd loadings;   // m x q, top right singular vectors, descending
  Eigen::VectorXd singular_values;  // all min(n, m) values of the centred data
  Eigen::RowVectorXd mean;
};

/// Centre the data and project onto its top-q principal directions. Each
/// loading vector is signed so its largest-magnitude entry is positive.
PcaResult pca(const Eigen::Ref<const Eigen::MatrixXd>& data, int q);

}  // namespace momentgmm
