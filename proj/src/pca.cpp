#include "momentgmm/pca.hpp"

#include <string>

#include "momentgmm/errors.hpp"

namespace momentgmm {

PcaResult pca(const Eigen::Ref<const Eigen::MatrixXd>& data, int q) {
  const auto m = static_cast<int>(data.cols());
  if (data.rows() < 1 || m < 1) throw InputError("pca: empty data");
  if (q < 1 || q > m) throw InputError("pca: q=" + std::to_string(q) + " must lie in [1, " + std::to_string(m) + "]");

  PcaResult out;
  out.mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - out.mean;
  // full V so that q = m is a rotation even when n < m
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  out.loadings = svd.matrixV().leftCols(q);
  for (int j = 0; j < q; ++j) {
    Eigen::Index arg = 0;
    out.loadings.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.loadings(arg, j) < 0) out.loadings.col(j) *= -1.0;
  }
  out.scores = centered * out.loadings;
  return out;
}

}  // namespace momentgmm
