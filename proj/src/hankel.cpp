#include "momentgmm/hankel.hpp"

#include <string>

#include "momentgmm/errors.hpp"

namespace momentgmm {

HankelMatrix hankel(const SymmetricTensor& t, int k) {
  const int d = t.order();
  if (k < 1 || k > d - 1) {
    throw InputError("hankel: row degree k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(d - 1) + "]");
  }
  const int m = t.dim();
  const auto rows = MonomialBasis::get(m, k);
  const auto cols = MonomialBasis::get(m, d - k);

  HankelMatrix h{k, d, m, Eigen::MatrixXd(rows->size(), cols->size())};
  MultiIndex sum(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const MultiIndex& a = rows->exponent(i);
    for (std::size_t j = 0; j < cols->size(); ++j) {
      const MultiIndex& b = cols->exponent(j);
      for (int v = 0; v < m; ++v) sum[v] = a[v] + b[v];
      h.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t[sum];
    }
  }
  return h;
}

Eigen::MatrixXd evaluation_matrix(const PointSet& points, int k) {
  if (k < 1) throw InputError("evaluation_matrix: k must be >= 1");
  if (points.empty()) throw InputError("evaluation_matrix: empty point set");
  const int m = static_cast<int>(points.front().size());
  const auto basis = MonomialBasis::get(m, k);
  Eigen::MatrixXd e(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(basis->size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != m) throw InputError("evaluation_matrix: inconsistent point dimensions");
    for (std::size_t pos = 0; pos < basis->size(); ++pos) {
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pos)) =
          monomial_value(basis->exponent(pos), points[i]);
    }
  }
  return e;
}

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol * s[0]) ++rank;
  }
  return rank;
}

int interpolation_degree(const PointSet& points, double tol) {
  if (points.empty()) throw InputError("interpolation_degree: empty point set");
  for (const auto& p : points) {
    if (p.cwiseAbs().maxCoeff() == 0.0) throw InputError("interpolation_degree: zero point");
  }
  // Rows are rescaled to unit norm so the rank test does not depend on point scales.
  const int r = static_cast<int>(points.size());
  for (int k = 1; k <= r; ++k) {
    Eigen::MatrixXd e = evaluation_matrix(points, k);
    for (Eigen::Index i = 0; i < e.rows(); ++i) e.row(i).normalize();
    if (numerical_rank(e, tol) == r) return k;
  }
  throw NumericalError("interpolation_degree: evaluation map never reaches rank " +
                       std::to_string(r) + " for k <= r (points collinear or repeated?)");
}

}  // namespace momentgmm
