#include "momentgmm/moments.hpp"

#include <cmath>
#include <string>

#include "momentgmm/errors.hpp"

namespace momentgmm {

namespace {

constexpr double kMultiplicityGap = 1e-10;
constexpr double kDegenerateScale = 1e-10;
constexpr double kWeightClamp = 1e-6;

}  // namespace

MomentSet empirical_moments(const Eigen::Ref<const Eigen::MatrixXd>& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index m = data.cols();
  if (n < 2) throw InputError("empirical_moments: need at least 2 samples, got " + std::to_string(n));
  if (m < 1) throw InputError("empirical_moments: data has no columns");
  if (!data.allFinite()) throw InputError("empirical_moments: data contains non-finite entries");

  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::VectorXd mean = data.colwise().sum().transpose() * inv_n;
  const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered * inv_n;
  cov = 0.5 * (cov + cov.transpose());

  // Eigenvalues come back in increasing order with a deterministic basis.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& lambda = eig.eigenvalues();

  MomentSet out;
  out.n_samples = static_cast<std::int64_t>(n);
  out.sigma_bar_sq = std::max(0.0, lambda[0]);
  out.v = eig.eigenvectors().col(0);
  if (m > 1) {
    const double top = std::max(lambda[m - 1], 0.0);
    out.multiplicity_warning = (lambda[1] - lambda[0]) <= kMultiplicityGap * top;
  }

  // x_ij (v.(x_i - mean))^2, centring only inside the square.
  const Eigen::VectorXd proj_sq = (centered * out.v).array().square().matrix();
  out.m1 = data.transpose() * proj_sq * inv_n;

  out.m2 = data.transpose() * data * inv_n;
  out.m2 = 0.5 * (out.m2 + out.m2.transpose());
  out.m2.diagonal().array() -= out.sigma_bar_sq;

  const int dim = static_cast<int>(m);
  SymmetricTensor m3(dim, 3);
  const auto& basis = m3.basis();
  Eigen::MatrixXd monomials(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t pos = 0; pos < basis.size(); ++pos) {
    const MultiIndex& alpha = basis.exponent(pos);
    Eigen::VectorXd column = Eigen::VectorXd::Ones(n);
    for (int j = 0; j < dim; ++j) {
      for (int e = 0; e < alpha[j]; ++e) column.array() *= data.col(j).array();
    }
    monomials.col(static_cast<Eigen::Index>(pos)) = column;
  }
  m3.coeffs() = monomials.colwise().sum().transpose() * inv_n;

  // subtract (delta_ab m1_c + delta_ac m1_b + delta_bc m1_a)
  for (std::size_t pos = 0; pos < basis.size(); ++pos) {
    const MultiIndex& alpha = basis.exponent(pos);
    double correction = 0.0;
    for (int j = 0; j < dim; ++j) {
      if (alpha[j] == 3) {
        correction = 3.0 * out.m1[j];
        break;
      }
      if (alpha[j] == 2) {
        for (int c = 0; c < dim; ++c) {
          if (alpha[c] == 1) correction = out.m1[c];
        }
        break;
      }
    }
    m3.coeffs()[static_cast<Eigen::Index>(pos)] -= correction;
  }
  out.m3 = std::move(m3);
  return out;
}

MomentSet exact_moments(const GmmParams& theta) {
  // loose: published parameter lists round the weights
  theta.validate(1e-3);
  const int r = theta.components();
  const int m = theta.dim();
  MomentSet out;
  out.sigma_bar_sq = theta.weights.dot(theta.variances);
  out.m1 = theta.means.transpose() * theta.weights.cwiseProduct(theta.variances);
  out.m2 = theta.means.transpose() * theta.weights.asDiagonal() * theta.means;

  WaringDecomposition w;
  w.order = 3;
  w.weights = theta.weights;
  for (int i = 0; i < r; ++i) w.points.emplace_back(theta.means.row(i).transpose());
  out.m3 = reconstruct(w);

  // Not computed from a covariance; any unit vector is a placeholder.
  out.v = Eigen::VectorXd::Zero(m);
  out.v[m - 1] = 1.0;
  return out;
}

RecoveredParams recover_parameters(const MomentSet& moments, int r, const RecoveryOptions& opts) {
  const int m = moments.m3.dim();
  if (r < 1) throw InputError("recover_parameters: r must be >= 1");
  if (r > m) {
    throw InputError("recover_parameters: r=" + std::to_string(r) + " exceeds dimension m=" + std::to_string(m) +
                     " (the mixture must satisfy r <= m)");
  }
  if (moments.m2.rows() != m || moments.m2.cols() != m || moments.m1.size() != m) {
    throw InputError("recover_parameters: inconsistent moment shapes");
  }

  DecompositionOptions dopts = opts.decomposition;
  dopts.rank = r;
  if (!dopts.k) dopts.k = 2;
  const DecompositionReport report = decompose_report(moments.m3, dopts);
  const WaringDecomposition& w3 = report.decomposition;

  RecoveredParams out;
  out.m3_residual = report.residual;
  out.complex_warning = report.complex_warning;

  // sum_i lambda_i w~_i (mu~_i.X)^2 = M2(X), matched entrywise on the m x m matrix
  Eigen::MatrixXd quad(m * m, r);
  for (int i = 0; i < r; ++i) {
    const Eigen::VectorXd& p = w3.points[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd outer = w3.weights[i] * p * p.transpose();
    quad.col(i) = outer.reshaped();
  }
  const Eigen::VectorXd m2vec = moments.m2.reshaped();
  const Eigen::VectorXd lambda = quad.colPivHouseholderQr().solve(m2vec);
  const double m2_norm = m2vec.norm();
  out.m2_residual = m2_norm > 0 ? (quad * lambda - m2vec).norm() / m2_norm : (quad * lambda).norm();
  out.scales = lambda;

  for (int i = 0; i < r; ++i) {
    if (!(std::abs(lambda[i]) >= kDegenerateScale)) {
      throw DegenerateScaleError("recover_parameters: vanishing scale for component " + std::to_string(i));
    }
  }

  GmmParams theta;
  theta.weights.resize(r);
  theta.means.resize(r, m);
  theta.variances.resize(r);
  for (int i = 0; i < r; ++i) {
    theta.weights[i] = lambda[i] * lambda[i] * lambda[i] * w3.weights[i];
    theta.means.row(i) = w3.points[static_cast<std::size_t>(i)].transpose() / lambda[i];
  }

  // sum_i w_i s_i^2 mu_i = m1
  Eigen::MatrixXd lin(m, r);
  for (int i = 0; i < r; ++i) lin.col(i) = theta.weights[i] * theta.means.row(i).transpose();
  theta.variances = lin.colPivHouseholderQr().solve(moments.m1);
  const double m1_norm = moments.m1.norm();
  out.m1_residual = m1_norm > 0 ? (lin * theta.variances - moments.m1).norm() / m1_norm
                                : (lin * theta.variances).norm();

  if ((theta.weights.array() <= 0.0).all()) {
    throw RecoveryError("recover_parameters: all recovered weights are non-positive", report.residual);
  }
  for (int i = 0; i < r; ++i) {
    if (theta.weights[i] <= 0.0) {
      theta.weights[i] = kWeightClamp;
      ++out.clamped_weights;
    }
    if (!(theta.variances[i] > 0.0)) {
      theta.variances[i] = std::max(1e-6, 0.01 * moments.sigma_bar_sq);
      ++out.clamped_variances;
    }
  }
  theta.weights /= theta.weights.sum();
  out.params = std::move(theta);
  return out;
}

}  // namespace momentgmm
