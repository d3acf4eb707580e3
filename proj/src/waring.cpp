#include "momentgmm/waring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "momentgmm/errors.hpp"

namespace momentgmm {

namespace {

constexpr int kDiagonalizeAttempts = 5;
constexpr double kEigenClusterTolerance = 1e-10;
constexpr double kImaginaryTolerance = 1e-6;
constexpr double kCollinearTolerance = 1e-12;
constexpr double kExactResidualLimit = 1e-6;

Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

/// Unit norm, largest-magnitude coordinate positive. Returns the scale s with
/// point = s * normalized.
double normalize_in_place(Eigen::VectorXd& point) {
  Eigen::Index arg = 0;
  point.cwiseAbs().maxCoeff(&arg);
  double scale = point.norm();
  if (point[arg] < 0) scale = -scale;
  point /= scale;
  return scale;
}

}  // namespace

void DecompositionOptions::validate(int order) const {
  if (k && (*k < 1 || *k > order - 1)) {
    throw InputError("decompose: k=" + std::to_string(*k) + " outside [1, " + std::to_string(order - 1) + "]");
  }
  if (rank && *rank < 1) throw InputError("decompose: rank must be >= 1");
  if (refine_iterations < 0 || refine_iterations > 50) {
    throw InputError("decompose: refine_iterations must lie in [0, 50]");
  }
  if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0)) {
    throw InputError("decompose: rank_tolerance must lie in (0, 1)");
  }
}

void normalize_points(WaringDecomposition& w) {
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    const double s = normalize_in_place(w.points[i]);
    w.weights[static_cast<Eigen::Index>(i)] *= std::pow(s, w.order);
  }
}

double relative_residual(const SymmetricTensor& t, const WaringDecomposition& w) {
  const double diff = apolar_norm(reconstruct(w) - t);
  const double norm = apolar_norm(t);
  return norm > 0.0 ? diff / norm : diff;
}

PencilSlices truncated_svd_basis(const HankelMatrix& h, const DecompositionOptions& opts) {
  const int m = h.dim;
  const int k = h.k;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(h.matrix, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || !(s[0] > 0.0)) throw ZeroTensorError("decompose: zero tensor (all singular values vanish)");

  int r = 0;
  if (opts.rank) {
    r = *opts.rank;
  } else {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] > opts.rank_tolerance * s[0]) ++r;
    }
  }
  const auto lower_size = static_cast<int>(monomial_count(m, k - 1));
  if (r > lower_size || r > s.size()) {
    throw RankDeficiencyError("decompose: rank " + std::to_string(r) + " exceeds s_{k-1}=" +
                              std::to_string(lower_size) + " or s_{d-k}=" + std::to_string(s.size()) +
                              " (try a larger k)");
  }

  PencilSlices out;
  out.k = k;
  out.rank = r;
  out.singular_values = s;
  out.basis = svd.matrixU().leftCols(r);

  const auto upper = MonomialBasis::get(m, k);
  const auto lower = MonomialBasis::get(m, k - 1);
  out.slices.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd slice(static_cast<Eigen::Index>(lower->size()), r);
    for (std::size_t pos = 0; pos < lower->size(); ++pos) {
      MultiIndex shifted = lower->exponent(pos);
      ++shifted[i];
      slice.row(static_cast<Eigen::Index>(pos)) = out.basis.row(static_cast<Eigen::Index>(upper->index_of(shifted)));
    }
    out.slices.push_back(std::move(slice));
  }
  return out;
}

DiagonalizationResult simultaneous_diagonalize(const PencilSlices& slices, std::uint64_t rng_seed,
                                               bool empirical) {
  using ComplexMatrix = Eigen::MatrixXcd;
  const int m = static_cast<int>(slices.slices.size());
  const int r = slices.rank;
  if (m == 0 || r < 1) throw InputError("simultaneous_diagonalize: empty pencil");
  if (slices.slices.front().rows() < r) {
    throw RankDeficiencyError("simultaneous_diagonalize: rank exceeds slice height");
  }

  std::string last_failure;
  for (int attempt = 0; attempt < kDiagonalizeAttempts; ++attempt) {
    std::mt19937_64 rng(rng_seed + static_cast<std::uint64_t>(attempt));
    const Eigen::VectorXd a = random_unit(rng, m);
    const Eigen::VectorXd b = random_unit(rng, m);
    Eigen::MatrixXd ma = Eigen::MatrixXd::Zero(slices.slices.front().rows(), r);
    Eigen::MatrixXd mb = ma;
    for (int i = 0; i < m; ++i) {
      ma += a[i] * slices.slices[i];
      mb += b[i] * slices.slices[i];
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ma);
    if (cod.rank() < r) {
      last_failure = "random combination of slices is rank deficient";
      continue;
    }

    // pinv(M_a) M_b = F diag(b.xi_j / a.xi_j) F^{-1}
    Eigen::EigenSolver<Eigen::MatrixXd> eig(cod.solve(mb));
    if (eig.info() != Eigen::Success) {
      last_failure = "eigen-solver did not converge";
      continue;
    }
    const Eigen::VectorXcd lambda = eig.eigenvalues();
    const double scale = lambda.cwiseAbs().maxCoeff();
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < r; ++i) {
      for (int j = i + 1; j < r; ++j) min_gap = std::min(min_gap, std::abs(lambda[i] - lambda[j]));
    }
    if (r > 1 && min_gap < kEigenClusterTolerance * scale) {
      last_failure = "clustered eigenvalues in the random pencil";
      continue;
    }

    // Each eigenvector f_j of the pencil is a common eigenvector of every
    // pinv(M_a) U_i, with eigenvalue xi_{j,i} / (a . xi_j).
    const ComplexMatrix f = eig.eigenvectors();
    ComplexMatrix coords(r, m);
    for (int i = 0; i < m; ++i) {
      const ComplexMatrix ai = cod.solve(slices.slices[i]).cast<std::complex<double>>();
      for (int j = 0; j < r; ++j) {
        const Eigen::VectorXcd fj = f.col(j);
        coords(j, i) = fj.dot(ai * fj) / fj.squaredNorm();
      }
    }

    const double max_re = coords.real().cwiseAbs().maxCoeff();
    const double max_im = coords.imag().cwiseAbs().maxCoeff();
    DiagonalizationResult result;
    result.attempts = attempt + 1;
    result.imaginary_ratio = max_re > 0.0 ? max_im / max_re : std::numeric_limits<double>::infinity();
    if (!(max_re > 0.0)) {
      last_failure = "recovered points vanish";
      continue;
    }
    if (result.imaginary_ratio > kImaginaryTolerance) {
      if (!empirical) {
        throw NumericalError("simultaneous_diagonalize: complex points (|Im|/|Re| = " +
                             std::to_string(result.imaginary_ratio) + ") for a tensor expected real");
      }
      result.complex_warning = true;
    }
    // A conjugate pair z, conj(z) would collapse onto the same real part; Re + Im
    // keeps the pair apart (as Re + Im and Re - Im) and leaves real points alone.
    result.points.reserve(static_cast<std::size_t>(r));
    for (int j = 0; j < r; ++j) {
      Eigen::VectorXd p = coords.row(j).real().transpose();
      if (result.complex_warning) p += coords.row(j).imag().transpose();
      if (!(p.norm() > 0.0) || !p.allFinite()) {
        last_failure = "degenerate recovered point";
        result.points.clear();
        break;
      }
      normalize_in_place(p);
      result.points.push_back(std::move(p));
    }
    if (result.points.empty()) continue;
    return result;
  }
  throw NumericalError("simultaneous_diagonalize: " + last_failure + " after " +
                       std::to_string(kDiagonalizeAttempts) + " attempts");
}

WeightFit solve_weights(const SymmetricTensor& t, const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) throw InputError("solve_weights: no points");
  const Eigen::Index r = static_cast<Eigen::Index>(points.size());
  const Eigen::ArrayXd sqrt_mult = t.basis().multinomials().array().sqrt();
  Eigen::MatrixXd design(static_cast<Eigen::Index>(t.size()), r);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (points[i].size() != t.dim()) throw InputError("solve_weights: point dimension mismatch");
    design.col(i) = (pow_linear(points[i], t.order()).coeffs().array() * sqrt_mult).matrix();
  }
  const Eigen::VectorXd rhs = (t.coeffs().array() * sqrt_mult).matrix();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (design.rows() < r || s[r - 1] <= kCollinearTolerance * s[0]) {
    throw CollinearPointsError("solve_weights: design matrix is numerically rank deficient (collinear points?)");
  }
  WeightFit fit;
  fit.weights = svd.solve(rhs);
  const double diff = (design * fit.weights - rhs).norm();
  const double norm = rhs.norm();
  fit.relative_residual = norm > 0.0 ? diff / norm : diff;
  return fit;
}

RefineResult refine(const SymmetricTensor& t, const WaringDecomposition& w, int iterations) {
  const auto& basis = t.basis();
  const int m = t.dim();
  const auto r = static_cast<Eigen::Index>(w.rank());
  const auto rows = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index unknowns = r * (1 + m);
  const Eigen::ArrayXd sqrt_mult = basis.multinomials().array().sqrt();
  const Eigen::VectorXd target = (t.coeffs().array() * sqrt_mult).matrix();
  const double target_norm = target.norm();
  const auto relative = [&](double norm) { return target_norm > 0.0 ? norm / target_norm : norm; };

  Eigen::VectorXd params(unknowns);
  for (Eigen::Index i = 0; i < r; ++i) {
    params[i] = w.weights[i];
    params.segment(r + i * m, m) = w.points[static_cast<std::size_t>(i)];
  }

  const auto residual = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd f = -target;
    for (std::size_t pos = 0; pos < basis.size(); ++pos) {
      double value = 0.0;
      for (Eigen::Index i = 0; i < r; ++i) {
        value += x[i] * monomial_value(basis.exponent(pos), x.segment(r + i * m, m));
      }
      f[static_cast<Eigen::Index>(pos)] += sqrt_mult[static_cast<Eigen::Index>(pos)] * value;
    }
    return f;
  };

  const auto jacobian = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rows, unknowns);
    for (std::size_t pos = 0; pos < basis.size(); ++pos) {
      const auto row = static_cast<Eigen::Index>(pos);
      const MultiIndex& alpha = basis.exponent(pos);
      for (Eigen::Index i = 0; i < r; ++i) {
        const Eigen::VectorXd xi = x.segment(r + i * m, m);
        jac(row, i) = sqrt_mult[row] * monomial_value(alpha, xi);
        for (int j = 0; j < m; ++j) {
          if (alpha[j] == 0) continue;
          MultiIndex lowered = alpha;
          --lowered[j];
          jac(row, r + i * m + j) = sqrt_mult[row] * x[i] * alpha[j] * monomial_value(lowered, xi);
        }
      }
    }
    return jac;
  };

  RefineResult out;
  Eigen::VectorXd f = residual(params);
  double cost = f.squaredNorm();
  out.residual_trace.push_back(relative(std::sqrt(cost)));

  double damping = 1e-6;
  bool moved = false;
  for (int it = 0; it < iterations && cost > 0.0; ++it) {
    const Eigen::MatrixXd jac = jacobian(params);
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * f;
    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Eigen::MatrixXd lhs = normal;
      lhs.diagonal().array() += damping;
      const Eigen::VectorXd step = lhs.ldlt().solve(-gradient);
      if (!step.allFinite()) {
        damping *= 10.0;
        continue;
      }
      const Eigen::VectorXd candidate = params + step;
      const Eigen::VectorXd f_new = residual(candidate);
      const double cost_new = f_new.squaredNorm();
      if (cost_new < cost) {
        params = candidate;
        f = f_new;
        cost = cost_new;
        damping = std::max(damping / 10.0, 1e-15);
        accepted = true;
      } else {
        damping *= 10.0;
      }
    }
    ++out.iterations;
    if (!accepted) break;
    moved = true;
    out.residual_trace.push_back(relative(std::sqrt(cost)));
  }

  out.decomposition = w;
  if (moved) {
    for (Eigen::Index i = 0; i < r; ++i) {
      out.decomposition.weights[i] = params[i];
      out.decomposition.points[static_cast<std::size_t>(i)] = params.segment(r + i * m, m);
    }
  }
  return out;
}

DecompositionReport decompose_report(const SymmetricTensor& t, const DecompositionOptions& opts) {
  const int d = t.order();
  if (d < 2) throw InputError("decompose: order must be >= 2");
  opts.validate(d);
  const int k = opts.k.value_or(std::min(2, d - 1));

  const HankelMatrix h = hankel(t, k);
  const PencilSlices slices = truncated_svd_basis(h, opts);
  const DiagonalizationResult diag = simultaneous_diagonalize(slices, opts.rng_seed, opts.empirical);
  const WeightFit fit = solve_weights(t, diag.points);

  DecompositionReport report;
  report.rank = slices.rank;
  report.k = k;
  report.singular_values = slices.singular_values;
  report.complex_warning = diag.complex_warning;
  report.decomposition = WaringDecomposition{fit.weights, diag.points, d};
  report.residual = fit.relative_residual;

  if (opts.refine_iterations > 0 && report.residual > 0.0) {
    RefineResult refined = refine(t, report.decomposition, opts.refine_iterations);
    report.refine_trace = refined.residual_trace;
    if (refined.residual_trace.back() < report.residual) {
      report.decomposition = std::move(refined.decomposition);
      normalize_points(report.decomposition);
      report.residual = relative_residual(t, report.decomposition);
    }
  }

  if (!opts.empirical && !(report.residual <= kExactResidualLimit)) {
    throw NumericalError("decompose: reconstruction residual " + std::to_string(report.residual) +
                             " too large (rank or k inadequate, or tensor not identifiable)",
                         report.residual);
  }
  return report;
}

WaringDecomposition decompose(const SymmetricTensor& t, const DecompositionOptions& opts) {
  return decompose_report(t, opts).decomposition;
}

}  // namespace momentgmm
