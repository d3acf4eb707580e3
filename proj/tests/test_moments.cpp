#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "momentgmm/benchmark.hpp"
#include "momentgmm/errors.hpp"
#include "momentgmm/gmm.hpp"
#include "momentgmm/moments.hpp"
#include "test_util.hpp"

using namespace momentgmm;
using testutil::gaussian_vector;

namespace {

// Straight sums over samples and index triples.
struct NaiveMoments {
  Eigen::VectorXd m1;
  Eigen::MatrixXd m2;
  std::vector<double> m3;  // m^3 dense
};

NaiveMoments naive_moments(const Eigen::MatrixXd& x, double sigma_sq, const Eigen::VectorXd& v) {
  const auto n = x.rows();
  const auto m = x.cols();
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  NaiveMoments out;
  out.m1 = Eigen::VectorXd::Zero(m);
  out.m2 = Eigen::MatrixXd::Zero(m, m);
  out.m3.assign(static_cast<std::size_t>(m * m * m), 0.0);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double proj = v.dot(x.row(s).transpose() - mean);
    for (Eigen::Index a = 0; a < m; ++a) {
      out.m1[a] += x(s, a) * proj * proj / n;
      for (Eigen::Index b = 0; b < m; ++b) {
        out.m2(a, b) += x(s, a) * x(s, b) / n;
        for (Eigen::Index c = 0; c < m; ++c) out.m3[(a * m + b) * m + c] += x(s, a) * x(s, b) * x(s, c) / n;
      }
    }
  }
  for (Eigen::Index a = 0; a < m; ++a) out.m2(a, a) -= sigma_sq;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      for (Eigen::Index c = 0; c < m; ++c) {
        double corr = 0.0;
        if (a == b) corr += out.m1[c];
        if (a == c) corr += out.m1[b];
        if (b == c) corr += out.m1[a];
        out.m3[(a * m + b) * m + c] -= corr;
      }
    }
  }
  return out;
}

void check_params_close(const GmmParams& truth, const GmmParams& est, double rel, double variance_min_weight = 0.0) {
  const int r = truth.components();
  REQUIRE(est.components() == r);
  const auto perm = testutil::best_permutation(
      r, [&](int i, int j) { return (truth.means.row(i) - est.means.row(j)).norm(); });
  for (int i = 0; i < r; ++i) {
    const int j = perm[static_cast<std::size_t>(i)];
    CHECK(std::abs(est.weights[j] - truth.weights[i]) <= rel * truth.weights[i]);
    if (truth.weights[i] >= variance_min_weight) {
      CHECK(std::abs(est.variances[j] - truth.variances[i]) <= rel * truth.variances[i]);
    }
    CHECK((est.means.row(j) - truth.means.row(i)).norm() <= rel * truth.means.row(i).norm());
  }
}

}  // namespace

TEST_CASE("empirical moments match naive sums") {
  std::mt19937_64 rng(1);
  const auto theta = testutil::random_params(rng, 3, 4);
  const auto ds = sample(theta, 300, 5);
  const auto mom = empirical_moments(ds.data);
  REQUIRE(mom.n_samples.has_value());
  CHECK(*mom.n_samples == 300);
  CHECK(mom.v.norm() == doctest::Approx(1.0));

  // sigma_bar^2 and v: smallest eigenpair of the 1/n covariance
  const Eigen::MatrixXd centered = ds.data.rowwise() - ds.data.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 300.0;
  CHECK((cov * mom.v - mom.sigma_bar_sq * mom.v).norm() < 1e-9 * cov.norm());
  CHECK(mom.sigma_bar_sq == doctest::Approx(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues()[0]));

  const auto ref = naive_moments(ds.data, mom.sigma_bar_sq, mom.v);
  CHECK((mom.m1 - ref.m1).norm() <= 1e-10 * ref.m1.norm());
  CHECK((mom.m2 - ref.m2).norm() <= 1e-10 * ref.m2.norm());
  const auto full = testutil::full_tensor(mom.m3);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    diff = std::max(diff, std::abs(full[i] - ref.m3[i]));
    norm = std::max(norm, std::abs(ref.m3[i]));
  }
  CHECK(diff <= 1e-10 * norm);
}

TEST_CASE("degenerate samples") {
  CHECK_THROWS_AS(empirical_moments(Eigen::MatrixXd::Ones(1, 3)), InputError);
  CHECK_THROWS_AS(empirical_moments(Eigen::MatrixXd(0, 3)), InputError);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(4, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(empirical_moments(bad), InputError);

  // identical rows: zero covariance, every eigenvalue repeated
  Eigen::MatrixXd same(5, 3);
  same.rowwise() = Eigen::RowVector3d(1.0, 2.0, 3.0);
  const auto mom = empirical_moments(same);
  CHECK(mom.multiplicity_warning);
  CHECK(mom.sigma_bar_sq == doctest::Approx(0.0));
  CHECK(mom.m1.isZero());
}

TEST_CASE("exact moments") {
  std::mt19937_64 rng(2);
  const auto theta = testutil::random_params(rng, 3, 5);
  const auto mom = exact_moments(theta);
  CHECK(!mom.n_samples.has_value());
  CHECK(std::abs(mom.sigma_bar_sq - theta.weights.dot(theta.variances)) <= 1e-12);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(5);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd mu = theta.means.row(i).transpose();
    m1 += theta.weights[i] * theta.variances[i] * mu;
    m2 += theta.weights[i] * mu * mu.transpose();
  }
  CHECK((mom.m1 - m1).norm() <= 1e-12 * m1.norm());
  CHECK((mom.m2 - m2).norm() <= 1e-12 * m2.norm());
  const Eigen::VectorXd x = gaussian_vector(rng, 5);
  double m3x = 0.0;
  for (int i = 0; i < 3; ++i) m3x += theta.weights[i] * std::pow(theta.means.row(i).dot(x), 3);
  CHECK(eval(mom.m3, x) == doctest::Approx(m3x).epsilon(1e-12));
}

TEST_CASE("sigma tilde for the first benchmark model") {
  GmmParams theta;
  theta.weights = Eigen::Vector4d(0.2782, 0.0139, 0.3324, 0.3756);
  theta.means = example_model(1).means;
  theta.variances = Eigen::Vector4d(1.5, 2.5, 5.0, 15.0);
  const double expected = 0.2782 * 1.5 + 0.0139 * 2.5 + 0.3324 * 5.0 + 0.3756 * 15.0;
  CHECK(std::abs(exact_moments(theta).sigma_bar_sq - expected) <= 1e-12);
}

TEST_CASE("large samples approach the exact moments") {
  const auto theta = example_model(2);
  const auto ds = sample(theta, 200000, 17);
  const auto emp = empirical_moments(ds.data);
  const auto ex = exact_moments(theta);
  CHECK(std::abs(emp.sigma_bar_sq - ex.sigma_bar_sq) <= 0.05 * ex.sigma_bar_sq);
  CHECK((emp.m1 - ex.m1).norm() <= 0.05 * ex.m1.norm());
  CHECK((emp.m2 - ex.m2).norm() <= 0.02 * ex.m2.norm());
  CHECK(apolar_norm(emp.m3 - ex.m3) <= 0.05 * apolar_norm(ex.m3));
}

TEST_CASE("recovery from exact moments") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 3 + trial % 4;
    const int r = 1 + trial % m;
    const auto theta = testutil::random_params(rng, r, m);
    const auto rec = recover_parameters(exact_moments(theta), r);
    CHECK(rec.m2_residual < 1e-8);
    CHECK(rec.m1_residual < 1e-8);
    CHECK(rec.clamped_variances == 0);
    CHECK(rec.clamped_weights == 0);
    check_params_close(theta, rec.params, 1e-6);
  }
}

TEST_CASE("recovery from a large sample is close") {
  const auto theta = example_model(1);
  const auto ds = sample(theta, 100000, 23);
  RecoveryOptions opts;
  opts.decomposition.empirical = true;
  const auto rec = recover_parameters(empirical_moments(ds.data), 4, opts);
  rec.params.validate();
  // loose: sampling error of third moments; the 1.4% component's variance
  // rests on about 1400 points and is not checked
  check_params_close(theta, rec.params, 0.35, 0.05);
}

TEST_CASE("recovery input checks") {
  std::mt19937_64 rng(4);
  const auto theta = testutil::random_params(rng, 2, 3);
  const auto mom = exact_moments(theta);
  CHECK_THROWS_AS(recover_parameters(mom, 4), InputError);
  CHECK_THROWS_AS(recover_parameters(mom, 0), InputError);
}
