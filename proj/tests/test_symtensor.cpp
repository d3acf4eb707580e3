#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "momentgmm/errors.hpp"
#include "momentgmm/io.hpp"
#include "momentgmm/symtensor.hpp"
#include "test_util.hpp"

using namespace momentgmm;
using testutil::gaussian_vector;
using testutil::random_tensor;

TEST_CASE("monomial basis order and counts") {
  const MonomialBasis b(2, 2);
  REQUIRE(b.size() == 3);
  CHECK(b.exponent(0) == MultiIndex{2, 0});
  CHECK(b.exponent(1) == MultiIndex{1, 1});
  CHECK(b.exponent(2) == MultiIndex{0, 2});

  const MonomialBasis c(3, 2);
  CHECK(c.exponent(1) == MultiIndex{1, 1, 0});
  CHECK(c.exponent(2) == MultiIndex{1, 0, 1});
  CHECK(c.exponent(3) == MultiIndex{0, 2, 0});

  CHECK(monomial_count(6, 3) == 56);
  CHECK(monomial_count(1, 7) == 1);
  CHECK(monomial_count(8, 0) == 1);

  for (int m = 1; m <= 5; ++m) {
    for (int d = 0; d <= 5; ++d) {
      const MonomialBasis basis(m, d);
      REQUIRE(basis.size() == monomial_count(m, d));
      std::uint64_t total = 0;
      for (std::size_t pos = 0; pos < basis.size(); ++pos) {
        CHECK(basis.index_of(basis.exponent(pos)) == pos);
        total += basis.multinomial_exact(pos);
      }
      std::uint64_t power = 1;
      for (int k = 0; k < d; ++k) power *= static_cast<std::uint64_t>(m);
      CHECK(total == power);  // multinomial theorem at X = (1, ..., 1)
    }
  }
}

TEST_CASE("multinomials are exact up to degree 20") {
  const MonomialBasis b(2, 20);
  // C(20, 10)
  CHECK(b.multinomial_exact(b.index_of({10, 10})) == 184756ULL);
  const MonomialBasis c(4, 20);
  CHECK(c.multinomial_exact(c.index_of({5, 5, 5, 5})) == 11732745024ULL);
  CHECK_THROWS_AS(MonomialBasis(2, 21), InputError);
}

TEST_CASE("index_of rejects wrong degree and dimension") {
  const MonomialBasis b(3, 3);
  CHECK_THROWS_AS(b.index_of({1, 1, 0}), InputError);
  CHECK_THROWS_AS(b.index_of({3, 0}), InputError);
  CHECK_THROWS_AS(b.index_of({4, -1, 0}), InputError);
}

TEST_CASE("eval matches a full-tensor contraction") {
  std::mt19937_64 rng(11);
  for (int m = 1; m <= 4; ++m) {
    for (int d = 1; d <= 4; ++d) {
      const auto t = random_tensor(rng, m, d);
      const Eigen::VectorXd x = gaussian_vector(rng, m);
      const double ref = testutil::eval_full(t, x);
      CHECK(eval(t, x) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("pow_linear evaluates to the power of the linear form") {
  std::mt19937_64 rng(12);
  for (int d = 1; d <= 5; ++d) {
    const Eigen::VectorXd v = gaussian_vector(rng, 4);
    const Eigen::VectorXd x = gaussian_vector(rng, 4);
    const auto p = pow_linear(v, d);
    CHECK(eval(p, x) == doctest::Approx(std::pow(v.dot(x), d)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(pow_linear(Eigen::VectorXd::Zero(3), 3), InputError);
}

TEST_CASE("apolar product equals the Frobenius product of full tensors") {
  std::mt19937_64 rng(13);
  for (int d = 1; d <= 4; ++d) {
    const auto p = random_tensor(rng, 3, d);
    const auto q = random_tensor(rng, 3, d);
    const auto fp = testutil::full_tensor(p);
    const auto fq = testutil::full_tensor(q);
    double ref = 0.0;
    for (std::size_t i = 0; i < fp.size(); ++i) ref += fp[i] * fq[i];
    CHECK(apolar(p, q) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(apolar(p, q) == doctest::Approx(apolar(q, p)).epsilon(1e-15));
    CHECK(apolar(p, p) > 0.0);
    CHECK(apolar_norm(p) == doctest::Approx(std::sqrt(apolar(p, p))));
  }
  CHECK_THROWS_AS(apolar(SymmetricTensor(3, 2), SymmetricTensor(3, 3)), InputError);
  CHECK_THROWS_AS(apolar(SymmetricTensor(2, 3), SymmetricTensor(3, 3)), InputError);
}

TEST_CASE("apolar duality with powers of linear forms") {
  std::mt19937_64 rng(14);
  for (int d = 2; d <= 4; ++d) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_tensor(rng, 4, d);
      const Eigen::VectorXd v = gaussian_vector(rng, 4);
      CHECK(apolar(pow_linear(v, d), p) == doctest::Approx(eval(p, v)).epsilon(1e-12));
    }
  }
  const Eigen::VectorXd a = gaussian_vector(rng, 3);
  const Eigen::VectorXd b = gaussian_vector(rng, 3);
  CHECK(apolar(pow_linear(a, 3), pow_linear(b, 3)) == doctest::Approx(std::pow(a.dot(b), 3)).epsilon(1e-12));
}

namespace {

/// Coefficients of p(Q^T X), via full-tensor contraction on each index.
SymmetricTensor rotate(const SymmetricTensor& p, const Eigen::MatrixXd& q) {
  const int m = p.dim();
  const int d = p.order();
  std::vector<double> cur = testutil::full_tensor(p);
  std::size_t total = cur.size();
  for (int axis = 0; axis < d; ++axis) {
    std::vector<double> next(total, 0.0);
    std::size_t stride = 1;
    for (int k = axis + 1; k < d; ++k) stride *= static_cast<std::size_t>(m);
    for (std::size_t flat = 0; flat < total; ++flat) {
      const auto i = static_cast<int>((flat / stride) % static_cast<std::size_t>(m));
      const std::size_t base = flat - static_cast<std::size_t>(i) * stride;
      for (int j = 0; j < m; ++j) next[base + static_cast<std::size_t>(j) * stride] += q(j, i) * cur[flat];
    }
    cur.swap(next);
  }
  SymmetricTensor out(m, d);
  for (std::size_t pos = 0; pos < out.size(); ++pos) {
    const MultiIndex& alpha = out.basis().exponent(pos);
    std::size_t flat = 0;
    for (int j = 0; j < m; ++j) {
      for (int e = 0; e < alpha[static_cast<std::size_t>(j)]; ++e) flat = flat * static_cast<std::size_t>(m) + j;
    }
    out.coeffs()[static_cast<Eigen::Index>(pos)] = cur[flat];
  }
  return out;
}

}  // namespace

TEST_CASE("apolar product is invariant under orthogonal changes of variables") {
  std::mt19937_64 rng(15);
  for (int d = 2; d <= 4; ++d) {
    Eigen::MatrixXd g(3, 3);
    for (int j = 0; j < 3; ++j) g.col(j) = gaussian_vector(rng, 3);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    const auto p = random_tensor(rng, 3, d);
    const auto r = random_tensor(rng, 3, d);
    const auto pq = rotate(p, q);
    const auto rq = rotate(r, q);
    // the rotation really changes the coefficients, and really is p(Q^T x)
    const Eigen::VectorXd x = gaussian_vector(rng, 3);
    CHECK(eval(pq, x) == doctest::Approx(eval(p, q.transpose() * x)).epsilon(1e-10));
    CHECK(apolar(pq, rq) == doctest::Approx(apolar(p, r)).epsilon(1e-10));
  }
}

TEST_CASE("partial derivative agrees with finite differences") {
  std::mt19937_64 rng(16);
  for (int d = 1; d <= 4; ++d) {
    const auto p = random_tensor(rng, 3, d);
    const Eigen::VectorXd x = gaussian_vector(rng, 3);
    for (int i = 0; i < 3; ++i) {
      const auto dp = partial_derivative(p, i);
      CHECK(dp.order() == d - 1);
      const double h = 1e-5;
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (eval(p, xp) - eval(p, xm)) / (2 * h);
      CHECK(eval(dp, x) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(partial_derivative(SymmetricTensor(2, 2), 2), InputError);
}

TEST_CASE("multiplying by a variable multiplies the polynomial") {
  std::mt19937_64 rng(17);
  const auto q = random_tensor(rng, 4, 2);
  const Eigen::VectorXd x = gaussian_vector(rng, 4);
  for (int i = 0; i < 4; ++i) {
    const auto xq = multiply_variable(q, i);
    CHECK(xq.order() == 3);
    CHECK(eval(xq, x) == doctest::Approx(x[i] * eval(q, x)).epsilon(1e-12));
  }
}

TEST_CASE("derivative is adjoint to variable multiplication") {
  std::mt19937_64 rng(18);
  for (int d = 2; d <= 4; ++d) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_tensor(rng, 3, d);
      const auto q = random_tensor(rng, 3, d - 1);
      const int i = trial % 3;
      const double lhs = apolar(p, multiply_variable(q, i));
      const double rhs = apolar(partial_derivative(p, i), q) / d;
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("reconstruct and arithmetic") {
  std::mt19937_64 rng(19);
  WaringDecomposition w;
  w.order = 3;
  w.weights = Eigen::Vector2d(2.0, -0.5);
  w.points = {gaussian_vector(rng, 3), gaussian_vector(rng, 3)};
  const auto t = reconstruct(w);
  const Eigen::VectorXd x = gaussian_vector(rng, 3);
  const double ref = 2.0 * std::pow(w.points[0].dot(x), 3) - 0.5 * std::pow(w.points[1].dot(x), 3);
  CHECK(eval(t, x) == doctest::Approx(ref).epsilon(1e-12));

  const auto s = t + 2.0 * t - t;
  CHECK((s.coeffs() - 2.0 * t.coeffs()).norm() == doctest::Approx(0.0));
  auto u = t;
  u *= 0.0;
  CHECK(u.coeffs().isZero());
  CHECK_THROWS_AS(t + SymmetricTensor(3, 2), InputError);
  CHECK_THROWS_AS(SymmetricTensor(2, 2, Eigen::VectorXd::Zero(4)), InputError);
}

TEST_CASE("coefficient access by multi-index") {
  SymmetricTensor t(2, 3);
  t[{2, 1}] = 4.0;
  CHECK(t.coeffs()[1] == 4.0);
  // T(x) = 4 * 3 * x1^2 x2
  CHECK(eval(t, Eigen::Vector2d(1.0, 2.0)) == doctest::Approx(24.0));
}

TEST_CASE("tensor JSON round trip is bit exact") {
  std::mt19937_64 rng(20);
  const auto t = random_tensor(rng, 5, 3);
  const std::string text = io::tensor_to_json(t).dump();
  const auto back = io::tensor_from_json(io::json::parse(text));
  REQUIRE(back.size() == t.size());
  CHECK(back.dim() == 5);
  CHECK(back.order() == 3);
  CHECK(std::memcmp(back.coeffs().data(), t.coeffs().data(), sizeof(double) * t.size()) == 0);
  CHECK_THROWS_AS(io::tensor_from_json(io::json::parse(R"({"dim":2,"order":2,"coeffs":[1,2]})")), InputError);
}
