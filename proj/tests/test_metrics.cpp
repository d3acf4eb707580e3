#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "momentgmm/errors.hpp"
#include "momentgmm/metrics.hpp"
#include "test_util.hpp"

using namespace momentgmm;

namespace {

std::vector<int> random_labels(std::mt19937_64& rng, int n, int r) {
  std::uniform_int_distribution<int> pick(0, r - 1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& l : out) l = pick(rng);
  return out;
}

// Restricted growth strings: every set partition of n points exactly once.
void all_partitions(int n, std::vector<int>& cur, int blocks, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int b = 0; b <= blocks; ++b) {
    cur.push_back(b);
    all_partitions(n, cur, std::max(blocks, b + 1), out);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("ari against pair counting on random labelings") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 6;
    const int r = 1 + (trial / 6) % 3;
    const auto a = random_labels(rng, n, r);
    const auto b = random_labels(rng, n, r);
    CHECK(ari(a, b) == testutil::ari_oracle(a, b));
    CHECK(error_rate(a, b, r) == testutil::error_rate_oracle(a, b, r));
  }
}

TEST_CASE("exhaustive partitions of five points") {
  std::vector<std::vector<int>> parts;
  std::vector<int> cur;
  all_partitions(5, cur, 0, parts);
  REQUIRE(parts.size() == 52);  // Bell number B5
  for (const auto& a : parts) {
    for (const auto& b : parts) {
      CHECK(ari(a, b) == testutil::ari_oracle(a, b));
      const int r = 1 + std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
      CHECK(error_rate(a, b, r) == testutil::error_rate_oracle(a, b, r));
    }
  }
}

TEST_CASE("ari special values") {
  CHECK(ari({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
  CHECK(ari({0, 0, 0}, {0, 0, 0}) == 1.0);
  CHECK(ari({0, 1, 2}, {0, 1, 2}) == 1.0);
  CHECK(ari({}, {}) == 1.0);
  CHECK(ari({0, 0, 1, 1}, {0, 1, 0, 1}) < 0.0);
  CHECK_THROWS_AS(ari({0, 1}, {0}), InputError);
}

TEST_CASE("error rate") {
  CHECK(error_rate({1, 1, 0, 0}, {0, 0, 1, 1}, 2) == 0.0);
  CHECK(error_rate({0, 0, 0, 1}, {0, 0, 1, 1}, 2) == 0.25);
  CHECK(error_rate({0, 0, 0, 0}, {0, 1, 2, 3}, 4) == 0.75);
  CHECK_THROWS_AS(error_rate({0, 1}, {0}, 2), InputError);
  CHECK(error_rate({0, 2}, {0, 1}, 2) == 0.0);  // labels beyond r widen the table
  CHECK_THROWS_AS(error_rate({0, -1}, {0, 1}, 2), InputError);
}

TEST_CASE("Hungarian assignment agrees with enumeration") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) w(i, j) = std::floor(testutil::uniform(rng, -5.0, 10.0));
    }
    const auto assign = max_weight_assignment(w);
    REQUIRE(static_cast<int>(assign.size()) == n);
    double got = 0.0;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
      CHECK(!used[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])]);
      used[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])] = true;
      got += w(i, assign[static_cast<std::size_t>(i)]);
    }
    const auto best = testutil::best_permutation(n, [&](int i, int j) { return -w(i, j); });
    double ref = 0.0;
    for (int i = 0; i < n; ++i) ref += w(i, best[static_cast<std::size_t>(i)]);
    CHECK(got == ref);
  }
  CHECK_THROWS_AS(max_weight_assignment(Eigen::MatrixXd::Zero(2, 3)), InputError);
}

TEST_CASE("BIC") {
  CHECK(spherical_parameter_count(4, 6) == 3 + 24 + 4);
  CHECK(spherical_parameter_count(3, 5) == 2 + 15 + 3);
  CHECK(spherical_parameter_count(1, 1) == 2);

  CHECK(std::abs(bic(-1000.0, 500, 31) - (2 * -1000.0 - 31 * std::log(500.0))) <= 1e-12 * 2000);
  CHECK(std::abs(bic(-14645.7, 1000, 31) - (-29291.4 - 31 * std::log(1000.0))) <= 1e-12 * 29291.4);
  CHECK(std::abs(bic(12.5, 10, 2) - (25.0 - 2 * std::log(10.0))) <= 1e-12 * 25);
  CHECK(bic(-10.0, 100, 5) > bic(-11.0, 100, 5));
  CHECK(bic(-10.0, 100, 5) > bic(-10.0, 100, 6));
}
