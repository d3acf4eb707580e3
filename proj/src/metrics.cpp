#include "momentgmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "momentgmm/errors.hpp"

namespace momentgmm {

namespace {

long long pairs(long long k) { return k * (k - 1) / 2; }

std::vector<int> compress(const std::vector<int>& labels, int& classes) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  classes = static_cast<int>(ids.size());
  return out;
}

}  // namespace

int spherical_parameter_count(int r, int m) { return (r - 1) + r * m + r; }

double bic(double loglik, long long n, int nu) {
  if (n < 1) throw InputError("bic: n must be >= 1");
  if (nu < 1) throw InputError("bic: nu must be >= 1");
  return 2.0 * loglik - std::log(static_cast<double>(n)) * nu;
}

double ari(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw InputError("ari: label vectors differ in length (" + std::to_string(labels_a.size()) + " vs " +
                     std::to_string(labels_b.size()) + ")");
  }
  const auto n = static_cast<long long>(labels_a.size());
  int ka = 0;
  int kb = 0;
  const auto a = compress(labels_a, ka);
  const auto b = compress(labels_b, kb);

  std::vector<long long> table(static_cast<std::size_t>(ka) * kb, 0);
  std::vector<long long> row(static_cast<std::size_t>(ka), 0);
  std::vector<long long> col(static_cast<std::size_t>(kb), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++table[static_cast<std::size_t>(a[i]) * kb + b[i]];
    ++row[static_cast<std::size_t>(a[i])];
    ++col[static_cast<std::size_t>(b[i])];
  }
  long long index = 0;
  for (long long c : table) index += pairs(c);
  long long sum_a = 0;
  for (long long c : row) sum_a += pairs(c);
  long long sum_b = 0;
  for (long long c : col) sum_b += pairs(c);

  const long long total = pairs(n);
  if (total == 0) return 1.0;
  const double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) / static_cast<double>(total);
  const double max_index = 0.5 * static_cast<double>(sum_a + sum_b);
  const double denom = max_index - expected;
  // zero only when both partitions are a single block or all singletons
  if (denom == 0.0) return 1.0;
  return (static_cast<double>(index) - expected) / denom;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weights) {
  const int n = static_cast<int>(weights.rows());
  if (weights.cols() != n) throw InputError("max_weight_assignment: matrix must be square");
  if (n == 0) return {};
  const double top = weights.maxCoeff();
  // minimise cost = top - w; 1-based potentials (Kuhn-Munkres with row/column potentials)
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = (top - weights(i0 - 1, j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return assignment;
}

double error_rate(const std::vector<int>& pred, const std::vector<int>& truth, int r) {
  if (pred.size() != truth.size()) throw InputError("error_rate: label vectors differ in length");
  if (pred.empty()) return 0.0;
  int size = r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0) throw InputError("error_rate: negative label");
    size = std::max({size, pred[i] + 1, truth[i] + 1});
  }
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i = 0; i < pred.size(); ++i) confusion(pred[i], truth[i]) += 1.0;
  const auto assignment = max_weight_assignment(confusion);
  double matched = 0.0;
  for (int k = 0; k < size; ++k) matched += confusion(k, assignment[static_cast<std::size_t>(k)]);
  const auto n = static_cast<double>(pred.size());
  return (n - matched) / n;
}

}  // namespace momentgmm
