#include "momentgmm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "momentgmm/errors.hpp"

namespace momentgmm {

namespace {

constexpr double kEmptyComponent = 1e-10;

void check_dims(const GmmParams& theta, Eigen::Index m, const char* where) {
  if (theta.dim() != m) {
    throw InputError(std::string(where) + ": data has " + std::to_string(m) + " columns, mixture has dim " +
                     std::to_string(theta.dim()));
  }
}

/// log(w_j) + log N(x | mu_j, s_j^2 I) for every component.
void component_log_terms(const GmmParams& theta, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::VectorXd& log_norm, Eigen::Ref<Eigen::VectorXd> out) {
  for (int j = 0; j < theta.components(); ++j) {
    const double dist = (x - theta.means.row(j).transpose()).squaredNorm();
    out[j] = log_norm[j] - 0.5 * dist / theta.variances[j];
  }
}

Eigen::VectorXd log_normalizers(const GmmParams& theta) {
  const double m = theta.dim();
  Eigen::VectorXd out(theta.components());
  for (int j = 0; j < theta.components(); ++j) {
    out[j] = std::log(theta.weights[j]) - 0.5 * m * std::log(2.0 * std::numbers::pi * theta.variances[j]);
  }
  return out;
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

double squared_distance(const Eigen::Ref<const Eigen::MatrixXd>& data, Eigen::Index i,
                        const Eigen::Ref<const Eigen::MatrixXd>& centers, Eigen::Index j) {
  return (data.row(i) - centers.row(j)).squaredNorm();
}

}  // namespace

void GmmParams::validate(double tol) const {
  const auto r = weights.size();
  if (r < 1) throw InputError("GmmParams: no components");
  if (means.rows() != r || variances.size() != r) {
    throw InputError("GmmParams: weights/means/variances disagree on the number of components");
  }
  if (means.cols() < 1) throw InputError("GmmParams: zero-dimensional means");
  if (!weights.allFinite() || !means.allFinite() || !variances.allFinite()) {
    throw InputError("GmmParams: non-finite entries");
  }
  if ((weights.array() < 0.0).any()) throw InputError("GmmParams: negative weight");
  if (std::abs(weights.sum() - 1.0) > tol) throw InputError("GmmParams: weights do not sum to 1");
  if ((variances.array() <= 0.0).any()) throw InputError("GmmParams: variances must be positive");
}

double pooled_variance(const Eigen::Ref<const Eigen::MatrixXd>& data) {
  if (data.size() == 0) return 0.0;
  const Eigen::RowVectorXd mean = data.colwise().mean();
  return (data.rowwise() - mean).squaredNorm() / static_cast<double>(data.size());
}

double log_density(const GmmParams& theta, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_dims(theta, x.size(), "log_density");
  Eigen::VectorXd terms(theta.components());
  component_log_terms(theta, x, log_normalizers(theta), terms);
  return log_sum_exp(terms);
}

Dataset sample(const GmmParams& theta, int n, std::uint64_t rng_seed) {
  if (n < 1) throw InputError("sample: n must be >= 1");
  theta.validate();
  std::mt19937_64 rng(rng_seed);
  std::discrete_distribution<int> pick(theta.weights.data(), theta.weights.data() + theta.weights.size());
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset out;
  out.data.resize(n, theta.dim());
  out.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int label = pick(rng);
    out.labels[static_cast<std::size_t>(i)] = label;
    const double sd = std::sqrt(theta.variances[label]);
    for (int j = 0; j < theta.dim(); ++j) out.data(i, j) = theta.means(label, j) + sd * normal(rng);
  }
  return out;
}

EStepResult e_step(const GmmParams& theta, const Eigen::Ref<const Eigen::MatrixXd>& data) {
  check_dims(theta, data.cols(), "e_step");
  const Eigen::Index n = data.rows();
  const int r = theta.components();
  const Eigen::VectorXd log_norm = log_normalizers(theta);

  EStepResult out;
  out.responsibilities.resize(n, r);
  Eigen::VectorXd terms(r);
  for (Eigen::Index i = 0; i < n; ++i) {
    component_log_terms(theta, data.row(i).transpose(), log_norm, terms);
    const double lse = log_sum_exp(terms);
    out.loglik += lse;
    out.responsibilities.row(i) = (terms.array() - lse).exp().transpose();
    // renormalise away the last bit of rounding
    out.responsibilities.row(i) /= out.responsibilities.row(i).sum();
  }
  return out;
}

MStepResult m_step(const Eigen::Ref<const Eigen::MatrixXd>& data, const Eigen::Ref<const Eigen::MatrixXd>& resp,
                   const MStepOptions& opts) {
  const Eigen::Index n = data.rows();
  const Eigen::Index m = data.cols();
  const auto r = static_cast<int>(resp.cols());
  if (resp.rows() != n) throw InputError("m_step: responsibilities and data disagree on n");
  if (r < 1 || n < 1) throw InputError("m_step: empty input");

  const double pooled = pooled_variance(data);
  const double floor = opts.variance_floor >= 0.0 ? opts.variance_floor : kVarianceFloor * pooled;
  const double pooled_safe = std::max(pooled, std::max(floor, std::numeric_limits<double>::min()));

  MStepResult out;
  GmmParams& theta = out.params;
  const Eigen::VectorXd mass = resp.colwise().sum().transpose();
  theta.weights = mass / static_cast<double>(n);
  theta.means.resize(r, m);
  theta.variances.resize(r);

  std::mt19937_64 rng(opts.rng_seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  for (int j = 0; j < r; ++j) {
    if (mass[j] < kEmptyComponent * static_cast<double>(n)) {
      theta.means.row(j) = data.row(pick(rng));
      theta.variances[j] = pooled_safe;
      theta.weights[j] = 1.0 / static_cast<double>(n);
      ++out.reseeded;
      continue;
    }
    theta.means.row(j) = resp.col(j).transpose() * data / mass[j];
    double spread = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) spread += resp(i, j) * (data.row(i) - theta.means.row(j)).squaredNorm();
    theta.variances[j] = std::max(spread / (static_cast<double>(m) * mass[j]), floor);
    if (!(theta.variances[j] > 0.0)) theta.variances[j] = pooled_safe;
  }
  theta.weights /= theta.weights.sum();
  return out;
}

std::vector<int> hard_labels(const Eigen::Ref<const Eigen::MatrixXd>& resp) {
  std::vector<int> labels(static_cast<std::size_t>(resp.rows()));
  for (Eigen::Index i = 0; i < resp.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < resp.cols(); ++j) {
      if (resp(i, j) > resp(i, best)) best = j;
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

EmResult em_fit(const Eigen::Ref<const Eigen::MatrixXd>& data, const GmmParams& init, const EmOptions& opts) {
  init.validate(1e-6);
  check_dims(init, data.cols(), "em_fit");
  if (opts.max_iter < 0) throw InputError("em_fit: max_iter must be >= 0");

  EmResult out;
  out.params = init;
  EStepResult e = e_step(out.params, data);
  out.loglik_trace.push_back(e.loglik);
  for (int it = 1; it <= opts.max_iter; ++it) {
    MStepOptions mopts;
    mopts.rng_seed = opts.rng_seed + static_cast<std::uint64_t>(it);
    MStepResult mres = m_step(data, e.responsibilities, mopts);
    out.reseeded += mres.reseeded;
    out.params = std::move(mres.params);
    e = e_step(out.params, data);
    ++out.iterations;
    const double previous = out.loglik_trace.back();
    out.loglik_trace.push_back(e.loglik);
    if (e.loglik - previous < opts.tol * std::abs(previous)) {
      out.converged = true;
      break;
    }
  }
  out.hard_labels = hard_labels(e.responsibilities);
  return out;
}

double min_relative_step(const std::vector<double>& trace) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t < trace.size(); ++t) {
    const double scale = std::max(std::abs(trace[t - 1]), std::numeric_limits<double>::min());
    worst = std::min(worst, (trace[t] - trace[t - 1]) / scale);
  }
  return worst;
}

std::string to_string(Initializer init) {
  switch (init) {
    case Initializer::kmeans: return "kmeans";
    case Initializer::moments: return "moments";
    case Initializer::emem: return "emem";
    case Initializer::random: return "random";
  }
  return "unknown";
}

Initializer initializer_from_string(const std::string& name) {
  if (name == "kmeans" || name == "km") return Initializer::kmeans;
  if (name == "moments" || name == "mom") return Initializer::moments;
  if (name == "emem" || name == "emEM") return Initializer::emem;
  if (name == "random") return Initializer::random;
  throw InputError("unknown initializer '" + name + "' (expected kmeans, moments, emem or random)");
}

GmmParams init_random(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, std::uint64_t rng_seed) {
  const Eigen::Index n = data.rows();
  if (r < 1 || r > n) throw InputError("init_random: need 1 <= r <= n");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(rng_seed);
  // partial Fisher-Yates: the first r slots are a uniform r-subset in random order
  for (int j = 0; j < r; ++j) {
    std::uniform_int_distribution<Eigen::Index> pick(j, n - 1);
    std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(pick(rng))]);
  }
  GmmParams theta;
  theta.weights = Eigen::VectorXd::Constant(r, 1.0 / r);
  theta.means.resize(r, data.cols());
  for (int j = 0; j < r; ++j) theta.means.row(j) = data.row(order[static_cast<std::size_t>(j)]);
  const double pooled = pooled_variance(data);
  theta.variances = Eigen::VectorXd::Constant(r, pooled > 0.0 ? pooled : 1.0);
  return theta;
}

KMeansResult kmeans_lloyd(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, std::uint64_t rng_seed,
                          int max_iter) {
  const Eigen::Index n = data.rows();
  if (r < 1 || r > n) throw InputError("kmeans: need 1 <= r <= n");
  std::mt19937_64 rng(rng_seed);

  // k-means++ seeding
  KMeansResult out;
  out.centers.resize(r, data.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index pick = first(rng);
  chosen[static_cast<std::size_t>(pick)] = 1;
  out.centers.row(0) = data.row(pick);
  Eigen::VectorXd nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) nearest[i] = squared_distance(data, i, out.centers, 0);
  for (int c = 1; c < r; ++c) {
    const double total = nearest.sum();
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (nearest[pick] == 0.0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (nearest[i] > 0.0) { pick = i; break; }
        }
      }
    } else {
      // all remaining points coincide with centres: take any unused row
      std::vector<Eigen::Index> unused;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) unused.push_back(i);
      }
      std::uniform_int_distribution<std::size_t> any(0, unused.size() - 1);
      pick = unused[any(rng)];
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    out.centers.row(c) = data.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(data, i, out.centers, c));
  }

  // Lloyd iterations
  out.labels.assign(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd dist(n);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(data, i, out.centers, 0);
      for (int c = 1; c < r; ++c) {
        const double d = squared_distance(data, i, out.centers, c);
        if (d < best_d) { best_d = d; best = c; }
      }
      dist[i] = best_d;
      if (out.labels[static_cast<std::size_t>(i)] != best) {
        out.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    out.iterations = it + 1;
    if (!changed && it > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(r, data.cols());
    std::vector<int> counts(static_cast<std::size_t>(r), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = out.labels[static_cast<std::size_t>(i)];
      sums.row(c) += data.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < r; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        out.centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // empty cluster: move it to the point farthest from its centre
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      out.centers.row(c) = data.row(far);
      dist[far] = 0.0;
      changed = true;
    }
  }

  out.wcss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.wcss += squared_distance(data, i, out.centers, out.labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

GmmParams params_from_labels(const Eigen::Ref<const Eigen::MatrixXd>& data, const std::vector<int>& labels, int r) {
  if (labels.size() != static_cast<std::size_t>(data.rows())) {
    throw InputError("params_from_labels: label count differs from number of rows");
  }
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(data.rows(), r);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= r) throw InputError("params_from_labels: label out of range");
    resp(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return m_step(data, resp).params;
}

GmmParams init_kmeans(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, int runs, std::uint64_t rng_seed) {
  if (runs < 1) throw InputError("init_kmeans: runs must be >= 1");
  KMeansResult best;
  for (int run = 0; run < runs; ++run) {
    KMeansResult current = kmeans_lloyd(data, r, rng_seed + static_cast<std::uint64_t>(run));
    if (run == 0 || current.wcss < best.wcss) best = std::move(current);
  }
  return params_from_labels(data, best.labels, r);
}

InitResult init_moments(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, const MomentsInitOptions& opts) {
  const auto m = static_cast<int>(data.cols());
  if (r > m) {
    throw InputError("moments initializer requires r <= m for a spherical mixture (r=" + std::to_string(r) +
                     ", m=" + std::to_string(m) + ")");
  }
  InitResult out;
  try {
    const MomentSet moments = empirical_moments(data);
    RecoveryOptions ropts;
    ropts.decomposition.k = 2;
    ropts.decomposition.empirical = true;
    ropts.decomposition.refine_iterations = opts.refine_iterations;
    ropts.decomposition.rng_seed = opts.rng_seed;
    RecoveredParams rec = recover_parameters(moments, r, ropts);
    GmmParams& theta = rec.params;
    if (!theta.means.allFinite() || !theta.variances.allFinite() || !theta.weights.allFinite()) {
      throw RecoveryError("init_moments: non-finite recovered parameters");
    }
    const double floor = kVarianceFloor * pooled_variance(data);
    theta.variances = theta.variances.cwiseMax(floor > 0.0 ? floor : 1e-12);
    if (rec.clamped_variances > 0 || rec.clamped_weights > 0) {
      out.note = "clamped " + std::to_string(rec.clamped_weights) + " weights and " +
                 std::to_string(rec.clamped_variances) + " variances";
    }
    out.params = std::move(theta);
  } catch (const NumericalError& err) {
    out.fallback = true;
    out.note = std::string("moment recovery failed, using random initialization: ") + err.what();
    out.params = init_random(data, r, opts.rng_seed);
  }
  return out;
}

InitResult init_emem(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, int short_runs, int short_iters,
                     std::uint64_t rng_seed) {
  if (short_runs < 1 || short_iters < 0) throw InputError("init_emem: need short_runs >= 1, short_iters >= 0");
  InitResult out;
  bool have = false;
  for (int run = 0; run < short_runs; ++run) {
    const std::uint64_t seed = rng_seed + static_cast<std::uint64_t>(run);
    EmOptions eopts;
    eopts.max_iter = short_iters;
    eopts.tol = -std::numeric_limits<double>::infinity();
    eopts.rng_seed = seed;
    EmResult res = em_fit(data, init_random(data, r, seed), eopts);
    if (!have || res.loglik() > out.loglik) {
      out.params = std::move(res.params);
      out.loglik = res.loglik();
      have = true;
    }
  }
  return out;
}

}  // namespace momentgmm
