#pragma once

// Spherical Gaussian mixtures: density, sampling, EM and EM initializers.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momentgmm/gmm_params.hpp"
#include "momentgmm/moments.hpp"

namespace momentgmm {

struct Dataset {
  Eigen::MatrixXd data;     // n x m
  std::vector<int> labels;  // empty when unknown
};

/// Relative floor applied to component variances: floor = kVarianceFloor * pooled_variance(data).
inline constexpr double kVarianceFloor = 1e-8;

/// (1 / (n m)) sum_i |x_i - mean|^2
double pooled_variance(const Eigen::Ref<const Eigen::MatrixXd>& data);

double log_density(const GmmParams& theta, const Eigen::Ref<const Eigen::VectorXd>& x);

Dataset sample(const GmmParams& theta, int n, std::uint64_t rng_seed);

struct EStepResult {
  Eigen::MatrixXd responsibilities;  // n x r, rows sum to one
  double loglik = 0.0;
};

EStepResult e_step(const GmmParams& theta, const Eigen::Ref<const Eigen::MatrixXd>& data);

struct MStepOptions {
  double variance_floor = -1.0;  // absolute; negative means kVarianceFloor * pooled variance
  std::uint64_t rng_seed = 0;    // used only to reseed empty components
};

struct MStepResult {
  GmmParams params;
  int reseeded = 0;
};

MStepResult m_step(const Eigen::Ref<const Eigen::MatrixXd>& data, const Eigen::Ref<const Eigen::MatrixXd>& resp,
                   const MStepOptions& opts = {});

/// Argmax of each row, ties to the lowest index.
std::vector<int> hard_labels(const Eigen::Ref<const Eigen::MatrixXd>& resp);

struct EmOptions {
  int max_iter = 100;
  double tol = 1e-8;
  std::uint64_t rng_seed = 0;
};

struct EmResult {
  GmmParams params;
  std::vector<double> loglik_trace;  // loglik of every parameter state visited, initial included
  int iterations = 0;
  bool converged = false;
  std::vector<int> hard_labels;
  int reseeded = 0;
  double loglik() const { return loglik_trace.back(); }
};

EmResult em_fit(const Eigen::Ref<const Eigen::MatrixXd>& data, const GmmParams& init, const EmOptions& opts = {});

/// Smallest (l_{t+1} - l_t) / |l_t| over a trace; +inf for traces shorter than two.
double min_relative_step(const std::vector<double>& trace);

enum class Initializer { kmeans, moments, emem, random };

std::string to_string(Initializer init);
Initializer initializer_from_string(const std::string& name);

struct InitResult {
  GmmParams params;
  bool fallback = false;  // moments recovery failed, random used instead
  std::string note;
  double loglik = 0.0;  // only filled by emEM
};

GmmParams init_random(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, std::uint64_t rng_seed);

struct KMeansResult {
  Eigen::MatrixXd centers;
  std::vector<int> labels;
  double wcss = 0.0;
  int iterations = 0;
};

/// One k-means++-seeded Lloyd run.
KMeansResult kmeans_lloyd(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, std::uint64_t rng_seed,
                          int max_iter = 100);

/// Best of `runs` k-means runs (seed + run index), converted to mixture parameters.
GmmParams init_kmeans(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, int runs, std::uint64_t rng_seed);

/// Params from a hard partition (one-hot M step).
GmmParams params_from_labels(const Eigen::Ref<const Eigen::MatrixXd>& data, const std::vector<int>& labels, int r);

struct MomentsInitOptions {
  int refine_iterations = 5;
  std::uint64_t rng_seed = 0;
};

/// Method-of-moments initializer; requires r <= m. Falls back to init_random
/// (flagged) when recovery fails numerically.
InitResult init_moments(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, const MomentsInitOptions& opts = {});

InitResult init_emem(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, int short_runs, int short_iters,
                     std::uint64_t rng_seed);

}  // namespace momentgmm
