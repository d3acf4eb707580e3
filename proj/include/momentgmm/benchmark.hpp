#pragma once

// Fitting pipeline and the initializer benchmark harness behind the CLI.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "momentgmm/gmm.hpp"

namespace momentgmm {

/// Simulation models used in the benchmark: 1 is the 6-dimensional,
/// 4-cluster model and 2 the 5-dimensional, 3-cluster model.
GmmParams example_model(int which);

struct FitOptions {
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-8;
  int kmeans_runs = 50;
  int emem_runs = 50;
  int emem_iters = 5;
  int refine_iterations = 5;
};

struct FitReport {
  Initializer initializer = Initializer::random;
  bool failed = false;
  std::string error;
  bool fallback = false;
  std::string note;
  EmResult em;
  int nu = 0;
  double loglik = 0.0;
  double bic = 0.0;
  std::optional<double> ari;
  std::optional<double> error_rate;
  double seconds = 0.0;
};

/// Initializer followed by EM. Numerical failures are caught and recorded;
/// input errors (including r > m for the moments initializer) propagate.
FitReport run_fit(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, Initializer init, const FitOptions& opts,
                  const std::vector<int>* truth = nullptr);

nlohmann::json fit_report_to_json(const FitReport& report, bool negated_bic = false);

struct ExperimentConfig {
  GmmParams model;
  int n = 1000;
  int replicates = 100;
  int repeats = 1;
  std::vector<Initializer> initializers{Initializer::kmeans, Initializer::moments, Initializer::emem,
                                        Initializer::random};
  std::uint64_t master_seed = 1;
  FitOptions fit;
  int threads = 0;  // 0: MOMENTGMM_THREADS or hardware concurrency

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);

struct ReplicateRow {
  int repeat = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  Initializer initializer = Initializer::random;
  bool failed = false;
  bool fallback = false;
  double loglik = 0.0;
  double bic = 0.0;
  double ari = 0.0;
  double error_rate = 0.0;
  int iterations = 0;
  double min_relative_step = 0.0;
  double seconds = 0.0;
};

struct CriterionShare {
  std::vector<double> percent_per_repeat;
  double mean = 0.0;
  double variance = 0.0;
};

struct InitializerSummary {
  Initializer initializer = Initializer::random;
  CriterionShare best_bic;
  CriterionShare best_ari;
  CriterionShare ari_ge_099;
  CriterionShare best_error_rate;
  double median_ari = 0.0;
  double median_error_rate = 0.0;
  int failures = 0;
  int fallbacks = 0;
  double min_relative_step = 0.0;
  double mean_seconds = 0.0;
};

struct BenchmarkSummary {
  ExperimentConfig config;
  std::vector<InitializerSummary> per_initializer;
  std::vector<ReplicateRow> rows;  // sorted by (repeat, replicate, initializer order)
};

/// Seed of replicate `index` in repeat `repeat`, derived from the master seed.
std::uint64_t replicate_seed(std::uint64_t master, int repeat, int index);

int resolve_threads(int requested);

BenchmarkSummary run_benchmark(const ExperimentConfig& config);

/// Deterministic summary; timing appears only when include_timing is set.
nlohmann::json summary_to_json(const BenchmarkSummary& summary, bool include_timing = false);
std::string rows_to_csv(const std::vector<ReplicateRow>& rows);
std::string summary_to_text(const BenchmarkSummary& summary);

/// Long-format scatterplot-matrix data: label,feature_x,feature_y,x,y for
/// every pair among the first `features` columns.
std::string plot_data_csv(const Eigen::Ref<const Eigen::MatrixXd>& data, const std::vector<int>& labels,
                          int features = 4);

}  // namespace momentgmm
