#include "momentgmm/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "momentgmm/errors.hpp"
#include "momentgmm/io.hpp"
#include "momentgmm/metrics.hpp"

namespace momentgmm {

namespace {

using nlohmann::json;

constexpr double kBicTieTolerance = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

void finish_share(CriterionShare& share) {
  const auto& p = share.percent_per_repeat;
  if (p.empty()) return;
  double sum = 0.0;
  for (double x : p) sum += x;
  share.mean = sum / static_cast<double>(p.size());
  double ss = 0.0;
  for (double x : p) ss += (x - share.mean) * (x - share.mean);
  share.variance = p.size() > 1 ? ss / static_cast<double>(p.size() - 1) : 0.0;
}

json share_to_json(const CriterionShare& share) {
  return json{{"mean_percent", share.mean}, {"variance", share.variance},
              {"percent_per_repeat", share.percent_per_repeat}};
}

}  // namespace

GmmParams example_model(int which) {
  GmmParams theta;
  if (which == 1) {
    theta.weights.resize(4);
    theta.weights << 0.2782, 0.0139, 0.3324, 0.3756;
    theta.means.resize(4, 6);
    theta.means << -5.0, -9.0, 8.0, 8.0, 2.0, 5.0,
                   -7.0, 6.0, -1.0, 6.0, -8.0, -10.0,
                   -4.0, -10.0, -5.0, 1.0, 5.0, 4.0,
                   -6.0, 6.0, 5.0, 4.0, -1.0, -1.0;
    theta.variances.resize(4);
    theta.variances << 1.5, 2.5, 5.0, 15.0;
  } else if (which == 2) {
    theta.weights.resize(3);
    theta.weights << 0.0930, 0.2151, 0.6918;
    theta.means.resize(3, 5);
    theta.means << 7.0, -4.0, -4.0, -6.0, -4.0,
                   2.0, -4.0, -6.0, -10.0, -3.0,
                   4.0, -4.0, -5.0, 6.0, 1.0;
    theta.variances.resize(3);
    theta.variances << 5.0, 10.0, 15.0;
  } else {
    throw InputError("example_model: unknown example " + std::to_string(which) + " (expected 1 or 2)");
  }
  // the published weights are rounded to four digits and sum to 1 only approximately
  theta.weights /= theta.weights.sum();
  return theta;
}

FitReport run_fit(const Eigen::Ref<const Eigen::MatrixXd>& data, int r, Initializer init, const FitOptions& opts,
                  const std::vector<int>* truth) {
  if (r < 1) throw InputError("fit: r must be >= 1");
  if (data.rows() < r) throw InputError("fit: fewer rows than components");
  if (init == Initializer::moments && r > data.cols()) {
    throw InputError("fit: the moments initializer requires r <= m (got r=" + std::to_string(r) +
                     ", m=" + std::to_string(data.cols()) + ")");
  }
  if (truth && truth->size() != static_cast<std::size_t>(data.rows())) {
    throw InputError("fit: labels file has " + std::to_string(truth->size()) + " entries for " +
                     std::to_string(data.rows()) + " rows");
  }

  FitReport report;
  report.initializer = init;
  report.nu = spherical_parameter_count(r, static_cast<int>(data.cols()));
  const auto start = std::chrono::steady_clock::now();
  try {
    GmmParams start_params;
    switch (init) {
      case Initializer::kmeans:
        start_params = init_kmeans(data, r, opts.kmeans_runs, opts.seed);
        break;
      case Initializer::moments: {
        MomentsInitOptions mopts;
        mopts.refine_iterations = opts.refine_iterations;
        mopts.rng_seed = opts.seed;
        InitResult res = init_moments(data, r, mopts);
        report.fallback = res.fallback;
        report.note = res.note;
        start_params = std::move(res.params);
        break;
      }
      case Initializer::emem:
        start_params = init_emem(data, r, opts.emem_runs, opts.emem_iters, opts.seed).params;
        break;
      case Initializer::random:
        start_params = init_random(data, r, opts.seed);
        break;
    }
    EmOptions eopts;
    eopts.max_iter = opts.max_iter;
    eopts.tol = opts.tol;
    eopts.rng_seed = opts.seed;
    report.em = em_fit(data, start_params, eopts);
    report.loglik = report.em.loglik();
    report.bic = bic(report.loglik, data.rows(), report.nu);
    if (truth) {
      report.ari = ari(report.em.hard_labels, *truth);
      report.error_rate = error_rate(report.em.hard_labels, *truth, r);
    }
  } catch (const NumericalError& err) {
    report.failed = true;
    report.error = err.what();
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

json fit_report_to_json(const FitReport& report, bool negated_bic) {
  json out{{"initializer", to_string(report.initializer)},
           {"failed", report.failed},
           {"fallback", report.fallback},
           {"time_s", report.seconds}};
  if (!report.note.empty()) out["note"] = report.note;
  if (report.failed) {
    out["error"] = report.error;
    return out;
  }
  out["params"] = io::params_to_json(report.em.params);
  out["loglik"] = report.loglik;
  out["loglik_trace"] = report.em.loglik_trace;
  out["iterations"] = report.em.iterations;
  out["converged"] = report.em.converged;
  out["nu"] = report.nu;
  out["bic"] = report.bic;
  if (negated_bic) out["bic_negated"] = -report.bic;
  if (report.ari) out["ari"] = *report.ari;
  if (report.error_rate) out["error_rate"] = *report.error_rate;
  return out;
}

void ExperimentConfig::validate() const {
  model.validate(1e-6);
  if (n < 1) throw InputError("benchmark: n must be >= 1");
  if (replicates < 1) throw InputError("benchmark: replicates must be >= 1");
  if (repeats < 1) throw InputError("benchmark: repeats must be >= 1");
  if (initializers.empty()) throw InputError("benchmark: no initializers selected");
  if (n < model.components()) throw InputError("benchmark: n smaller than the number of components");
  if (fit.max_iter < 0) throw InputError("benchmark: max_iter must be >= 0");
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("benchmark config must be a JSON object");
  ExperimentConfig c;
  if (j.contains("example")) c.model = example_model(j["example"].get<int>());
  if (j.contains("model")) c.model = io::params_from_json(j["model"]);
  if (c.model.components() == 0) throw InputError("benchmark config needs \"model\" or \"example\"");
  c.n = j.value("n", c.n);
  c.replicates = j.value("replicates", c.replicates);
  c.repeats = j.value("repeats", c.repeats);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.fit.max_iter = j.value("max_iter", c.fit.max_iter);
  c.fit.kmeans_runs = j.value("kmeans_runs", c.fit.kmeans_runs);
  c.fit.emem_runs = j.value("emem_runs", c.fit.emem_runs);
  c.fit.emem_iters = j.value("emem_iters", c.fit.emem_iters);
  c.threads = j.value("threads", c.threads);
  if (j.contains("initializers")) {
    c.initializers.clear();
    for (const auto& name : j["initializers"]) c.initializers.push_back(initializer_from_string(name.get<std::string>()));
  }
  c.validate();
  return c;
}

std::uint64_t replicate_seed(std::uint64_t master, int repeat, int index) {
  return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(repeat))) +
                    static_cast<std::uint64_t>(index));
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MOMENTGMM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

BenchmarkSummary run_benchmark(const ExperimentConfig& config) {
  config.validate();
  const int r = config.model.components();
  const int ninit = static_cast<int>(config.initializers.size());
  const int jobs = config.repeats * config.replicates;

  std::vector<std::vector<ReplicateRow>> results(static_cast<std::size_t>(jobs));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int job = next++; job < jobs; job = next++) {
      const int repeat = job / config.replicates;
      const int replicate = job % config.replicates;
      const std::uint64_t seed = replicate_seed(config.master_seed, repeat, replicate);
      const Dataset ds = sample(config.model, config.n, seed);
      auto& out = results[static_cast<std::size_t>(job)];
      for (Initializer init : config.initializers) {
        FitOptions fopts = config.fit;
        fopts.seed = seed;
        const FitReport rep = run_fit(ds.data, r, init, fopts, &ds.labels);
        ReplicateRow row;
        row.repeat = repeat;
        row.replicate = replicate;
        row.seed = seed;
        row.initializer = init;
        row.failed = rep.failed;
        row.fallback = rep.fallback;
        row.seconds = rep.seconds;
        if (!rep.failed) {
          row.loglik = rep.loglik;
          row.bic = rep.bic;
          row.ari = *rep.ari;
          row.error_rate = *rep.error_rate;
          row.iterations = rep.em.iterations;
          row.min_relative_step = min_relative_step(rep.em.loglik_trace);
        }
        out.push_back(row);
      }
    }
  };
  const int threads = std::min(resolve_threads(config.threads), std::max(jobs, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BenchmarkSummary summary;
  summary.config = config;
  for (auto& group : results) {
    for (auto& row : group) summary.rows.push_back(row);
  }

  summary.per_initializer.resize(static_cast<std::size_t>(ninit));
  for (int k = 0; k < ninit; ++k) summary.per_initializer[static_cast<std::size_t>(k)].initializer = config.initializers[k];

  for (int repeat = 0; repeat < config.repeats; ++repeat) {
    std::vector<int> bic_wins(ninit, 0), ari_wins(ninit, 0), ari_good(ninit, 0), err_wins(ninit, 0);
    for (int replicate = 0; replicate < config.replicates; ++replicate) {
      const auto& group = results[static_cast<std::size_t>(repeat * config.replicates + replicate)];
      double best_bic = -std::numeric_limits<double>::infinity();
      double best_ari = -std::numeric_limits<double>::infinity();
      double best_err = std::numeric_limits<double>::infinity();
      for (const auto& row : group) {
        if (row.failed) continue;
        best_bic = std::max(best_bic, row.bic);
        best_ari = std::max(best_ari, row.ari);
        best_err = std::min(best_err, row.error_rate);
      }
      for (int k = 0; k < ninit; ++k) {
        const auto& row = group[static_cast<std::size_t>(k)];
        if (row.failed) continue;
        if (best_bic - row.bic <= kBicTieTolerance * std::max(1.0, std::abs(best_bic))) ++bic_wins[k];
        if (row.ari == best_ari) ++ari_wins[k];
        if (row.ari >= 0.99) ++ari_good[k];
        if (row.error_rate == best_err) ++err_wins[k];
      }
    }
    const double scale = 100.0 / config.replicates;
    for (int k = 0; k < ninit; ++k) {
      auto& s = summary.per_initializer[static_cast<std::size_t>(k)];
      s.best_bic.percent_per_repeat.push_back(bic_wins[k] * scale);
      s.best_ari.percent_per_repeat.push_back(ari_wins[k] * scale);
      s.ari_ge_099.percent_per_repeat.push_back(ari_good[k] * scale);
      s.best_error_rate.percent_per_repeat.push_back(err_wins[k] * scale);
    }
  }

  for (int k = 0; k < ninit; ++k) {
    auto& s = summary.per_initializer[static_cast<std::size_t>(k)];
    finish_share(s.best_bic);
    finish_share(s.best_ari);
    finish_share(s.ari_ge_099);
    finish_share(s.best_error_rate);
    std::vector<double> aris, errs;
    double seconds = 0.0;
    int count = 0;
    s.min_relative_step = std::numeric_limits<double>::infinity();
    for (const auto& row : summary.rows) {
      if (row.initializer != s.initializer) continue;
      ++count;
      seconds += row.seconds;
      if (row.fallback) ++s.fallbacks;
      if (row.failed) {
        ++s.failures;
        continue;
      }
      aris.push_back(row.ari);
      errs.push_back(row.error_rate);
      s.min_relative_step = std::min(s.min_relative_step, row.min_relative_step);
    }
    s.median_ari = median(aris);
    s.median_error_rate = median(errs);
    s.mean_seconds = count ? seconds / count : 0.0;
  }
  return summary;
}

json summary_to_json(const BenchmarkSummary& summary, bool include_timing) {
  const auto& c = summary.config;
  json inits = json::array();
  for (auto i : c.initializers) inits.push_back(to_string(i));
  json per = json::object();
  for (const auto& s : summary.per_initializer) {
    json entry{{"best_bic", share_to_json(s.best_bic)},
               {"best_ari", share_to_json(s.best_ari)},
               {"ari_ge_0.99", share_to_json(s.ari_ge_099)},
               {"best_error_rate", share_to_json(s.best_error_rate)},
               {"median_ari", s.median_ari},
               {"median_error_rate", s.median_error_rate},
               {"failures", s.failures},
               {"fallbacks", s.fallbacks},
               {"min_relative_loglik_step",
                std::isfinite(s.min_relative_step) ? json(s.min_relative_step) : json(nullptr)}};
    if (include_timing) entry["mean_seconds"] = s.mean_seconds;
    per["em_" + to_string(s.initializer)] = entry;
  }
  return json{{"n", c.n},
              {"replicates", c.replicates},
              {"repeats", c.repeats},
              {"master_seed", c.master_seed},
              {"max_iter", c.fit.max_iter},
              {"initializers", inits},
              {"model", io::params_to_json(c.model)},
              {"results", per}};
}

std::string rows_to_csv(const std::vector<ReplicateRow>& rows) {
  std::string out = "repeat,replicate,seed,initializer,failed,fallback,loglik,bic,ari,error_rate,iterations,"
                    "min_relative_step,time_s\n";
  for (const auto& row : rows) {
    out += std::to_string(row.repeat) + ',' + std::to_string(row.replicate) + ',' + std::to_string(row.seed) + ',' +
           to_string(row.initializer) + ',' + (row.failed ? "1" : "0") + ',' + (row.fallback ? "1" : "0") + ',' +
           io::format_double(row.loglik) + ',' + io::format_double(row.bic) + ',' + io::format_double(row.ari) +
           ',' + io::format_double(row.error_rate) + ',' + std::to_string(row.iterations) + ',' +
           io::format_double(row.min_relative_step) + ',' + io::format_double(row.seconds) + '\n';
  }
  return out;
}

std::string summary_to_text(const BenchmarkSummary& summary) {
  std::ostringstream out;
  out << "replicates=" << summary.config.replicates << " repeats=" << summary.config.repeats
      << " n=" << summary.config.n << "\n";
  out << std::left << std::setw(12) << "method" << std::right << std::setw(10) << "BIC%" << std::setw(10) << "ARI%"
      << std::setw(12) << "ARI>=.99%" << std::setw(10) << "err%" << std::setw(12) << "medianARI" << std::setw(10)
      << "fail" << std::setw(10) << "time(s)" << "\n";
  out << std::fixed;
  for (const auto& s : summary.per_initializer) {
    out << std::left << std::setw(12) << ("em_" + to_string(s.initializer)) << std::right << std::setprecision(2)
        << std::setw(10) << s.best_bic.mean << std::setw(10) << s.best_ari.mean << std::setw(12) << s.ari_ge_099.mean
        << std::setw(10) << s.best_error_rate.mean << std::setprecision(4) << std::setw(12) << s.median_ari
        << std::setw(10) << s.failures << std::setprecision(3) << std::setw(10) << s.mean_seconds << "\n";
  }
  return out.str();
}

std::string plot_data_csv(const Eigen::Ref<const Eigen::MatrixXd>& data, const std::vector<int>& labels,
                          int features) {
  if (labels.size() != static_cast<std::size_t>(data.rows())) {
    throw InputError("plot data: label count differs from number of rows");
  }
  const int f = std::min<int>(features, static_cast<int>(data.cols()));
  std::string out = "label,feature_x,feature_y,x,y\n";
  for (int a = 0; a < f; ++a) {
    for (int b = a + 1; b < f; ++b) {
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        out += std::to_string(labels[static_cast<std::size_t>(i)]) + ',' + std::to_string(a) + ',' +
               std::to_string(b) + ',' + io::format_double(data(i, a)) + ',' + io::format_double(data(i, b)) + '\n';
      }
    }
  }
  return out;
}

}  // namespace momentgmm
