// momentgmm: simulate, fit, decompose, moments, pca and benchmark subcommands.
//
// Exit codes: 0 success, 1 input error, 2 numerical failure, 3 I/O error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "momentgmm/benchmark.hpp"
#include "momentgmm/errors.hpp"
#include "momentgmm/gmm.hpp"
#include "momentgmm/io.hpp"
#include "momentgmm/metrics.hpp"
#include "momentgmm/moments.hpp"
#include "momentgmm/pca.hpp"
#include "momentgmm/waring.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace momentgmm;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    io::write_text(out_path, text);
  }
}

io::HeaderMode header_mode(bool header, bool no_header) {
  if (header) return io::HeaderMode::present;
  if (no_header) return io::HeaderMode::absent;
  return io::HeaderMode::automatic;
}

GmmParams load_model(const std::string& model_path, int example) {
  if (!model_path.empty()) return io::params_from_json(json::parse(io::read_text(model_path)));
  if (example > 0) return example_model(example);
  throw InputError("a model is required: pass --model <json> or --example 1|2");
}

json parse_json_file(const std::string& path) {
  const std::string text = io::read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw InputError("'" + path + "' is not valid JSON: " + err.what());
  }
}

struct SimulateArgs {
  std::string model;
  int example = 0;
  int n = 1000;
  std::uint64_t seed = 1;
  std::string out;
  std::string labels_out;
  bool header = false;
};

int run_simulate(const SimulateArgs& a) {
  const GmmParams theta = load_model(a.model, a.example);
  const Dataset ds = sample(theta, a.n, a.seed);
  std::vector<std::string> header;
  if (a.header) {
    for (int j = 0; j < theta.dim(); ++j) header.push_back("x" + std::to_string(j + 1));
  }
  emit(io::to_csv(ds.data, header), a.out);
  if (!a.labels_out.empty()) io::write_text(a.labels_out, io::labels_to_text(ds.labels));
  return 0;
}

struct FitArgs {
  std::string data;
  int r = 0;
  std::string init = "moments";
  std::uint64_t seed = 1;
  std::string labels;
  int max_iter = 100;
  double tol = 1e-8;
  std::string format = "json";
  std::string out;
  bool bic_negated = false;
  std::string plot_data;
  bool header = false;
  bool no_header = false;
};

int run_fit_cmd(const FitArgs& a) {
  const io::CsvTable table = io::read_csv(a.data, header_mode(a.header, a.no_header));
  std::optional<std::vector<int>> truth;
  if (!a.labels.empty()) truth = io::read_labels(a.labels);
  FitOptions opts;
  opts.seed = a.seed;
  opts.max_iter = a.max_iter;
  opts.tol = a.tol;
  const FitReport report =
      run_fit(table.values, a.r, initializer_from_string(a.init), opts, truth ? &*truth : nullptr);
  if (report.fallback) std::cerr << "warning: " << report.note << "\n";
  if (report.failed) {
    std::cerr << "error: " << report.error << "\n";
    return kExitNumerical;
  }
  if (!a.plot_data.empty()) io::write_text(a.plot_data, plot_data_csv(table.values, report.em.hard_labels));

  if (a.format == "json") {
    emit(fit_report_to_json(report, a.bic_negated).dump(2) + "\n", a.out);
  } else if (a.format == "text") {
    std::ostringstream text;
    text << "initializer " << to_string(report.initializer) << (report.fallback ? " (fallback)" : "") << "\n"
         << "loglik      " << io::format_double(report.loglik) << "\n"
         << "bic         " << io::format_double(a.bic_negated ? -report.bic : report.bic) << "\n"
         << "iterations  " << report.em.iterations << (report.em.converged ? " (converged)" : "") << "\n";
    if (report.ari) text << "ari         " << io::format_double(*report.ari) << "\n";
    if (report.error_rate) text << "error_rate  " << io::format_double(*report.error_rate) << "\n";
    text << "time_s      " << report.seconds << "\n";
    emit(text.str(), a.out);
  } else {  // csv: one row per component
    std::string csv = "component,weight,variance";
    for (int j = 0; j < report.em.params.dim(); ++j) csv += ",mean" + std::to_string(j + 1);
    csv += '\n';
    const auto& p = report.em.params;
    for (int c = 0; c < p.components(); ++c) {
      csv += std::to_string(c) + ',' + io::format_double(p.weights[c]) + ',' + io::format_double(p.variances[c]);
      for (int j = 0; j < p.dim(); ++j) csv += ',' + io::format_double(p.means(c, j));
      csv += '\n';
    }
    emit(csv, a.out);
  }
  return 0;
}

struct DecomposeArgs {
  std::string tensor;
  std::optional<int> rank;
  double tol = kDefaultRankTolerance;
  std::optional<int> k;
  std::uint64_t seed = 0;
  int refine = 5;
  bool empirical = false;
  std::string out;
};

int run_decompose(const DecomposeArgs& a) {
  const SymmetricTensor t = io::tensor_from_json(parse_json_file(a.tensor));
  DecompositionOptions opts;
  opts.rank = a.rank;
  opts.rank_tolerance = a.tol;
  opts.k = a.k;
  opts.rng_seed = a.seed;
  opts.refine_iterations = a.refine;
  opts.empirical = a.empirical;
  const DecompositionReport report = decompose_report(t, opts);
  json j = io::decomposition_to_json(report.decomposition, report.residual);
  if (report.complex_warning) j["complex_warning"] = true;
  emit(j.dump(2) + "\n", a.out);
  return 0;
}

struct MomentsArgs {
  std::string data;
  std::string out;
  bool header = false;
  bool no_header = false;
};

int run_moments(const MomentsArgs& a) {
  const io::CsvTable table = io::read_csv(a.data, header_mode(a.header, a.no_header));
  const MomentSet moments = empirical_moments(table.values);
  if (moments.multiplicity_warning) {
    std::cerr << "warning: smallest covariance eigenvalue is repeated; v is not unique\n";
  }
  emit(io::moments_to_json(moments).dump(2) + "\n", a.out);
  return 0;
}

struct PcaArgs {
  std::string data;
  int q = 5;
  std::string out;
  bool header = false;
  bool no_header = false;
};

int run_pca(const PcaArgs& a) {
  const io::CsvTable table = io::read_csv(a.data, header_mode(a.header, a.no_header));
  const PcaResult res = pca(table.values, a.q);
  std::vector<std::string> header;
  if (!table.header.empty()) {
    for (int j = 0; j < a.q; ++j) header.push_back("pc" + std::to_string(j + 1));
  }
  emit(io::to_csv(res.scores, header), a.out);
  return 0;
}

struct BenchmarkArgs {
  std::string config;
  std::string model;
  int example = 0;
  std::optional<int> n;
  std::optional<int> replicates;
  std::optional<int> repeats;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> initializers;
  int threads = 0;
  std::optional<int> max_iter;
  std::string out;
  std::string format = "json";
  bool timing = false;
};

int run_benchmark_cmd(const BenchmarkArgs& a) {
  ExperimentConfig config;
  if (!a.config.empty()) {
    config = config_from_json(parse_json_file(a.config));
  } else {
    config.model = load_model(a.model, a.example);
  }
  if (a.n) config.n = *a.n;
  if (a.replicates) config.replicates = *a.replicates;
  if (a.repeats) config.repeats = *a.repeats;
  if (a.seed) config.master_seed = *a.seed;
  if (a.max_iter) config.fit.max_iter = *a.max_iter;
  if (!a.initializers.empty()) {
    config.initializers.clear();
    for (const auto& name : a.initializers) config.initializers.push_back(initializer_from_string(name));
  }
  if (a.threads > 0) config.threads = a.threads;

  const BenchmarkSummary summary = run_benchmark(config);
  const std::string summary_json = summary_to_json(summary, a.timing).dump(2) + "\n";
  if (!a.out.empty()) {
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw IoError("cannot create output directory '" + a.out + "': " + ec.message());
    io::write_text(fs::path(a.out) / "summary.json", summary_json);
    io::write_text(fs::path(a.out) / "replicates.csv", rows_to_csv(summary.rows));
    io::write_text(fs::path(a.out) / "summary.txt", summary_to_text(summary));
  }
  if (a.format == "json") {
    std::cout << summary_json;
  } else if (a.format == "csv") {
    std::cout << rows_to_csv(summary.rows);
  } else {
    std::cout << summary_to_text(summary);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Method-of-moments initialization for spherical Gaussian mixtures"};
  app.require_subcommand(1);
  const std::vector<std::string> formats{"json", "csv", "text"};

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Sample a dataset from a spherical mixture");
  simulate->add_option("--model", sim.model, "GmmParams JSON file");
  simulate->add_option("--example", sim.example, "Built-in model (1 or 2)")->check(CLI::Range(1, 2));
  simulate->add_option("-n,--n", sim.n, "Number of samples")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out", sim.out, "Data CSV (stdout if omitted)");
  simulate->add_option("--labels-out", sim.labels_out, "Write true labels, one per line");
  simulate->add_flag("--header", sim.header, "Write a header row");

  FitArgs fit;
  auto* fitcmd = app.add_subcommand("fit", "Initialize and run EM on a CSV dataset");
  fitcmd->add_option("data", fit.data, "Data CSV")->required();
  fitcmd->add_option("-r,--r", fit.r, "Number of components")->required()->check(CLI::PositiveNumber);
  fitcmd->add_option("--init", fit.init, "kmeans | moments | emem | random");
  fitcmd->add_option("--seed", fit.seed, "RNG seed");
  fitcmd->add_option("--labels", fit.labels, "True labels file (enables ARI and error rate)");
  fitcmd->add_option("--max-iter", fit.max_iter, "EM iteration cap")->check(CLI::NonNegativeNumber);
  fitcmd->add_option("--tol", fit.tol, "Relative log-likelihood tolerance");
  fitcmd->add_option("--format", fit.format)->check(CLI::IsMember(formats));
  fitcmd->add_option("--out", fit.out, "Output file (stdout if omitted)");
  fitcmd->add_flag("--bic-negated", fit.bic_negated, "Also report -2 loglik + nu log n");
  fitcmd->add_option("--plot-data", fit.plot_data, "Write scatterplot-matrix long-format CSV");
  fitcmd->add_flag("--header", fit.header, "First CSV row is a header");
  fitcmd->add_flag("--no-header", fit.no_header, "First CSV row is data");

  DecomposeArgs dec;
  auto* decompose = app.add_subcommand("decompose", "Waring decomposition of a symmetric tensor");
  decompose->add_option("tensor", dec.tensor, "Tensor JSON")->required();
  auto* rank_opt = decompose->add_option("--rank", dec.rank, "Known rank")->check(CLI::PositiveNumber);
  decompose->add_option("--tol", dec.tol, "Relative singular value threshold")->excludes(rank_opt);
  decompose->add_option("--k", dec.k, "Catalecticant row degree");
  decompose->add_option("--seed", dec.seed, "RNG seed for the random pencil");
  decompose->add_option("--refine", dec.refine, "Gauss-Newton iterations (0-50)")->check(CLI::Range(0, 50));
  decompose->add_flag("--empirical", dec.empirical, "Noisy input: tolerate complex parts and large residuals");
  decompose->add_option("--out", dec.out, "Output file (stdout if omitted)");

  MomentsArgs mom;
  auto* moments = app.add_subcommand("moments", "Empirical moment tensors M1, M2, M3");
  moments->add_option("data", mom.data, "Data CSV")->required();
  moments->add_option("--out", mom.out, "Output file (stdout if omitted)");
  moments->add_flag("--header", mom.header, "First CSV row is a header");
  moments->add_flag("--no-header", mom.no_header, "First CSV row is data");

  PcaArgs pc;
  auto* pcacmd = app.add_subcommand("pca", "Project centred data on its top principal directions");
  pcacmd->add_option("data", pc.data, "Data CSV")->required();
  pcacmd->add_option("-q,--q", pc.q, "Number of components to keep")->check(CLI::PositiveNumber);
  pcacmd->add_option("--out", pc.out, "Output file (stdout if omitted)");
  pcacmd->add_flag("--header", pc.header, "First CSV row is a header");
  pcacmd->add_flag("--no-header", pc.no_header, "First CSV row is data");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Compare EM initializers on simulated replicates");
  benchmark->add_option("--config", bench.config, "ExperimentConfig JSON");
  benchmark->add_option("--model", bench.model, "GmmParams JSON generator");
  benchmark->add_option("--example", bench.example, "Built-in model (1 or 2)")->check(CLI::Range(1, 2));
  benchmark->add_option("-n,--n", bench.n, "Samples per replicate");
  benchmark->add_option("--replicates", bench.replicates, "Simulated datasets per repeat");
  benchmark->add_option("--repeats", bench.repeats, "Outer repetitions (mean/variance of shares)");
  benchmark->add_option("--seed", bench.seed, "Master seed");
  benchmark->add_option("--initializers", bench.initializers, "Subset of kmeans moments emem random");
  benchmark->add_option("--threads", bench.threads, "Worker threads (default MOMENTGMM_THREADS or all cores)");
  benchmark->add_option("--max-iter", bench.max_iter, "EM iteration cap");
  benchmark->add_option("--out", bench.out, "Directory for summary.json, replicates.csv, summary.txt");
  benchmark->add_option("--format", bench.format, "Stdout format")->check(CLI::IsMember(formats));
  benchmark->add_flag("--timing", bench.timing, "Include mean wall time in summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*fitcmd) return run_fit_cmd(fit);
    if (*decompose) return run_decompose(dec);
    if (*moments) return run_moments(mom);
    if (*pcacmd) return run_pca(pc);
    if (*benchmark) return run_benchmark_cmd(bench);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what();
    if (e.residual() >= 0) std::cerr << " (residual " << e.residual() << ")";
    std::cerr << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
