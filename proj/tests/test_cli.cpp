#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include "momentgmm/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(MOMENTGMM_CLI) + " " + args + " 2>/dev/null";
  Run result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), got);
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "momentgmm_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 1);
  CHECK(run("fit").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("simulate --example 3").code == 1);
}

TEST_CASE("simulate then fit") {
  const auto dir = workdir();
  const auto data = dir / "d.csv";
  const auto labels = dir / "l.txt";
  REQUIRE(run("simulate --example 2 -n 400 --seed 5 --header --out " + q(data) + " --labels-out " + q(labels)).code ==
          0);
  const auto table = momentgmm::io::read_csv(data);
  CHECK(table.values.rows() == 400);
  CHECK(table.values.cols() == 5);
  CHECK(table.header.size() == 5);
  CHECK(momentgmm::io::read_labels(labels).size() == 400);

  // same seed, same bytes
  const auto again = dir / "d2.csv";
  REQUIRE(run("simulate --example 2 -n 400 --seed 5 --header --out " + q(again)).code == 0);
  CHECK(momentgmm::io::read_text(data) == momentgmm::io::read_text(again));

  const auto fit = run("fit " + q(data) + " -r 3 --init moments --seed 1 --labels " + q(labels) + " --bic-negated");
  REQUIRE(fit.code == 0);
  const auto j = json::parse(fit.out);
  CHECK(j["initializer"] == "moments");
  CHECK(j.contains("ari"));
  CHECK(j.contains("error_rate"));
  CHECK(j["bic_negated"].get<double>() == -j["bic"].get<double>());
  CHECK(j["params"]["weights"].size() == 3);

  const auto plot = dir / "plot.csv";
  const auto text = run("fit " + q(data) + " -r 3 --init kmeans --format text --plot-data " + q(plot));
  CHECK(text.code == 0);
  CHECK(text.out.find("loglik") != std::string::npos);
  CHECK(fs::exists(plot));

  const auto csv = run("fit " + q(data) + " -r 2 --init random --format csv");
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("component,weight,variance", 0) == 0);

  CHECK(run("fit " + q(data) + " -r 6 --init moments").code == 1);  // r > m
  CHECK(run("fit " + q(data) + " -r 3 --init bogus").code == 1);
  CHECK(run("fit " + q(dir / "missing.csv") + " -r 3").code == 3);
}

TEST_CASE("decompose") {
  const auto dir = workdir();
  const auto tensor = dir / "t.json";
  // X1^3 + X2^3 in three variables
  momentgmm::io::write_text(tensor, R"({"dim":3,"order":3,"coeffs":[1,0,0,0,0,0,1,0,0,0]})");
  const auto res = run("decompose " + q(tensor) + " --rank 2");
  REQUIRE(res.code == 0);
  const auto j = json::parse(res.out);
  CHECK(j["weights"].size() == 2);
  CHECK(j["points"].size() == 2);
  CHECK(j["residual"].get<double>() < 1e-12);
  CHECK(run("decompose " + q(tensor) + " --tol 1e-6").code == 0);

  const auto zero = dir / "z.json";
  momentgmm::io::write_text(zero, R"({"dim":3,"order":3,"coeffs":[0,0,0,0,0,0,0,0,0,0]})");
  CHECK(run("decompose " + q(zero)).code == 2);

  const auto broken = dir / "b.json";
  momentgmm::io::write_text(broken, R"({"dim":3,"order":3,"coeffs":[1,2]})");
  CHECK(run("decompose " + q(broken)).code == 1);
  momentgmm::io::write_text(broken, "{not json");
  CHECK(run("decompose " + q(broken)).code == 1);
  CHECK(run("decompose " + q(dir / "none.json")).code == 3);
}

TEST_CASE("moments and pca") {
  const auto dir = workdir();
  const auto data = dir / "m.csv";
  REQUIRE(run("simulate --example 1 -n 300 --seed 2 --out " + q(data)).code == 0);
  const auto mom = run("moments " + q(data));
  REQUIRE(mom.code == 0);
  const auto j = json::parse(mom.out);
  CHECK(j["n_samples"] == 300);
  CHECK(j["m2"].size() == 6);
  CHECK(j["m3"]["coeffs"].size() == 56);

  const auto out = dir / "scores.csv";
  REQUIRE(run("pca " + q(data) + " --q 2 --out " + q(out)).code == 0);
  const auto scores = momentgmm::io::read_csv(out);
  CHECK(scores.values.rows() == 300);
  CHECK(scores.values.cols() == 2);
  CHECK(run("pca " + q(data) + " --q 9").code == 1);

  const auto ragged = dir / "r.csv";
  momentgmm::io::write_text(ragged, "1,2\n3\n");
  CHECK(run("moments " + q(ragged)).code == 1);
}

TEST_CASE("benchmark writes its outputs deterministically") {
  const auto dir = workdir();
  const std::string common = "benchmark --example 2 -n 200 --replicates 3 --seed 11 --initializers moments kmeans";
  const auto a = run(common + " --threads 1 --out " + q(dir / "a"));
  const auto b = run(common + " --threads 2 --out " + q(dir / "b"));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  for (const char* f : {"summary.json", "replicates.csv", "summary.txt"}) CHECK(fs::exists(dir / "a" / f));
  CHECK(momentgmm::io::read_text(dir / "a" / "summary.json") == momentgmm::io::read_text(dir / "b" / "summary.json"));
  const auto j = json::parse(a.out);
  CHECK(j["results"].contains("em_moments"));
  CHECK(j["results"].contains("em_kmeans"));
  CHECK(!j["results"]["em_moments"].contains("mean_seconds"));

  const auto timed = run(common + " --timing");
  CHECK(json::parse(timed.out)["results"]["em_moments"].contains("mean_seconds"));
  CHECK(run("benchmark -n 100").code == 1);
  fs::remove_all(dir);
}
