#include "momentgmm/io.hpp"

#include <cerrno>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "momentgmm/errors.hpp"

namespace momentgmm::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& field, double& out) {
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InputError(message);
}

}  // namespace

CsvTable parse_csv(const std::string& text, HeaderMode mode) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  CsvTable table;
  std::size_t width = 0;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (first) {
      first = false;
      double probe = 0.0;
      const bool numeric = parse_number(fields.front(), probe);
      if (mode == HeaderMode::present || (mode == HeaderMode::automatic && !numeric)) {
        table.header = fields;
        width = fields.size();
        continue;
      }
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw InputError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      if (!parse_number(fields[j], row[j]) || !std::isfinite(row[j])) {
        throw InputError("csv line " + std::to_string(line_no) + ", field " + std::to_string(j + 1) +
                         ": not a finite number: '" + fields[j] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path, HeaderMode mode) { return parse_csv(read_text(path), mode); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Eigen::Ref<const Eigen::MatrixXd>& values, const std::vector<std::string>& header) {
  std::string out;
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j) out += ',';
      out += header[j];
    }
    out += '\n';
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) out += ',';
      out += format_double(values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::vector<int> parse_labels(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<int> labels;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string field = trim(line);
    if (field.empty()) continue;
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
      throw InputError("labels line " + std::to_string(line_no) + ": expected a non-negative integer, got '" +
                       field + "'");
    }
    labels.push_back(value);
  }
  return labels;
}

std::vector<int> read_labels(const std::filesystem::path& path) { return parse_labels(read_text(path)); }

std::string labels_to_text(const std::vector<int>& labels) {
  std::string out;
  for (int l : labels) {
    out += std::to_string(l);
    out += '\n';
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  require(j.is_array(), "expected a JSON array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), "expected a number in array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  require(j.is_array(), "expected a JSON array of rows");
  if (j.empty()) return {};
  const auto cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_array() && j[i].size() == cols, "ragged matrix rows in JSON");
    m.row(static_cast<Eigen::Index>(i)) = vector_from_json(j[i]).transpose();
  }
  return m;
}

json tensor_to_json(const SymmetricTensor& t) {
  return json{{"dim", t.dim()}, {"order", t.order()}, {"coeffs", vector_to_json(t.coeffs())}};
}

SymmetricTensor tensor_from_json(const json& j) {
  require(j.is_object() && j.contains("dim") && j.contains("order") && j.contains("coeffs"),
          "tensor JSON needs \"dim\", \"order\" and \"coeffs\"");
  require(j["dim"].is_number_integer() && j["order"].is_number_integer(), "tensor dim/order must be integers");
  const int dim = j["dim"].get<int>();
  const int order = j["order"].get<int>();
  require(dim >= 1 && order >= 1, "tensor dim and order must be >= 1");
  return SymmetricTensor(dim, order, vector_from_json(j["coeffs"]));
}

json decomposition_to_json(const WaringDecomposition& w, double residual) {
  json points = json::array();
  for (const auto& p : w.points) points.push_back(vector_to_json(p));
  return json{{"weights", vector_to_json(w.weights)}, {"points", points}, {"residual", residual}};
}

WaringDecomposition decomposition_from_json(const json& j) {
  require(j.is_object() && j.contains("weights") && j.contains("points"),
          "decomposition JSON needs \"weights\" and \"points\"");
  WaringDecomposition w;
  w.weights = vector_from_json(j["weights"]);
  for (const auto& p : j["points"]) w.points.push_back(vector_from_json(p));
  w.order = j.value("order", 3);
  require(static_cast<std::size_t>(w.weights.size()) == w.points.size(), "weights/points length mismatch");
  return w;
}

json params_to_json(const GmmParams& theta) {
  return json{{"weights", vector_to_json(theta.weights)},
              {"means", matrix_to_json(theta.means)},
              {"variances", vector_to_json(theta.variances)}};
}

GmmParams params_from_json(const json& j) {
  require(j.is_object() && j.contains("weights") && j.contains("means") && j.contains("variances"),
          "mixture JSON needs \"weights\", \"means\" and \"variances\"");
  GmmParams theta;
  theta.weights = vector_from_json(j["weights"]);
  theta.means = matrix_from_json(j["means"]);
  theta.variances = vector_from_json(j["variances"]);
  theta.validate(1e-6);
  return theta;
}

json moments_to_json(const MomentSet& moments) {
  json out{{"sigma_bar_sq", moments.sigma_bar_sq},
           {"v", vector_to_json(moments.v)},
           {"m1", vector_to_json(moments.m1)},
           {"m2", matrix_to_json(moments.m2)},
           {"m3", tensor_to_json(moments.m3)},
           {"multiplicity_warning", moments.multiplicity_warning}};
  if (moments.n_samples) {
    out["n_samples"] = *moments.n_samples;
  } else {
    out["n_samples"] = "exact";
  }
  return out;
}

}  // namespace momentgmm::io
