#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "momentgmm/gmm.hpp"
#include "momentgmm/moments.hpp"
#include "momentgmm/symtensor.hpp"
#include "momentgmm/waring.hpp"

namespace momentgmm::io {

using json = nlohmann::json;

enum class HeaderMode { automatic, present, absent };

struct CsvTable {
  Eigen::MatrixXd values;
  std::vector<std::string> header;  // empty when the file has none
};

/// Comma separated, '.' decimal, at most one header row. Ragged rows and
/// unparsable fields raise InputError naming the line.
CsvTable parse_csv(const std::string& text, HeaderMode mode = HeaderMode::automatic);
CsvTable read_csv(const std::filesystem::path& path, HeaderMode mode = HeaderMode::automatic);

/// Values are printed with 17 significant digits so that re-reading is lossless.
std::string format_double(double v);
std::string to_csv(const Eigen::Ref<const Eigen::MatrixXd>& values, const std::vector<std::string>& header = {});

std::vector<int> parse_labels(const std::string& text);
std::vector<int> read_labels(const std::filesystem::path& path);
std::string labels_to_text(const std::vector<int>& labels);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

json tensor_to_json(const SymmetricTensor& t);
SymmetricTensor tensor_from_json(const json& j);

json decomposition_to_json(const WaringDecomposition& w, double residual);
WaringDecomposition decomposition_from_json(const json& j);

json params_to_json(const GmmParams& theta);
GmmParams params_from_json(const json& j);

json moments_to_json(const MomentSet& moments);

json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v);
json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m);
Eigen::VectorXd vector_from_json(const json& j);
Eigen::MatrixXd matrix_from_json(const json& j);

}  // namespace momentgmm::io
