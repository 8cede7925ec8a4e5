#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "l0erm/core.hpp"
#include "l0erm/erm.hpp"

namespace l0erm {

// File and format problems; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedDataset {
  Dataset data;
  std::optional<std::vector<double>> eta;
};

// Header y,x1,x2,...,x{p+1}; column x{j+2} is xt column j. An optional
// trailing eta column carries P(Y = 1 | X).
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data,
                       const std::vector<double>* eta = nullptr);
LoadedDataset read_dataset_csv(const std::filesystem::path& path);

std::string format_number(double v);

nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const SolverSummary& s);

void write_text_file(const std::filesystem::path& path, const std::string& text);
void append_json_line(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace l0erm
