#include "l0erm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace l0erm {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw IoError(fmt::format("{}:{}: cannot parse '{}' as a number", path.string(), line, s));
  }
  return v;
}

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data, const std::vector<double>* eta) {
  if (eta && eta->size() != data.n()) throw std::invalid_argument("eta length does not match the data");
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  std::string s = "y,x1";
  for (std::size_t j = 0; j < data.p(); ++j) s += fmt::format(",x{}", j + 2);
  if (eta) s += ",eta";
  s += "\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    s += fmt::format("{},{}", data.label(i), format_number(data.x1(i)));
    for (std::size_t j = 0; j < data.p(); ++j) {
      s += ",";
      s += format_number(data.xt()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    if (eta) s += "," + format_number((*eta)[i]);
    s += "\n";
  }
  out << s;
  if (!out) throw IoError(fmt::format("write to {} failed", path.string()));
}

LoadedDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {} for reading", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw IoError(fmt::format("{}: empty file", path.string()));
  const auto header = split(line);
  bool has_eta = !header.empty() && header.back() == "eta";
  const std::size_t feature_cols = header.size() - (has_eta ? 1 : 0);
  if (feature_cols < 2 || header[0] != "y" || header[1] != "x1") {
    throw IoError(fmt::format("{}: header must start with y,x1", path.string()));
  }
  for (std::size_t c = 2; c < feature_cols; ++c) {
    if (header[c] != fmt::format("x{}", c)) {
      throw IoError(fmt::format("{}: expected column x{} but found '{}'", path.string(), c, header[c]));
    }
  }
  const std::size_t p = feature_cols - 2;
  std::vector<int> y;
  std::vector<double> x1, eta, flat;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw IoError(fmt::format("{}:{}: expected {} fields, found {}", path.string(), lineno, header.size(), f.size()));
    }
    const double yv = parse_double(f[0], path, lineno);
    if (yv != 0.0 && yv != 1.0) throw IoError(fmt::format("{}:{}: label must be 0 or 1", path.string(), lineno));
    y.push_back(static_cast<int>(yv));
    x1.push_back(parse_double(f[1], path, lineno));
    for (std::size_t j = 0; j < p; ++j) flat.push_back(parse_double(f[2 + j], path, lineno));
    if (has_eta) eta.push_back(parse_double(f.back(), path, lineno));
  }
  if (y.empty()) throw IoError(fmt::format("{}: no data rows", path.string()));
  Eigen::MatrixXd xt(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < p; ++j) xt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * p + j];
  LoadedDataset out{Dataset(std::move(y), std::move(x1), std::move(xt)), std::nullopt};
  if (has_eta) out.eta = std::move(eta);
  return out;
}

nlohmann::json to_json(const SolverSummary& s) {
  nlohmann::json j;
  j["status"] = milp::to_string(s.status);
  j["objective"] = s.objective;
  j["best_bound"] = s.best_bound;
  j["relative_gap"] = s.relative_gap;
  j["root_bound"] = s.root_bound;
  j["nodes"] = s.nodes;
  j["elapsed"] = s.elapsed;
  return j;
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json j;
  j["theta_hat"] = fit.theta_hat;
  j["selected"] = fit.selected;
  j["lambda"] = fit.lambda;
  j["max_features"] = fit.max_features ? nlohmann::json(*fit.max_features) : nlohmann::json(nullptr);
  j["risk_milp"] = fit.risk_milp;
  j["risk_recomputed"] = fit.risk_recomputed;
  j["penalty"] = fit.penalty;
  j["objective"] = fit.objective;
  j["polished"] = fit.polished;
  j["boundary_discrepancy"] = fit.boundary_discrepancy();
  j["solver"] = to_json(fit.solver);
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("write to {} failed", path.string()));
}

void append_json_line(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError(fmt::format("cannot open {} for appending", path.string()));
  out << j.dump() << "\n";
  if (!out) throw IoError(fmt::format("write to {} failed", path.string()));
}

}  // namespace l0erm
