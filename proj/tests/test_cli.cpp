#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "l0erm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = l0erm::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("l0erm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("simulate is deterministic for a seed") {
  const auto dir = scratch("sim");
  for (const char* sub : {"a", "b"}) {
    auto r = invoke({"simulate", "--design", "ii", "--p", "4", "--n", "30", "--n-valid", "50", "--reps", "2",
                     "--seed", "11", "--out", (dir / sub).string()});
    REQUIRE(r.code == 0);
  }
  for (const char* f : {"train_rep0.csv", "valid_rep1.csv", "manifest.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("fit writes one JSON line") {
  const auto dir = scratch("fit");
  REQUIRE(invoke({"simulate", "--p", "3", "--n", "40", "--reps", "1", "--seed", "3", "--out", dir.string()}).code == 0);
  auto r = invoke({"fit", "--data", (dir / "train_rep0.csv").string(), "--method", "intercept_only"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("method") == "intercept_only");
  CHECK(j.contains("t_star"));
  r = invoke({"fit", "--data", (dir / "train_rep0.csv").string(), "--method", "l0erm", "--lambda", "0.05",
              "--export-lp", (dir / "model.lp").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "model.lp"));
}

TEST_CASE("usage and io errors") {
  auto r = invoke({"theory", "--q", "1"});
  CHECK(r.code == l0erm::cli::kExitUsage);
  CHECK(r.err.find("--M-sigma") != std::string::npos);
  CHECK(invoke({"fit", "--data", "/nonexistent/file.csv"}).code == l0erm::cli::kExitIo);
  CHECK(invoke({"experiment", "--methods", "ridge", "--reps", "1"}).code == l0erm::cli::kExitUsage);
}

TEST_CASE("theory JSON round trip") {
  const auto dir = scratch("theory");
  auto r = invoke({"theory", "--M-sigma", "1", "--format-json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  r = invoke({"theory", "--M-sigma", "1", "--json", (dir / "t.json").string()});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "t.json")) == j);
}

TEST_CASE("two experiment runs give byte-identical tables") {
  const auto dir = scratch("exp");
  for (const char* sub : {"a", "b"}) {
    auto r = invoke({"experiment", "--p", "5", "--n-train", "50", "--n-valid", "500", "--reps", "3", "--seed", "9",
                     "--node-limit", "100", "--time-limit", "1e9", "--methods", "l0erm", "lasso_opt", "lasso_1se",
                     "intercept_only", "--out", (dir / sub).string(), "--quiet"});
    REQUIRE(r.code == 0);
  }
  for (const char* f : {"summary.csv", "summary.txt", "repetitions.csv", "metrics_l0erm.csv"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}
