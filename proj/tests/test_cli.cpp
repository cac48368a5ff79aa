#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef STMG_CLI_PATH
#error "STMG_CLI_PATH must be defined"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + STMG_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stmg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

const char* kTinyConfig = R"({
  "equation": "heat", "scheme": "dg", "k": 1, "p": 1, "dim": 1,
  "base_cells": 4, "refinements": 1, "r_min": 1, "r_max": 2, "batch": 2
})";

} // namespace

TEST_CASE("dry run prints the plan and writes nothing") {
  const fs::path dir = fresh_dir("dry");
  write_file(dir / "c.json", kTinyConfig);
  const int rc = run_cli("--dry-run --config " + (dir / "c.json").string() +
                         " --output " + (dir / "out").string() + " solve");
  CHECK(rc == 0);
  CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("solve writes report.json and probes.csv") {
  const fs::path dir = fresh_dir("solve");
  write_file(dir / "c.json", R"({
    "equation": "heat", "scheme": "dg", "k": 1, "p": 1, "dim": 1,
    "base_cells": 4, "refinements": 1, "batch": 2,
    "probes": [[0.5, 0.0, 0.0]]
  })");
  const int rc = run_cli("--config " + (dir / "c.json").string() +
                         " --output " + (dir / "out").string() + " solve");
  CHECK(rc == 0);
  const json report = json::parse(slurp(dir / "out" / "report.json"));
  REQUIRE(report.contains("runs"));
  const json& run = report["runs"][0];
  CHECK(run["converged"].get<bool>());
  CHECK(run["mean_iterations"].get<double>() > 0.0);
  CHECK(run.contains("hierarchy"));
  CHECK(run.contains("sections"));
  CHECK(run.contains("error_u"));
  CHECK(report["config"]["equation"] == "heat");
  const std::string probes = slurp(dir / "out" / "probes.csv");
  CHECK(probes.rfind("t,u_probe1", 0) == 0);
  CHECK(std::count(probes.begin(), probes.end(), '\n') > 2);
}

TEST_CASE("convergence writes an eoc.csv with one row per refinement") {
  const fs::path dir = fresh_dir("conv");
  write_file(dir / "c.json", kTinyConfig);
  const int rc =
      run_cli("--config " + (dir / "c.json").string() + " --output " +
              (dir / "out").string() + " convergence");
  CHECK(rc == 0);
  const std::string csv = slurp(dir / "out" / "eoc.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header.rfind("r,dofs_global,err_l2_l2_u", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(lines, line);)
    if (!line.empty())
      ++rows;
  CHECK(rows == 2); // r_min=1 .. r_max=2
  CHECK(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("profile writes sections.csv with consistent shares") {
  const fs::path dir = fresh_dir("prof");
  write_file(dir / "c.json", kTinyConfig);
  const int rc = run_cli("--config " + (dir / "c.json").string() +
                         " --output " + (dir / "out").string() + " profile");
  CHECK(rc == 0);
  const std::string csv = slurp(dir / "out" / "sections.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "section,seconds,share");
  double total = -1.0, sum = 0.0;
  int rows = 0;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty())
      continue;
    ++rows;
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const std::string name = line.substr(0, c1);
    const double seconds = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    if (name == "Total")
      total = seconds;
    else
      sum += seconds;
  }
  CHECK(rows == 5);
  REQUIRE(total >= 0.0);
  CHECK(std::abs(sum - total) <= 0.02 * total + 1e-9);
  const json report = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report.contains("throughput_dofs_per_second"));
}

TEST_CASE("--set overrides take effect") {
  const fs::path dir = fresh_dir("set");
  write_file(dir / "c.json", kTinyConfig);
  const int rc = run_cli("--config " + (dir / "c.json").string() +
                         " --set k=2 --set batch=4 --output " +
                         (dir / "out").string() + " solve");
  CHECK(rc == 0);
  const json report = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["config"]["k"].get<int>() == 2);
  CHECK(report["config"]["batch"].get<int>() == 4);
}

TEST_CASE("configuration errors exit with code 2 and produce no outputs") {
  const fs::path dir = fresh_dir("bad");
  write_file(dir / "broken.json", "{ not json");
  CHECK(run_cli("--config " + (dir / "broken.json").string() + " --output " +
                (dir / "out").string() + " solve") == 2);
  write_file(dir / "unknown.json", R"({"equatoin": "heat"})");
  CHECK(run_cli("--config " + (dir / "unknown.json").string() + " --output " +
                (dir / "out").string() + " solve") == 2);
  write_file(dir / "c.json", kTinyConfig);
  CHECK(run_cli("--config " + (dir / "c.json").string() +
                " --set nonsense=1 --output " + (dir / "out").string() +
                " solve") == 2);
  CHECK(run_cli("--config " + (dir / "c.json").string() +
                " --set k --output " + (dir / "out").string() + " solve") ==
        2);
  // invalid discretization parameters are also configuration errors
  CHECK(run_cli("--config " + (dir / "c.json").string() +
                " --set batch=3 --output " + (dir / "out").string() +
                " solve") == 2);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("a subcommand is required") {
  CHECK(run_cli("") != 0);
}
