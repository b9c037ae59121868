#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string("\"") + MANGLED_CLI_PATH + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (const std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempRoot {
  fs::path path;
  TempRoot() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("mangled-cli-test-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempRoot() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string out() const { return "--out \"" + path.string() + "\" "; }
};

}  // namespace

TEST_CASE("headline") {
  TempRoot root;
  const Run r = run(root.out() + "headline");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.317311") != std::string::npos);
  CHECK(r.out.find("-43429.45") != std::string::npos);
  CHECK(fs::exists(root.path / "headline" / "headline.txt"));
  CHECK(fs::exists(root.path / "headline" / "summary.txt"));
  CHECK(fs::exists(root.path / "headline" / "config.json"));
}

TEST_CASE("mc is deterministic for a fixed seed") {
  TempRoot root;
  const std::string args = "mc --p 0.55 --eps 0.2 --n_events 200 --n_paths 200000 --seed 17";
  REQUIRE(run(root.out() + "--run-name a --workers 1 " + args).code == 0);
  REQUIRE(run(root.out() + "--run-name b --workers 3 " + args).code == 0);
  for (const char* f : {"ensemble.csv", "histogram.csv", "ensemble.json"}) {
    const std::string a = slurp(root.path / "a" / f);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(root.path / "b" / f));
  }
}

TEST_CASE("mc without a seed is a usage error") {
  TempRoot root;
  CHECK(run(root.out() + "mc --p 0.6").code == 2);
  CHECK_FALSE(fs::exists(root.path / "mc"));
}

TEST_CASE("usage errors exit 2") {
  TempRoot root;
  CHECK(run(root.out() + "analytic --no-such-flag 1").code == 2);
  CHECK(run(root.out() + "").code == 2);
  CHECK(run(root.out() + "frobnicate").code == 2);
  CHECK(run(root.out() + "analytic --t \"\\\"soon\\\"\"").code == 2);
  CHECK(run(root.out() + "mc --seed 1 --p 1.5").code == 2);
  CHECK(run(root.out() + "analytic --v 1 --p 0.6").code == 2);
  CHECK(run(root.out() + "born --outcomes '[{\"f\":0.5,\"g\":1}]'").code == 2);

  const fs::path bad = root.path / "bad.json";
  std::ofstream(bad) << "{\"nonsense\": 3}";
  CHECK(run(root.out() + "analytic --config \"" + bad.string() + "\"").code == 2);
  const fs::path broken = root.path / "broken.json";
  std::ofstream(broken) << "{\"t\": ";
  CHECK(run(root.out() + "analytic --config \"" + broken.string() + "\"").code == 2);
}

TEST_CASE("output root from the environment") {
  TempRoot root;
  const Run r = run("--run-name envrun scan --p_values '[0.6]'");
  // Without --out or the variable the run lands in ./runs; clean it up.
  std::error_code ec;
  fs::remove_all("runs/envrun", ec);
  CHECK(r.code == 0);
  const std::string cmd = "MANGLED_OUTPUT_ROOT=\"" + root.path.string() + "\" \"" + MANGLED_CLI_PATH +
                          "\" scan --run-name viaenv >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(root.path / "viaenv" / "scan.csv"));
}

TEST_CASE("resolved config reproduces the run") {
  TempRoot root;
  REQUIRE(run(root.out() + "--run-name first mc --p 0.6 --eps 0.3 --n_events 12 --n_paths 50000 --seed 5").code == 0);
  const fs::path cfg = root.path / "first" / "config.json";
  REQUIRE(fs::exists(cfg));
  REQUIRE(run(root.out() + "--run-name second mc --config \"" + cfg.string() + "\"").code == 0);
  for (const char* f : {"ensemble.csv", "histogram.csv", "ensemble.json", "config.json", "summary.txt"}) {
    CHECK(slurp(root.path / "first" / f) == slurp(root.path / "second" / f));
  }
  CHECK(slurp(root.path / "first" / "summary.txt").find("exact count by enumeration = 889") != std::string::npos);

  REQUIRE(run(root.out() + "--run-name a1 analytic --t 8 --log_f '[-1, -4]'").code == 0);
  REQUIRE(run(root.out() + "--run-name a2 analytic --config \"" + (root.path / "a1" / "config.json").string() + "\"")
              .code == 0);
  for (const char* f : {"all_worlds.csv", "unmangled.csv", "lambda.csv"}) {
    CHECK(slurp(root.path / "a1" / f) == slurp(root.path / "a2" / f));
  }

  REQUIRE(run(root.out() + "--run-name p1 pde --t 4 --n_cells 512 --dt 0.02").code == 0);
  REQUIRE(run(root.out() + "--run-name p2 pde --config \"" + (root.path / "p1" / "config.json").string() + "\"")
              .code == 0);
  CHECK(slurp(root.path / "p1" / "snapshots.csv") == slurp(root.path / "p2" / "snapshots.csv"));
}

TEST_CASE("flags override the config file") {
  TempRoot root;
  const fs::path cfg = root.path / "c.json";
  std::ofstream(cfg) << "{\"command\": \"mc\", \"p\": 0.6, \"eps\": 0.3, \"n_events\": 12, \"seed\": 1, \"n_paths\": 1000}";
  REQUIRE(run(root.out() + "--run-name o mc --config \"" + cfg.string() + "\" --n_events 10").code == 0);
  const std::string resolved = slurp(root.path / "o" / "config.json");
  CHECK(resolved.find("\"n_events\": 10") != std::string::npos);
  CHECK(resolved.find("\"model\": \"discrete\"") != std::string::npos);
}

TEST_CASE("csv dialect") {
  TempRoot root;
  REQUIRE(run(root.out() + "--run-name a analytic --t 8").code == 0);
  const std::string csv = slurp(root.path / "a" / "lambda.csv");
  CHECK(csv.rfind("log_f,g,t1,t2,log_lambda,gamma\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.find("-2,1,50,400,") != std::string::npos);
}

TEST_CASE("born runs the analytic and PDE engines") {
  TempRoot root;
  const Run r = run(root.out() + "--run-name b born --t1 10 --t2 20 --n_cells 2048 --dt 0.02 --gamma_series_every 100");
  CHECK(r.code == 0);
  for (const char* f : {"deviation.csv", "deviation.json", "gamma_series.csv", "summary.txt", "config.json"}) {
    CHECK(fs::exists(root.path / "b" / f));
  }
  const std::string csv = slurp(root.path / "b" / "deviation.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("validate runs selected criteria") {
  TempRoot root;
  const Run r = run(root.out() + "validate --criteria '[1, 9]'");
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS 1") != std::string::npos);
  CHECK(r.out.find("PASS 9") != std::string::npos);
  CHECK(run(root.out() + "validate --criteria '[11]'").code == 2);
}
