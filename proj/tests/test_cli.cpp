#include "doctest.h"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = STRUCTGP_CLI;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  const std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("structgp_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("fit --data /nonexistent/file.csv").code == 1);
  CHECK(run("simulate --k 0 --out-dir /tmp/x").code == 1);
  CHECK(run("plot-data --report /nonexistent --figure exp1").code == 1);
  CHECK(run("--help").code == 0);
  CHECK(run("fit --help").out.find("--n-lambda") != std::string::npos);
}

TEST_CASE("simulate is deterministic and honours the seed fallback") {
  const auto a = scratch("sim_a"), b = scratch("sim_b"), c = scratch("sim_c");
  REQUIRE(run("simulate --k 4 --md 2 --patients 50 --seed 9 --out-dir " + a.string()).code == 0);
  REQUIRE(run("simulate --k 4 --md 2 --patients 50 --seed 9 --out-dir " + b.string()).code == 0);
  REQUIRE(run("simulate --k 4 --md 2 --patients 50 --out-dir " + c.string()).code == 0);
  const std::string data = slurp(a / "data.csv");
  CHECK(data == slurp(b / "data.csv"));
  CHECK(slurp(a / "truth.json") == slurp(b / "truth.json"));
  CHECK(std::count(data.begin(), data.end(), '\n') == 2001);

  const auto d = scratch("sim_env");
  REQUIRE(std::system(("STRUCTGP_SEED=9 " + kCli + " simulate --k 4 --md 2 --patients 50 --out-dir " + d.string() +
                       " 2>/dev/null")
                          .c_str()) == 0);
  CHECK(slurp(d / "data.csv") == data);
  CHECK(slurp(c / "data.csv") != data);

  const auto e = scratch("sim_empty");
  REQUIRE(run("simulate --k 5 --md 0 --patients 2 --out-dir " + e.string()).code == 0);
  CHECK(nlohmann::json::parse(slurp(e / "truth.json")).at("graph").at("edges").empty());
}

TEST_CASE("fit and score") {
  const auto dir = scratch("fit");
  REQUIRE(run("simulate --k 3 --md 1 --patients 10 --obs-per-task 5 --seed 2 --out-dir " + dir.string()).code == 0);
  const auto fit_path = (dir / "fit.json").string();
  REQUIRE(run("fit --data " + (dir / "data.csv").string() + " --n-lambda 1 --out " + fit_path).code == 0);
  const auto fit = nlohmann::json::parse(slurp(fit_path));
  CHECK(fit.at("path").size() == 1);

  const auto score = run("score --pred " + (dir / "truth.json").string() + " --truth " + (dir / "truth.json").string());
  REQUIRE(score.code == 0);
  const auto s = nlohmann::json::parse(score.out);
  CHECK(s.at("shd") == 0);
  CHECK(s.at("rmse_s") == 0.0);
  CHECK(run("score --pred " + fit_path + " --truth " + (dir / "truth.json").string()).code == 0);
}

TEST_CASE("experiment, plot-data and verify") {
  const auto dir = scratch("exp");
  {
    std::ofstream cfg(dir / "cfg.txt");
    cfg << "k = 3\nmd = 1\nn_lambda = 3\nr = 2, 3\nn_per_task = 4\nreps = 2\nseed = 4\n";
  }
  const auto cfg = (dir / "cfg.txt").string();
  REQUIRE(run("experiment --config " + cfg + " --out " + (dir / "a.csv").string()).code == 0);
  REQUIRE(run("experiment --config " + cfg + " --jobs 2 --out " + (dir / "b.csv").string()).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  const std::string report = slurp(dir / "a.csv");
  CHECK(std::count(report.begin(), report.end(), '\n') == 5);
  CHECK(run("experiment --config " + cfg + " --preset TOY").code == 1);

  const auto pd = run("plot-data --report " + (dir / "a.csv").string() + " --figure exp1");
  REQUIRE(pd.code == 0);
  CHECK(pd.out.rfind("r,n,failed,mean_shd,ci_lo,ci_hi", 0) == 0);
  CHECK(run("plot-data --report " + (dir / "a.csv").string() + " --figure nope").code == 1);

  const auto v = run("verify --seed 1 --k 4 --instances 5");
  CHECK(v.code == 0);
  CHECK(v.out.find("PASS") != std::string::npos);
}
