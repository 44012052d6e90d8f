#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = QMEIXNER_CLI_PATH;

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("qmeixner_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = kCli + " " + args;
  if (!stdout_file.empty()) {
    cmd += " > " + stdout_file.string();
  } else {
    cmd += " > /dev/null";
  }
  cmd += " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("") == 2);                       // a subcommand is required
  CHECK(run("frobnicate") == 2);             // unknown subcommand
  CHECK(run("measure") == 2);                // --kind is required
  CHECK(run("measure --kind sideways") == 2);
  CHECK(run("measure --kind transition --format xml") == 2);
  CHECK(run("measure --kind transition --s 0.9 --t 0.7") == 2);  // reversed times
  CHECK(run("measure --kind transition --q 1.5") == 2);          // q outside (-1, 1)
  CHECK(run("measure --kind transition --tau -0.5") == 2);
  CHECK(run("moments --kind nu --kmax 200 --n 16") == 2);  // beyond rule exactness
  CHECK(run("generator") == 2);              // needs --poly or --builtin
  CHECK(run("generator --poly 0,1 --builtin cauchy") == 2);  // but not both
  CHECK(run("generator --builtin rational") == 2);
  CHECK(run("verify --only no_such_check") == 2);
  CHECK(run("simulate --steps 0 --paths 2 --n 4") == 2);
  CHECK(run("simulate --t0 1 --t1 1 --paths 2 --n 4") == 2);
  CHECK(run("converge --side up") == 2);
  CHECK(run("measure --kind transition --output /nonexistent_dir_zzz/out.csv") == 2);
}

TEST_CASE("measure subcommand") {
  const fs::path out = scratch_dir() / "measure.csv";
  CHECK(run("measure --kind transition --q 0.5 --theta 0.3 --tau 0.2 "
            "--x 0.4 --s 0.2 --t 0.7 --n 16 --format csv",
            out) == 0);
  std::istringstream in(slurp(out));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "node,weight");
  double mass = 0.0, mean = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    const double node = std::strtod(line.substr(0, comma).c_str(), nullptr);
    const double weight = std::strtod(line.substr(comma + 1).c_str(), nullptr);
    CHECK(weight >= 0.0);
    mass += weight;
    mean += weight * node;
    ++rows;
  }
  CHECK(rows == 16);
  CHECK(mass == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(mean == Catch::Approx(0.4).margin(1e-10));

  SECTION("json variant parses and matches sizes") {
    const fs::path jout = scratch_dir() / "measure.json";
    CHECK(run("measure --kind nu --x 0.4 --t 0.7 --n 12 --format json", jout) == 0);
    const json j = json::parse(slurp(jout));
    CHECK(j["nodes"].size() == 12);
    CHECK(j["weights"].size() == 12);
  }
}

TEST_CASE("moments subcommand") {
  const fs::path out = scratch_dir() / "moments.json";
  CHECK(run("moments --kind nu --q 0 --theta 0.5 --tau 0.5 --t 0.5 "
            "--kmax 2 --n 16 --format json",
            out) == 0);
  const json j = json::parse(slurp(out));
  const auto mom = j["moments"].get<std::vector<double>>();
  REQUIRE(mom.size() == 3);
  CHECK(mom[0] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(mom[1] == Catch::Approx(0.5).margin(1e-12));                    // mean = theta
  CHECK(mom[2] - mom[1] * mom[1] == Catch::Approx(1.0).epsilon(1e-10));  // var = t + tau
}

TEST_CASE("generator subcommand") {
  const fs::path out = scratch_dir() / "gen.json";
  // A applied to y^2 is identically 1
  CHECK(run("generator --poly 0,0,1 --x 0.4 --t 1.0 --format json", out) == 0);
  json j = json::parse(slurp(out));
  CHECK(j["value"].get<double>() == Catch::Approx(1.0).epsilon(1e-12));

  CHECK(run("generator --builtin cauchy --x 0.5 --t 1.0 --format json", out) == 0);
  j = json::parse(slurp(out));
  CHECK(std::abs(j["value"].get<double>()) <= 1.0);  // |A f| <= sup|f''| / 2
}

TEST_CASE("converge subcommand") {
  const fs::path out = scratch_dir() / "conv.json";
  CHECK(run("converge --x 0.4 --t 0.7 --kmax 4 --n 32 --side right --format json", out) == 0);
  const json j = json::parse(slurp(out));
  CHECK(j["side"] == "right");
  REQUIRE(j["slopes"].size() == 5);
  CHECK(j["slopes"][0].is_null());  // exact mass match: nothing to fit
  CHECK(j["slopes"][1].is_null());  // exact mean match
  for (int k = 2; k <= 4; ++k) {
    CHECK(std::abs(j["slopes"][k].get<double>() - 1.0) <= 0.2);
  }
}

TEST_CASE("simulate subcommand") {
  const fs::path a = scratch_dir() / "paths_a.json";
  const fs::path b = scratch_dir() / "paths_b.json";
  const std::string args =
      "simulate --x0 0.4 --t0 0 --t1 1 --steps 3 --paths 40 --n 8 --seed 42 --format json";
  CHECK(run(args, a) == 0);
  CHECK(run(args, b) == 0);
  CHECK(slurp(a) == slurp(b));  // byte-identical across runs

  const json j = json::parse(slurp(a));
  REQUIRE(j["times"].size() == 4);
  CHECK(j["times"][0].get<double>() == 0.0);
  CHECK(j["times"][3].get<double>() == 1.0);
  REQUIRE(j["paths"].size() == 40);
  for (const auto& path : j["paths"]) {
    REQUIRE(path.size() == 4);
    CHECK(path[0].get<double>() == 0.4);
  }

  SECTION("explicit time grids and csv output") {
    const fs::path c = scratch_dir() / "paths.csv";
    CHECK(run("simulate --times 0,0.25,1 --paths 3 --n 8", c) == 0);
    std::istringstream in(slurp(c));
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "path_id,time,value");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 9);
  }
}

TEST_CASE("verify subcommand") {
  const fs::path out = scratch_dir() / "verify.json";
  CHECK(run("verify --n 32", out) == 0);
  const json j = json::parse(slurp(out));
  CHECK(j["all_pass"] == true);
  REQUIRE(j["checks"].size() == 14);
  for (const auto& c : j["checks"]) {
    CHECK(c["pass"] == true);
    CHECK(c["max_residual"].get<double>() < c["tolerance"].get<double>());
  }

  SECTION("check selection and axis collapse") {
    CHECK(run("verify --only martingale_mean,conditional_variance --q 0.3 --x 0.4 --n 16",
              out) == 0);
    const json sel = json::parse(slurp(out));
    REQUIRE(sel["checks"].size() == 2);
    CHECK(sel["all_pass"] == true);
  }
  SECTION("deterministic report bytes") {
    const fs::path again = scratch_dir() / "verify_again.json";
    CHECK(run("verify --only chapman_kolmogorov --n 16", out) == 0);
    CHECK(run("verify --only chapman_kolmogorov --n 16", again) == 0);
    CHECK(slurp(out) == slurp(again));
  }
}

TEST_CASE("relative outputs resolve under the output directory variable") {
  const fs::path dir = scratch_dir() / "outdir";
  fs::create_directories(dir);
  const std::string cmd = "QMEIXNER_OUTPUT_DIR=" + dir.string() + " " + kCli +
                          " measure --kind nu --n 8 --output rel.csv > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::exists(dir / "rel.csv"));

  // absolute paths ignore the variable
  const fs::path abs = scratch_dir() / "abs.csv";
  const std::string cmd2 = "QMEIXNER_OUTPUT_DIR=" + dir.string() + " " + kCli +
                           " measure --kind nu --n 8 --output " + abs.string() +
                           " > /dev/null 2> /dev/null";
  REQUIRE(std::system(cmd2.c_str()) != -1);
  CHECK(fs::exists(abs));
  CHECK(!fs::exists(dir / abs.filename()));
}
