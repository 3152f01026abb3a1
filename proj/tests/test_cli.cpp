#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "topent/cli.hpp"

using namespace topent;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& leaf) {
  fs::path dir = fs::temp_directory_path() / "topent_cli_tests" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kMinimalEstimate = R"({
  "space": {"kind": "interval-grid", "size": 801},
  "system": {"schedule": "constant", "map": {"name": "tent", "params": {"slope": 2.0}}},
  "task": {"type": "estimate", "epsilons": [0.04, 0.02], "n_max": 7},
  "seed": 11
})";

}  // namespace

TEST_CASE("minimal estimate config parses") {
  cli::ExperimentConfig config = cli::parse_config(kMinimalEstimate);
  CHECK(config.task_type == "estimate");
  CHECK(config.seed == 11);
  CHECK(config.space.kind == "interval-grid");
}

TEST_CASE("unknown primitive gets a nearest-name hint") {
  std::string text = kMinimalEstimate;
  text.replace(text.find("\"tent\""), 6, "\"tnet\"");
  try {
    cli::parse_config(text);
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& err) {
    std::string what = err.what();
    CHECK(what.find("tnet") != std::string::npos);
    CHECK(what.find("tent") != std::string::npos);
  }
}

TEST_CASE("non-decreasing epsilon schedules are rejected") {
  std::string text = kMinimalEstimate;
  text.replace(text.find("[0.04, 0.02]"), 12, "[0.02, 0.04]");
  CHECK_THROWS_AS(cli::parse_config(text), cli::ConfigError);
}

TEST_CASE("json syntax errors report the line") {
  try {
    cli::parse_config("{\n  \"space\": {,}\n}");
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& err) {
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("task type must be known") {
  std::string text = kMinimalEstimate;
  text.replace(text.find("\"estimate\""), 10, "\"estimate2\"");
  CHECK_THROWS_AS(cli::parse_config(text), cli::ConfigError);
}

TEST_CASE("estimate run writes deterministic reports") {
  cli::ExperimentConfig config = cli::parse_config(kMinimalEstimate);
  fs::path dir_a = scratch_dir("est_a");
  fs::path dir_b = scratch_dir("est_b");
  cli::RunResult a = cli::run(config, dir_a);
  cli::RunResult b = cli::run(config, dir_b);
  CHECK(a.all_checks_passed);
  std::string csv = slurp(a.csv_path);
  CHECK(csv == slurp(b.csv_path));
  CHECK(slurp(a.summary_path) == slurp(b.summary_path));
  CHECK(csv.rfind("task,epsilon,n,count_mode,count,rate,residual,flags\n", 0) == 0);
  CHECK(csv.find("separated-rate") != std::string::npos);
  CHECK(a.headline == doctest::Approx(std::log(2.0)).epsilon(0.1));
}

TEST_CASE("shift-entropy task") {
  const char* text = R"({
    "task": {"type": "shift-entropy", "matrix": [[1,1],[1,0]], "tol": 1e-10},
    "seed": 3
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("shift");
  cli::RunResult result = cli::run(config, dir);
  double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(result.headline == doctest::Approx(std::log(phi)).epsilon(1e-9));
  CHECK(slurp(result.summary_path).find("1 1\n1 0\n") != std::string::npos);
}

TEST_CASE("shift-entropy reads matrices from text files") {
  fs::path dir = scratch_dir("matrix_file");
  fs::path matrix_path = dir / "golden.txt";
  {
    std::ofstream out(matrix_path);
    out << "1 1\n1 0\n";
  }
  std::string text = R"({
    "task": {"type": "shift-entropy", "matrix_file": ")" +
                     matrix_path.string() + R"("},
    "seed": 3
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  cli::RunResult result = cli::run(config, dir / "out");
  double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(result.headline == doctest::Approx(std::log(phi)).epsilon(1e-9));
}

TEST_CASE("certify task produces bounds") {
  const char* text = R"({
    "space": {"kind": "interval-grid", "size": 801},
    "system": {"schedule": "constant", "map": {"name": "tent", "params": {"slope": 2.0}}},
    "task": {"type": "certify", "matrix": [[1,1],[1,1]],
             "partition": [[0.0, 0.5], [0.5, 1.0]],
             "equality_mode": true, "depth": 12, "epsilon": 0.002, "sample_words": 64},
    "seed": 5
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("certify");
  cli::RunResult result = cli::run(config, dir);
  CHECK(result.all_checks_passed);
  std::string summary = slurp(result.summary_path);
  CHECK(summary.find("entropy lower bound: 0.69314718056") != std::string::npos);
  CHECK(summary.find("entropy upper bound: 0.69314718056") != std::string::npos);
  CHECK(summary.find("cover conditions: pass") != std::string::npos);
}

TEST_CASE("identity-check iteration on the tent map") {
  const char* text = R"({
    "space": {"kind": "interval-grid", "size": 2001},
    "system": {"schedule": "constant", "map": {"name": "tent", "params": {"slope": 2.0}}},
    "task": {"type": "identity-check", "identity": "iteration", "k": 2,
             "epsilons": [0.032], "n_max": 8,
             "derived": {"epsilons": [0.032], "n_max": 4, "window": [1, 4]}},
    "seed": 2
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("iter");
  cli::RunResult result = cli::run(config, dir);
  CHECK(result.all_checks_passed);
  CHECK(result.headline == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("tail-scan task emits per-index rates") {
  const char* text = R"({
    "space": {"kind": "interval-grid", "size": 801},
    "system": {"schedule": "converging", "family": "tent-slope",
               "target": 2.0, "c": 1.0, "q": 1.0},
    "task": {"type": "tail-scan", "epsilons": [0.04], "n_max": 6, "i_list": [0, 4]},
    "seed": 9
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("tail");
  cli::RunResult result = cli::run(config, dir);
  std::string csv = slurp(result.csv_path);
  CHECK(csv.find("tail-i0") != std::string::npos);
  CHECK(csv.find("tail-i4") != std::string::npos);
  CHECK(csv.find("tail-rate") != std::string::npos);
}

TEST_CASE("identity-check conjugacy on the doubling map") {
  const char* text = R"({
    "space": {"kind": "circle-grid", "size": 1024},
    "system": {"schedule": "constant", "map": {"name": "doubling"}},
    "task": {"type": "identity-check", "identity": "conjugacy", "warp_c": 0.1,
             "epsilons": [0.03125], "n_max": 4, "window": [1, 4],
             "derived": {"epsilons": [0.03125], "n_max": 3, "window": [1, 3]}},
    "seed": 21
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("conj");
  cli::RunResult result = cli::run(config, dir);
  CHECK(result.all_checks_passed);
  std::string summary = slurp(result.summary_path);
  CHECK(summary.find("conjugacy residual") != std::string::npos);
}

TEST_CASE("identity-check product inequality") {
  const char* text = R"({
    "space": {"kind": "interval-grid", "size": 401},
    "system": {"schedule": "constant", "map": {"name": "tent", "params": {"slope": 2.0}}},
    "task": {"type": "identity-check", "identity": "product",
             "second_system": {"schedule": "constant",
                               "map": {"name": "rotation", "params": {"alpha": 0.3}}},
             "second_space": {"kind": "circle-grid", "size": 64},
             "epsilons": [0.04], "n_max": 4, "window": [1, 4]},
    "seed": 23
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("prod");
  cli::RunResult result = cli::run(config, dir);
  CHECK(result.all_checks_passed);
  std::string csv = slurp(result.csv_path);
  CHECK(csv.find("factor-a") != std::string::npos);
  CHECK(csv.find("product") != std::string::npos);
  CHECK(csv.find("difference") != std::string::npos);
}

TEST_CASE("identity-check uniform limit needs a converging schedule") {
  const char* text = R"({
    "space": {"kind": "interval-grid", "size": 801},
    "system": {"schedule": "converging", "family": "tent-slope",
               "target": 2.0, "c": 1.0, "q": 1.0},
    "task": {"type": "identity-check", "identity": "uniform-limit",
             "i_list": [0, 4], "epsilons": [0.04], "n_max": 5, "window": [2, 5]},
    "seed": 29
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("ulimit");
  cli::RunResult result = cli::run(config, dir);
  CHECK(result.all_checks_passed);
  std::string summary = slurp(result.summary_path);
  CHECK(summary.find("limit estimate") != std::string::npos);
  CHECK(summary.find("uniform-limit") != std::string::npos);

  // constant schedules cannot run the uniform-limit check
  const char* bad = R"({
    "space": {"kind": "interval-grid", "size": 801},
    "system": {"schedule": "constant", "map": {"name": "identity"}},
    "task": {"type": "identity-check", "identity": "uniform-limit",
             "i_list": [0, 4], "epsilons": [0.04], "n_max": 5, "window": [2, 5]},
    "seed": 29
  })";
  cli::ExperimentConfig bad_config = cli::parse_config(bad);
  fs::path bad_dir = scratch_dir("ulimit_bad");
  CHECK_THROWS_AS(cli::run(bad_config, bad_dir), cli::ConfigError);
}

TEST_CASE("identity-check tail-monotone") {
  const char* text = R"({
    "space": {"kind": "interval-grid", "size": 801},
    "system": {"schedule": "converging", "family": "tent-slope",
               "target": 2.0, "c": 1.0, "q": 1.0},
    "task": {"type": "identity-check", "identity": "tail-monotone",
             "i_list": [0, 8], "epsilons": [0.04], "n_max": 5, "window": [2, 5]},
    "seed": 31
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("tailmono");
  cli::RunResult result = cli::run(config, dir);
  CHECK(result.all_checks_passed);
  CHECK(slurp(result.summary_path).find("tail-monotone") != std::string::npos);
}

TEST_CASE("affine-piecewise maps come in from the config") {
  // a 3x-mod-1 style expanding map from raw branch data
  const char* text = R"({
    "space": {"kind": "circle-grid", "size": 729},
    "system": {"schedule": "constant",
               "map": {"name": "affine-piecewise",
                       "params": {"breakpoints": [0.0, 0.333333333333333315, 0.66666666666666663, 1.0],
                                  "slopes": [3.0, 3.0, 3.0],
                                  "intercepts": [0.0, -1.0, -2.0],
                                  "circle": true}}},
    "task": {"type": "estimate", "epsilons": [0.05], "n_max": 5, "window": [1, 3]},
    "seed": 17
  })";
  cli::ExperimentConfig config = cli::parse_config(text);
  fs::path dir = scratch_dir("affine");
  cli::RunResult result = cli::run(config, dir);
  CHECK(result.headline == doctest::Approx(std::log(3.0)).epsilon(0.1));

  // branch data that escapes [0,1] is rejected at parse time
  std::string bad = text;
  bad.replace(bad.find("\"slopes\": [3.0, 3.0, 3.0]"), std::string("\"slopes\": [3.0, 3.0, 3.0]").size(),
              "\"slopes\": [4.0, 3.0, 3.0]");
  CHECK_THROWS_AS(cli::parse_config(bad), cli::ConfigError);
}

TEST_CASE("config cross-field validation") {
  // partition size must match the matrix
  const char* bad = R"({
    "space": {"kind": "interval-grid", "size": 101},
    "system": {"schedule": "constant", "map": {"name": "tent", "params": {"slope": 2.0}}},
    "task": {"type": "certify", "matrix": [[1,1],[1,1]], "partition": [[0.0, 1.0]]},
    "seed": 1
  })";
  CHECK_THROWS_AS(cli::parse_config(bad), cli::ConfigError);

  // product identity needs the second system
  const char* missing = R"({
    "space": {"kind": "interval-grid", "size": 101},
    "system": {"schedule": "constant", "map": {"name": "tent", "params": {"slope": 2.0}}},
    "task": {"type": "identity-check", "identity": "product", "epsilons": [0.05], "n_max": 5},
    "seed": 1
  })";
  CHECK_THROWS_AS(cli::parse_config(missing), cli::ConfigError);
}
