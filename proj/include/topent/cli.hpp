#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "topent/coupled.hpp"
#include "topent/entropy.hpp"
#include "topent/space.hpp"
#include "topent/symbolic.hpp"
#include "topent/systems.hpp"

namespace topent::cli {

// Configuration problems exit with code 2; computation errors with 3.
struct ConfigError : Error {
  using Error::Error;
};

struct SpaceSpec {
  std::string kind;  // interval-grid | circle-grid | product
  long size = 0;
  std::vector<SpaceSpec> factors;

  SpaceSample build() const;
  std::string describe() const;
};

struct MapSpec {
  std::string name;
  std::map<std::string, double> params;
  // affine-piecewise only
  std::vector<double> breakpoints, slopes, intercepts;
  bool circle = false;

  MapPrimitive build() const;
};

struct TransformSpec {
  std::string op;  // iterate | power | shift | conjugate
  long amount = 0;
  double warp_c = 0.0;
};

struct SystemSpec {
  std::string schedule;  // constant | periodic | converging
  std::vector<MapSpec> maps;
  std::string family;  // converging only
  double target = 0.0, c = 0.0, q = 1.0;
  std::vector<TransformSpec> transforms;

  MapSequence build() const;
  // The schedule without transforms; used by limit-system comparisons.
  MapSequence build_base() const;
};

struct EstimateParams {
  std::vector<double> epsilons;
  long n_min = 1;
  long n_max = 0;
  long window_lo = 0;
  long window_hi = 0;
  CountMode mode = CountMode::Separated;
  Exactness exactness = Exactness::Greedy;
};

struct EstimateTask {
  EstimateParams params;
};

struct ShiftEntropyTask {
  std::optional<TransitionMatrix> matrix;
  double tol = 1e-9;
};

struct CertifyTask {
  std::optional<TransitionMatrix> matrix;
  std::vector<Interval> partition;
  bool strict = false;
  std::optional<std::pair<long, long>> n_range;
  bool equality_mode = false;
  long depth = 12;
  double epsilon = 0.01;
  long sample_words = 256;
};

struct IdentityTask {
  std::string identity;  // iteration | product | power | conjugacy | tail-monotone | uniform-limit
  long k = 2;
  double warp_c = 0.1;
  double slack = 0.05;
  std::vector<long> i_list;
  EstimateParams base;
  std::optional<EstimateParams> derived;
  std::optional<SpaceSpec> factor_space;
  std::optional<SpaceSpec> second_space;
  std::optional<SystemSpec> second_system;
  long residual_steps = 16;
};

struct TailScanTask {
  EstimateParams params;
  std::vector<long> i_list;
};

using TaskSpec =
    std::variant<EstimateTask, ShiftEntropyTask, CertifyTask, IdentityTask, TailScanTask>;

struct ExperimentConfig {
  std::string task_type;
  SpaceSpec space;
  SystemSpec system;
  TaskSpec task;
  unsigned long long seed = 0;
  std::string output;  // optional default output directory
  nlohmann::json echo;  // canonical form written to the summary
};

ExperimentConfig parse_config(const std::string& text);

struct RunResult {
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
  bool all_checks_passed = true;
  double headline = 0.0;
};

RunResult run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// Deterministic float formatting used in every report file.
std::string fmt_double(double v);

}  // namespace topent::cli
