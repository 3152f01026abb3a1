#include "topent/cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace topent::cli {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

// nearest catalog name by edit distance, for typo hints
std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t prev = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t cur = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
      prev = cur;
    }
  }
  return row[b.size()];
}

std::string nearest_primitive(const std::string& name) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const std::string& candidate : primitive_names()) {
    std::size_t d = edit_distance(name, candidate);
    if (d < best_d) {
      best_d = d;
      best = candidate;
    }
  }
  return best;
}

const json& need(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError(std::string(where) + ": missing key '" + key + "'");
  }
  return *it;
}

double need_number(const json& obj, const char* key, const char* where) {
  const json& v = need(obj, key, where);
  if (!v.is_number()) throw ConfigError(std::string(where) + ": '" + key + "' must be a number");
  return v.get<double>();
}

long need_integer(const json& obj, const char* key, const char* where) {
  const json& v = need(obj, key, where);
  if (!v.is_number_integer()) {
    throw ConfigError(std::string(where) + ": '" + key + "' must be an integer");
  }
  return v.get<long>();
}

std::string need_string(const json& obj, const char* key, const char* where) {
  const json& v = need(obj, key, where);
  if (!v.is_string()) throw ConfigError(std::string(where) + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

SpaceSpec parse_space(const json& obj, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": space must be an object");
  SpaceSpec spec;
  spec.kind = need_string(obj, "kind", where);
  if (spec.kind == "interval-grid" || spec.kind == "circle-grid") {
    spec.size = need_integer(obj, "size", where);
    if (spec.size < 2) throw ConfigError(std::string(where) + ": grid size must be >= 2");
  } else if (spec.kind == "product") {
    const json& factors = need(obj, "factors", where);
    if (!factors.is_array() || factors.size() < 2) {
      throw ConfigError(std::string(where) + ": product needs >= 2 factors");
    }
    for (const json& f : factors) spec.factors.push_back(parse_space(f, where));
  } else {
    throw ConfigError(std::string(where) + ": unknown space kind '" + spec.kind + "'");
  }
  return spec;
}

std::vector<double> number_array(const json& obj, const char* key, const char* where) {
  const json& arr = need(obj, key, where);
  if (!arr.is_array()) throw ConfigError(std::string(where) + ": '" + key + "' must be an array");
  std::vector<double> out;
  for (const json& v : arr) {
    if (!v.is_number()) {
      throw ConfigError(std::string(where) + ": '" + key + "' entries must be numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

MapSpec parse_map(const json& obj, const char* where) {
  MapSpec spec;
  spec.name = need_string(obj, "name", where);
  auto names = primitive_names();
  if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
    throw ConfigError(std::string(where) + ": unknown primitive '" + spec.name +
                      "' (did you mean '" + nearest_primitive(spec.name) + "'?)");
  }
  if (spec.name == "affine-piecewise") {
    const json& params = need(obj, "params", where);
    spec.breakpoints = number_array(params, "breakpoints", where);
    spec.slopes = number_array(params, "slopes", where);
    spec.intercepts = number_array(params, "intercepts", where);
    if (params.contains("circle")) spec.circle = params["circle"].get<bool>();
  } else if (obj.contains("params")) {
    const json& params = obj["params"];
    if (!params.is_object()) throw ConfigError(std::string(where) + ": params must be an object");
    for (auto it = params.begin(); it != params.end(); ++it) {
      if (!it.value().is_number()) {
        throw ConfigError(std::string(where) + ": parameter '" + it.key() + "' must be a number");
      }
      spec.params[it.key()] = it.value().get<double>();
    }
  }
  // catch bad parameters at parse time
  try {
    spec.build();
  } catch (const Error& err) {
    throw ConfigError(std::string(where) + ": " + err.what());
  }
  return spec;
}

SystemSpec parse_system(const json& obj, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": system must be an object");
  SystemSpec spec;
  spec.schedule = need_string(obj, "schedule", where);
  if (spec.schedule == "constant") {
    spec.maps.push_back(parse_map(need(obj, "map", where), where));
  } else if (spec.schedule == "periodic") {
    const json& maps = need(obj, "maps", where);
    if (!maps.is_array() || maps.empty()) {
      throw ConfigError(std::string(where) + ": periodic schedule needs a maps array");
    }
    for (const json& m : maps) spec.maps.push_back(parse_map(m, where));
  } else if (spec.schedule == "converging") {
    spec.family = need_string(obj, "family", where);
    if (spec.family != "tent-slope" && spec.family != "logistic-rate" &&
        spec.family != "rotation-angle") {
      throw ConfigError(std::string(where) + ": unknown converging family '" + spec.family + "'");
    }
    spec.target = need_number(obj, "target", where);
    spec.c = need_number(obj, "c", where);
    spec.q = obj.contains("q") ? need_number(obj, "q", where) : 1.0;
  } else {
    throw ConfigError(std::string(where) + ": unknown schedule '" + spec.schedule + "'");
  }
  if (obj.contains("transform")) {
    const json& list = obj["transform"];
    if (!list.is_array()) throw ConfigError(std::string(where) + ": transform must be an array");
    for (const json& t : list) {
      TransformSpec tr;
      tr.op = need_string(t, "op", where);
      if (tr.op == "iterate") {
        tr.amount = need_integer(t, "n", where);
      } else if (tr.op == "power") {
        tr.amount = need_integer(t, "k", where);
      } else if (tr.op == "shift") {
        tr.amount = need_integer(t, "i", where);
      } else if (tr.op == "conjugate") {
        tr.warp_c = need_number(t, "c", where);
      } else {
        throw ConfigError(std::string(where) + ": unknown transform '" + tr.op + "'");
      }
      spec.transforms.push_back(tr);
    }
  }
  // validate by building once
  try {
    spec.build();
  } catch (const Error& err) {
    throw ConfigError(std::string(where) + ": " + err.what());
  }
  return spec;
}

EstimateParams parse_estimate_params(const json& obj, const char* where) {
  EstimateParams p;
  const json& eps = need(obj, "epsilons", where);
  if (!eps.is_array() || eps.empty()) {
    throw ConfigError(std::string(where) + ": epsilons must be a nonempty array");
  }
  for (const json& e : eps) {
    if (!e.is_number()) throw ConfigError(std::string(where) + ": epsilons must be numbers");
    p.epsilons.push_back(e.get<double>());
  }
  for (std::size_t i = 1; i < p.epsilons.size(); ++i) {
    if (!(p.epsilons[i] < p.epsilons[i - 1])) {
      throw ConfigError(std::string(where) + ": epsilon schedule must be strictly decreasing");
    }
  }
  if (!(p.epsilons.back() > 0.0)) {
    throw ConfigError(std::string(where) + ": epsilons must be positive");
  }
  p.n_max = need_integer(obj, "n_max", where);
  p.n_min = obj.contains("n_min") ? need_integer(obj, "n_min", where) : 1;
  if (p.n_min < 1 || p.n_max < p.n_min) {
    throw ConfigError(std::string(where) + ": depth range is empty");
  }
  if (obj.contains("window")) {
    const json& w = obj["window"];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() ||
        !w[1].is_number_integer()) {
      throw ConfigError(std::string(where) + ": window must be [lo, hi]");
    }
    p.window_lo = w[0].get<long>();
    p.window_hi = w[1].get<long>();
  }
  if (obj.contains("mode")) {
    std::string mode = need_string(obj, "mode", where);
    if (mode == "separated") {
      p.mode = CountMode::Separated;
    } else if (mode == "spanning") {
      p.mode = CountMode::SpanningInLambda;
    } else if (mode == "spanning-in-x") {
      p.mode = CountMode::SpanningInX;
    } else if (mode == "cover") {
      p.mode = CountMode::Cover;
    } else {
      throw ConfigError(std::string(where) + ": unknown mode '" + mode + "'");
    }
  }
  if (obj.contains("exact") && obj["exact"].is_boolean() && obj["exact"].get<bool>()) {
    p.exactness = Exactness::Exact;
  }
  return p;
}

TransitionMatrix parse_matrix(const json& task, const char* where) {
  if (task.contains("matrix_file")) {
    std::ifstream in(task["matrix_file"].get<std::string>());
    if (!in) throw ConfigError(std::string(where) + ": cannot read matrix_file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      return parse_transition_matrix(buffer.str());
    } catch (const Error& err) {
      throw ConfigError(std::string(where) + ": " + err.what());
    }
  }
  const json& m = need(task, "matrix", where);
  if (!m.is_array() || m.empty()) {
    throw ConfigError(std::string(where) + ": matrix must be an array of rows");
  }
  Eigen::MatrixXi entries(static_cast<Eigen::Index>(m.size()),
                          static_cast<Eigen::Index>(m[0].size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i].is_array() || m[i].size() != m[0].size()) {
      throw ConfigError(std::string(where) + ": matrix rows must have equal length");
    }
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      if (!m[i][j].is_number_integer()) {
        throw ConfigError(std::string(where) + ": matrix entries must be integers");
      }
      entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j].get<int>();
    }
  }
  try {
    return TransitionMatrix::checked(entries);
  } catch (const Error& err) {
    throw ConfigError(std::string(where) + ": " + err.what());
  }
}

std::vector<long> parse_i_list(const json& task, const char* where) {
  std::vector<long> out;
  const json& list = need(task, "i_list", where);
  if (!list.is_array() || list.empty()) {
    throw ConfigError(std::string(where) + ": i_list must be a nonempty array");
  }
  for (const json& v : list) {
    if (!v.is_number_integer()) throw ConfigError(std::string(where) + ": i_list entries must be integers");
    out.push_back(v.get<long>());
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw ConfigError(std::string(where) + ": i_list must ascend");
  }
  return out;
}

}  // namespace

SpaceSample SpaceSpec::build() const {
  if (kind == "interval-grid") return interval_grid(size);
  if (kind == "circle-grid") return circle_grid(size);
  SpaceSample acc = factors[0].build();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = product_space(acc, factors[i].build());
  return acc;
}

std::string SpaceSpec::describe() const {
  if (kind == "product") {
    std::string s = "product(";
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (i) s += ", ";
      s += factors[i].describe();
    }
    return s + ")";
  }
  return kind + " size=" + std::to_string(size);
}

MapPrimitive MapSpec::build() const {
  if (name == "affine-piecewise") {
    return affine_piecewise_map(breakpoints, slopes, intercepts, circle);
  }
  return make_primitive(name, params);
}

MapSequence SystemSpec::build_base() const {
  if (schedule == "constant") {
    return constant_system(maps[0].build());
  }
  if (schedule == "periodic") {
    std::vector<MapPrimitive> prims;
    for (const MapSpec& m : maps) prims.push_back(m.build());
    return periodic_system(std::move(prims));
  }
  ConvergingFamily fam = ConvergingFamily::TentSlope;
  if (family == "logistic-rate") fam = ConvergingFamily::LogisticRate;
  if (family == "rotation-angle") fam = ConvergingFamily::RotationAngle;
  return converging_system(fam, target, c, q);
}

MapSequence SystemSpec::build() const {
  MapSequence seq = build_base();
  for (const TransformSpec& t : transforms) {
    if (t.op == "iterate") {
      seq = iterate_system(seq, t.amount);
    } else if (t.op == "power") {
      seq = power_system(seq, t.amount);
    } else if (t.op == "shift") {
      seq = shift_system(seq, t.amount);
    } else if (t.op == "conjugate") {
      seq = conjugate_system(seq, quadratic_warp(t.warp_c));
    }
  }
  return seq;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    // report the line of the offending byte
    std::size_t line = 1;
    for (std::size_t i = 0; i < err.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError("config parse error at line " + std::to_string(line) + ": " + err.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig config;
  config.echo = doc;
  config.seed =
      doc.contains("seed") ? static_cast<unsigned long long>(need_integer(doc, "seed", "config")) : 0;
  if (doc.contains("output")) config.output = need_string(doc, "output", "config");

  const json& task = need(doc, "task", "config");
  config.task_type = need_string(task, "type", "task");

  const bool needs_space = config.task_type != "shift-entropy";
  if (needs_space) {
    config.space = parse_space(need(doc, "space", "config"), "space");
    config.system = parse_system(need(doc, "system", "config"), "system");
  }

  if (config.task_type == "estimate") {
    EstimateTask t;
    t.params = parse_estimate_params(task, "task");
    config.task = t;
  } else if (config.task_type == "shift-entropy") {
    ShiftEntropyTask t;
    t.matrix = parse_matrix(task, "task");
    if (task.contains("tol")) t.tol = need_number(task, "tol", "task");
    if (!(t.tol > 0.0)) throw ConfigError("task: tol must be positive");
    config.task = t;
  } else if (config.task_type == "certify") {
    CertifyTask t;
    t.matrix = parse_matrix(task, "task");
    const json& parts = need(task, "partition", "task");
    if (!parts.is_array() || parts.empty()) {
      throw ConfigError("task: partition must be a nonempty array of [lo,hi] pairs");
    }
    for (const json& p : parts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw ConfigError("task: partition entries must be [lo, hi]");
      }
      t.partition.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (task.contains("strict")) t.strict = task["strict"].get<bool>();
    if (task.contains("n_range")) {
      const json& r = task["n_range"];
      if (!r.is_array() || r.size() != 2) throw ConfigError("task: n_range must be [lo, hi]");
      t.n_range = std::make_pair(r[0].get<long>(), r[1].get<long>());
    }
    if (task.contains("equality_mode")) t.equality_mode = task["equality_mode"].get<bool>();
    if (task.contains("depth")) t.depth = need_integer(task, "depth", "task");
    if (task.contains("epsilon")) t.epsilon = need_number(task, "epsilon", "task");
    if (task.contains("sample_words")) t.sample_words = need_integer(task, "sample_words", "task");
    try {
      make_partition(t.partition, t.strict);
    } catch (const Error& err) {
      throw ConfigError(std::string("task: ") + err.what());
    }
    if (static_cast<Eigen::Index>(t.partition.size()) != t.matrix->size()) {
      throw ConfigError("task: partition size must match matrix dimension");
    }
    config.task = t;
  } else if (config.task_type == "identity-check") {
    IdentityTask t;
    t.identity = need_string(task, "identity", "task");
    const bool known =
        t.identity == "iteration" || t.identity == "product" || t.identity == "power" ||
        t.identity == "conjugacy" || t.identity == "tail-monotone" || t.identity == "uniform-limit";
    if (!known) throw ConfigError("task: unknown identity '" + t.identity + "'");
    t.base = parse_estimate_params(task, "task");
    if (task.contains("k")) t.k = need_integer(task, "k", "task");
    if (t.k < 1) throw ConfigError("task: k must be >= 1");
    if (task.contains("warp_c")) t.warp_c = need_number(task, "warp_c", "task");
    if (task.contains("slack")) t.slack = need_number(task, "slack", "task");
    if (task.contains("residual_steps")) t.residual_steps = need_integer(task, "residual_steps", "task");
    if (t.identity == "tail-monotone" || t.identity == "uniform-limit") {
      t.i_list = parse_i_list(task, "task");
    }
    if (task.contains("derived")) {
      const json& d = task["derived"];
      if (d.contains("epsilons")) {
        t.derived = parse_estimate_params(d, "task.derived");
      }
      if (d.contains("factor_space")) {
        t.factor_space = parse_space(d["factor_space"], "task.derived.factor_space");
      }
    }
    if (t.identity == "product") {
      if (!task.contains("second_system")) {
        throw ConfigError("task: product identity needs second_system");
      }
      t.second_system = parse_system(task["second_system"], "task.second_system");
      if (task.contains("second_space")) {
        t.second_space = parse_space(task["second_space"], "task.second_space");
      }
    }
    config.task = t;
  } else if (config.task_type == "tail-scan") {
    TailScanTask t;
    t.params = parse_estimate_params(task, "task");
    t.i_list = parse_i_list(task, "task");
    config.task = t;
  } else {
    throw ConfigError("unknown task type '" + config.task_type + "'");
  }
  return config;
}

// ---------------------------------------------------------------------------
// report writing

namespace {

struct CsvWriter {
  std::string rows;

  void add(const std::string& task, const std::string& epsilon, const std::string& n,
           const std::string& count_mode, const std::string& count, const std::string& rate,
           const std::string& residual, const std::string& flags) {
    rows += task + ',' + epsilon + ',' + n + ',' + count_mode + ',' + count + ',' + rate + ',' +
            residual + ',' + flags + '\n';
  }

  std::string str() const {
    return "task,epsilon,n,count_mode,count,rate,residual,flags\n" + rows;
  }
};

std::string flag_string(const EpsilonReport& report, std::size_t idx) {
  std::string flags;
  auto append = [&flags](const char* f) {
    if (!flags.empty()) flags += ';';
    flags += f;
  };
  if (report.saturated[idx]) append("saturated");
  if (report.resolution_limited[idx]) append("resolution-limited");
  return flags;
}

std::string fit_flags(const EpsilonReport& report) {
  std::string flags = "window=" + std::to_string(report.fit.window_lo) + "-" +
                      std::to_string(report.fit.window_hi);
  if (report.window_fallback) flags += ";window-fallback";
  if (report.resolution_exhausted) flags += ";resolution-exhausted";
  if (report.saturation_seen) flags += ";saturation-seen";
  return flags;
}

void emit_estimate_rows(CsvWriter& csv, const std::string& task, const EntropyEstimate& est,
                        const std::string& mode_name) {
  for (const EpsilonReport& report : est.per_epsilon) {
    for (std::size_t i = 0; i < report.curve.n_values.size(); ++i) {
      csv.add(task, fmt_double(report.epsilon), std::to_string(report.curve.n_values[i]),
              mode_name, std::to_string(report.curve.counts[i]), "", "", flag_string(report, i));
    }
    csv.add(task, fmt_double(report.epsilon), "", mode_name + "-rate", "",
            fmt_double(report.fit.rate), fmt_double(report.fit.residual), fit_flags(report));
  }
}

void describe_estimate(std::ostream& out, const char* label, const EntropyEstimate& est) {
  out << label << ": " << fmt_double(est.value) << " nats (epsilon=" << fmt_double(est.epsilon_used)
      << ", mode=" << count_mode_name(est.method) << ", mesh/epsilon="
      << fmt_double(est.mesh_over_epsilon) << ")\n";
  for (const EpsilonReport& report : est.per_epsilon) {
    out << "  epsilon " << fmt_double(report.epsilon) << ": rate " << fmt_double(report.fit.rate)
        << " residual " << fmt_double(report.fit.residual) << " [" << fit_flags(report) << "]\n";
  }
}

EstimateOptions options_from(const EstimateParams& params) {
  EstimateOptions options;
  options.mode = params.mode;
  options.exactness = params.exactness;
  options.window_lo = params.window_lo;
  options.window_hi = params.window_hi;
  return options;
}

EntropyEstimate run_estimate(const SpaceSample& space, const MapSequence& seq,
                             const EstimateParams& params) {
  return entropy_estimate(space, seq, all_indices(space), params.epsilons, params.n_min,
                          params.n_max, options_from(params));
}

std::string verdict(bool pass) { return pass ? "pass" : "FAIL"; }

}  // namespace

RunResult run(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  CsvWriter csv;
  std::ostringstream summary;
  bool all_passed = true;
  double headline = 0.0;

  summary << "topent summary\n";
  summary << "task: " << config.task_type << "\n";
  summary << "seed: " << config.seed << "\n";
  summary << "config: " << config.echo.dump() << "\n";

  if (config.task_type != "shift-entropy") {
    summary << "space: " << config.space.describe() << "\n";
    summary << "system: " << config.system.build().describe() << "\n";
  }

  if (const auto* task = std::get_if<EstimateTask>(&config.task)) {
    SpaceSample space = config.space.build();
    MapSequence seq = config.system.build();
    EntropyEstimate est = run_estimate(space, seq, task->params);
    emit_estimate_rows(csv, "estimate", est, count_mode_name(task->params.mode));
    describe_estimate(summary, "headline", est);
    headline = est.value;
  } else if (const auto* task = std::get_if<ShiftEntropyTask>(&config.task)) {
    const TransitionMatrix& matrix = *task->matrix;
    double power = spectral_radius(matrix, SpectralMethod::Power, task->tol);
    double norm_limit = spectral_radius(matrix, SpectralMethod::NormLimit, task->tol);
    double entropy = std::log(power);
    csv.add("shift-entropy", "", "", "spectral-radius-power", "", fmt_double(power), "", "");
    csv.add("shift-entropy", "", "", "spectral-radius-norm-limit", "", fmt_double(norm_limit), "",
            "");
    csv.add("shift-entropy", "", "", "log-lambda", "", fmt_double(entropy), "", "");
    summary << "matrix:\n" << to_text(matrix);
    summary << "spectral radius (power): " << fmt_double(power) << "\n";
    summary << "spectral radius (norm-limit): " << fmt_double(norm_limit) << "\n";
    summary << "shift entropy: " << fmt_double(entropy) << " nats\n";
    headline = entropy;
  } else if (const auto* task = std::get_if<CertifyTask>(&config.task)) {
    SpaceSample space = config.space.build();
    MapSequence seq = config.system.build();
    PartitionSets partition = make_partition(task->partition, task->strict);
    CoupledExpansionCertificate cert =
        certify(seq, partition, *task->matrix, task->n_range, task->equality_mode, task->depth,
                task->epsilon, task->sample_words, config.seed);
    for (const CoverVerdict& v : cert.verdicts) {
      csv.add("certify", "", std::to_string(v.n),
              "cover(" + std::to_string(v.i) + "->" + std::to_string(v.j) + ")",
              v.holds ? "1" : "0", "", "", v.holds ? "" : "cover-failed");
    }
    for (const EqualityVerdict& v : cert.equality) {
      csv.add("certify", "", std::to_string(v.n), "equality(" + std::to_string(v.i) + ")",
              v.holds ? "1" : "0", "", "", v.holds ? "" : "equality-failed");
    }
    const ContractionReport& contraction = *cert.contraction;
    for (const auto& [n, diameter] : contraction.per_n_max) {
      csv.add("certify", fmt_double(task->epsilon), std::to_string(n), "max-cylinder-diameter",
              std::to_string(contraction.words_checked), fmt_double(diameter), "",
              "depth=" + std::to_string(contraction.depth));
    }
    summary << "matrix:\n" << to_text(cert.matrix);
    summary << "checked indices: [" << cert.n_lo << ", " << cert.n_hi << "]"
            << (cert.range_complete ? " (complete by periodicity)" : " (incomplete: evidence only)")
            << "\n";
    summary << "verdict grid:\n";
    long grid_n = cert.n_lo - 1;
    for (const CoverVerdict& v : cert.verdicts) {
      if (v.n != grid_n) {
        if (grid_n >= cert.n_lo) summary << "\n";
        summary << "  n=" << v.n << ":";
        grid_n = v.n;
      }
      summary << " " << v.i << "->" << v.j << (v.holds ? " ok" : " FAIL");
    }
    if (grid_n >= cert.n_lo) summary << "\n";
    for (const EqualityVerdict& v : cert.equality) {
      summary << "  n=" << v.n << " equality(" << v.i << "): " << (v.holds ? "ok" : "FAIL")
              << "\n";
    }
    summary << "cover conditions: " << verdict(cert.all_hold) << "\n";
    summary << "contraction: max diameter " << fmt_double(contraction.max_diameter) << " at depth "
            << contraction.depth << " over " << contraction.words_checked << " words -> "
            << verdict(contraction.pass) << "\n";
    if (cert.lower_bound) {
      csv.add("certify", "", "", "lower-bound", "", fmt_double(*cert.lower_bound), "", "");
      summary << "entropy lower bound: " << fmt_double(*cert.lower_bound) << " nats\n";
      headline = *cert.lower_bound;
    } else {
      summary << "entropy lower bound: none (cover conditions failed)\n";
      all_passed = false;
    }
    if (cert.upper_bound) {
      csv.add("certify", "", "", "upper-bound", "", fmt_double(*cert.upper_bound), "", "");
      summary << "entropy upper bound: " << fmt_double(*cert.upper_bound) << " nats\n";
    } else {
      summary << "entropy upper bound: none (contraction not established)\n";
    }
  } else if (const auto* task = std::get_if<IdentityTask>(&config.task)) {
    SpaceSample space = config.space.build();
    MapSequence base = config.system.build();
    const EstimateParams& base_params = task->base;
    EstimateParams derived_params = task->derived ? *task->derived : base_params;

    if (task->identity == "iteration" || task->identity == "power") {
      EntropyEstimate base_est = run_estimate(space, base, base_params);
      EntropyEstimate derived_est;
      if (task->identity == "iteration") {
        derived_est = run_estimate(space, iterate_system(base, task->k), derived_params);
      } else {
        SpaceSpec factor = task->factor_space ? *task->factor_space : config.space;
        SpaceSample factor_space = factor.build();
        SpaceSample power_space = factor_space;
        for (long f = 1; f < task->k; ++f) power_space = product_space(power_space, factor_space);
        derived_est = run_estimate(power_space, power_system(base, task->k), derived_params);
      }
      emit_estimate_rows(csv, "identity-check", base_est, "base");
      emit_estimate_rows(csv, "identity-check", derived_est, "derived");
      double ratio = base_est.value != 0.0 ? derived_est.value / base_est.value : 0.0;
      double expected = static_cast<double>(task->k);
      bool pass = ratio >= 0.9 * expected && ratio <= 1.1 * expected;
      csv.add("identity-check", "", "", "ratio", "", fmt_double(ratio), "", verdict(pass));
      describe_estimate(summary, "base estimate", base_est);
      describe_estimate(summary, "derived estimate", derived_est);
      summary << "identity " << task->identity << " k=" << task->k << ": ratio "
              << fmt_double(ratio) << " expected " << fmt_double(expected) << " (within 10%) -> "
              << verdict(pass) << "\n";
      all_passed &= pass;
      headline = ratio;
    } else if (task->identity == "product") {
      SpaceSpec second_spec = task->second_space ? *task->second_space : config.space;
      SpaceSample second_space = second_spec.build();
      MapSequence second = task->second_system->build();
      EntropyEstimate est_a = run_estimate(space, base, base_params);
      EntropyEstimate est_b = run_estimate(second_space, second, base_params);
      EntropyEstimate est_ab = run_estimate(product_space(space, second_space),
                                            product_system(base, second), derived_params);
      emit_estimate_rows(csv, "identity-check", est_a, "factor-a");
      emit_estimate_rows(csv, "identity-check", est_b, "factor-b");
      emit_estimate_rows(csv, "identity-check", est_ab, "product");
      double bound = est_a.value + est_b.value + task->slack;
      bool pass = est_ab.value <= bound;
      csv.add("identity-check", "", "", "difference", "",
              fmt_double(est_ab.value - est_a.value - est_b.value), "", verdict(pass));
      describe_estimate(summary, "factor a", est_a);
      describe_estimate(summary, "factor b", est_b);
      describe_estimate(summary, "product", est_ab);
      summary << "identity product: " << fmt_double(est_ab.value) << " <= " << fmt_double(bound)
              << " (sum + slack " << fmt_double(task->slack) << ") -> " << verdict(pass) << "\n";
      all_passed &= pass;
      headline = est_ab.value;
    } else if (task->identity == "conjugacy") {
      Warp warp = quadratic_warp(task->warp_c);
      MapSequence conjugate = conjugate_system(base, warp);
      EntropyEstimate est_a = run_estimate(space, base, base_params);
      EntropyEstimate est_b = run_estimate(space, conjugate, derived_params);
      emit_estimate_rows(csv, "identity-check", est_a, "base");
      emit_estimate_rows(csv, "identity-check", est_b, "conjugate");
      // subsample the grid for the commutation residual
      Eigen::Index stride = std::max<Eigen::Index>(1, space.count() / 1024);
      Eigen::Index rows = (space.count() + stride - 1) / stride;
      Eigen::MatrixXd sample(rows, 1);
      for (Eigen::Index r = 0; r < rows; ++r) sample(r, 0) = space.points()(r * stride, 0);
      ConjugacyMaps h = [&warp](long, const Eigen::Ref<const Eigen::VectorXd>& x) {
        Eigen::VectorXd y(1);
        y[0] = warp.inverse(x[0]);
        return y;
      };
      double residual =
          semiconjugacy_residual(base, conjugate, h, space, sample, task->residual_steps);
      double gap = std::abs(est_a.value - est_b.value);
      double rel = gap / std::max({est_a.value, est_b.value, 1e-12});
      bool pass = residual <= 1e-9 && rel <= 0.10;
      csv.add("identity-check", "", "", "residual", "", fmt_double(residual), "", "");
      csv.add("identity-check", "", "", "difference", "", fmt_double(gap), "", verdict(pass));
      describe_estimate(summary, "base estimate", est_a);
      describe_estimate(summary, "conjugate estimate", est_b);
      summary << "conjugacy residual: " << fmt_double(residual) << " (<= 1e-9)\n";
      summary << "identity conjugacy: relative gap " << fmt_double(rel) << " (<= 0.1) -> "
              << verdict(pass) << "\n";
      all_passed &= pass;
      headline = gap;
    } else {  // tail-monotone | uniform-limit
      std::vector<std::pair<long, EntropyEstimate>> tails =
          tail_entropy(space, base, all_indices(space), base_params.epsilons, base_params.n_min,
                       base_params.n_max, task->i_list, options_from(base_params));
      for (const auto& [i, est] : tails) {
        emit_estimate_rows(csv, "identity-check", est, "tail-i" + std::to_string(i));
        summary << "tail i=" << i << ": " << fmt_double(est.value) << " nats\n";
      }
      bool pass = true;
      if (task->identity == "tail-monotone") {
        for (std::size_t k = 1; k < tails.size(); ++k) {
          if (tails[k].second.value + 0.03 < tails[k - 1].second.value) pass = false;
        }
        summary << "identity tail-monotone: nondecreasing within 0.03 -> " << verdict(pass)
                << "\n";
        headline = tails.back().second.value;
      } else {
        if (config.system.schedule != "converging") {
          throw ConfigError("uniform-limit identity needs a converging schedule");
        }
        SystemSpec limit_spec = config.system;
        limit_spec.schedule = "constant";
        limit_spec.maps = {MapSpec{
            config.system.family == "tent-slope"
                ? "tent"
                : (config.system.family == "logistic-rate" ? "logistic" : "rotation"),
            {{config.system.family == "tent-slope"
                  ? "slope"
                  : (config.system.family == "logistic-rate" ? "r" : "alpha"),
              config.system.target}}}};
        EntropyEstimate limit_est = run_estimate(space, limit_spec.build(), base_params);
        emit_estimate_rows(csv, "identity-check", limit_est, "limit");
        describe_estimate(summary, "limit estimate", limit_est);
        double bound = limit_est.value + task->slack;
        for (const auto& [i, est] : tails) {
          if (est.value > bound) pass = false;
        }
        summary << "identity uniform-limit: every tail <= " << fmt_double(bound) << " -> "
                << verdict(pass) << "\n";
        headline = limit_est.value;
      }
      csv.add("identity-check", "", "", task->identity, "", "", "", verdict(pass));
      all_passed &= pass;
    }
  } else if (const auto* task = std::get_if<TailScanTask>(&config.task)) {
    SpaceSample space = config.space.build();
    MapSequence seq = config.system.build();
    std::vector<std::pair<long, EntropyEstimate>> tails =
        tail_entropy(space, seq, all_indices(space), task->params.epsilons, task->params.n_min,
                     task->params.n_max, task->i_list, options_from(task->params));
    for (const auto& [i, est] : tails) {
      emit_estimate_rows(csv, "tail-scan", est, "tail-i" + std::to_string(i));
      csv.add("tail-scan", fmt_double(est.epsilon_used), std::to_string(i), "tail-rate", "",
              fmt_double(est.value), "", "base-index");
      summary << "tail i=" << i << ": " << fmt_double(est.value) << " nats\n";
    }
    summary << "asymptotic-entropy proxy (largest i): "
            << fmt_double(tails.back().second.value) << " nats\n";
    headline = tails.back().second.value;
  }

  summary << "status: " << (all_passed ? "ok" : "check-failed") << "\n";

  RunResult result;
  result.csv_path = out_dir / "results.csv";
  result.summary_path = out_dir / "summary.txt";
  result.all_checks_passed = all_passed;
  result.headline = headline;
  {
    std::ofstream out(result.csv_path, std::ios::binary);
    out << csv.str();
  }
  {
    std::ofstream out(result.summary_path, std::ios::binary);
    out << summary.str();
  }
  return result;
}

}  // namespace topent::cli
