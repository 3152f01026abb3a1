#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "topent/cli.hpp"

namespace {

struct SubcommandArgs {
  std::string config_path;
  std::string out_dir = "out";
  long seed_override = -1;
};

int run_task(const std::string& expected_type, const SubcommandArgs& args) {
  std::ifstream in(args.config_path);
  if (!in) {
    std::cerr << "error: cannot read config file '" << args.config_path << "'\n";
    return 2;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  try {
    topent::cli::ExperimentConfig config = topent::cli::parse_config(buffer.str());
    if (config.task_type != expected_type) {
      std::cerr << "error: config task type '" << config.task_type
                << "' does not match subcommand '" << expected_type << "'\n";
      return 2;
    }
    if (args.seed_override >= 0) {
      config.seed = static_cast<unsigned long long>(args.seed_override);
    }
    std::filesystem::path out =
        !args.out_dir.empty() ? std::filesystem::path(args.out_dir)
                              : std::filesystem::path(config.output.empty() ? "out" : config.output);
    topent::cli::RunResult result = topent::cli::run(config, out);
    std::cout << "wrote " << result.csv_path.string() << "\n";
    std::cout << "wrote " << result.summary_path.string() << "\n";
    std::cout << "headline: " << topent::cli::fmt_double(result.headline) << "\n";
    if (!result.all_checks_passed) {
      std::cerr << "error: a task check failed; see summary\n";
      return 3;
    }
    return 0;
  } catch (const topent::cli::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const topent::Error& err) {
    std::cerr << "computation error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topent: entropy estimation and certification for time-varying interval dynamics"};
  app.require_subcommand(1);

  const std::vector<std::string> tasks = {"estimate", "shift-entropy", "certify", "identity-check",
                                          "tail-scan"};
  std::map<std::string, SubcommandArgs> args;
  for (const std::string& task : tasks) {
    auto* sub = app.add_subcommand(task, task + " task from a JSON config");
    auto& a = args[task];
    sub->add_option("--config", a.config_path, "path to the experiment config")->required();
    sub->add_option("--out", a.out_dir, "output directory (default: out)");
    sub->add_option("--seed", a.seed_override, "override the config seed");
  }

  CLI11_PARSE(app, argc, argv);

  for (const std::string& task : tasks) {
    if (app.got_subcommand(task)) return run_task(task, args[task]);
  }
  return 2;
}
