// Process-level checks of the CLI contract: exit 0 on success, 2 on config
// problems, 3 on computation errors.
// Usage: cli_exit_codes <path-to-topent>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  std::cout << (ok ? "ok" : "FAIL") << "  " << what << "\n";
  if (!ok) ++failures;
}

int run(const std::string& cli, const std::string& args) {
  std::string cmd = "'" + cli + "' " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_exit_codes <topent-binary>\n";
    return 1;
  }
  std::string cli = argv[1];
  fs::path dir = fs::temp_directory_path() / "topent_exit_codes";
  fs::remove_all(dir);
  fs::create_directories(dir);

  write(dir / "good.json", R"({
    "space": {"kind": "interval-grid", "size": 201},
    "system": {"schedule": "constant", "map": {"name": "tent", "params": {"slope": 2.0}}},
    "task": {"type": "estimate", "epsilons": [0.05], "n_max": 4},
    "seed": 1
  })");
  expect(run(cli, "estimate --config '" + (dir / "good.json").string() + "' --out '" +
                      (dir / "good_out").string() + "'") == 0,
         "valid config exits 0");
  expect(fs::exists(dir / "good_out" / "results.csv"), "csv written");
  expect(fs::exists(dir / "good_out" / "summary.txt"), "summary written");

  write(dir / "syntax.json", "{ not json");
  expect(run(cli, "estimate --config '" + (dir / "syntax.json").string() + "'") == 2,
         "syntax error exits 2");

  write(dir / "typo.json", R"({
    "space": {"kind": "interval-grid", "size": 201},
    "system": {"schedule": "constant", "map": {"name": "tnet", "params": {"slope": 2.0}}},
    "task": {"type": "estimate", "epsilons": [0.05], "n_max": 4},
    "seed": 1
  })");
  expect(run(cli, "estimate --config '" + (dir / "typo.json").string() + "'") == 2,
         "unknown primitive exits 2");

  expect(run(cli, "estimate --config '" + (dir / "missing.json").string() + "'") == 2,
         "missing config file exits 2");

  // resolution violation: epsilon below 4 * mesh on a coarse grid
  write(dir / "coarse.json", R"({
    "space": {"kind": "interval-grid", "size": 11},
    "system": {"schedule": "constant", "map": {"name": "tent", "params": {"slope": 2.0}}},
    "task": {"type": "estimate", "epsilons": [0.05], "n_max": 4},
    "seed": 1
  })");
  expect(run(cli, "estimate --config '" + (dir / "coarse.json").string() + "'") == 3,
         "resolution violation exits 3");

  // subcommand / task type mismatch
  expect(run(cli, "certify --config '" + (dir / "good.json").string() + "'") == 2,
         "task type mismatch exits 2");

  std::cout << (failures == 0 ? "cli exit codes: all ok" : "cli exit codes: FAILURES") << "\n";
  return failures;
}
