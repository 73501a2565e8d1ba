#include <doctest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(EPIDISC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& extra) {
  const fs::path path = dir / "run.cfg";
  std::ofstream out(path);
  out << "model.type = sir\n"
         "bounds.lower = 0.7 0.01 0\n"
         "bounds.upper = 0.99 0.1 0.29\n"
         "horizon = 4\n"
         "budgets = 12\n"
         "methods = uniform\n"
         "transitions.samples = 10\n"
         "evaluate.fidelity_samples = 5\n"
         "output = "
      << (dir / "out").string() << '\n'
      << extra;
  return path;
}

}  // namespace

TEST_CASE("exit codes") {
  const fs::path dir = epidisc::testing::scratch_dir("cli");
  const std::string cfg = write_config(dir, "").string();
  CHECK(run("--help") == 0);
  CHECK(run("run --config " + cfg + " --quiet") == 0);
  CHECK(fs::exists(dir / "out" / "metrics.csv"));
  CHECK(run("solve --config " + cfg) == 0);
  CHECK(run("run --config " + cfg + " --workers 2 --seed 9 --out " + (dir / "other").string()) ==
        0);
  CHECK(fs::exists(dir / "other" / "manifest.json"));

  CHECK(run("run") == 2);
  CHECK(run("frobnicate --config " + cfg) == 2);
  CHECK(run("run --config " + (dir / "absent.cfg").string()) == 2);
  CHECK(run("run --config " + write_config(dir, "horizon = 3\n").string()) == 2);
  CHECK(run("solve --config " + cfg + " --stage evaluate") == 2);

  const fs::path fresh = epidisc::testing::scratch_dir("cli_fresh");
  CHECK(run("solve --config " + write_config(fresh, "").string()) == 3);
}
