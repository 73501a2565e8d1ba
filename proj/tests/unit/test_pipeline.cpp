#include <doctest.h>

#include <json.hpp>
#include <map>
#include <sstream>

#include "epidisc/error.hpp"
#include "epidisc/pipeline.hpp"
#include "support.hpp"

using namespace epidisc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(const fs::path& out) {
  std::istringstream in(
      "model.type = sir\n"
      "bounds.lower = 0.7 0.01 0\n"
      "bounds.upper = 0.99 0.1 0.29\n"
      "horizon = 5\n"
      "budgets = 14\n"
      "methods = greedycut uniform\n"
      "greedycut.samples = 2\n"
      "transitions.samples = 30\n"
      "evaluate.fidelity_samples = 20\n"
      "x0 = 0.9 0.05 0.05\n"
      "trajectory.actions = 0 1 1 0 0\n"
      "solve.two_switch = true\n");
  ExperimentConfig c = parse_config(in);
  c.output_dir = out.string();
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    files[fs::relative(e.path(), root).generic_string()] = testing::slurp(e.path());
  }
  return files;
}

}  // namespace

TEST_CASE("stage by stage equals a full run and worker count is irrelevant") {
  const fs::path a = testing::scratch_dir("pipeline_full");
  const fs::path b = testing::scratch_dir("pipeline_staged");
  const fs::path c = testing::scratch_dir("pipeline_threads");
  run_pipeline(tiny_config(a), {});
  for (Stage st : {Stage::discretize, Stage::transitions, Stage::solve, Stage::evaluate,
                   Stage::trajectory}) {
    run_stage(tiny_config(b), st, {});
  }
  RunOptions threaded;
  threaded.workers = 3;
  run_pipeline(tiny_config(c), threaded);

  const auto full = snapshot(a);
  CHECK(full == snapshot(b));
  CHECK(full == snapshot(c));
  for (const char* name :
       {"metrics.csv", "oracle.csv", "greedycut_B14/grid.txt", "greedycut_B14/cuts.csv",
        "greedycut_B14/transitions.bin", "greedycut_B14/solution.csv",
        "greedycut_B14/two_switch.json", "greedycut_B14/trajectory.csv", "uniform_B14/grid.txt"}) {
    CHECK_MESSAGE(full.count(name) == 1, name);
  }
  CHECK(full.count("uniform_B14/cuts.csv") == 0);
}

TEST_CASE("manifest lists every file with its hash") {
  const fs::path root = testing::scratch_dir("pipeline_manifest");
  const ExperimentConfig config = tiny_config(root);
  run_pipeline(config, {});
  std::ifstream in(root / "manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK_FALSE(manifest["stages"].empty());
  const auto files = snapshot(root);
  REQUIRE(manifest["files"].size() == files.size());
  for (const auto& f : manifest["files"]) {
    const fs::path p = root / f["path"].get<std::string>();
    CHECK(f["bytes"].get<std::uintmax_t>() == fs::file_size(p));
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << file_hash(p);
    CHECK(f["fnv1a64"].get<std::string>() == hex.str());
  }
}

TEST_CASE("metrics rows are finite for an oracle run") {
  const fs::path root = testing::scratch_dir("pipeline_metrics");
  run_pipeline(tiny_config(root), {});
  std::istringstream csv(testing::slurp(root / "metrics.csv"));
  std::string line;
  std::getline(csv, line);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    CHECK(line.find("nan") == std::string::npos);
  }
  CHECK(rows == 2);
}

TEST_CASE("two-switch record") {
  const fs::path root = testing::scratch_dir("pipeline_window");
  run_pipeline(tiny_config(root), {});
  std::ifstream in(root / "uniform_B14" / "two_switch.json");
  const auto w = nlohmann::json::parse(in);
  CHECK(w["start"].get<std::size_t>() <= w["end"].get<std::size_t>());
  CHECK(w["end"].get<std::size_t>() <= 5);
  CHECK(w["closed_loop_cost"].get<double>() <= w["cost"].get<double>() + 1e-12);
}

TEST_CASE("missing upstream artifact names the path") {
  const fs::path root = testing::scratch_dir("pipeline_missing");
  try {
    run_stage(tiny_config(root), Stage::solve, {});
    FAIL("expected MissingArtifact");
  } catch (const MissingArtifact& e) {
    CHECK(e.path().find("grid.txt") != std::string::npos);
  }
  CHECK(fs::is_empty(root));
}

TEST_CASE("failure rolls back the files of the call") {
  const fs::path root = testing::scratch_dir("pipeline_rollback");
  fs::create_directories(root / "metrics.csv");
  CHECK_THROWS(run_pipeline(tiny_config(root), {}));
  CHECK_FALSE(fs::exists(root / "greedycut_B14"));
  CHECK_FALSE(fs::exists(root / "uniform_B14"));
  CHECK_FALSE(fs::exists(root / "manifest.json"));
  CHECK(fs::is_directory(root / "metrics.csv"));
}

TEST_CASE("invalid configs write nothing") {
  const fs::path root = testing::scratch_dir("pipeline_invalid");
  ExperimentConfig c = tiny_config(root / "out");
  c.methods.clear();
  CHECK_THROWS_AS(run_pipeline(c, {}), ConfigError);
  CHECK_FALSE(fs::exists(root / "out"));
}

TEST_CASE("a single region gives constant markov trajectories") {
  const fs::path root = testing::scratch_dir("pipeline_trivial");
  ExperimentConfig c = tiny_config(root);
  c.budgets = {6};
  c.methods = {"uniform"};
  run_pipeline(c, {});
  std::istringstream csv(testing::slurp(root / "uniform_B6" / "trajectory.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("t,kind,", 0) == 0);
  std::size_t markov = 0;
  while (std::getline(csv, line)) {
    if (line.find(",markov,") == std::string::npos) continue;
    ++markov;
    CHECK(line.substr(line.find(",markov,")) == ",markov,0.5,0.5,0.5");
  }
  CHECK(markov == 6);
}

TEST_CASE("stage names") {
  CHECK(parse_stage("solve") == Stage::solve);
  CHECK(stage_name(Stage::trajectory) == "trajectory");
  CHECK_THROWS_AS(parse_stage("plot"), ConfigError);
  CHECK(run_directory("uniform", 90) == "uniform_B90");
}
