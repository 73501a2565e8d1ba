#include "epidisc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "epidisc/error.hpp"
#include "epidisc/eval.hpp"
#include "epidisc/format.hpp"
#include "epidisc/greedycut.hpp"
#include "epidisc/grid.hpp"
#include "epidisc/mdp.hpp"
#include "epidisc/oracle.hpp"
#include "epidisc/seed.hpp"
#include "epidisc/transition.hpp"

namespace epidisc {

namespace fs = std::filesystem;

namespace {

constexpr const char* kGridFile = "grid.txt";
constexpr const char* kCutLogFile = "cuts.csv";
constexpr const char* kTransitionFile = "transitions.bin";
constexpr const char* kSolutionFile = "solution.csv";
constexpr const char* kTwoSwitchFile = "two_switch.json";
constexpr const char* kTrajectoryFile = "trajectory.csv";
constexpr const char* kMetricsFile = "metrics.csv";
constexpr const char* kOracleFile = "oracle.csv";
constexpr const char* kManifestFile = "manifest.json";

struct Run {
  std::string method;
  std::size_t budget;
  fs::path dir;
};

/// Tracks files created by one invocation so a failure can undo them.
class Session {
 public:
  Session(const ExperimentConfig& config, const RunOptions& options)
      : config_(config), options_(options), root_(config.output_dir) {
    for (const auto& m : config.methods) {
      for (std::size_t b : config.budgets) runs_.push_back({m, b, root_ / run_directory(m, b)});
    }
    std::error_code ec;
    if (fs::exists(root_, ec)) preexisting_.push_back(root_);
    for (const Run& run : runs_) {
      if (fs::exists(run.dir, ec)) preexisting_.push_back(run.dir);
    }
  }

  const ExperimentConfig& config() const { return config_; }
  const RunOptions& options() const { return options_; }
  const fs::path& root() const { return root_; }
  const std::vector<Run>& runs() const { return runs_; }

  template <typename Writer>
  void write(const fs::path& path, bool binary, Writer&& writer) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".part";
    {
      std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
      created_.push_back(tmp);
      writer(out);
      out.flush();
      if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
    created_.back() = path;
  }

  void rollback() noexcept {
    std::error_code ec;
    for (auto it = created_.rbegin(); it != created_.rend(); ++it) fs::remove(*it, ec);
    auto remove_if_new = [&](const fs::path& dir) {
      if (std::find(preexisting_.begin(), preexisting_.end(), dir) != preexisting_.end()) return;
      if (fs::is_directory(dir, ec) && fs::is_empty(dir, ec)) fs::remove(dir, ec);
    };
    for (const Run& run : runs_) remove_if_new(run.dir);
    remove_if_new(root_);
    created_.clear();
  }

  void note(const std::string& line) const {
    if (options_.log) *options_.log << line << '\n';
  }

  void time_stage(const std::string& stage, const std::string& run, double seconds) {
    timings_.push_back({{"stage", stage}, {"run", run}, {"seconds", seconds}});
  }

  const nlohmann::json& timings() const { return timings_; }

 private:
  const ExperimentConfig& config_;
  RunOptions options_;
  fs::path root_;
  std::vector<Run> runs_;
  std::vector<fs::path> created_;
  /// Directories that existed before this call; rollback leaves them.
  std::vector<fs::path> preexisting_;
  nlohmann::json timings_ = nlohmann::json::array();
};

std::ifstream open_artifact(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw MissingArtifact(path.string());
  return in;
}

Grid load_grid(const Run& run) {
  auto in = open_artifact(run.dir / kGridFile);
  return read_grid(in);
}

TransitionModel load_transitions(const Run& run) {
  auto in = open_artifact(run.dir / kTransitionFile, true);
  return read_transitions_binary(in);
}

SolveResult load_solution(const Run& run) {
  auto in = open_artifact(run.dir / kSolutionFile);
  return read_solution_csv(in);
}

std::string run_label(const Run& run) { return run_directory(run.method, run.budget); }

void discretize(Session& s, const Run& run, const Model& model) {
  const DiscretizeResult result = discretize_run(s.config(), run.method, run.budget, model);
  s.write(run.dir / kGridFile, false, [&](std::ostream& out) { write_grid(out, result.grid); });
  if (run.method == "greedycut") {
    s.write(run.dir / kCutLogFile, false,
            [&](std::ostream& out) { write_cut_log(out, result.log); });
  }
}

void transitions(Session& s, const Run& run, const Model& model) {
  const auto& c = s.config();
  const Grid grid = load_grid(run);
  const TransitionModel p =
      build_transitions(model, grid, c.transition_samples,
                        transition_seed(c, run.method, run.budget), s.options().workers);
  s.write(run.dir / kTransitionFile, true,
          [&](std::ostream& out) { write_transitions_binary(out, p); });
}

std::vector<double> point_belief(const Grid& grid, const StateVector& x0) {
  std::vector<double> b(grid.region_count(), 0.0);
  b[grid.region_of(x0).flat] = 1.0;
  return b;
}

void solve(Session& s, const Run& run) {
  const auto& c = s.config();
  const Grid grid = load_grid(run);
  const TransitionModel p = load_transitions(run);
  const RewardModel reward = c.make_reward();
  if (c.policy_tables) {
    const SolveResult result =
        backward_induction(p, grid, reward, c.discount, c.horizon, s.options().workers);
    s.write(run.dir / kSolutionFile, false,
            [&](std::ostream& out) { write_solution_csv(out, result); });
  }
  if (c.two_switch) {
    const auto b0 = point_belief(grid, c.x0);
    const LockdownWindow w = two_switch_solve(p, grid, reward, c.discount, c.horizon, b0);
    const double closed = two_switch_closed_loop_cost(p, grid, reward, c.discount, c.horizon, b0);
    s.write(run.dir / kTwoSwitchFile, false, [&](std::ostream& out) {
      out << "{\"start\": " << w.start << ", \"end\": " << w.end
          << ", \"cost\": " << format_double(w.cost)
          << ", \"closed_loop_cost\": " << format_double(closed) << "}\n";
    });
    s.note(run_label(run) + ": lockdown window [" + std::to_string(w.start) + ", " +
           std::to_string(w.end) + ") cost " + format_double(w.cost));
  }
}

void evaluate(Session& s, const Model& model) {
  const auto& c = s.config();
  const RewardModel reward = c.make_reward();
  std::optional<OracleTable> oracle;
  std::vector<StateVector> states;
  if (c.oracle_metrics) {
    states = evaluation_states_sir();
    oracle = oracle_action_table(states, model, reward, c.discount, c.horizon,
                                 s.options().workers);
    s.write(s.root() / kOracleFile, false,
            [&](std::ostream& out) { write_oracle_csv(out, *oracle); });
  }
  std::mt19937_64 rng(fidelity_seed(c));
  const SampleSet samples = generate_samples(c.bounds, c.horizon, c.fidelity_samples, 2, rng);

  std::vector<MetricsRow> rows;
  for (const Run& run : s.runs()) {
    const Grid grid = load_grid(run);
    const TransitionModel p = load_transitions(run);
    MetricsRow row;
    row.method = run.method;
    row.budget = run.budget;
    row.seed = c.seed;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.acc = row.mse = row.e2 = row.opt_gap = nan;
    if (oracle) {
      const SolveResult solution = load_solution(run);
      row.acc = compute_acc(solution, *oracle, grid, states);
      const ValueMetrics vm = compute_value_metrics(solution, *oracle, grid, states);
      row.mse = vm.mse;
      row.e2 = vm.e2;
      row.opt_gap = compute_opt_gap(solution, *oracle, model, grid, reward, c.discount, states,
                                    s.options().workers)
                        .mean;
    }
    row.fidelity = trajectory_fidelity(p, grid, samples, model);
    rows.push_back(row);
    s.note(run_label(run) + ": acc " + format_double(row.acc) + " opt_gap " +
           format_double(row.opt_gap));
  }
  s.write(s.root() / kMetricsFile, false,
          [&](std::ostream& out) { write_metrics_csv(out, rows); });
}

void write_trajectory(Session& s, const Run& run, const Model& model) {
  const auto& c = s.config();
  if (c.x0.empty() || c.trajectory_actions.empty()) {
    throw ConfigError(0, "trajectory needs x0 and trajectory.actions");
  }
  const Grid grid = load_grid(run);
  const TransitionModel p = load_transitions(run);
  const auto truth = trajectory(model, c.x0, c.trajectory_actions);
  const auto disc = discretized_trajectory(model, grid, c.x0, c.trajectory_actions);
  const auto markov = markov_trajectory(grid.region_of(c.x0), c.trajectory_actions, p, grid);
  s.write(run.dir / kTrajectoryFile, false, [&](std::ostream& out) {
    out << "t,kind";
    for (std::size_t d = 0; d < c.dimension(); ++d) out << ",x" << d;
    out << '\n';
    auto emit = [&](const char* kind, const std::vector<StateVector>& rows) {
      for (std::size_t t = 0; t < rows.size(); ++t) {
        out << t << ',' << kind;
        for (double v : rows[t]) out << ',' << format_double(v);
        out << '\n';
      }
    };
    emit("true", truth);
    emit("discretized", disc);
    emit("markov", markov);
  });
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

void update_manifest(Session& s, bool fresh) {
  const auto& c = s.config();
  const fs::path path = s.root() / kManifestFile;
  const std::string config_hash = hex64(fnv1a64(canonical_config(c)));
  nlohmann::json manifest;
  if (!fresh && fs::exists(path)) {
    std::ifstream in(path);
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
      manifest = nlohmann::json::object();
    }
    if (manifest.value("config_hash", "") != config_hash) manifest = nlohmann::json::object();
  }
  manifest["config_hash"] = config_hash;
  manifest["seed"] = c.seed;
  if (!manifest.contains("stages")) manifest["stages"] = nlohmann::json::array();
  for (const auto& t : s.timings()) manifest["stages"].push_back(t);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(s.root())) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == kManifestFile) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  nlohmann::json listed = nlohmann::json::array();
  for (const auto& f : files) {
    listed.push_back({{"path", fs::relative(f, s.root()).generic_string()},
                      {"bytes", fs::file_size(f)},
                      {"fnv1a64", hex64(file_hash(f))}});
  }
  manifest["files"] = listed;
  s.write(path, false, [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

void execute(Session& s, Stage stage, const Model& model) {
  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point start) {
    return std::chrono::duration<double>(clock::now() - start).count();
  };
  const std::string name(stage_name(stage));
  if (stage == Stage::evaluate) {
    const auto start = clock::now();
    evaluate(s, model);
    s.time_stage(name, "all", seconds_since(start));
    return;
  }
  for (const Run& run : s.runs()) {
    const auto start = clock::now();
    switch (stage) {
      case Stage::discretize:
        discretize(s, run, model);
        break;
      case Stage::transitions:
        transitions(s, run, model);
        break;
      case Stage::solve:
        solve(s, run);
        break;
      case Stage::trajectory:
        write_trajectory(s, run, model);
        break;
      case Stage::evaluate:
        break;
    }
    const double elapsed = seconds_since(start);
    s.time_stage(name, run_label(run), elapsed);
    s.note(name + " " + run_label(run) + " " + format_double(elapsed) + " s");
  }
}

template <typename Body>
void guarded(Session& s, Body&& body) {
  try {
    body();
  } catch (...) {
    s.rollback();
    throw;
  }
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::discretize:
      return "discretize";
    case Stage::transitions:
      return "transitions";
    case Stage::solve:
      return "solve";
    case Stage::evaluate:
      return "evaluate";
    case Stage::trajectory:
      return "trajectory";
  }
  return "";
}

Stage parse_stage(std::string_view name) {
  for (Stage s : {Stage::discretize, Stage::transitions, Stage::solve, Stage::evaluate,
                  Stage::trajectory}) {
    if (stage_name(s) == name) return s;
  }
  throw ConfigError(0, "unknown stage '" + std::string(name) + "'");
}

std::string run_directory(const std::string& method, std::size_t budget) {
  return method + "_B" + std::to_string(budget);
}

void run_stage(const ExperimentConfig& config, Stage stage, const RunOptions& options) {
  config.validate();
  Session s(config, options);
  const auto model = config.make_model();
  guarded(s, [&] {
    execute(s, stage, *model);
    update_manifest(s, false);
  });
}

void run_pipeline(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  Session s(config, options);
  const auto model = config.make_model();
  guarded(s, [&] {
    for (Stage stage : {Stage::discretize, Stage::transitions, Stage::solve, Stage::evaluate}) {
      execute(s, stage, *model);
    }
    if (!config.x0.empty() && !config.trajectory_actions.empty()) {
      execute(s, Stage::trajectory, *model);
    }
    update_manifest(s, true);
  });
}

DiscretizeResult discretize_run(const ExperimentConfig& c, const std::string& method,
                                std::size_t budget, const Model& model) {
  const std::size_t n = c.dimension();
  if (method == "uniform") return {uniform_grid(budget, n, c.frozen_components), {}};
  if (method != "greedycut") throw ConfigError(0, "unknown method '" + method + "'");
  const Grid initial = Grid::trivial(n);
  std::size_t count = c.greedycut_samples;
  if (count == 0) count = std::max<std::size_t>(1, (budget - initial.breakpoint_count()) / 10);
  std::mt19937_64 sample_rng(derive_seed(c.seed, "greedycut.samples", budget));
  const SampleSet samples = generate_samples(c.bounds, c.horizon, count, 2, sample_rng);
  GreedyCutOptions opts;
  opts.budget = budget;
  opts.frozen_components = c.frozen_components;
  std::mt19937_64 tie_rng(derive_seed(c.seed, "greedycut.ties", budget));
  GreedyCutResult result = greedy_cut(initial, model, samples, opts, tie_rng);
  return {std::move(result.grid), std::move(result.log)};
}

std::uint64_t transition_seed(const ExperimentConfig& c, const std::string& method,
                              std::size_t budget) {
  return derive_seed(c.seed, "transitions",
                     derive_seed(fnv1a64(method), static_cast<std::uint64_t>(budget)));
}

std::uint64_t fidelity_seed(const ExperimentConfig& c) { return derive_seed(c.seed, "fidelity"); }

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof buffer);
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buffer[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace epidisc
