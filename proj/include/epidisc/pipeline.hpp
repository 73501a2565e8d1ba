#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epidisc/config.hpp"
#include "epidisc/greedycut.hpp"
#include "epidisc/grid.hpp"

namespace epidisc {

enum class Stage { discretize, transitions, solve, evaluate, trajectory };

std::string_view stage_name(Stage stage);
/// Throws ConfigError for an unknown name.
Stage parse_stage(std::string_view name);

struct RunOptions {
  std::size_t workers = 1;
  /// Progress lines go here when set.
  std::ostream* log = nullptr;
};

/// Directory of one (method, budget) run relative to the output directory.
std::string run_directory(const std::string& method, std::size_t budget);

/// Runs one stage for every (method, budget) pair, reading the previous
/// stage's files from the output directory. Files written by a failing call
/// are removed before the exception propagates.
void run_stage(const ExperimentConfig& config, Stage stage, const RunOptions& options);

/// discretize -> transitions -> solve -> evaluate, plus trajectory when
/// x0 and trajectory.actions are configured.
void run_pipeline(const ExperimentConfig& config, const RunOptions& options);

struct DiscretizeResult {
  Grid grid;
  /// Cut log; empty for the uniform method.
  std::vector<CutRecord> log;
};

/// The grid the discretize stage builds for (method, budget).
DiscretizeResult discretize_run(const ExperimentConfig& config, const std::string& method,
                                std::size_t budget, const Model& model);

/// Seeds of the transition sampler for a run and of the fidelity samples.
std::uint64_t transition_seed(const ExperimentConfig& config, const std::string& method,
                              std::size_t budget);
std::uint64_t fidelity_seed(const ExperimentConfig& config);

/// FNV-1a 64 of the file's bytes.
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace epidisc
