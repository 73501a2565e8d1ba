#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/greedycut.hpp"
#include "epidisc/reward.hpp"
#include "epidisc/types.hpp"

namespace epidisc {

enum class ModelKind { sir, stratified_sir };

/// Everything one experiment needs. Parsed from a line-oriented
/// `key = value` file; list values are whitespace separated.
struct ExperimentConfig {
  ModelKind model = ModelKind::sir;
  SirParams sir;
  StratifiedSirParams stratified;

  InitialStateBounds bounds;
  std::size_t horizon = 10;
  double discount = 1.0;
  double lockdown_disutility = 0.03;

  std::vector<std::size_t> budgets;
  std::vector<std::string> methods;
  /// 0 selects (B - |G0|) / 10 samples, i.e. ten cut rounds per sample.
  std::size_t greedycut_samples = 0;
  std::vector<std::size_t> frozen_components;
  std::size_t transition_samples = 1000;

  bool policy_tables = true;
  bool two_switch = false;
  bool oracle_metrics = true;
  std::size_t fidelity_samples = 1000;

  StateVector x0;
  ActionSequence trajectory_actions;

  std::uint64_t seed = 1;
  std::string output_dir = "out";

  std::size_t dimension() const;
  std::unique_ptr<Model> make_model() const;
  RewardModel make_reward() const;

  /// Throws ConfigError (line 0) on any out-of-range field.
  void validate() const;
};

/// Parses and validates. Errors carry the 1-based line of the offending key.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Normalised text of every field except the output directory, in fixed
/// order. Two configs with the same canonical text produce the same files.
std::string canonical_config(const ExperimentConfig& config);

}  // namespace epidisc
