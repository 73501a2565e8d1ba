#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/grid.hpp"
#include "epidisc/types.hpp"

namespace epidisc {

/// Per-compartment initial-state bounds. The state is a run of simplices of
/// `group` components each (one per district); a group whose sampled values
/// sum above 1 is renormalised. group = 0 treats the whole vector as one.
struct InitialStateBounds {
  StateVector lower;
  StateVector upper;
  std::size_t group = 0;

  std::size_t group_size() const { return group == 0 ? lower.size() : group; }
  void validate() const;
};

/// An initial state paired with an open-loop action sequence.
struct Sample {
  StateVector x0;
  ActionSequence actions;
};

using SampleSet = std::vector<Sample>;

/// Draws x0 componentwise uniform within `bounds` (rescaled to sum 1 when the
/// draw sums above 1) and `horizon` actions uniform over the action set.
SampleSet generate_samples(const InitialStateBounds& bounds, std::size_t horizon,
                           std::size_t count, std::size_t action_count, std::mt19937_64& rng);

/// Sum over t = 1..N of ||disc_t - truth_t||^2; t = 0 is excluded.
double trajectory_cost(std::span<const StateVector> truth, std::span<const StateVector> disc);

using TrajectoryCost =
    std::function<double(std::span<const StateVector>, std::span<const StateVector>)>;

struct GreedyCutOptions {
  /// Target breakpoint count sum_d |G_d|.
  std::size_t budget = 0;
  /// Components that are never cut (e.g. recovered compartments that do not
  /// feed back into the dynamics).
  std::vector<std::size_t> frozen_components;
  /// Defaults to trajectory_cost.
  TrajectoryCost cost;
};

struct CutRecord {
  std::size_t round = 0;
  std::size_t sample = 0;
  std::size_t component = 0;
  std::size_t interval = 0;
  double cost_before = 0.0;
  double cost_after = 0.0;
  bool tie = false;
};

struct GreedyCutResult {
  Grid grid;
  std::vector<CutRecord> log;
  std::size_t rounds_per_sample = 0;
  /// Budget left unspent because (B - |G0|) is not a multiple of |samples|.
  std::size_t dropped_rounds = 0;
};

/// Greedy refinement: for each sample in order, runs floor((B - |G0|) / |samples|)
/// rounds. Each round halves the interval (over all components and intervals)
/// whose cut minimises the sample's trajectory cost, lowest (component,
/// interval) first on equal cost. When every candidate yields the same cost,
/// a point of the sample's true trajectory is drawn at random (t uniform in
/// 1..N, component uniform) and the interval containing it is halved.
GreedyCutResult greedy_cut(const Grid& initial, const Model& model, const SampleSet& samples,
                           const GreedyCutOptions& options, std::mt19937_64& rng);

/// CSV: round,sample,component,interval,cost_before,cost_after,tie
void write_cut_log(std::ostream& out, std::span<const CutRecord> log);

}  // namespace epidisc
