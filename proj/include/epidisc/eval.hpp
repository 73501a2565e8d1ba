#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/greedycut.hpp"
#include "epidisc/grid.hpp"
#include "epidisc/mdp.hpp"
#include "epidisc/oracle.hpp"
#include "epidisc/reward.hpp"
#include "epidisc/transition.hpp"

namespace epidisc {

/// Equal spacing with the same breakpoint budget: every active component
/// gets floor(B' / n') breakpoints including 0 and 1, the remainder going to
/// the lowest-indexed active components. Frozen components keep [0, 1] and
/// their two breakpoints count against the budget.
Grid uniform_grid(std::size_t budget, std::size_t dimension,
                  std::span<const std::size_t> frozen = {});

/// The 300 SIR evaluation states: S in {0.70, ..., 0.99}, I in {0.001, ...,
/// 0.010}, R = 1 - S - I (renormalised if S + I > 1).
std::vector<StateVector> evaluation_states_sir();

/// 1 - mismatches / (states * N), comparing policy_t(region_of(x)) with the
/// oracle's first action at every (state, epoch).
double compute_acc(const SolveResult& solution, const OracleTable& oracle, const Grid& grid,
                   std::span<const StateVector> states);

struct ValueMetrics {
  double mse = 0.0;
  double e2 = 0.0;
  /// States left out of E2 because their oracle value is 0.
  std::size_t excluded = 0;
};

/// MSE and relative mean absolute error of V_0(region_of(x)) against V*_0(x).
ValueMetrics compute_value_metrics(const SolveResult& solution, const OracleTable& oracle,
                                   const Grid& grid, std::span<const StateVector> states);

struct OptGap {
  double mean = 0.0;
  /// Rolled-out value of the discretized policy on the true model, per state.
  std::vector<double> policy_values;
  std::vector<double> gaps;
  std::size_t excluded = 0;
};

/// Mean of |V~_0(x) - V*_0(x)| / V*_0(x) over the evaluation states.
OptGap compute_opt_gap(const SolveResult& solution, const OracleTable& oracle,
                       const Model& model, const Grid& grid, const RewardModel& reward,
                       double discount, std::span<const StateVector> states,
                       std::size_t workers = 1);

/// Sample mean with a 95% normal-approximation interval.
struct Estimate {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

Estimate mean_with_interval(std::span<const double> values);

struct FidelityResult {
  Estimate markov_vs_disc;
  Estimate markov_vs_true;
};

/// For each sample, the Markovian trajectory from b_0 = e_region(x0) is
/// compared (sum over t = 1..N of squared distance) with the discretized
/// trajectory and with the true trajectory.
FidelityResult trajectory_fidelity(const TransitionRows& transitions, const Grid& grid,
                                   const SampleSet& samples, const Model& model);

struct MetricsRow {
  std::string method;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double acc = 0.0;
  double mse = 0.0;
  double e2 = 0.0;
  double opt_gap = 0.0;
  FidelityResult fidelity;
};

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);

}  // namespace epidisc
