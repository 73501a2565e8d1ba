#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/grid.hpp"
#include "epidisc/reward.hpp"
#include "epidisc/transition.hpp"
#include "epidisc/types.hpp"

namespace epidisc {

/// r(centroid(region), action).
double stage_cost(RegionId region, ActionId action, const Grid& grid, const RewardModel& reward);

/// Value table V_t (t = 0..N) and greedy policy (t = 0..N-1) over regions.
class SolveResult {
 public:
  SolveResult(std::size_t horizon, std::size_t regions);
  SolveResult(std::size_t horizon, std::size_t regions, std::vector<double> values,
              std::vector<ActionId> policy);

  std::size_t horizon() const { return horizon_; }
  std::size_t regions() const { return regions_; }

  double value(std::size_t t, std::size_t region) const { return values_[t * regions_ + region]; }
  ActionId action(std::size_t t, std::size_t region) const {
    return policy_[t * regions_ + region];
  }
  double& value(std::size_t t, std::size_t region) { return values_[t * regions_ + region]; }
  ActionId& action(std::size_t t, std::size_t region) { return policy_[t * regions_ + region]; }

  friend bool operator==(const SolveResult&, const SolveResult&) = default;

 private:
  std::size_t horizon_;
  std::size_t regions_;
  std::vector<double> values_;
  std::vector<ActionId> policy_;
};

/// Finite-horizon backward induction, minimising expected cost:
///   V_N(s) = infected(centroid s)
///   V_t(s) = min_a r(s, a) + discount * sum_s' P(s'|s, a) V_t+1(s')
/// Ties resolve to the lowest action index (no lockdown).
SolveResult backward_induction(const TransitionModel& transitions, const Grid& grid,
                               const RewardModel& reward, double discount, std::size_t horizon,
                               std::size_t workers = 1);

struct PolicyRollout {
  double value = 0.0;
  ActionSequence actions;
  std::vector<StateVector> states;
};

/// Runs the region policy on the true dynamics from x0 (action at epoch t is
/// policy_t(region of X_t)) and scores it with rollout_cost.
PolicyRollout evaluate_policy_on_truth(const SolveResult& policy, const Model& model,
                                       const Grid& grid, const RewardModel& reward,
                                       double discount, std::span<const double> x0);

/// A single contiguous lockdown over epochs [start, end); start == end means
/// no lockdown at all.
struct LockdownWindow {
  std::size_t start = 0;
  std::size_t end = 0;
  double cost = 0.0;

  bool empty() const { return start == end; }
};

ActionSequence window_actions(std::size_t start, std::size_t end, std::size_t horizon);

/// Expected cost of an open-loop sequence from belief b0:
///   sum_t discount^t (b_t . infected + u(a_t)) + discount^N b_N . infected
/// with b_t+1 = b_t^T P(a_t), accumulated forward in time.
double open_loop_cost(const TransitionRows& transitions, const Grid& grid,
                      const RewardModel& reward, double discount, std::span<const double> b0,
                      std::span<const ActionId> actions);

/// Best open-loop schedule with at most two switches (off -> on -> off),
/// enumerating every window. Ties keep the smallest (start, length), the
/// empty window first.
LockdownWindow two_switch_solve(const TransitionRows& transitions, const Grid& grid,
                                const RewardModel& reward, double discount, std::size_t horizon,
                                std::span<const double> b0);

/// Closed-loop optimum over policies allowed at most two switches, via DP on
/// (region, phase) restricted to regions reachable from b0. Never exceeds the
/// open-loop window optimum.
double two_switch_closed_loop_cost(const TransitionRows& transitions, const Grid& grid,
                                   const RewardModel& reward, double discount,
                                   std::size_t horizon, std::span<const double> b0);

/// CSV "epoch,region,action,value"; the terminal epoch carries action 0.
void write_solution_csv(std::ostream& out, const SolveResult& result);
SolveResult read_solution_csv(std::istream& in);

}  // namespace epidisc
