#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/reward.hpp"
#include "epidisc/types.hpp"

namespace epidisc {

/// Longest remaining horizon brute_force will enumerate.
inline constexpr std::size_t kMaxOracleDepth = 25;

struct OracleResult {
  /// Optimal cost-to-go from (x, t) on the true dynamics.
  double value = 0.0;
  /// Optimal actions for epochs t..N-1; empty when t == N.
  ActionSequence best_sequence;

  ActionId best_first_action() const {
    return best_sequence.empty() ? kNoLockdown : best_sequence.front();
  }
};

/// Exhaustive search over all |A|^(N-t) action sequences from state x at
/// epoch t, sharing trajectory prefixes depth first. Among equal-cost
/// sequences the lexicographically smallest wins (action 0 earliest). The
/// value equals rollout_cost(best_sequence) exactly.
OracleResult brute_force(std::span<const double> x, std::size_t t, const Model& model,
                         const RewardModel& reward, double discount, std::size_t horizon);

/// Ground-truth action and value for each (state, epoch) pair, treating each
/// evaluation state as the system state at that epoch.
class OracleTable {
 public:
  OracleTable(std::size_t states, std::size_t horizon)
      : states_(states), horizon_(horizon), actions_(states * horizon), values_(states * horizon) {}

  std::size_t states() const { return states_; }
  std::size_t horizon() const { return horizon_; }
  ActionId action(std::size_t s, std::size_t t) const { return actions_[s * horizon_ + t]; }
  double value(std::size_t s, std::size_t t) const { return values_[s * horizon_ + t]; }
  ActionId& action(std::size_t s, std::size_t t) { return actions_[s * horizon_ + t]; }
  double& value(std::size_t s, std::size_t t) { return values_[s * horizon_ + t]; }

  friend bool operator==(const OracleTable&, const OracleTable&) = default;

 private:
  std::size_t states_;
  std::size_t horizon_;
  std::vector<ActionId> actions_;
  std::vector<double> values_;
};

/// `memoize` caches search nodes keyed by the exact state bits and the
/// remaining depth; results are identical either way.
OracleTable oracle_action_table(std::span<const StateVector> states, const Model& model,
                                const RewardModel& reward, double discount, std::size_t horizon,
                                std::size_t workers = 1, bool memoize = true);

/// CSV "state,epoch,action,value".
void write_oracle_csv(std::ostream& out, const OracleTable& table);

}  // namespace epidisc
