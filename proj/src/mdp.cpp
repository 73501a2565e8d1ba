#include "epidisc/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "epidisc/error.hpp"
#include "epidisc/format.hpp"
#include "epidisc/parallel.hpp"

namespace epidisc {

namespace {

void check_discount(double discount) {
  if (!(discount > 0.0 && discount <= 1.0)) throw InvalidInput("discount must lie in (0, 1]");
}

std::vector<double> centroid_infected(const Grid& grid, const RewardModel& reward) {
  std::vector<double> infected(grid.region_count());
  StateVector c(grid.dimension());
  for (std::size_t r = 0; r < infected.size(); ++r) {
    grid.centroid(RegionId{r}, c);
    infected[r] = reward.infected(c);
  }
  return infected;
}

double row_expectation(const TransitionRow& row, std::span<const double> next) {
  double total = 0.0;
  for (std::size_t k = 0; k < row.destinations.size(); ++k) {
    total += row.probabilities[k] * next[row.destinations[k]];
  }
  return total;
}

}  // namespace

double stage_cost(RegionId region, ActionId action, const Grid& grid, const RewardModel& reward) {
  if (action.index() >= reward.disutility.size()) throw InvalidInput("action out of range");
  return reward.stage(grid.centroid(region), action);
}

SolveResult::SolveResult(std::size_t horizon, std::size_t regions)
    : horizon_(horizon),
      regions_(regions),
      values_((horizon + 1) * regions, 0.0),
      policy_(horizon * regions, kNoLockdown) {}

SolveResult::SolveResult(std::size_t horizon, std::size_t regions, std::vector<double> values,
                         std::vector<ActionId> policy)
    : horizon_(horizon), regions_(regions), values_(std::move(values)), policy_(std::move(policy)) {
  if (values_.size() != (horizon + 1) * regions || policy_.size() != horizon * regions) {
    throw InvalidInput("solution table sizes do not match horizon and region count");
  }
}

SolveResult backward_induction(const TransitionModel& transitions, const Grid& grid,
                               const RewardModel& reward, double discount, std::size_t horizon,
                               std::size_t workers) {
  check_discount(discount);
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
  if (transitions.regions() != grid.region_count()) {
    throw InvalidInput("transition model and grid disagree on the region count");
  }
  reward.validate(grid.dimension(), transitions.action_count());
  transitions.check_stochastic();

  const std::size_t regions = transitions.regions();
  const std::size_t actions = transitions.action_count();
  const std::vector<double> infected = centroid_infected(grid, reward);

  SolveResult result(horizon, regions);
  for (std::size_t s = 0; s < regions; ++s) result.value(horizon, s) = infected[s];

  for (std::size_t t = horizon; t-- > 0;) {
    const std::span<const double> next{&result.value(t + 1, 0), regions};
    parallel_for(workers, regions, [&](std::size_t begin, std::size_t end) {
      for (std::size_t s = begin; s < end; ++s) {
        double best = std::numeric_limits<double>::infinity();
        ActionId choice = kNoLockdown;
        for (std::size_t a = 0; a < actions; ++a) {
          const ActionId action{static_cast<std::uint8_t>(a)};
          const double q = infected[s] + reward.disutility[a] +
                           discount * row_expectation(transitions.row(action, s), next);
          if (q < best) {
            best = q;
            choice = action;
          }
        }
        result.value(t, s) = best;
        result.action(t, s) = choice;
      }
    });
  }
  return result;
}

PolicyRollout evaluate_policy_on_truth(const SolveResult& policy, const Model& model,
                                       const Grid& grid, const RewardModel& reward,
                                       double discount, std::span<const double> x0) {
  check_discount(discount);
  if (policy.regions() != grid.region_count()) {
    throw InvalidInput("policy and grid disagree on the region count");
  }
  PolicyRollout out;
  out.states.emplace_back(x0.begin(), x0.end());
  for (std::size_t t = 0; t < policy.horizon(); ++t) {
    const ActionId a = policy.action(t, grid.locate(out.states.back()).flat);
    out.actions.push_back(a);
    out.states.push_back(model.step(out.states.back(), a));
  }
  double total = reward.infected(out.states.back());
  for (std::size_t t = out.actions.size(); t-- > 0;) {
    total = reward.stage(out.states[t], out.actions[t]) + discount * total;
  }
  out.value = total;
  return out;
}

ActionSequence window_actions(std::size_t start, std::size_t end, std::size_t horizon) {
  if (start > end || end > horizon) throw InvalidInput("window outside the horizon");
  ActionSequence actions(horizon, kNoLockdown);
  for (std::size_t t = start; t < end; ++t) actions[t] = kLockdown;
  return actions;
}

namespace {

using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// b^T P(a), summed per destination in ascending source order; the result is
// sorted by region.
class BeliefPropagator {
 public:
  explicit BeliefPropagator(std::size_t regions) : scratch_(regions, 0.0), seen_(regions, 0) {}

  SparseVector step(const SparseVector& belief, const TransitionRows& rows, ActionId action) {
    touched_.clear();
    for (const auto& [i, mass] : belief) {
      const TransitionRow r = rows.row(action, i);
      for (std::size_t k = 0; k < r.destinations.size(); ++k) {
        const std::uint32_t j = r.destinations[k];
        if (!seen_[j]) {
          seen_[j] = 1;
          touched_.push_back(j);
        }
        scratch_[j] += mass * r.probabilities[k];
      }
    }
    std::sort(touched_.begin(), touched_.end());
    SparseVector next;
    next.reserve(touched_.size());
    for (std::uint32_t j : touched_) {
      next.emplace_back(j, scratch_[j]);
      scratch_[j] = 0.0;
      seen_[j] = 0;
    }
    return next;
  }

 private:
  std::vector<double> scratch_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::uint32_t> touched_;
};

double dot(const SparseVector& belief, std::span<const double> values) {
  double total = 0.0;
  for (const auto& [i, mass] : belief) total += mass * values[i];
  return total;
}

SparseVector to_sparse(std::span<const double> b0, std::size_t regions) {
  if (b0.size() != regions) throw InvalidInput("belief dimension mismatch");
  double total = 0.0;
  SparseVector out;
  for (std::size_t i = 0; i < b0.size(); ++i) {
    if (!(b0[i] >= 0.0)) throw InvalidInput("belief entries must be >= 0");
    total += b0[i];
    if (b0[i] != 0.0) out.emplace_back(static_cast<std::uint32_t>(i), b0[i]);
  }
  if (!(std::abs(total - 1.0) <= 1e-9)) throw InvalidInput("belief must sum to 1");
  return out;
}

void check_two_switch_inputs(const TransitionRows& transitions, const Grid& grid,
                             const RewardModel& reward, double discount, std::size_t horizon) {
  check_discount(discount);
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
  if (transitions.regions() != grid.region_count()) {
    throw InvalidInput("transition model and grid disagree on the region count");
  }
  if (transitions.action_count() != 2) throw InvalidInput("two-switch solver needs two actions");
  reward.validate(grid.dimension(), transitions.action_count());
}

// Centroid infected fractions for the regions that appear in `support`.
class InfectedLookup {
 public:
  InfectedLookup(const Grid& grid, const RewardModel& reward)
      : grid_(grid), reward_(reward), values_(grid.region_count(), std::nan("")),
        centroid_(grid.dimension()) {}

  std::span<const double> cover(const SparseVector& belief) {
    for (const auto& [i, mass] : belief) {
      if (std::isnan(values_[i])) {
        grid_.centroid(RegionId{i}, centroid_);
        values_[i] = reward_.infected(centroid_);
      }
    }
    return values_;
  }

 private:
  const Grid& grid_;
  const RewardModel& reward_;
  std::vector<double> values_;
  StateVector centroid_;
};

}  // namespace

double open_loop_cost(const TransitionRows& transitions, const Grid& grid,
                      const RewardModel& reward, double discount, std::span<const double> b0,
                      std::span<const ActionId> actions) {
  check_discount(discount);
  if (transitions.regions() != grid.region_count()) {
    throw InvalidInput("transition model and grid disagree on the region count");
  }
  reward.validate(grid.dimension(), transitions.action_count());
  SparseVector belief = to_sparse(b0, transitions.regions());
  BeliefPropagator propagate(transitions.regions());
  InfectedLookup infected(grid, reward);
  double cost = 0.0;
  double weight = 1.0;
  for (ActionId a : actions) {
    cost += weight * (dot(belief, infected.cover(belief)) + reward.disutility.at(a.index()));
    belief = propagate.step(belief, transitions, a);
    weight *= discount;
  }
  cost += weight * dot(belief, infected.cover(belief));
  return cost;
}

namespace {

// Regions reachable from the support of b0 within `horizon` steps under
// either action, with the step at which each is first reached. A region
// first reached at depth d can only be occupied at epochs t >= d.
struct Reachable {
  std::vector<std::uint32_t> regions;
  std::vector<std::uint32_t> depth;
  std::vector<std::uint32_t> local;

  static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();
};

Reachable reachable_from(const SparseVector& start, const TransitionRows& transitions,
                         std::size_t horizon) {
  Reachable out;
  std::vector<std::uint32_t> first(transitions.regions(), Reachable::kAbsent);
  std::vector<std::uint32_t> frontier;
  for (const auto& [i, mass] : start) {
    first[i] = 0;
    frontier.push_back(i);
  }
  for (std::size_t t = 0; t < horizon && !frontier.empty(); ++t) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t i : frontier) {
      for (std::size_t a = 0; a < transitions.action_count(); ++a) {
        const TransitionRow r = transitions.row(ActionId{static_cast<std::uint8_t>(a)}, i);
        for (std::uint32_t j : r.destinations) {
          if (first[j] == Reachable::kAbsent) {
            first[j] = static_cast<std::uint32_t>(t + 1);
            next.push_back(j);
          }
        }
      }
    }
    frontier = std::move(next);
  }
  out.local.assign(transitions.regions(), Reachable::kAbsent);
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] == Reachable::kAbsent) continue;
    out.local[i] = static_cast<std::uint32_t>(out.regions.size());
    out.regions.push_back(static_cast<std::uint32_t>(i));
    out.depth.push_back(first[i]);
  }
  return out;
}

std::vector<double> reachable_infected(const Reachable& reach, const Grid& grid,
                                       const RewardModel& reward) {
  std::vector<double> infected(reach.regions.size());
  StateVector c(grid.dimension());
  for (std::size_t k = 0; k < infected.size(); ++k) {
    grid.centroid(RegionId{reach.regions[k]}, c);
    infected[k] = reward.infected(c);
  }
  return infected;
}

double local_expectation(const TransitionRow& row, const Reachable& reach,
                         std::span<const double> next) {
  double total = 0.0;
  for (std::size_t e = 0; e < row.destinations.size(); ++e) {
    total += row.probabilities[e] * next[reach.local[row.destinations[e]]];
  }
  return total;
}

}  // namespace

LockdownWindow two_switch_solve(const TransitionRows& transitions, const Grid& grid,
                                const RewardModel& reward, double discount, std::size_t horizon,
                                std::span<const double> b0) {
  check_two_switch_inputs(transitions, grid, reward, discount, horizon);
  const SparseVector start = to_sparse(b0, transitions.regions());
  const Reachable reach = reachable_from(start, transitions, horizon);
  const std::size_t m = reach.regions.size();
  const std::vector<double> infected = reachable_infected(reach, grid, reward);

  // tail[t] = expected cost from epoch t with the lockdown off until N,
  // per reachable region; only regions occupiable at t are filled.
  std::vector<double> tail((horizon + 1) * m, 0.0);
  std::copy(infected.begin(), infected.end(), tail.begin() + static_cast<std::ptrdiff_t>(horizon * m));
  for (std::size_t t = horizon; t-- > 0;) {
    const std::span<const double> next(tail.data() + (t + 1) * m, m);
    for (std::size_t k = 0; k < m; ++k) {
      if (reach.depth[k] > t) continue;
      const TransitionRow r = transitions.row(kNoLockdown, reach.regions[k]);
      tail[t * m + k] =
          infected[k] + reward.disutility[0] + discount * local_expectation(r, reach, next);
    }
  }
  auto tail_cost = [&](const SparseVector& belief, std::size_t t) {
    double total = 0.0;
    for (const auto& [i, mass] : belief) total += mass * tail[t * m + reach.local[i]];
    return total;
  };
  auto stage = [&](const SparseVector& belief, ActionId a) {
    double total = 0.0;
    for (const auto& [i, mass] : belief) total += mass * infected[reach.local[i]];
    return total + reward.disutility[a.index()];
  };

  BeliefPropagator propagate(transitions.regions());
  SparseVector prefix = start;
  double prefix_cost = 0.0;
  double prefix_weight = 1.0;
  LockdownWindow best{0, 0, tail_cost(start, 0)};
  for (std::size_t s = 0; s < horizon; ++s) {
    SparseVector belief = prefix;
    double cost = prefix_cost;
    double weight = prefix_weight;
    for (std::size_t e = s + 1; e <= horizon; ++e) {
      cost += weight * stage(belief, kLockdown);
      belief = propagate.step(belief, transitions, kLockdown);
      weight *= discount;
      const double total = cost + weight * tail_cost(belief, e);
      if (total < best.cost) best = LockdownWindow{s, e, total};
    }
    prefix_cost += prefix_weight * stage(prefix, kNoLockdown);
    prefix = propagate.step(prefix, transitions, kNoLockdown);
    prefix_weight *= discount;
  }
  // Report the winner's cost with the forward accumulation of open_loop_cost.
  const ActionSequence actions = window_actions(best.start, best.end, horizon);
  best.cost = open_loop_cost(transitions, grid, reward, discount, b0, actions);
  return best;
}

double two_switch_closed_loop_cost(const TransitionRows& transitions, const Grid& grid,
                                   const RewardModel& reward, double discount,
                                   std::size_t horizon, std::span<const double> b0) {
  check_two_switch_inputs(transitions, grid, reward, discount, horizon);
  const SparseVector start = to_sparse(b0, transitions.regions());
  const Reachable reach = reachable_from(start, transitions, horizon);
  const std::size_t m = reach.regions.size();
  const std::vector<double> infected = reachable_infected(reach, grid, reward);

  // Phase 0: lockdown not yet started; 1: in force; 2: lifted for good.
  std::vector<double> value(3 * m);
  for (std::size_t p = 0; p < 3; ++p) {
    std::copy(infected.begin(), infected.end(), value.begin() + static_cast<std::ptrdiff_t>(p * m));
  }
  std::vector<double> next_value(3 * m, 0.0);
  for (std::size_t t = horizon; t-- > 0;) {
    const std::span<const double> v0(value.data(), m);
    const std::span<const double> v1(value.data() + m, m);
    const std::span<const double> v2(value.data() + 2 * m, m);
    for (std::size_t k = 0; k < m; ++k) {
      if (reach.depth[k] > t) continue;
      const TransitionRow off = transitions.row(kNoLockdown, reach.regions[k]);
      const TransitionRow on = transitions.row(kLockdown, reach.regions[k]);
      const double c_off = infected[k] + reward.disutility[0];
      const double c_on = infected[k] + reward.disutility[1];
      const double stay_off = c_off + discount * local_expectation(off, reach, v0);
      const double lock = c_on + discount * local_expectation(on, reach, v1);
      const double lift = c_off + discount * local_expectation(off, reach, v2);
      next_value[k] = std::min(stay_off, lock);
      next_value[m + k] = std::min(lock, lift);
      next_value[2 * m + k] = lift;
    }
    std::swap(value, next_value);
  }
  double total = 0.0;
  for (const auto& [i, mass] : start) total += mass * value[reach.local[i]];
  return total;
}

void write_solution_csv(std::ostream& out, const SolveResult& result) {
  out << "epoch,region,action,value\n";
  for (std::size_t t = 0; t <= result.horizon(); ++t) {
    for (std::size_t s = 0; s < result.regions(); ++s) {
      const std::size_t a = t < result.horizon() ? result.action(t, s).index() : 0;
      out << t << ',' << s << ',' << a << ',' << format_double(result.value(t, s)) << '\n';
    }
  }
}

SolveResult read_solution_csv(std::istream& in) {
  struct Row {
    std::size_t t, s, a;
    double v;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t horizon = 0;
  std::size_t regions = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("epoch", 0) == 0) continue;
    if (line.empty()) continue;
    std::string f[4];
    std::istringstream tokens(line);
    for (auto& field : f) {
      if (!std::getline(tokens, field, ',')) {
        throw InvalidInput("solution CSV line " + std::to_string(line_no) + ": expected 4 fields");
      }
    }
    Row r{parse_u64(f[0]), parse_u64(f[1]), parse_u64(f[2]), parse_double(f[3])};
    if (r.a > 255) throw InvalidInput("solution CSV line " + std::to_string(line_no) + ": bad action");
    horizon = std::max(horizon, r.t);
    regions = std::max(regions, r.s + 1);
    rows.push_back(r);
  }
  if (rows.size() != (horizon + 1) * regions) throw InvalidInput("solution CSV is incomplete");
  SolveResult result(horizon, regions);
  for (const Row& r : rows) {
    result.value(r.t, r.s) = r.v;
    if (r.t < horizon) result.action(r.t, r.s) = ActionId{static_cast<std::uint8_t>(r.a)};
  }
  return result;
}

}  // namespace epidisc
