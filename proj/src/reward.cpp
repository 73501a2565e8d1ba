#include "epidisc/reward.hpp"

#include <string>

#include "epidisc/error.hpp"

namespace epidisc {

RewardModel RewardModel::sir(double lockdown_disutility) {
  return RewardModel{{0.0, lockdown_disutility}, {1}, {1.0}};
}

RewardModel RewardModel::stratified(const StratifiedSirParams& params,
                                    double lockdown_disutility) {
  params.validate();
  RewardModel reward{{0.0, lockdown_disutility}, {}, {}};
  for (std::size_t i = 0; i < params.districts; ++i) {
    reward.infected_components.push_back(3 * i + 1);
    reward.infected_weights.push_back(params.district_weights[i]);
  }
  return reward;
}

void RewardModel::validate(std::size_t dimension, std::size_t action_count) const {
  if (disutility.size() != action_count) {
    throw InvalidInput("need one disutility per action (" + std::to_string(action_count) + ")");
  }
  if (disutility.front() != 0.0) throw InvalidInput("no-lockdown disutility must be 0");
  for (double u : disutility) {
    if (!(u >= 0.0)) throw InvalidInput("disutilities must be >= 0");
  }
  if (infected_components.empty() || infected_components.size() != infected_weights.size()) {
    throw InvalidInput("infected components and weights must be non-empty and aligned");
  }
  for (std::size_t c : infected_components) {
    if (c >= dimension) throw InvalidInput("infected component out of range");
  }
}

double rollout_cost(const Model& model, const RewardModel& reward, double discount,
                    std::span<const double> x0, std::span<const ActionId> actions) {
  const std::vector<StateVector> states = trajectory(model, x0, actions);
  double total = reward.infected(states.back());
  for (std::size_t t = actions.size(); t-- > 0;) {
    total = reward.stage(states[t], actions[t]) + discount * total;
  }
  return total;
}

}  // namespace epidisc
