#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/types.hpp"

namespace epidisc {

/// Stage cost r(x, a) = infected(x) + u(a); terminal cost infected(x).
struct RewardModel {
  /// u(a) per action; u(0) must be 0.
  std::vector<double> disutility{0.0, 0.03};
  /// infected(x) = sum_k weight_k * x[component_k]
  std::vector<std::size_t> infected_components{1};
  std::vector<double> infected_weights{1.0};

  static RewardModel sir(double lockdown_disutility);
  static RewardModel stratified(const StratifiedSirParams& params, double lockdown_disutility);

  void validate(std::size_t dimension, std::size_t action_count) const;

  double infected(std::span<const double> x) const {
    double total = 0.0;
    for (std::size_t k = 0; k < infected_components.size(); ++k) {
      total += infected_weights[k] * x[infected_components[k]];
    }
    return total;
  }

  double stage(std::span<const double> x, ActionId action) const {
    return infected(x) + disutility[action.index()];
  }
};

/// Cost of an open-loop action sequence on the true dynamics, accumulated
/// from the terminal epoch backwards: c = infected(x_N);
/// c = r(x_t, a_t) + discount * c for t = N-1..0. Every solver and rollout
/// in the library uses this accumulation so values compare exactly.
double rollout_cost(const Model& model, const RewardModel& reward, double discount,
                    std::span<const double> x0, std::span<const ActionId> actions);

}  // namespace epidisc
