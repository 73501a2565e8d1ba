#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "epidisc/types.hpp"

namespace epidisc {

struct SirParams {
  double beta = 1.4;
  double gamma = 0.49;
  /// Fraction by which beta is scaled down while a lockdown is in force.
  double lockdown_reduction = 0.8;

  void validate() const;
};

/// District-stratified SIR. `beta_matrix[j * districts + i]` is the rate at
/// which infected members of district j infect susceptibles of district i.
struct StratifiedSirParams {
  std::size_t districts = 1;
  std::vector<double> beta_matrix;
  double gamma = 0.49;
  double lockdown_reduction = 0.8;
  /// Population share of each district; used by the reward, not the step.
  std::vector<double> district_weights;

  void validate() const;
};

/// Transmission scale under `action` (lockdown multiplies by 1 - reduction).
double transmission_scale(double lockdown_reduction, ActionId action);

/// One epoch of the classic SIR difference equations with clamped flows.
StateVector sir_step(std::span<const double> state, const SirParams& params, ActionId action);

/// One epoch of the stratified model. The state is k (S, I, R) triples.
StateVector stratified_step(std::span<const double> state, const StratifiedSirParams& params,
                            ActionId action);

/// Deterministic ground-truth dynamics f(x, a).
class Model {
 public:
  virtual ~Model() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::size_t action_count() const { return 2; }

  /// Writes f(state, action) to `out`. `state` need not lie on the simplex.
  virtual void step(std::span<const double> state, ActionId action,
                    std::span<double> out) const = 0;

  /// Advances `count` points in place. Component d of point p is stored at
  /// soa[d * stride + p]. Must agree exactly with step().
  virtual void step_batch(std::span<double> soa, std::size_t stride, std::size_t count,
                          ActionId action) const;

  StateVector step(std::span<const double> state, ActionId action) const;

 protected:
  void check_arguments(std::size_t state_size, ActionId action) const;
};

class SirModel final : public Model {
 public:
  explicit SirModel(SirParams params);

  std::size_t dimension() const override { return 3; }
  using Model::step;
  void step(std::span<const double> state, ActionId action, std::span<double> out) const override;
  void step_batch(std::span<double> soa, std::size_t stride, std::size_t count,
                  ActionId action) const override;

  const SirParams& params() const { return params_; }

 private:
  SirParams params_;
};

class StratifiedSirModel final : public Model {
 public:
  explicit StratifiedSirModel(StratifiedSirParams params);

  std::size_t dimension() const override { return 3 * params_.districts; }
  using Model::step;
  void step(std::span<const double> state, ActionId action, std::span<double> out) const override;

  const StratifiedSirParams& params() const { return params_; }

 private:
  StratifiedSirParams params_;
};

/// x_0 .. x_N for the given action sequence; output[0] == x0.
std::vector<StateVector> trajectory(const Model& model, std::span<const double> x0,
                                    std::span<const ActionId> actions);

}  // namespace epidisc
