#include "epidisc/dynamics.hpp"

#include <cmath>
#include <string>

#include "epidisc/error.hpp"
#include "epidisc/simd/kernels.hpp"

namespace epidisc {

namespace {

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

void check_action(ActionId action) {
  if (action.index() >= 2) {
    throw InvalidInput("action " + std::to_string(action.index()) + " outside {0, 1}");
  }
}

// inf and rec are the clamped outflows of S and I. The same expression order
// is used by the batch kernels.
inline void sir_update(double beta, double gamma, double s, double i, double r, double& s_out,
                       double& i_out, double& r_out) {
  double inf = beta * s * i;
  inf = inf < s ? inf : s;
  double rec = gamma * i;
  rec = rec < i ? rec : i;
  s_out = s - inf;
  i_out = (i + inf) - rec;
  r_out = r + rec;
}

}  // namespace

void SirParams::validate() const {
  if (!(beta >= 0.0)) throw InvalidInput("beta must be >= 0");
  if (!in_unit_interval(gamma)) throw InvalidInput("gamma must lie in [0, 1]");
  if (!in_unit_interval(lockdown_reduction)) {
    throw InvalidInput("lockdown_reduction must lie in [0, 1]");
  }
}

void StratifiedSirParams::validate() const {
  if (districts == 0) throw InvalidInput("at least one district is required");
  if (beta_matrix.size() != districts * districts) {
    throw InvalidInput("beta_matrix must have districts^2 entries");
  }
  for (double b : beta_matrix) {
    if (!(b >= 0.0)) throw InvalidInput("beta_matrix entries must be >= 0");
  }
  if (!in_unit_interval(gamma)) throw InvalidInput("gamma must lie in [0, 1]");
  if (!in_unit_interval(lockdown_reduction)) {
    throw InvalidInput("lockdown_reduction must lie in [0, 1]");
  }
  if (district_weights.size() != districts) {
    throw InvalidInput("district_weights must have one entry per district");
  }
  double total = 0.0;
  for (double w : district_weights) {
    if (!(w >= 0.0)) throw InvalidInput("district weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("district weights must sum to 1");
}

double transmission_scale(double lockdown_reduction, ActionId action) {
  return action == kLockdown ? 1.0 - lockdown_reduction : 1.0;
}

StateVector sir_step(std::span<const double> state, const SirParams& params, ActionId action) {
  if (state.size() != 3) {
    throw InvalidInput("SIR state must have 3 components, got " + std::to_string(state.size()));
  }
  check_action(action);
  const double beta = params.beta * transmission_scale(params.lockdown_reduction, action);
  StateVector out(3);
  sir_update(beta, params.gamma, state[0], state[1], state[2], out[0], out[1], out[2]);
  return out;
}

StateVector stratified_step(std::span<const double> state, const StratifiedSirParams& params,
                            ActionId action) {
  const std::size_t k = params.districts;
  if (state.size() != 3 * k) {
    throw InvalidInput("stratified state must have " + std::to_string(3 * k) +
                       " components, got " + std::to_string(state.size()));
  }
  check_action(action);
  const double scale = transmission_scale(params.lockdown_reduction, action);
  StateVector out(state.size());
  for (std::size_t i = 0; i < k; ++i) {
    const double s = state[3 * i];
    const double inf_i = state[3 * i + 1];
    // Accumulating (beta' * S_i) * I_j from 0 reproduces the classic step
    // bit for bit when k == 1.
    double inf = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double beta = params.beta_matrix[j * k + i] * scale;
      inf += beta * s * state[3 * j + 1];
    }
    inf = inf < s ? inf : s;
    double rec = params.gamma * inf_i;
    rec = rec < inf_i ? rec : inf_i;
    out[3 * i] = s - inf;
    out[3 * i + 1] = (inf_i + inf) - rec;
    out[3 * i + 2] = state[3 * i + 2] + rec;
  }
  return out;
}

void Model::check_arguments(std::size_t state_size, ActionId action) const {
  if (state_size != dimension()) {
    throw InvalidInput("state has " + std::to_string(state_size) + " components, model expects " +
                       std::to_string(dimension()));
  }
  if (action.index() >= action_count()) {
    throw InvalidInput("action " + std::to_string(action.index()) + " outside action set of size " +
                       std::to_string(action_count()));
  }
}

StateVector Model::step(std::span<const double> state, ActionId action) const {
  StateVector out(dimension());
  step(state, action, out);
  return out;
}

void Model::step_batch(std::span<double> soa, std::size_t stride, std::size_t count,
                       ActionId action) const {
  const std::size_t n = dimension();
  if (count > stride || soa.size() < n * stride) {
    throw InvalidInput("batch storage too small");
  }
  StateVector in(n);
  StateVector out(n);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t d = 0; d < n; ++d) in[d] = soa[d * stride + p];
    step(in, action, out);
    for (std::size_t d = 0; d < n; ++d) soa[d * stride + p] = out[d];
  }
}

SirModel::SirModel(SirParams params) : params_(params) { params_.validate(); }

void SirModel::step(std::span<const double> state, ActionId action, std::span<double> out) const {
  check_arguments(state.size(), action);
  if (out.size() != 3) throw InvalidInput("output buffer must have 3 components");
  const double beta = params_.beta * transmission_scale(params_.lockdown_reduction, action);
  sir_update(beta, params_.gamma, state[0], state[1], state[2], out[0], out[1], out[2]);
}

void SirModel::step_batch(std::span<double> soa, std::size_t stride, std::size_t count,
                          ActionId action) const {
  check_arguments(3, action);
  if (count > stride || soa.size() < 3 * stride) throw InvalidInput("batch storage too small");
  const double beta = params_.beta * transmission_scale(params_.lockdown_reduction, action);
  simd::kernels().sir_step(soa.data(), soa.data() + stride, soa.data() + 2 * stride, count, beta,
                           params_.gamma);
}

StratifiedSirModel::StratifiedSirModel(StratifiedSirParams params) : params_(std::move(params)) {
  params_.validate();
}

void StratifiedSirModel::step(std::span<const double> state, ActionId action,
                              std::span<double> out) const {
  check_arguments(state.size(), action);
  if (out.size() != state.size()) throw InvalidInput("output buffer size mismatch");
  const StateVector next = stratified_step(state, params_, action);
  std::copy(next.begin(), next.end(), out.begin());
}

std::vector<StateVector> trajectory(const Model& model, std::span<const double> x0,
                                    std::span<const ActionId> actions) {
  std::vector<StateVector> out;
  out.reserve(actions.size() + 1);
  out.emplace_back(x0.begin(), x0.end());
  if (out.front().size() != model.dimension()) {
    throw InvalidInput("initial state does not match model dimension");
  }
  for (ActionId a : actions) out.push_back(model.step(out.back(), a));
  return out;
}

}  // namespace epidisc
