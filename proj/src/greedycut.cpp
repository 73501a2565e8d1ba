#include "epidisc/greedycut.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

#include "epidisc/error.hpp"
#include "epidisc/format.hpp"

namespace epidisc {

void InitialStateBounds::validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw InvalidInput("bounds need matching, non-empty lower and upper vectors");
  }
  const std::size_t g = group_size();
  if (lower.size() % g != 0) throw InvalidInput("bounds length is not a multiple of the group");
  for (std::size_t d = 0; d < lower.size(); ++d) {
    if (!(0.0 <= lower[d] && lower[d] <= upper[d] && upper[d] <= 1.0)) {
      throw InvalidInput("bounds for component " + std::to_string(d) +
                         " must satisfy 0 <= lower <= upper <= 1");
    }
  }
  for (std::size_t start = 0; start < lower.size(); start += g) {
    double lower_sum = 0.0;
    for (std::size_t d = start; d < start + g; ++d) lower_sum += lower[d];
    if (lower_sum > 1.0) throw InvalidInput("lower bounds sum above 1; no feasible state");
  }
}

SampleSet generate_samples(const InitialStateBounds& bounds, std::size_t horizon,
                           std::size_t count, std::size_t action_count, std::mt19937_64& rng) {
  bounds.validate();
  if (count == 0) throw InvalidInput("sample count must be >= 1");
  if (action_count == 0) throw InvalidInput("action set is empty");
  const std::size_t n = bounds.lower.size();
  std::uniform_int_distribution<unsigned> pick_action(0, static_cast<unsigned>(action_count - 1));
  SampleSet samples;
  samples.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Sample s;
    s.x0.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
      const double lo = bounds.lower[d];
      const double hi = bounds.upper[d];
      s.x0[d] = lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    const std::size_t g = bounds.group_size();
    for (std::size_t start = 0; start < n; start += g) {
      double total = 0.0;
      for (std::size_t d = start; d < start + g; ++d) total += s.x0[d];
      if (total > 1.0) {
        for (std::size_t d = start; d < start + g; ++d) s.x0[d] /= total;
      }
    }
    s.actions.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      s.actions.emplace_back(static_cast<std::uint8_t>(pick_action(rng)));
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

double trajectory_cost(std::span<const StateVector> truth, std::span<const StateVector> disc) {
  if (truth.size() != disc.size()) throw InvalidInput("trajectory lengths differ");
  if (truth.size() < 2) throw InvalidInput("trajectories need at least two points");
  double total = 0.0;
  for (std::size_t t = 1; t < truth.size(); ++t) {
    if (truth[t].size() != disc[t].size()) throw InvalidInput("state dimensions differ");
    for (std::size_t d = 0; d < truth[t].size(); ++d) {
      const double e = disc[t][d] - truth[t][d];
      total += e * e;
    }
  }
  return total;
}

GreedyCutResult greedy_cut(const Grid& initial, const Model& model, const SampleSet& samples,
                           const GreedyCutOptions& options, std::mt19937_64& rng) {
  if (samples.empty()) throw InvalidInput("greedy cut needs at least one sample");
  if (initial.dimension() != model.dimension()) {
    throw InvalidInput("grid and model dimensions differ");
  }
  if (options.budget < initial.breakpoint_count()) {
    throw InvalidInput("budget " + std::to_string(options.budget) +
                       " is smaller than the initial grid's " +
                       std::to_string(initial.breakpoint_count()) + " breakpoints");
  }
  const std::size_t n = initial.dimension();
  std::vector<bool> active(n, true);
  for (std::size_t d : options.frozen_components) {
    if (d >= n) throw InvalidInput("frozen component out of range");
    active[d] = false;
  }
  std::vector<std::size_t> active_components;
  for (std::size_t d = 0; d < n; ++d) {
    if (active[d]) active_components.push_back(d);
  }
  const std::size_t spend = options.budget - initial.breakpoint_count();
  if (spend > 0 && active_components.empty()) throw InvalidInput("every component is frozen");

  const TrajectoryCost cost = options.cost ? options.cost : TrajectoryCost(&trajectory_cost);

  GreedyCutResult result{initial, {}, spend / samples.size(), 0};
  result.dropped_rounds = spend - result.rounds_per_sample * samples.size();
  if (result.rounds_per_sample == 0) return result;

  Grid& grid = result.grid;
  std::size_t round = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Sample& sample = samples[k];
    if (sample.actions.empty()) throw InvalidInput("samples need a horizon of at least 1");
    const std::vector<StateVector> truth = trajectory(model, sample.x0, sample.actions);

    for (std::size_t it = 0; it < result.rounds_per_sample; ++it, ++round) {
      CutRecord record;
      record.round = round;
      record.sample = k;
      record.cost_before = cost(truth, discretized_trajectory(model, grid, sample.x0, sample.actions));

      double best = std::numeric_limits<double>::infinity();
      double worst = -std::numeric_limits<double>::infinity();
      std::size_t best_d = 0;
      std::size_t best_i = 0;
      bool any = false;
      for (std::size_t d : active_components) {
        for (std::size_t i = 0; i < grid.intervals(d); ++i) {
          const auto [lo, hi] = grid.interval(d, i);
          const double mid = (lo + hi) / 2;
          if (!(lo < mid && mid < hi)) continue;
          const Grid candidate = grid.cut(d, i);
          const double c =
              cost(truth, discretized_trajectory(model, candidate, sample.x0, sample.actions));
          if (c < best) {
            best = c;
            best_d = d;
            best_i = i;
          }
          worst = std::max(worst, c);
          any = true;
        }
      }
      if (!any) throw InvalidInput("no interval is wide enough to cut");

      if (best == worst) {
        std::uniform_int_distribution<std::size_t> pick_t(1, truth.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_d(0, active_components.size() - 1);
        const std::size_t t = pick_t(rng);
        const std::size_t d = active_components[pick_d(rng)];
        const std::size_t i = grid.interval_of(d, truth[t][d]);
        const auto [lo, hi] = grid.interval(d, i);
        const double mid = (lo + hi) / 2;
        // An unsplittable interval keeps the lowest-index cut instead.
        if (lo < mid && mid < hi) {
          best_d = d;
          best_i = i;
          record.tie = true;
        }
      }
      grid = grid.cut(best_d, best_i);
      record.component = best_d;
      record.interval = best_i;
      record.cost_after = record.tie
                              ? cost(truth, discretized_trajectory(model, grid, sample.x0,
                                                                   sample.actions))
                              : best;
      result.log.push_back(record);
    }
  }
  return result;
}

void write_cut_log(std::ostream& out, std::span<const CutRecord> log) {
  out << "round,sample,component,interval,cost_before,cost_after,tie\n";
  for (const CutRecord& r : log) {
    out << r.round << ',' << r.sample << ',' << r.component << ',' << r.interval << ','
        << format_double(r.cost_before) << ',' << format_double(r.cost_after) << ','
        << (r.tie ? 1 : 0) << '\n';
  }
}

}  // namespace epidisc
