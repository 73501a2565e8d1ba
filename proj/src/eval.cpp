#include "epidisc/eval.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "epidisc/error.hpp"
#include "epidisc/format.hpp"
#include "epidisc/parallel.hpp"

namespace epidisc {

Grid uniform_grid(std::size_t budget, std::size_t dimension, std::span<const std::size_t> frozen) {
  if (dimension == 0) throw InvalidInput("dimension must be >= 1");
  if (budget < 2 * dimension) {
    throw InvalidInput("budget " + std::to_string(budget) + " below the minimum " +
                       std::to_string(2 * dimension));
  }
  std::vector<bool> is_frozen(dimension, false);
  for (std::size_t d : frozen) {
    if (d >= dimension) throw InvalidInput("frozen component out of range");
    is_frozen[d] = true;
  }
  std::size_t active = 0;
  for (bool f : is_frozen) active += f ? 0 : 1;
  if (active == 0) throw InvalidInput("every component is frozen");
  const std::size_t spend = budget - 2 * (dimension - active);
  const std::size_t each = spend / active;
  std::size_t remainder = spend - each * active;

  std::vector<std::vector<double>> breakpoints(dimension);
  for (std::size_t d = 0; d < dimension; ++d) {
    std::size_t k = 2;
    if (!is_frozen[d]) {
      k = each;
      if (remainder > 0) {
        ++k;
        --remainder;
      }
    }
    breakpoints[d].resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      breakpoints[d][j] = static_cast<double>(j) / static_cast<double>(k - 1);
    }
  }
  return Grid(std::move(breakpoints));
}

std::vector<StateVector> evaluation_states_sir() {
  std::vector<StateVector> states;
  states.reserve(300);
  for (int si = 70; si <= 99; ++si) {
    for (int ii = 1; ii <= 10; ++ii) {
      double s = si / 100.0;
      double i = ii / 1000.0;
      double r = 1.0 - s - i;
      if (s + i > 1.0) {
        const double total = s + i;
        s /= total;
        i /= total;
        r = 0.0;
      }
      states.push_back({s, i, r});
    }
  }
  return states;
}

namespace {

void check_tables(const SolveResult& solution, const OracleTable& oracle, const Grid& grid,
                  std::span<const StateVector> states) {
  if (oracle.states() != states.size()) throw InvalidInput("oracle table and states differ");
  if (oracle.horizon() != solution.horizon()) throw InvalidInput("horizons differ");
  if (solution.regions() != grid.region_count()) throw InvalidInput("solution and grid differ");
  if (states.empty()) throw InvalidInput("no evaluation states");
}

}  // namespace

double compute_acc(const SolveResult& solution, const OracleTable& oracle, const Grid& grid,
                   std::span<const StateVector> states) {
  check_tables(solution, oracle, grid, states);
  std::size_t mismatches = 0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const std::size_t region = grid.region_of(states[s]).flat;
    for (std::size_t t = 0; t < solution.horizon(); ++t) {
      if (solution.action(t, region) != oracle.action(s, t)) ++mismatches;
    }
  }
  const double pairs = static_cast<double>(states.size() * solution.horizon());
  return 1.0 - static_cast<double>(mismatches) / pairs;
}

ValueMetrics compute_value_metrics(const SolveResult& solution, const OracleTable& oracle,
                                   const Grid& grid, std::span<const StateVector> states) {
  check_tables(solution, oracle, grid, states);
  ValueMetrics m;
  double squared = 0.0;
  double relative = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const double approx = solution.value(0, grid.region_of(states[s]).flat);
    const double truth = oracle.value(s, 0);
    const double diff = approx - truth;
    squared += diff * diff;
    if (truth > 0.0) {
      relative += std::abs(diff) / truth;
    } else {
      ++m.excluded;
    }
  }
  m.mse = squared / static_cast<double>(states.size());
  const std::size_t used = states.size() - m.excluded;
  m.e2 = used > 0 ? relative / static_cast<double>(used) : 0.0;
  return m;
}

OptGap compute_opt_gap(const SolveResult& solution, const OracleTable& oracle,
                       const Model& model, const Grid& grid, const RewardModel& reward,
                       double discount, std::span<const StateVector> states,
                       std::size_t workers) {
  check_tables(solution, oracle, grid, states);
  OptGap out;
  out.policy_values.resize(states.size());
  out.gaps.resize(states.size());
  parallel_for(workers, states.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      out.policy_values[s] =
          evaluate_policy_on_truth(solution, model, grid, reward, discount, states[s]).value;
    }
  });
  double total = 0.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const double truth = oracle.value(s, 0);
    if (truth > 0.0) {
      out.gaps[s] = std::abs(out.policy_values[s] - truth) / truth;
      total += out.gaps[s];
    } else {
      out.gaps[s] = 0.0;
      ++out.excluded;
    }
  }
  const std::size_t used = states.size() - out.excluded;
  out.mean = used > 0 ? total / static_cast<double>(used) : 0.0;
  return out;
}

Estimate mean_with_interval(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("no values to summarise");
  const double m = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / m;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
  const double half = 1.96 * sd / std::sqrt(m);
  return {mean, mean - half, mean + half};
}

namespace {

double squared_distance_sum(std::span<const StateVector> a, std::span<const StateVector> b) {
  double total = 0.0;
  for (std::size_t t = 1; t < a.size(); ++t) {
    for (std::size_t d = 0; d < a[t].size(); ++d) {
      const double e = a[t][d] - b[t][d];
      total += e * e;
    }
  }
  return total;
}

}  // namespace

FidelityResult trajectory_fidelity(const TransitionRows& transitions, const Grid& grid,
                                   const SampleSet& samples, const Model& model) {
  if (samples.empty()) throw InvalidInput("no fidelity samples");
  std::vector<double> vs_disc;
  std::vector<double> vs_true;
  vs_disc.reserve(samples.size());
  vs_true.reserve(samples.size());
  for (const Sample& sample : samples) {
    const auto truth = trajectory(model, sample.x0, sample.actions);
    const auto disc = discretized_trajectory(model, grid, sample.x0, sample.actions);
    const auto markov =
        markov_trajectory(grid.region_of(sample.x0), sample.actions, transitions, grid);
    vs_disc.push_back(squared_distance_sum(markov, disc));
    vs_true.push_back(squared_distance_sum(markov, truth));
  }
  return {mean_with_interval(vs_disc), mean_with_interval(vs_true)};
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "method,budget,seed,acc,mse,e2,opt_gap,markov_vs_disc,markov_vs_disc_lo,"
         "markov_vs_disc_hi,markov_vs_true,markov_vs_true_lo,markov_vs_true_hi\n";
  for (const MetricsRow& r : rows) {
    const auto& f = r.fidelity;
    out << r.method << ',' << r.budget << ',' << r.seed << ',' << format_double(r.acc) << ','
        << format_double(r.mse) << ',' << format_double(r.e2) << ',' << format_double(r.opt_gap)
        << ',' << format_double(f.markov_vs_disc.mean) << ','
        << format_double(f.markov_vs_disc.lower) << ',' << format_double(f.markov_vs_disc.upper)
        << ',' << format_double(f.markov_vs_true.mean) << ','
        << format_double(f.markov_vs_true.lower) << ',' << format_double(f.markov_vs_true.upper)
        << '\n';
  }
}

}  // namespace epidisc
