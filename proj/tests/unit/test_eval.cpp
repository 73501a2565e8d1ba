#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "epidisc/error.hpp"
#include "epidisc/eval.hpp"
#include "support.hpp"

using namespace epidisc;

namespace {

std::size_t breakpoint_count(const Grid& g, std::size_t d) { return g.breakpoints(d).size(); }

std::vector<double> points(const Grid& g, std::size_t d) {
  const auto bp = g.breakpoints(d);
  return {bp.begin(), bp.end()};
}

struct SmallCase {
  SirModel model{SirParams{}};
  RewardModel reward = RewardModel::sir(0.03);
  Grid grid = uniform_grid(24, 3);
  TransitionModel p = build_transitions(model, grid, 40, 3);
  SolveResult sol = backward_induction(p, grid, reward, 1.0, 6);
  std::vector<StateVector> states;
  OracleTable oracle{0, 6};

  SmallCase() {
    const auto all = evaluation_states_sir();
    for (std::size_t s = 0; s < all.size(); s += 23) states.push_back(all[s]);
    oracle = oracle_action_table(states, model, reward, 1.0, 6);
  }
};

}  // namespace

TEST_CASE("uniform grid splits the budget evenly") {
  Grid g = uniform_grid(9, 3);
  for (std::size_t d = 0; d < 3; ++d) CHECK(points(g, d) == std::vector<double>{0.0, 0.5, 1.0});
  g = uniform_grid(10, 3);
  CHECK(breakpoint_count(g, 0) == 4);
  CHECK(breakpoint_count(g, 1) == 3);
  CHECK(breakpoint_count(g, 2) == 3);
  CHECK(g.breakpoint_count() == 10);
  const std::vector<std::size_t> frozen{2};
  g = uniform_grid(10, 3, frozen);
  CHECK(breakpoint_count(g, 0) == 4);
  CHECK(breakpoint_count(g, 1) == 4);
  CHECK(points(g, 2) == std::vector<double>{0.0, 1.0});
  CHECK(uniform_grid(6, 3).region_count() == 1);
  CHECK_THROWS_AS(uniform_grid(5, 3), InvalidInput);
  const std::vector<std::size_t> all{0, 1, 2};
  CHECK_THROWS_AS(uniform_grid(12, 3, all), InvalidInput);
}

TEST_CASE("evaluation states") {
  const auto states = evaluation_states_sir();
  REQUIRE(states.size() == 300);
  CHECK(states.front() == StateVector{0.70, 0.001, 1.0 - 0.70 - 0.001});
  CHECK(states.back()[0] == 0.99);
  CHECK(states.back()[1] == 0.010);
  for (const auto& x : states) {
    CHECK(x[0] + x[1] + x[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[2] >= 0.0);
  }
}

TEST_CASE("accuracy counts agreement with the oracle") {
  const SmallCase k;
  OracleTable agree = k.oracle;
  OracleTable disagree = k.oracle;
  for (std::size_t s = 0; s < k.states.size(); ++s) {
    const std::size_t r = k.grid.region_of(k.states[s]).flat;
    for (std::size_t t = 0; t < 6; ++t) {
      agree.action(s, t) = k.sol.action(t, r);
      disagree.action(s, t) = ActionId(static_cast<std::uint8_t>(1 - k.sol.action(t, r).value));
    }
  }
  CHECK(compute_acc(k.sol, agree, k.grid, k.states) == 1.0);
  CHECK(compute_acc(k.sol, disagree, k.grid, k.states) == 0.0);
  disagree.action(0, 0) = agree.action(0, 0);
  CHECK(compute_acc(k.sol, disagree, k.grid, k.states) ==
        doctest::Approx(1.0 / static_cast<double>(6 * k.states.size())));
}

TEST_CASE("constant value offset gives delta squared") {
  const SmallCase k;
  OracleTable shifted = k.oracle;
  const double delta = 0.01;
  double rel = 0.0;
  for (std::size_t s = 0; s < k.states.size(); ++s) {
    const double v = k.sol.value(0, k.grid.region_of(k.states[s]).flat);
    shifted.value(s, 0) = v - delta;
    rel += delta / (v - delta);
  }
  const ValueMetrics m = compute_value_metrics(k.sol, shifted, k.grid, k.states);
  CHECK(m.mse == doctest::Approx(delta * delta).epsilon(1e-9));
  CHECK(m.e2 == doctest::Approx(rel / static_cast<double>(k.states.size())).epsilon(1e-12));
  CHECK(m.excluded == 0);
}

TEST_CASE("optimality gap is never negative") {
  const SmallCase k;
  const OptGap gap = compute_opt_gap(k.sol, k.oracle, k.model, k.grid, k.reward, 1.0, k.states);
  REQUIRE(gap.gaps.size() == k.states.size());
  for (std::size_t s = 0; s < k.states.size(); ++s) {
    CHECK(gap.policy_values[s] >= k.oracle.value(s, 0));
    CHECK(gap.gaps[s] >= 0.0);
  }
  CHECK(gap.mean == doctest::Approx(std::accumulate(gap.gaps.begin(), gap.gaps.end(), 0.0) /
                                    static_cast<double>(gap.gaps.size())));
  const OptGap threaded =
      compute_opt_gap(k.sol, k.oracle, k.model, k.grid, k.reward, 1.0, k.states, 3);
  CHECK(threaded.gaps == gap.gaps);
}

TEST_CASE("metrics do not depend on state order") {
  const SmallCase k;
  std::vector<std::size_t> order(k.states.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(4);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<StateVector> states;
  OracleTable oracle(k.states.size(), 6);
  for (std::size_t s = 0; s < order.size(); ++s) {
    states.push_back(k.states[order[s]]);
    for (std::size_t t = 0; t < 6; ++t) {
      oracle.action(s, t) = k.oracle.action(order[s], t);
      oracle.value(s, t) = k.oracle.value(order[s], t);
    }
  }
  CHECK(compute_acc(k.sol, oracle, k.grid, states) ==
        compute_acc(k.sol, k.oracle, k.grid, k.states));
  const ValueMetrics a = compute_value_metrics(k.sol, oracle, k.grid, states);
  const ValueMetrics b = compute_value_metrics(k.sol, k.oracle, k.grid, k.states);
  CHECK(a.mse == doctest::Approx(b.mse).epsilon(1e-13));
  CHECK(a.e2 == doctest::Approx(b.e2).epsilon(1e-13));
}

TEST_CASE("lossless discretization has zero trajectory error") {
  const Grid g({{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}});
  const testing::RegionMapModel model(g, {{3, 1, 3, 1}, {2, 0, 2, 2}});
  const TransitionModel p = build_transitions(model, g, 10, 1);
  SampleSet samples;
  std::mt19937_64 rng(2);
  for (std::size_t r = 0; r < 4; ++r) {
    ActionSequence actions(5);
    for (auto& a : actions) a = ActionId(static_cast<std::uint8_t>(rng() & 1));
    samples.push_back({g.centroid(RegionId{r}), actions});
  }
  const FidelityResult f = trajectory_fidelity(p, g, samples, model);
  CHECK(f.markov_vs_disc.mean == 0.0);
  CHECK(f.markov_vs_true.mean == 0.0);
  CHECK(f.markov_vs_true.upper == 0.0);
}

TEST_CASE("normal interval") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Estimate e = mean_with_interval(v);
  CHECK(e.mean == 2.5);
  const double half = 1.96 * std::sqrt(5.0 / 3.0) / 2.0;
  CHECK(e.lower == doctest::Approx(2.5 - half).epsilon(1e-14));
  CHECK(e.upper == doctest::Approx(2.5 + half).epsilon(1e-14));
  const std::vector<double> one{7.0};
  CHECK(mean_with_interval(one).lower == 7.0);
}

TEST_CASE("metrics csv layout") {
  MetricsRow row;
  row.method = "uniform";
  row.budget = 90;
  row.seed = 3;
  std::ostringstream out;
  write_metrics_csv(out, std::span<const MetricsRow>(&row, 1));
  std::istringstream in(out.str());
  std::string header;
  std::string line;
  std::getline(in, header);
  std::getline(in, line);
  CHECK(header ==
        "method,budget,seed,acc,mse,e2,opt_gap,markov_vs_disc,markov_vs_disc_lo,"
        "markov_vs_disc_hi,markov_vs_true,markov_vs_true_lo,markov_vs_true_hi");
  CHECK(line.rfind("uniform,90,3,", 0) == 0);
  CHECK(std::count(line.begin(), line.end(), ',') == 12);
}
