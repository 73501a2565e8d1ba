#include <doctest.h>

#include <cmath>
#include <random>

#include "epidisc/dynamics.hpp"
#include "epidisc/error.hpp"

using namespace epidisc;

TEST_CASE("sir step from [0.9, 0.1, 0]") {
  const StateVector next = sir_step(std::vector<double>{0.9, 0.1, 0.0}, SirParams{}, kNoLockdown);
  CHECK(std::abs(next[0] - 0.774) <= 1e-12);
  CHECK(std::abs(next[1] - 0.177) <= 1e-12);
  CHECK(std::abs(next[2] - 0.049) <= 1e-12);
}

TEST_CASE("lockdown scales beta by 1 - rho") {
  SirParams p;
  p.lockdown_reduction = 0.8;
  const StateVector x{0.9, 0.1, 0.0};
  const StateVector next = sir_step(x, p, kLockdown);
  const double inf = 1.4 * 0.2 * 0.9 * 0.1;
  const double rec = 0.49 * 0.1;
  CHECK(std::abs(next[0] - (0.9 - inf)) <= 1e-15);
  CHECK(std::abs(next[1] - (0.1 + inf - rec)) <= 1e-15);
  CHECK(std::abs(next[2] - rec) <= 1e-15);

  p.lockdown_reduction = 0.0;
  CHECK(sir_step(x, p, kLockdown) == sir_step(x, p, kNoLockdown));
}

TEST_CASE("flows are clamped to the source compartment") {
  SirParams p;
  p.beta = 50.0;
  const StateVector next = sir_step(std::vector<double>{0.05, 0.9, 0.05}, p, kNoLockdown);
  CHECK(next[0] == 0.0);
  CHECK(next[1] >= 0.0);

  p.beta = 0.0;
  p.gamma = 1.0;
  const StateVector all_recover = sir_step(std::vector<double>{0.5, 0.3, 0.2}, p, kNoLockdown);
  CHECK(all_recover[1] == 0.0);
  CHECK(all_recover[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("mass is conserved and components stay non-negative") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SirModel model(SirParams{});
  for (int k = 0; k < 20000; ++k) {
    double s = u(rng), i = u(rng), r = u(rng);
    const double total = s + i + r;
    const StateVector x{s / total, i / total, r / total};
    for (ActionId a : {kNoLockdown, kLockdown}) {
      const StateVector y = model.step(x, a);
      CHECK(std::abs(y[0] + y[1] + y[2] - (x[0] + x[1] + x[2])) <= 1e-12);
      CHECK(y[0] >= 0.0);
      CHECK(y[1] >= 0.0);
      CHECK(y[2] >= 0.0);
    }
  }
}

TEST_CASE("invalid arguments are rejected") {
  CHECK_THROWS_AS(sir_step(std::vector<double>{0.5, 0.5}, SirParams{}, kNoLockdown), InvalidInput);
  CHECK_THROWS_AS(sir_step(std::vector<double>{0.5, 0.5, 0.0}, SirParams{}, ActionId{2}),
                  InvalidInput);
  SirParams bad;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(SirModel{bad}, InvalidInput);
  bad = SirParams{};
  bad.beta = -1.0;
  CHECK_THROWS_AS(SirModel{bad}, InvalidInput);
}

namespace {

StratifiedSirParams two_districts() {
  StratifiedSirParams p;
  p.districts = 2;
  p.beta_matrix = {1.0, 0.3, 0.25, 0.9};
  p.gamma = 0.49;
  p.lockdown_reduction = 0.8;
  p.district_weights = {0.6, 0.4};
  return p;
}

}  // namespace

TEST_CASE("stratified step with one district is the plain step") {
  StratifiedSirParams p;
  p.districts = 1;
  p.beta_matrix = {1.4};
  p.district_weights = {1.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int k = 0; k < 1000; ++k) {
    const StateVector x{u(rng), u(rng), u(rng)};
    for (ActionId a : {kNoLockdown, kLockdown}) {
      CHECK(stratified_step(x, p, a) == sir_step(x, SirParams{}, a));
    }
  }
}

TEST_CASE("stratified step couples districts through beta_ji") {
  const StratifiedSirParams p = two_districts();
  const StateVector x{0.9, 0.05, 0.05, 0.8, 0.1, 0.1};
  const StateVector y = stratified_step(x, p, kNoLockdown);
  // District i is infected by district j at rate beta_matrix[j*k + i].
  const double inf0 = 1.0 * 0.9 * 0.05 + 0.25 * 0.9 * 0.1;
  const double inf1 = 0.3 * 0.8 * 0.05 + 0.9 * 0.8 * 0.1;
  CHECK(y[0] == doctest::Approx(0.9 - inf0).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(0.05 + inf0 - 0.49 * 0.05).epsilon(1e-14));
  CHECK(y[2] == doctest::Approx(0.05 + 0.49 * 0.05).epsilon(1e-14));
  CHECK(y[3] == doctest::Approx(0.8 - inf1).epsilon(1e-14));
  CHECK(y[4] == doctest::Approx(0.1 + inf1 - 0.49 * 0.1).epsilon(1e-14));
  CHECK(y[5] == doctest::Approx(0.1 + 0.49 * 0.1).epsilon(1e-14));
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(std::abs(y[3 * d] + y[3 * d + 1] + y[3 * d + 2] -
                   (x[3 * d] + x[3 * d + 1] + x[3 * d + 2])) <= 1e-12);
  }
}

TEST_CASE("stratified parameters are validated") {
  StratifiedSirParams p = two_districts();
  p.district_weights = {0.6, 0.5};
  CHECK_THROWS_AS(StratifiedSirModel{p}, InvalidInput);
  p = two_districts();
  p.beta_matrix.pop_back();
  CHECK_THROWS_AS(StratifiedSirModel{p}, InvalidInput);
  CHECK_THROWS_AS(stratified_step(std::vector<double>{0.9, 0.1, 0.0}, two_districts(), kNoLockdown),
                  InvalidInput);
}

TEST_CASE("batch step matches single steps") {
  const SirModel sir(SirParams{});
  const StratifiedSirModel strat(two_districts());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const Model* model : {static_cast<const Model*>(&sir), static_cast<const Model*>(&strat)}) {
    const std::size_t n = model->dimension();
    const std::size_t count = 37;
    std::vector<double> soa(n * count);
    for (double& v : soa) v = u(rng);
    const std::vector<double> original = soa;
    model->step_batch(soa, count, count, kLockdown);
    for (std::size_t p = 0; p < count; ++p) {
      StateVector x(n);
      for (std::size_t d = 0; d < n; ++d) x[d] = original[d * count + p];
      const StateVector y = model->step(x, kLockdown);
      for (std::size_t d = 0; d < n; ++d) CHECK(soa[d * count + p] == y[d]);
    }
  }
}

TEST_CASE("trajectory starts at x0 and has N + 1 states") {
  const SirModel model(SirParams{});
  const StateVector x0{0.9, 0.1, 0.0};
  const ActionSequence actions{kNoLockdown, kLockdown, kNoLockdown};
  const auto traj = trajectory(model, x0, actions);
  REQUIRE(traj.size() == 4);
  CHECK(traj[0] == x0);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    CHECK(traj[t + 1] == model.step(traj[t], actions[t]));
  }
}
