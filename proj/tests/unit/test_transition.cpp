#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "epidisc/error.hpp"
#include "epidisc/eval.hpp"
#include "epidisc/simd/kernels.hpp"
#include "epidisc/transition.hpp"
#include "support.hpp"

using namespace epidisc;

namespace {

double in_order_sum(const TransitionRow& row) {
  double total = 0.0;
  for (double p : row.probabilities) total += p;
  return total;
}

}  // namespace

TEST_CASE("identity dynamics give identity matrices") {
  const testing::IdentityModel id(3);
  for (const Grid& g : {Grid::trivial(3), uniform_grid(12, 3),
                        Grid({{0.0, 0.1, 0.7, 1.0}, {0.0, 0.5, 1.0}, {0.0, 1.0}})}) {
    for (std::size_t c : {1u, 2u, 50u}) {
      const TransitionModel p = build_transitions(id, g, c, 42);
      for (ActionId a : {kNoLockdown, kLockdown}) {
        const SparseMatrix& m = p.matrix(a);
        REQUIRE(m.rows() == g.region_count());
        CHECK(m.nonzeros() == g.region_count());
        for (std::size_t r = 0; r < m.rows(); ++r) CHECK(m.at(r, r) == 1.0);
      }
    }
  }
}

TEST_CASE("rows of a sampled SIR model sum to exactly one") {
  const SirModel model(SirParams{});
  const Grid g = uniform_grid(24, 3);
  const TransitionModel p = build_transitions(model, g, 333, 7);
  p.check_stochastic();
  for (ActionId a : {kNoLockdown, kLockdown}) {
    for (std::size_t r = 0; r < g.region_count(); ++r) {
      const TransitionRow row = p.row(a, r);
      CHECK(in_order_sum(row) == 1.0);
      CHECK(std::is_sorted(row.destinations.begin(), row.destinations.end()));
      for (double q : row.probabilities) CHECK((q > 0.0 && q <= 1.0));
    }
  }
}

TEST_CASE("halving map matches the preimage measure within 3 sigma") {
  const testing::HalvingModel half;
  const Grid g({{0.0, 0.1, 0.25, 0.3, 0.45, 0.6, 0.8, 1.0}});
  const std::size_t c = 10000;
  const TransitionModel p = build_transitions(half, g, c, 99);
  const auto bp = g.breakpoints(0);
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double a = bp[i];
    const double b = bp[i + 1];
    const double centroid_image = (a + b) / 4;
    for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
      // Share of [a, b) whose half lands in [g_j, g_j+1).
      const double lo = std::max(a, 2 * bp[j]);
      const double hi = std::min(b, 2 * bp[j + 1]);
      const double q = std::max(0.0, hi - lo) / (b - a);
      const double fixed = (bp[j] <= centroid_image && centroid_image < bp[j + 1]) ? 1.0 : 0.0;
      const double n = static_cast<double>(c - 1);
      const double expected = (fixed + n * q) / static_cast<double>(c);
      const double sigma = std::sqrt(n * q * (1.0 - q)) / static_cast<double>(c);
      const double got = p.matrix(kNoLockdown).at(i, j);
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(got - expected) <= 3 * sigma + 1e-12);
    }
  }
}

TEST_CASE("first sample of every row is the centroid") {
  const testing::HalvingModel half;
  const Grid g({{0.0, 0.2, 0.6, 1.0}});
  const TransitionModel p = build_transitions(half, g, 1, 5);
  // Centroids 0.1, 0.4, 0.8 map to 0.05, 0.2, 0.4.
  CHECK(p.matrix(kNoLockdown).at(0, 0) == 1.0);
  CHECK(p.matrix(kNoLockdown).at(1, 1) == 1.0);
  CHECK(p.matrix(kNoLockdown).at(2, 1) == 1.0);
}

TEST_CASE("rows do not depend on build order, laziness or worker count") {
  const SirModel model(SirParams{});
  const Grid g = uniform_grid(21, 3);
  const TransitionModel one = build_transitions(model, g, 200, 3, 1);
  const TransitionModel three = build_transitions(model, g, 200, 3, 3);
  CHECK(one == three);
  LazyTransitions lazy(model, g, 200, 3);
  for (std::size_t r = g.region_count(); r-- > 0;) {
    for (ActionId a : {kLockdown, kNoLockdown}) {
      const TransitionRow x = lazy.row(a, r);
      const TransitionRow y = one.row(a, r);
      CHECK(std::equal(x.destinations.begin(), x.destinations.end(), y.destinations.begin(),
                       y.destinations.end()));
      CHECK(std::equal(x.probabilities.begin(), x.probabilities.end(), y.probabilities.begin(),
                       y.probabilities.end()));
    }
  }
  CHECK(lazy.cached_rows() == 2 * g.region_count());
  CHECK_FALSE(build_transitions(model, g, 200, 4) == one);
}

TEST_CASE("scalar and avx2 kernels build identical matrices") {
  if (simd::avx2_kernels() == nullptr) {
    MESSAGE("AVX2 unavailable; skipped");
    return;
  }
  const SirModel model(SirParams{});
  const Grid g = uniform_grid(30, 3);
  simd::select_isa(simd::Isa::scalar);
  const TransitionModel scalar = build_transitions(model, g, 300, 17);
  simd::select_isa(simd::Isa::avx2);
  const TransitionModel vector = build_transitions(model, g, 300, 17);
  CHECK(scalar == vector);
}

TEST_CASE("serialisation round trips") {
  const SirModel model(SirParams{});
  const Grid g = uniform_grid(15, 3);
  const TransitionModel p = build_transitions(model, g, 77, 1);
  std::stringstream csv;
  write_transitions_csv(csv, p);
  CHECK(read_transitions_csv(csv, g.region_count(), 2) == p);
  std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
  write_transitions_binary(bin, p);
  CHECK(read_transitions_binary(bin) == p);

  std::istringstream garbage("not a matrix");
  CHECK_THROWS_AS(read_transitions_binary(garbage), InvalidInput);
}

TEST_CASE("sparse matrices are validated") {
  CHECK_THROWS_AS(SparseMatrix(2, {0, 1}, {5}, {1.0}), InvalidInput);
  CHECK_THROWS_AS(SparseMatrix(2, {0, 2}, {1, 0}, {0.5, 0.5}), InvalidInput);
  const SparseMatrix half = SparseMatrix::from_dense(1, 2, std::vector<double>{0.5, 0.4});
  CHECK_THROWS_AS(TransitionModel({half, half}).check_stochastic(), InvalidInput);
}

TEST_CASE("belief step is a vector-matrix product") {
  const std::vector<double> dense{0.5, 0.5, 0.0,  //
                                  0.0, 0.2, 0.8,  //
                                  0.1, 0.0, 0.9};
  const SparseMatrix m = SparseMatrix::from_dense(3, 3, dense);
  const std::vector<double> b{0.2, 0.3, 0.5};
  const std::vector<double> next = belief_step(b, m);
  for (std::size_t j = 0; j < 3; ++j) {
    double expected = 0.0;
    for (std::size_t i = 0; i < 3; ++i) expected += b[i] * dense[i * 3 + j];
    CHECK(next[j] == doctest::Approx(expected).epsilon(1e-15));
  }
  CHECK_THROWS_AS(belief_step(std::vector<double>{0.5, 0.2, 0.2}, m), InvalidInput);
}

TEST_CASE("markov trajectory matches a simulated chain") {
  const SirModel model(SirParams{});
  const Grid g = uniform_grid(18, 3);
  const TransitionModel p = build_transitions(model, g, 100, 8);
  const StateVector x0{0.85, 0.05, 0.1};
  const ActionSequence actions{kNoLockdown, kLockdown, kNoLockdown, kNoLockdown, kLockdown};
  const RegionId start = g.region_of(x0);
  const auto markov = markov_trajectory(start, actions, p, g);
  REQUIRE(markov.size() == actions.size() + 1);
  CHECK(markov[0] == g.centroid(start));

  std::vector<double> b0(g.region_count(), 0.0);
  b0[start.flat] = 1.0;
  const auto dense = markov_trajectory(b0, actions, p, g);
  for (std::size_t t = 0; t < dense.size(); ++t) {
    for (std::size_t d = 0; d < 3; ++d) CHECK(dense[t][d] == doctest::Approx(markov[t][d]).epsilon(1e-13));
  }

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t paths = 20000;
  std::vector<StateVector> sum(actions.size() + 1, StateVector(3, 0.0));
  std::vector<StateVector> sum_sq = sum;
  for (std::size_t k = 0; k < paths; ++k) {
    std::uint64_t r = start.flat;
    for (std::size_t t = 0; t <= actions.size(); ++t) {
      const StateVector c = g.centroid(RegionId{r});
      for (std::size_t d = 0; d < 3; ++d) {
        sum[t][d] += c[d];
        sum_sq[t][d] += c[d] * c[d];
      }
      if (t == actions.size()) break;
      const TransitionRow row = p.row(actions[t], r);
      double draw = u(rng);
      std::size_t e = 0;
      while (e + 1 < row.probabilities.size() && draw >= row.probabilities[e]) {
        draw -= row.probabilities[e];
        ++e;
      }
      r = row.destinations[e];
    }
  }
  const double m = static_cast<double>(paths);
  for (std::size_t t = 0; t <= actions.size(); ++t) {
    for (std::size_t d = 0; d < 3; ++d) {
      const double mean = sum[t][d] / m;
      const double var = std::max(0.0, sum_sq[t][d] / m - mean * mean);
      CHECK(std::abs(mean - markov[t][d]) <= 4 * std::sqrt(var / m) + 1e-12);
    }
  }
}
