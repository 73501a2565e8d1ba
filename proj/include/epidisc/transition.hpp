#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/grid.hpp"
#include "epidisc/types.hpp"

namespace epidisc {

/// Non-zero entries of one matrix row, sorted by destination.
struct TransitionRow {
  std::span<const std::uint32_t> destinations;
  std::span<const double> probabilities;
};

/// Compressed sparse row matrix of transition probabilities.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t columns, std::vector<std::uint64_t> offsets,
               std::vector<std::uint32_t> destinations, std::vector<double> probabilities);

  static SparseMatrix from_dense(std::size_t rows, std::size_t columns,
                                 std::span<const double> values);

  std::size_t rows() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t columns() const { return columns_; }
  std::size_t nonzeros() const { return destinations_.size(); }

  TransitionRow row(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;

  std::span<const std::uint64_t> offsets() const { return offsets_; }
  std::span<const std::uint32_t> destinations() const { return destinations_; }
  std::span<const double> probabilities() const { return probabilities_; }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t columns_ = 0;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> destinations_;
  std::vector<double> probabilities_;
};

/// Source of transition rows; implemented by the eager TransitionModel and
/// by the on-demand LazyTransitions cache.
class TransitionRows {
 public:
  virtual ~TransitionRows() = default;
  virtual std::size_t regions() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual TransitionRow row(ActionId action, std::size_t region) const = 0;
};

/// One row-stochastic regions x regions matrix per action.
class TransitionModel final : public TransitionRows {
 public:
  TransitionModel() = default;
  explicit TransitionModel(std::vector<SparseMatrix> per_action);

  std::size_t regions() const override;
  std::size_t action_count() const override { return matrices_.size(); }
  TransitionRow row(ActionId action, std::size_t region) const override;

  const SparseMatrix& matrix(ActionId action) const { return matrices_.at(action.index()); }
  const std::vector<SparseMatrix>& matrices() const { return matrices_; }

  /// Throws InvalidInput unless every row sums to 1 within `tolerance` and
  /// every entry lies in [0, 1].
  void check_stochastic(double tolerance = 1e-9) const;

  friend bool operator==(const TransitionModel& a, const TransitionModel& b) {
    return a.matrices_ == b.matrices_;
  }

 private:
  std::vector<SparseMatrix> matrices_;
};

/// Samples single rows. Row (action, region) draws c points in the region:
/// the centroid first, then c - 1 uniform over the region's box, each from
/// its own random stream derived from (seed, region, action). Rows are
/// therefore identical whether built eagerly, lazily or in parallel.
class RowSampler {
 public:
  RowSampler(const Model& model, const Grid& grid, std::size_t samples_per_region,
             std::uint64_t seed);

  struct Workspace {
    std::vector<double> points;
    std::vector<std::uint64_t> destinations;
    std::vector<double> lower;
    std::vector<double> width;
    std::vector<std::pair<std::uint64_t, std::size_t>> tally;
  };

  void sample(ActionId action, std::uint64_t region, Workspace& work,
              std::vector<std::uint32_t>& destinations, std::vector<double>& probabilities) const;

  const Grid& grid() const { return grid_; }
  const Model& model() const { return model_; }

 private:
  const Model& model_;
  const Grid& grid_;
  std::size_t samples_;
  std::uint64_t seed_;
};

TransitionModel build_transitions(const Model& model, const Grid& grid,
                                  std::size_t samples_per_region, std::uint64_t seed,
                                  std::size_t workers = 1);

/// Rows sampled on first access and cached. Matches build_transitions with
/// the same seed row for row; not thread-safe.
class LazyTransitions final : public TransitionRows {
 public:
  LazyTransitions(const Model& model, const Grid& grid, std::size_t samples_per_region,
                  std::uint64_t seed);

  std::size_t regions() const override { return regions_; }
  std::size_t action_count() const override { return sampler_.model().action_count(); }
  TransitionRow row(ActionId action, std::size_t region) const override;

  std::size_t cached_rows() const { return cache_.size(); }

 private:
  struct CachedRow {
    std::vector<std::uint32_t> destinations;
    std::vector<double> probabilities;
  };
  RowSampler sampler_;
  std::size_t regions_;
  mutable RowSampler::Workspace work_;
  mutable std::unordered_map<std::uint64_t, CachedRow> cache_;
};

/// b' = b^T P_a for a dense belief b.
std::vector<double> belief_step(std::span<const double> belief, const SparseMatrix& p);

/// Markovian trajectory X̃_t = b_t^T X̄ for t = 0..N, with b_0 = `belief`.
std::vector<StateVector> markov_trajectory(std::span<const double> belief,
                                           std::span<const ActionId> actions,
                                           const TransitionRows& rows, const Grid& grid);

/// Same with b_0 = e_region, propagating a sparse belief.
std::vector<StateVector> markov_trajectory(RegionId start, std::span<const ActionId> actions,
                                           const TransitionRows& rows, const Grid& grid);

/// CSV "action,src,dst,probability" at 17 significant digits.
void write_transitions_csv(std::ostream& out, const TransitionModel& model);
TransitionModel read_transitions_csv(std::istream& in, std::size_t regions,
                                     std::size_t action_count);

/// Little-endian binary image of the CSR arrays.
void write_transitions_binary(std::ostream& out, const TransitionModel& model);
TransitionModel read_transitions_binary(std::istream& in);

}  // namespace epidisc
