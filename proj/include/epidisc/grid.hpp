#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/types.hpp"

namespace epidisc {

/// Axis-aligned partition of [0,1]^n. Component d is split at the sorted
/// breakpoints G_d (first 0, last 1). Intervals are half-open [G_dj, G_dj+1)
/// except the last, which is closed at 1. Regions are numbered row-major with
/// component 0 most significant.
class Grid {
 public:
  explicit Grid(std::vector<std::vector<double>> breakpoints);

  /// One interval per component, G_d = [0, 1].
  static Grid trivial(std::size_t dimension);

  std::size_t dimension() const { return breakpoints_.size(); }
  std::span<const double> breakpoints(std::size_t d) const { return breakpoints_.at(d); }
  const std::vector<std::vector<double>>& all_breakpoints() const { return breakpoints_; }
  std::size_t intervals(std::size_t d) const { return breakpoints_.at(d).size() - 1; }

  /// |G| = sum of |G_d|.
  std::size_t breakpoint_count() const;
  std::uint64_t region_count() const { return region_count_; }

  /// Region containing x; every component must lie in [0, 1].
  RegionId region_of(std::span<const double> x) const;

  /// Region containing x with each component saturated into [0, 1]. Used
  /// for dynamics outputs, which may leave the unit cube when started from
  /// off-simplex centroids.
  RegionId locate(std::span<const double> x) const;
  std::size_t interval_of(std::size_t d, double value) const;

  std::vector<std::size_t> multi_index(RegionId region) const;
  RegionId flat_index(std::span<const std::size_t> index) const;

  std::pair<double, double> interval(std::size_t d, std::size_t j) const;
  void centroid(RegionId region, std::span<double> out) const;
  StateVector centroid(RegionId region) const;

  /// New grid with the midpoint of interval i of component d inserted.
  Grid cut(std::size_t d, std::size_t i) const;

  /// Largest interval half-width over all components.
  double max_half_width() const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.breakpoints_ == b.breakpoints_; }

 private:
  std::vector<std::vector<double>> breakpoints_;
  std::uint64_t region_count_ = 1;
};

/// Matrix of region centroids, row r = centroid(r).
class DiscretizedSpace {
 public:
  explicit DiscretizedSpace(const Grid& grid);

  std::size_t regions() const { return regions_; }
  std::size_t dimension() const { return dimension_; }
  std::span<const double> row(std::size_t region) const {
    return {centroids_.data() + region * dimension_, dimension_};
  }

 private:
  std::size_t regions_;
  std::size_t dimension_;
  std::vector<double> centroids_;
};

/// centroid(locate(x)) written to `out`.
void quantize(const Grid& grid, std::span<const double> x, std::span<double> out);

/// X̄_0 = centroid(region_of(x0)), X̄_t = centroid(locate(f(X̄_t-1, a_t-1))).
std::vector<StateVector> discretized_trajectory(const Model& model, const Grid& grid,
                                                std::span<const double> x0,
                                                std::span<const ActionId> actions);

/// Text form: one line per component, "<d> <G_d0> <G_d1> ..." at 17
/// significant digits.
void write_grid(std::ostream& out, const Grid& grid);
Grid read_grid(std::istream& in);

}  // namespace epidisc
