#pragma once

// Small models with known behaviour, shared by the unit and acceptance tests.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "epidisc/dynamics.hpp"
#include "epidisc/grid.hpp"

namespace epidisc::testing {

/// f(x, a) = x.
class IdentityModel final : public Model {
 public:
  explicit IdentityModel(std::size_t n) : n_(n) {}
  std::size_t dimension() const override { return n_; }
  using Model::step;
  void step(std::span<const double> x, ActionId a, std::span<double> out) const override {
    check_arguments(x.size(), a);
    std::copy(x.begin(), x.end(), out.begin());
  }

 private:
  std::size_t n_;
};

/// One component, f(x, a) = x / 2 for both actions.
class HalvingModel final : public Model {
 public:
  std::size_t dimension() const override { return 1; }
  using Model::step;
  void step(std::span<const double> x, ActionId a, std::span<double> out) const override {
    check_arguments(x.size(), a);
    out[0] = x[0] / 2;
  }
};

/// Piecewise-constant dynamics aligned to a grid: every point of region r
/// moves to the centroid of target[a][r]. Discretizing with the same grid
/// is then lossless.
class RegionMapModel final : public Model {
 public:
  RegionMapModel(Grid grid, std::vector<std::vector<std::uint64_t>> target)
      : grid_(std::move(grid)), target_(std::move(target)) {}
  std::size_t dimension() const override { return grid_.dimension(); }
  std::size_t action_count() const override { return target_.size(); }
  using Model::step;
  void step(std::span<const double> x, ActionId a, std::span<double> out) const override {
    check_arguments(x.size(), a);
    const RegionId from = grid_.locate(x);
    grid_.centroid(RegionId{target_[a.index()][from.flat]}, out);
  }
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  std::vector<std::vector<std::uint64_t>> target_;
};

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("epidisc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace epidisc::testing
