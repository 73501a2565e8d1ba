#include "epidisc/grid.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "epidisc/error.hpp"
#include "epidisc/format.hpp"

namespace epidisc {

namespace {

void validate_component(std::size_t d, const std::vector<double>& g) {
  const std::string where = "component " + std::to_string(d) + ": ";
  if (g.size() < 2) throw InvalidInput(where + "needs at least two breakpoints");
  if (g.front() != 0.0 || g.back() != 1.0) throw InvalidInput(where + "must span [0, 1]");
  for (std::size_t j = 1; j < g.size(); ++j) {
    if (!(g[j - 1] < g[j])) throw InvalidInput(where + "breakpoints must be strictly increasing");
  }
}

}  // namespace

Grid::Grid(std::vector<std::vector<double>> breakpoints) : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.empty()) throw InvalidInput("grid needs at least one component");
  constexpr std::uint64_t kLimit = std::numeric_limits<std::uint64_t>::max() / 2;
  for (std::size_t d = 0; d < breakpoints_.size(); ++d) {
    validate_component(d, breakpoints_[d]);
    const std::uint64_t k = breakpoints_[d].size() - 1;
    if (region_count_ > kLimit / k) throw InvalidInput("region count overflows 64 bits");
    region_count_ *= k;
  }
}

Grid Grid::trivial(std::size_t dimension) {
  return Grid(std::vector<std::vector<double>>(dimension, std::vector<double>{0.0, 1.0}));
}

std::size_t Grid::breakpoint_count() const {
  std::size_t total = 0;
  for (const auto& g : breakpoints_) total += g.size();
  return total;
}

std::size_t Grid::interval_of(std::size_t d, double value) const {
  const auto& g = breakpoints_.at(d);
  const auto first = g.begin() + 1;
  const auto last = g.end() - 1;
  return static_cast<std::size_t>(
      std::partition_point(first, last, [value](double b) { return b <= value; }) - first);
}

RegionId Grid::region_of(std::span<const double> x) const {
  if (x.size() != dimension()) {
    throw InvalidInput("state has " + std::to_string(x.size()) + " components, grid has " +
                       std::to_string(dimension()));
  }
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (!(x[d] >= 0.0 && x[d] <= 1.0)) {
      throw InvalidInput("component " + std::to_string(d) + " = " + format_double(x[d]) +
                         " outside [0, 1]");
    }
  }
  return locate(x);
}

RegionId Grid::locate(std::span<const double> x) const {
  if (x.size() != dimension()) throw InvalidInput("state dimension does not match grid");
  std::uint64_t flat = 0;
  for (std::size_t d = 0; d < x.size(); ++d) flat = flat * intervals(d) + interval_of(d, x[d]);
  return RegionId{flat};
}

std::vector<std::size_t> Grid::multi_index(RegionId region) const {
  if (region.flat >= region_count_) throw InvalidInput("region index out of range");
  std::vector<std::size_t> index(dimension());
  std::uint64_t rest = region.flat;
  for (std::size_t d = dimension(); d-- > 0;) {
    index[d] = rest % intervals(d);
    rest /= intervals(d);
  }
  return index;
}

RegionId Grid::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != dimension()) throw InvalidInput("multi-index dimension mismatch");
  std::uint64_t flat = 0;
  for (std::size_t d = 0; d < index.size(); ++d) {
    if (index[d] >= intervals(d)) throw InvalidInput("multi-index out of range");
    flat = flat * intervals(d) + index[d];
  }
  return RegionId{flat};
}

std::pair<double, double> Grid::interval(std::size_t d, std::size_t j) const {
  const auto& g = breakpoints_.at(d);
  if (j + 1 >= g.size()) throw InvalidInput("interval index out of range");
  return {g[j], g[j + 1]};
}

void Grid::centroid(RegionId region, std::span<double> out) const {
  if (region.flat >= region_count_) throw InvalidInput("region index out of range");
  if (out.size() != dimension()) throw InvalidInput("centroid buffer dimension mismatch");
  std::uint64_t rest = region.flat;
  for (std::size_t d = dimension(); d-- > 0;) {
    const auto& g = breakpoints_[d];
    const std::size_t j = rest % (g.size() - 1);
    rest /= (g.size() - 1);
    out[d] = (g[j] + g[j + 1]) / 2;
  }
}

StateVector Grid::centroid(RegionId region) const {
  StateVector out(dimension());
  centroid(region, out);
  return out;
}

Grid Grid::cut(std::size_t d, std::size_t i) const {
  if (d >= dimension()) throw InvalidInput("cut component out of range");
  const auto& g = breakpoints_[d];
  if (i + 1 >= g.size()) throw InvalidInput("cut interval out of range");
  const double mid = (g[i] + g[i + 1]) / 2;
  if (!(g[i] < mid && mid < g[i + 1])) throw InvalidInput("interval too narrow to cut");
  std::vector<std::vector<double>> next = breakpoints_;
  next[d].insert(next[d].begin() + static_cast<std::ptrdiff_t>(i + 1), mid);
  return Grid(std::move(next));
}

double Grid::max_half_width() const {
  double widest = 0.0;
  for (const auto& g : breakpoints_) {
    for (std::size_t j = 1; j < g.size(); ++j) widest = std::max(widest, g[j] - g[j - 1]);
  }
  return widest / 2;
}

DiscretizedSpace::DiscretizedSpace(const Grid& grid)
    : regions_(grid.region_count()), dimension_(grid.dimension()) {
  centroids_.resize(regions_ * dimension_);
  for (std::size_t r = 0; r < regions_; ++r) {
    grid.centroid(RegionId{r}, {centroids_.data() + r * dimension_, dimension_});
  }
}

void quantize(const Grid& grid, std::span<const double> x, std::span<double> out) {
  grid.centroid(grid.locate(x), out);
}

std::vector<StateVector> discretized_trajectory(const Model& model, const Grid& grid,
                                                std::span<const double> x0,
                                                std::span<const ActionId> actions) {
  if (grid.dimension() != model.dimension()) {
    throw InvalidInput("grid and model dimensions differ");
  }
  std::vector<StateVector> out;
  out.reserve(actions.size() + 1);
  out.push_back(grid.centroid(grid.region_of(x0)));
  StateVector next(model.dimension());
  for (ActionId a : actions) {
    model.step(out.back(), a, next);
    out.push_back(grid.centroid(grid.locate(next)));
  }
  return out;
}

void write_grid(std::ostream& out, const Grid& grid) {
  for (std::size_t d = 0; d < grid.dimension(); ++d) {
    out << d;
    for (double b : grid.breakpoints(d)) out << ' ' << format_double(b);
    out << '\n';
  }
}

Grid read_grid(std::istream& in) {
  std::vector<std::vector<double>> breakpoints;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream tokens(line);
    std::string token;
    tokens >> token;
    std::size_t d = 0;
    try {
      d = parse_u64(token);
    } catch (const InvalidInput&) {
      throw InvalidInput("grid line " + std::to_string(line_no) + ": bad component index");
    }
    if (d != breakpoints.size()) {
      throw InvalidInput("grid line " + std::to_string(line_no) + ": components out of order");
    }
    std::vector<double> g;
    while (tokens >> token) g.push_back(parse_double(token));
    breakpoints.push_back(std::move(g));
  }
  return Grid(std::move(breakpoints));
}

}  // namespace epidisc
