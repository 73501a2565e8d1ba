#include "epidisc/transition.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include "epidisc/error.hpp"
#include "epidisc/format.hpp"
#include "epidisc/parallel.hpp"
#include "epidisc/seed.hpp"
#include "epidisc/simd/kernels.hpp"

namespace epidisc {

SparseMatrix::SparseMatrix(std::size_t columns, std::vector<std::uint64_t> offsets,
                           std::vector<std::uint32_t> destinations,
                           std::vector<double> probabilities)
    : columns_(columns),
      offsets_(std::move(offsets)),
      destinations_(std::move(destinations)),
      probabilities_(std::move(probabilities)) {
  if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != destinations_.size() ||
      destinations_.size() != probabilities_.size()) {
    throw InvalidInput("malformed sparse matrix arrays");
  }
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
    if (offsets_[i] > offsets_[i + 1]) throw InvalidInput("row offsets must be non-decreasing");
    for (std::uint64_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (destinations_[k] >= columns_) throw InvalidInput("column index out of range");
      if (k > offsets_[i] && destinations_[k - 1] >= destinations_[k]) {
        throw InvalidInput("row entries must be sorted by column");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t columns,
                                      std::span<const double> values) {
  if (values.size() != rows * columns) throw InvalidInput("dense matrix size mismatch");
  std::vector<std::uint64_t> offsets{0};
  std::vector<std::uint32_t> destinations;
  std::vector<double> probabilities;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns; ++j) {
      const double v = values[i * columns + j];
      if (v != 0.0) {
        destinations.push_back(static_cast<std::uint32_t>(j));
        probabilities.push_back(v);
      }
    }
    offsets.push_back(destinations.size());
  }
  return SparseMatrix(columns, std::move(offsets), std::move(destinations),
                      std::move(probabilities));
}

TransitionRow SparseMatrix::row(std::size_t i) const {
  if (i >= rows()) throw InvalidInput("row index out of range");
  const std::size_t begin = offsets_[i];
  const std::size_t count = offsets_[i + 1] - begin;
  return {{destinations_.data() + begin, count}, {probabilities_.data() + begin, count}};
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const TransitionRow r = row(i);
  const auto it = std::lower_bound(r.destinations.begin(), r.destinations.end(), j);
  if (it == r.destinations.end() || *it != j) return 0.0;
  return r.probabilities[static_cast<std::size_t>(it - r.destinations.begin())];
}

TransitionModel::TransitionModel(std::vector<SparseMatrix> per_action)
    : matrices_(std::move(per_action)) {
  if (matrices_.empty()) throw InvalidInput("transition model needs at least one action");
  for (const SparseMatrix& m : matrices_) {
    if (m.rows() != m.columns() || m.rows() != matrices_.front().rows()) {
      throw InvalidInput("transition matrices must be square and share one region count");
    }
  }
}

std::size_t TransitionModel::regions() const {
  return matrices_.empty() ? 0 : matrices_.front().rows();
}

TransitionRow TransitionModel::row(ActionId action, std::size_t region) const {
  if (action.index() >= matrices_.size()) throw InvalidInput("action out of range");
  return matrices_[action.index()].row(region);
}

void TransitionModel::check_stochastic(double tolerance) const {
  for (std::size_t a = 0; a < matrices_.size(); ++a) {
    const SparseMatrix& m = matrices_[a];
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const TransitionRow r = m.row(i);
      double total = 0.0;
      for (double p : r.probabilities) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("transition probability outside [0, 1]");
        total += p;
      }
      if (!(std::abs(total - 1.0) <= tolerance)) {
        throw InvalidInput("row " + std::to_string(i) + " of action " + std::to_string(a) +
                           " sums to " + format_double(total));
      }
    }
  }
}

RowSampler::RowSampler(const Model& model, const Grid& grid, std::size_t samples_per_region,
                       std::uint64_t seed)
    : model_(model), grid_(grid), samples_(samples_per_region), seed_(seed) {
  if (samples_per_region < 1) throw InvalidInput("samples per region must be >= 1");
  if (grid.dimension() != model.dimension()) {
    throw InvalidInput("grid and model dimensions differ");
  }
  if (grid.region_count() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidInput("too many regions for 32-bit transition indices");
  }
}

void RowSampler::sample(ActionId action, std::uint64_t region, Workspace& work,
                        std::vector<std::uint32_t>& destinations,
                        std::vector<double>& probabilities) const {
  const std::size_t n = grid_.dimension();
  const std::size_t c = samples_;
  work.points.resize(n * c);
  work.destinations.assign(c, 0);

  const std::vector<std::size_t> index = grid_.multi_index(RegionId{region});
  std::mt19937_64 rng(derive_seed(seed_, region * model_.action_count() + action.index()));
  work.lower.resize(n);
  work.width.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    const auto [lo, hi] = grid_.interval(d, index[d]);
    work.lower[d] = lo;
    work.width[d] = hi - lo;
    work.points[d * c] = (lo + hi) / 2;
  }
  for (std::size_t p = 1; p < c; ++p) {
    for (std::size_t d = 0; d < n; ++d) {
      // Top 53 bits as a uniform double in [0, 1).
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      work.points[d * c + p] = work.lower[d] + work.width[d] * u;
    }
  }

  model_.step_batch(work.points, c, c, action);

  const simd::KernelTable& k = simd::kernels();
  for (std::size_t d = 0; d < n; ++d) {
    const auto g = grid_.breakpoints(d);
    k.locate_accumulate(work.points.data() + d * c, c, g.data(), g.size(),
                        work.destinations.data());
  }

  // Rows touch few regions, so tally distinct destinations before sorting.
  auto& tally = work.tally;
  tally.clear();
  std::size_t last = 0;
  for (std::size_t p = 0; p < c; ++p) {
    const std::uint64_t dst = work.destinations[p];
    if (!tally.empty() && tally[last].first == dst) {
      ++tally[last].second;
      continue;
    }
    std::size_t j = 0;
    while (j < tally.size() && tally[j].first != dst) ++j;
    if (j == tally.size()) tally.emplace_back(dst, 0);
    ++tally[j].second;
    last = j;
  }
  std::sort(tally.begin(), tally.end());

  const double inv = static_cast<double>(c);
  double assigned = 0.0;
  for (std::size_t j = 0; j < tally.size(); ++j) {
    destinations.push_back(static_cast<std::uint32_t>(tally[j].first));
    if (j + 1 == tally.size()) {
      // Closing the row with the complement makes the in-order row sum exactly 1.
      probabilities.push_back(1.0 - assigned);
    } else {
      const double prob = static_cast<double>(tally[j].second) / inv;
      probabilities.push_back(prob);
      assigned += prob;
    }
  }
}

TransitionModel build_transitions(const Model& model, const Grid& grid,
                                  std::size_t samples_per_region, std::uint64_t seed,
                                  std::size_t workers) {
  const RowSampler sampler(model, grid, samples_per_region, seed);
  const std::size_t regions = grid.region_count();
  const std::size_t actions = model.action_count();
  workers = std::max<std::size_t>(1, workers);

  std::vector<SparseMatrix> matrices;
  matrices.reserve(actions);
  for (std::size_t a = 0; a < actions; ++a) {
    const ActionId action{static_cast<std::uint8_t>(a)};
    const std::size_t chunks = std::min(workers, std::max<std::size_t>(regions, 1));
    const std::size_t chunk = (regions + chunks - 1) / chunks;
    struct Piece {
      std::vector<std::uint64_t> lengths;
      std::vector<std::uint32_t> destinations;
      std::vector<double> probabilities;
    };
    std::vector<Piece> pieces(chunks);
    parallel_for(chunks, chunks, [&](std::size_t first, std::size_t last) {
      RowSampler::Workspace work;
      for (std::size_t w = first; w < last; ++w) {
        Piece& piece = pieces[w];
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(regions, begin + chunk);
        for (std::size_t r = begin; r < end; ++r) {
          const std::size_t before = piece.destinations.size();
          sampler.sample(action, r, work, piece.destinations, piece.probabilities);
          piece.lengths.push_back(piece.destinations.size() - before);
        }
      }
    });
    std::vector<std::uint64_t> offsets{0};
    offsets.reserve(regions + 1);
    std::vector<std::uint32_t> destinations;
    std::vector<double> probabilities;
    for (Piece& piece : pieces) {
      for (std::uint64_t len : piece.lengths) offsets.push_back(offsets.back() + len);
      destinations.insert(destinations.end(), piece.destinations.begin(),
                          piece.destinations.end());
      probabilities.insert(probabilities.end(), piece.probabilities.begin(),
                           piece.probabilities.end());
      piece = Piece{};
    }
    matrices.emplace_back(regions, std::move(offsets), std::move(destinations),
                          std::move(probabilities));
  }
  return TransitionModel(std::move(matrices));
}

LazyTransitions::LazyTransitions(const Model& model, const Grid& grid,
                                 std::size_t samples_per_region, std::uint64_t seed)
    : sampler_(model, grid, samples_per_region, seed), regions_(grid.region_count()) {}

TransitionRow LazyTransitions::row(ActionId action, std::size_t region) const {
  if (action.index() >= action_count()) throw InvalidInput("action out of range");
  if (region >= regions_) throw InvalidInput("region out of range");
  const std::uint64_t key = static_cast<std::uint64_t>(region) * action_count() + action.index();
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    CachedRow fresh;
    sampler_.sample(action, region, work_, fresh.destinations, fresh.probabilities);
    it = cache_.emplace(key, std::move(fresh)).first;
  }
  return {it->second.destinations, it->second.probabilities};
}

std::vector<double> belief_step(std::span<const double> belief, const SparseMatrix& p) {
  if (belief.size() != p.rows()) {
    throw InvalidInput("belief has " + std::to_string(belief.size()) + " entries, matrix has " +
                       std::to_string(p.rows()) + " rows");
  }
  double total = 0.0;
  for (double b : belief) total += b;
  if (!(std::abs(total - 1.0) <= 1e-9)) throw InvalidInput("belief must sum to 1");
  std::vector<double> next(p.columns(), 0.0);
  for (std::size_t i = 0; i < belief.size(); ++i) {
    if (belief[i] == 0.0) continue;
    const TransitionRow r = p.row(i);
    for (std::size_t k = 0; k < r.destinations.size(); ++k) {
      next[r.destinations[k]] += belief[i] * r.probabilities[k];
    }
  }
  return next;
}

namespace {

// Sparse belief propagation over a dense scratch accumulator. Entries are
// kept sorted by region so sums are formed in a fixed order.
class SparseBelief {
 public:
  explicit SparseBelief(std::size_t regions) : scratch_(regions, 0.0), seen_(regions, 0) {}

  void reset(std::vector<std::pair<std::uint32_t, double>> entries) { entries_ = std::move(entries); }

  void advance(const TransitionRows& rows, ActionId action) {
    touched_.clear();
    for (const auto& [region, mass] : entries_) {
      const TransitionRow r = rows.row(action, region);
      for (std::size_t k = 0; k < r.destinations.size(); ++k) {
        const std::uint32_t j = r.destinations[k];
        if (!seen_[j]) {
          seen_[j] = 1;
          touched_.push_back(j);
        }
        scratch_[j] += mass * r.probabilities[k];
      }
    }
    std::sort(touched_.begin(), touched_.end());
    entries_.clear();
    for (std::uint32_t j : touched_) {
      entries_.emplace_back(j, scratch_[j]);
      scratch_[j] = 0.0;
      seen_[j] = 0;
    }
  }

  void mean(const Grid& grid, StateVector& out, StateVector& centroid) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& [region, mass] : entries_) {
      grid.centroid(RegionId{region}, centroid);
      for (std::size_t d = 0; d < out.size(); ++d) out[d] += mass * centroid[d];
    }
  }

 private:
  std::vector<std::pair<std::uint32_t, double>> entries_;
  std::vector<double> scratch_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::uint32_t> touched_;
};

std::vector<StateVector> propagate(SparseBelief& belief, std::span<const ActionId> actions,
                                   const TransitionRows& rows, const Grid& grid) {
  std::vector<StateVector> out;
  out.reserve(actions.size() + 1);
  StateVector mean(grid.dimension());
  StateVector centroid(grid.dimension());
  belief.mean(grid, mean, centroid);
  out.push_back(mean);
  for (ActionId a : actions) {
    belief.advance(rows, a);
    belief.mean(grid, mean, centroid);
    out.push_back(mean);
  }
  return out;
}

void check_rows_match_grid(const TransitionRows& rows, const Grid& grid) {
  if (rows.regions() != grid.region_count()) {
    throw InvalidInput("transition model and grid disagree on the region count");
  }
}

}  // namespace

std::vector<StateVector> markov_trajectory(std::span<const double> belief,
                                           std::span<const ActionId> actions,
                                           const TransitionRows& rows, const Grid& grid) {
  check_rows_match_grid(rows, grid);
  if (belief.size() != rows.regions()) throw InvalidInput("belief dimension mismatch");
  double total = 0.0;
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    total += belief[i];
    if (belief[i] != 0.0) entries.emplace_back(static_cast<std::uint32_t>(i), belief[i]);
  }
  if (!(std::abs(total - 1.0) <= 1e-9)) throw InvalidInput("belief must sum to 1");
  SparseBelief b(rows.regions());
  b.reset(std::move(entries));
  return propagate(b, actions, rows, grid);
}

std::vector<StateVector> markov_trajectory(RegionId start, std::span<const ActionId> actions,
                                           const TransitionRows& rows, const Grid& grid) {
  check_rows_match_grid(rows, grid);
  if (start.flat >= rows.regions()) throw InvalidInput("start region out of range");
  SparseBelief b(rows.regions());
  b.reset({{static_cast<std::uint32_t>(start.flat), 1.0}});
  return propagate(b, actions, rows, grid);
}

void write_transitions_csv(std::ostream& out, const TransitionModel& model) {
  out << "action,src,dst,probability\n";
  for (std::size_t a = 0; a < model.action_count(); ++a) {
    const SparseMatrix& m = model.matrices()[a];
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const TransitionRow r = m.row(i);
      for (std::size_t k = 0; k < r.destinations.size(); ++k) {
        out << a << ',' << i << ',' << r.destinations[k] << ','
            << format_double(r.probabilities[k]) << '\n';
      }
    }
  }
}

TransitionModel read_transitions_csv(std::istream& in, std::size_t regions,
                                     std::size_t action_count) {
  struct Triplet {
    std::size_t action, src;
    std::uint32_t dst;
    double p;
  };
  std::vector<Triplet> triplets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("action", 0) == 0) continue;
    if (line.empty()) continue;
    std::string fields[4];
    std::istringstream tokens(line);
    for (auto& f : fields) {
      if (!std::getline(tokens, f, ',')) {
        throw InvalidInput("transition CSV line " + std::to_string(line_no) + ": expected 4 fields");
      }
    }
    Triplet t{parse_u64(fields[0]), parse_u64(fields[1]),
              static_cast<std::uint32_t>(parse_u64(fields[2])), parse_double(fields[3])};
    if (t.action >= action_count || t.src >= regions || t.dst >= regions) {
      throw InvalidInput("transition CSV line " + std::to_string(line_no) + ": index out of range");
    }
    triplets.push_back(t);
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.action, a.src, a.dst) < std::tie(b.action, b.src, b.dst);
  });
  std::vector<SparseMatrix> matrices;
  std::size_t k = 0;
  for (std::size_t a = 0; a < action_count; ++a) {
    std::vector<std::uint64_t> offsets{0};
    std::vector<std::uint32_t> destinations;
    std::vector<double> probabilities;
    for (std::size_t i = 0; i < regions; ++i) {
      while (k < triplets.size() && triplets[k].action == a && triplets[k].src == i) {
        destinations.push_back(triplets[k].dst);
        probabilities.push_back(triplets[k].p);
        ++k;
      }
      offsets.push_back(destinations.size());
    }
    matrices.emplace_back(regions, std::move(offsets), std::move(destinations),
                          std::move(probabilities));
  }
  return TransitionModel(std::move(matrices));
}

namespace {

constexpr char kMagic[8] = {'E', 'P', 'D', 'T', 'M', '0', '0', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void put_array(std::ostream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw InvalidInput("truncated transition file");
  return v;
}

template <typename T>
std::vector<T> get_array(std::istream& in, std::uint64_t count) {
  std::vector<T> values(count);
  if (count > 0 && !in.read(reinterpret_cast<char*>(values.data()),
                            static_cast<std::streamsize>(count * sizeof(T)))) {
    throw InvalidInput("truncated transition file");
  }
  return values;
}

}  // namespace

void write_transitions_binary(std::ostream& out, const TransitionModel& model) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, model.regions());
  put<std::uint64_t>(out, model.action_count());
  for (const SparseMatrix& m : model.matrices()) {
    put<std::uint64_t>(out, m.nonzeros());
    put_array(out, m.offsets());
    put_array(out, m.destinations());
    put_array(out, m.probabilities());
  }
}

TransitionModel read_transitions_binary(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw InvalidInput("not a transition model file");
  }
  const auto regions = get<std::uint64_t>(in);
  const auto actions = get<std::uint64_t>(in);
  std::vector<SparseMatrix> matrices;
  for (std::uint64_t a = 0; a < actions; ++a) {
    const auto nnz = get<std::uint64_t>(in);
    auto offsets = get_array<std::uint64_t>(in, regions + 1);
    auto destinations = get_array<std::uint32_t>(in, nnz);
    auto probabilities = get_array<double>(in, nnz);
    matrices.emplace_back(regions, std::move(offsets), std::move(destinations),
                          std::move(probabilities));
  }
  return TransitionModel(std::move(matrices));
}

}  // namespace epidisc
