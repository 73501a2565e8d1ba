#include "epidisc/oracle.hpp"

#include <array>
#include <cstring>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_map>

#include "epidisc/error.hpp"
#include "epidisc/format.hpp"
#include "epidisc/parallel.hpp"

namespace epidisc {

namespace {

struct Node {
  double value = 0.0;
  std::array<std::uint8_t, kMaxOracleDepth> suffix{};
};

struct NodeKey {
  std::vector<std::uint64_t> bits;
  std::size_t depth;
  bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ k.depth;
    for (std::uint64_t b : k.bits) h = (h ^ b) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

class Search {
 public:
  Search(const Model& model, const RewardModel& reward, double discount, bool memoize)
      : model_(model), reward_(reward), discount_(discount), memoize_(memoize) {}

  // Optimal cost over `depth` remaining epochs; suffix[0..depth) holds the
  // optimal actions.
  Node solve(const StateVector& x, std::size_t depth) {
    if (depth == 0) return Node{reward_.infected(x), {}};
    NodeKey key;
    if (memoize_) {
      key.bits.resize(x.size());
      std::memcpy(key.bits.data(), x.data(), x.size() * sizeof(double));
      key.depth = depth;
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    Node best{std::numeric_limits<double>::infinity(), {}};
    StateVector next(x.size());
    for (std::size_t a = 0; a < model_.action_count(); ++a) {
      const ActionId action{static_cast<std::uint8_t>(a)};
      model_.step(x, action, next);
      const Node child = solve(next, depth - 1);
      const double q = reward_.stage(x, action) + discount_ * child.value;
      if (q < best.value) {
        best.value = q;
        best.suffix[0] = static_cast<std::uint8_t>(a);
        std::copy_n(child.suffix.begin(), depth - 1, best.suffix.begin() + 1);
      }
    }
    if (memoize_) memo_.emplace(std::move(key), best);
    return best;
  }

 private:
  const Model& model_;
  const RewardModel& reward_;
  double discount_;
  bool memoize_;
  std::unordered_map<NodeKey, Node, NodeKeyHash> memo_;
};

void check_inputs(const Model& model, const RewardModel& reward, double discount) {
  if (!(discount > 0.0 && discount <= 1.0)) throw InvalidInput("discount must lie in (0, 1]");
  reward.validate(model.dimension(), model.action_count());
}

}  // namespace

OracleResult brute_force(std::span<const double> x, std::size_t t, const Model& model,
                         const RewardModel& reward, double discount, std::size_t horizon) {
  check_inputs(model, reward, discount);
  if (t > horizon) throw InvalidInput("epoch beyond the horizon");
  const std::size_t depth = horizon - t;
  if (depth > kMaxOracleDepth) {
    throw Refusal("brute force refuses " + std::to_string(depth) + " remaining epochs (limit " +
                  std::to_string(kMaxOracleDepth) + ")");
  }
  if (x.size() != model.dimension()) throw InvalidInput("state dimension mismatch");
  Search search(model, reward, discount, false);
  const Node node = search.solve(StateVector(x.begin(), x.end()), depth);
  OracleResult out;
  out.value = node.value;
  for (std::size_t k = 0; k < depth; ++k) out.best_sequence.emplace_back(node.suffix[k]);
  return out;
}

OracleTable oracle_action_table(std::span<const StateVector> states, const Model& model,
                                const RewardModel& reward, double discount, std::size_t horizon,
                                std::size_t workers, bool memoize) {
  check_inputs(model, reward, discount);
  if (horizon > kMaxOracleDepth) {
    throw Refusal("brute force refuses a horizon of " + std::to_string(horizon));
  }
  OracleTable table(states.size(), horizon);
  parallel_for(workers, states.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      Search search(model, reward, discount, memoize);
      if (states[s].size() != model.dimension()) throw InvalidInput("state dimension mismatch");
      for (std::size_t t = 0; t < horizon; ++t) {
        const Node node = search.solve(states[s], horizon - t);
        table.value(s, t) = node.value;
        table.action(s, t) = ActionId{node.suffix[0]};
      }
    }
  });
  return table;
}

void write_oracle_csv(std::ostream& out, const OracleTable& table) {
  out << "state,epoch,action,value\n";
  for (std::size_t s = 0; s < table.states(); ++s) {
    for (std::size_t t = 0; t < table.horizon(); ++t) {
      out << s << ',' << t << ',' << table.action(s, t).index() << ','
          << format_double(table.value(s, t)) << '\n';
    }
  }
}

}  // namespace epidisc
