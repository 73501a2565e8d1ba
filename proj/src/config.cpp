#include "epidisc/config.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "epidisc/error.hpp"
#include "epidisc/format.hpp"

namespace epidisc {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& value) {
  std::istringstream in(value);
  std::vector<std::string> out;
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  template <typename F>
  void with(const std::string& key, F&& apply) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    it->second.used = true;
    try {
      apply(it->second.value);
    } catch (const InvalidInput& e) {
      throw ConfigError(it->second.line, key + ": " + e.what());
    } catch (const ConfigError& e) {
      if (e.line() != 0) throw;
      throw ConfigError(it->second.line, key + ": " + e.what());
    }
  }

  void number(const std::string& key, double& out) {
    with(key, [&](const std::string& v) { out = parse_double(single(v)); });
  }
  void count(const std::string& key, std::size_t& out) {
    with(key, [&](const std::string& v) { out = parse_u64(single(v)); });
  }
  void u64(const std::string& key, std::uint64_t& out) {
    with(key, [&](const std::string& v) { out = parse_u64(single(v)); });
  }
  void flag(const std::string& key, bool& out) {
    with(key, [&](const std::string& v) {
      const std::string t = single(v);
      if (t == "true") {
        out = true;
      } else if (t == "false") {
        out = false;
      } else {
        throw InvalidInput("expected true or false, got '" + t + "'");
      }
    });
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    with(key, [&](const std::string& v) {
      out.clear();
      for (const auto& t : split(v)) out.push_back(parse_double(t));
    });
  }
  void counts(const std::string& key, std::vector<std::size_t>& out) {
    with(key, [&](const std::string& v) {
      out.clear();
      for (const auto& t : split(v)) out.push_back(parse_u64(t));
    });
  }
  void words(const std::string& key, std::vector<std::string>& out) {
    with(key, [&](const std::string& v) { out = split(v); });
  }

  void reject_unused() const {
    for (const auto& [key, entry] : entries_) {
      if (!entry.used) throw ConfigError(entry.line, "unknown key '" + key + "'");
    }
  }

 private:
  static std::string single(const std::string& v) {
    const auto tokens = split(v);
    if (tokens.size() != 1) throw InvalidInput("expected a single value");
    return tokens.front();
  }

  std::map<std::string, Entry> entries_;
};

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(values[i]);
  }
  return out;
}

template <typename T>
std::string join_plain(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ' ';
    out << values[i];
  }
  return out.str();
}

}  // namespace

std::size_t ExperimentConfig::dimension() const {
  return model == ModelKind::sir ? 3 : 3 * stratified.districts;
}

std::unique_ptr<Model> ExperimentConfig::make_model() const {
  if (model == ModelKind::sir) return std::make_unique<SirModel>(sir);
  return std::make_unique<StratifiedSirModel>(stratified);
}

RewardModel ExperimentConfig::make_reward() const {
  if (model == ModelKind::sir) return RewardModel::sir(lockdown_disutility);
  return RewardModel::stratified(stratified, lockdown_disutility);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(0, what); };
  try {
    if (model == ModelKind::sir) {
      sir.validate();
    } else {
      stratified.validate();
    }
    bounds.validate();
  } catch (const InvalidInput& e) {
    fail(e.what());
  }
  const std::size_t n = dimension();
  if (bounds.lower.size() != n) fail("bounds must have one entry per compartment");
  if (horizon == 0) fail("horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) fail("discount must lie in (0, 1]");
  if (!(lockdown_disutility >= 0.0)) fail("lockdown disutility must be >= 0");
  if (methods.empty()) fail("methods list is empty");
  for (const auto& m : methods) {
    if (m != "greedycut" && m != "uniform") fail("unknown method '" + m + "'");
  }
  if (budgets.empty()) fail("budgets list is empty");
  for (std::size_t b : budgets) {
    if (b < 2 * n) fail("budget " + std::to_string(b) + " below the minimum " + std::to_string(2 * n));
  }
  for (std::size_t d : frozen_components) {
    if (d >= n) fail("frozen component out of range");
  }
  if (frozen_components.size() >= n) fail("every component is frozen");
  if (transition_samples == 0) fail("transition samples must be >= 1");
  if (fidelity_samples == 0) fail("fidelity samples must be >= 1");
  if (oracle_metrics) {
    if (model != ModelKind::sir) fail("oracle metrics are only defined for the sir model");
    if (horizon > 25) fail("oracle metrics need horizon <= 25");
    if (!policy_tables) fail("oracle metrics need policy tables");
  }
  if (!x0.empty()) {
    if (x0.size() != n) fail("x0 must have one entry per compartment");
    for (double v : x0) {
      if (!(v >= 0.0 && v <= 1.0)) fail("x0 entries must lie in [0, 1]");
    }
  }
  if (two_switch && x0.empty()) fail("two-switch solving needs x0");
  if (!trajectory_actions.empty() && trajectory_actions.size() != horizon) {
    fail("trajectory actions must have length horizon");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "empty key");
    if (value.empty()) throw ConfigError(line, "empty value for '" + key + "'");
    if (entries.count(key) > 0) throw ConfigError(line, "duplicate key '" + key + "'");
    entries.emplace(key, Entry{value, line, false});
  }

  ExperimentConfig c;
  Reader r(std::move(entries));
  if (!r.has("model.type")) throw ConfigError(0, "missing required key 'model.type'");
  r.with("model.type", [&](const std::string& v) {
    if (v == "sir") {
      c.model = ModelKind::sir;
    } else if (v == "stratified_sir") {
      c.model = ModelKind::stratified_sir;
    } else {
      throw InvalidInput("expected sir or stratified_sir");
    }
  });

  if (c.model == ModelKind::sir) {
    r.number("model.beta", c.sir.beta);
    r.number("model.gamma", c.sir.gamma);
    r.number("model.lockdown_reduction", c.sir.lockdown_reduction);
  } else {
    r.count("model.districts", c.stratified.districts);
    r.numbers("model.beta_matrix", c.stratified.beta_matrix);
    r.number("model.gamma", c.stratified.gamma);
    r.number("model.lockdown_reduction", c.stratified.lockdown_reduction);
    r.numbers("model.district_weights", c.stratified.district_weights);
    c.oracle_metrics = false;
  }

  for (const char* key : {"bounds.lower", "bounds.upper", "budgets", "methods"}) {
    if (!r.has(key)) throw ConfigError(0, std::string("missing required key '") + key + "'");
  }
  r.numbers("bounds.lower", c.bounds.lower);
  r.numbers("bounds.upper", c.bounds.upper);
  if (c.model == ModelKind::stratified_sir) c.bounds.group = 3;
  r.count("horizon", c.horizon);
  r.number("discount", c.discount);
  r.number("reward.lockdown_disutility", c.lockdown_disutility);
  r.counts("budgets", c.budgets);
  r.words("methods", c.methods);
  r.count("greedycut.samples", c.greedycut_samples);
  r.counts("greedycut.frozen", c.frozen_components);
  r.count("transitions.samples", c.transition_samples);
  r.flag("solve.policy_tables", c.policy_tables);
  r.flag("solve.two_switch", c.two_switch);
  r.flag("evaluate.oracle", c.oracle_metrics);
  r.count("evaluate.fidelity_samples", c.fidelity_samples);
  r.numbers("x0", c.x0);
  r.with("trajectory.actions", [&](const std::string& v) {
    c.trajectory_actions.clear();
    for (const auto& t : split(v)) {
      const auto a = parse_u64(t);
      if (a > 1) throw InvalidInput("actions are 0 or 1");
      c.trajectory_actions.push_back(ActionId(static_cast<std::uint8_t>(a)));
    }
  });
  r.u64("seed", c.seed);
  r.with("output", [&](const std::string& v) { c.output_dir = v; });
  r.reject_unused();

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file " + path);
  return parse_config(in);
}

std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream out;
  if (c.model == ModelKind::sir) {
    out << "model.type = sir\n"
        << "model.beta = " << format_double(c.sir.beta) << '\n'
        << "model.gamma = " << format_double(c.sir.gamma) << '\n'
        << "model.lockdown_reduction = " << format_double(c.sir.lockdown_reduction) << '\n';
  } else {
    out << "model.type = stratified_sir\n"
        << "model.districts = " << c.stratified.districts << '\n'
        << "model.beta_matrix = " << join(c.stratified.beta_matrix) << '\n'
        << "model.gamma = " << format_double(c.stratified.gamma) << '\n'
        << "model.lockdown_reduction = " << format_double(c.stratified.lockdown_reduction) << '\n'
        << "model.district_weights = " << join(c.stratified.district_weights) << '\n';
  }
  out << "bounds.lower = " << join(c.bounds.lower) << '\n'
      << "bounds.upper = " << join(c.bounds.upper) << '\n'
      << "horizon = " << c.horizon << '\n'
      << "discount = " << format_double(c.discount) << '\n'
      << "reward.lockdown_disutility = " << format_double(c.lockdown_disutility) << '\n'
      << "budgets = " << join_plain(c.budgets) << '\n'
      << "methods = " << join_plain(c.methods) << '\n'
      << "greedycut.samples = " << c.greedycut_samples << '\n';
  if (!c.frozen_components.empty()) {
    out << "greedycut.frozen = " << join_plain(c.frozen_components) << '\n';
  }
  out << "transitions.samples = " << c.transition_samples << '\n'
      << "solve.policy_tables = " << (c.policy_tables ? "true" : "false") << '\n'
      << "solve.two_switch = " << (c.two_switch ? "true" : "false") << '\n'
      << "evaluate.oracle = " << (c.oracle_metrics ? "true" : "false") << '\n'
      << "evaluate.fidelity_samples = " << c.fidelity_samples << '\n';
  if (!c.x0.empty()) out << "x0 = " << join(c.x0) << '\n';
  if (!c.trajectory_actions.empty()) {
    out << "trajectory.actions =";
    for (ActionId a : c.trajectory_actions) out << ' ' << a.index();
    out << '\n';
  }
  out << "seed = " << c.seed << '\n';
  return out.str();
}

}  // namespace epidisc
