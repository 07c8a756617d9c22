#include "evprice/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "evprice/errors.hpp"

namespace evprice {

namespace {

constexpr KeyInfo kKeys[] = {
    {"seed", "1", "root seed; every random stream is derived from it"},
    {"out", "out", "output directory"},
    {"workers", "0", "OpenMP worker threads (0 = runtime default)"},
    {"horizon_h", "24", "selling horizon in hours"},
    {"slots.length_h", "3", "timeslot length in hours; must divide the horizon"},
    {"capacity", "3", "chargers, i.e. initial capacity of every timeslot"},
    {"demand.lambda", "24", "expected requests per horizon"},
    {"demand.timesteps", "0", "MDP timesteps k (0 = smallest slot-aligned k meeting demand.rel_error)"},
    {"demand.rel_error", "0.06", "target relative discretization error for automatic k"},
    {"demand.mode", "discrete", "arrival generator: discrete (<= 1 per timestep) or continuous"},
    {"request.duration_mean_h", "3", "mean of the exponential charging duration"},
    {"request.start_mean_h", "12", "mean of the normal start time"},
    {"request.start_sd_h", "3", "standard deviation of the normal start time"},
    {"budget.mean", "1", "mean per-hour budget rate"},
    {"budget.sd", "0.5", "sd of the per-hour budget rate"},
    {"budget.floor", "0", "budget rates at or below this are resampled"},
    {"prices.min", "0.1", "lowest per-hour rate of the price grid"},
    {"prices.max", "3.0", "highest per-hour rate of the price grid"},
    {"prices.step", "0.1", "price grid spacing"},
    {"prices.rates", "", "explicit comma-separated rate list (overrides min/max/step)"},
    {"pricers", "oracle,mcts,flatrate", "comma-separated pricers: mcts, vi, flatrate, oracle"},
    {"n", "100", "replications (paired request sequences) per sweep point"},
    {"flatrate.train", "100", "training sequences for the flatrate baseline"},
    {"flatrate.rate", "", "fixed flatrate per hour; skips training when set"},
    {"mcts.preset", "standard", "hyperparameter preset: standard (10000/10/3) or light (800/3/1)"},
    {"mcts.iterations", "", "MCTS iterations per decision (overrides preset)"},
    {"mcts.depth", "", "MCTS tree depth limit (overrides preset)"},
    {"mcts.exploration", "", "UCB exploration constant (overrides preset)"},
    {"mcts.ucb_sign", "plus", "sign of the UCB exploration term: plus or minus"},
    {"mcts.reuse", "true", "reuse the search subtree between real decisions"},
    {"vi.max_states", "20000000", "state-count ceiling for value iteration"},
    {"vi.policy_in", "", "load a saved VI policy instead of solving (single-point runs)"},
    {"vi.policy_out", "", "write the solved VI policy to this file (single-point runs)"},
    {"sweep.axis", "none", "none, slot_length, demand or timesteps"},
    {"sweep.values", "", "comma-separated values for the sweep axis"},
    {"timing", "on", "measure runtimes (off writes an empty runtime column)"},
    {"traces", "off", "dump per-request trace records next to the results"},
    {"gen.n", "10", "sequences written by `gen`"},
    {"error.k", "24,48,96,192,384,768,1536", "timestep counts for `error-table`"},
    {"error.lambda", "6,12,24,48,96,192,288", "intensities for `error-table`"},
    {"grid.exploration", "0.3,1,3", "exploration constants for `grid-search`"},
    {"grid.depth", "3,10", "depth limits for `grid-search`"},
    {"grid.iterations", "100,1000,10000", "iteration counts for `grid-search`"},
};

const KeyInfo* find_key(std::string_view key) {
  for (const auto& k : kKeys)
    if (k.key == key) return &k;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::span<const KeyInfo> known_keys() { return kKeys; }

KeyValueConfig KeyValueConfig::parse(std::istream& is, std::string_view source) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(std::string(source) + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (!find_key(key))
      throw ConfigError(std::string(source) + ":" + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    cfg.values_[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError("unknown key '" + key + "'");
  values_[key] = trim(value);
}

void KeyValueConfig::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

bool KeyValueConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string KeyValueConfig::get(std::string_view key) const {
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  const KeyInfo* info = find_key(key);
  if (!info) throw ConfigError("unknown key '" + std::string(key) + "'");
  return std::string(info->default_value);
}

namespace {

template <typename T>
T parse_number(std::string_view key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError("key '" + std::string(key) + "': cannot parse '" + text + "'");
  return v;
}

}  // namespace

double KeyValueConfig::get_double(std::string_view key) const {
  const double v = parse_number<double>(key, get(key));
  if (!std::isfinite(v)) throw ConfigError("key '" + std::string(key) + "' must be finite");
  return v;
}

long long KeyValueConfig::get_int(std::string_view key) const {
  return parse_number<long long>(key, get(key));
}

std::uint64_t KeyValueConfig::get_u64(std::string_view key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

bool KeyValueConfig::get_bool(std::string_view key) const {
  const std::string v = get(key);
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> KeyValueConfig::get_list(std::string_view key) const {
  std::vector<std::string> items;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> KeyValueConfig::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (const auto& s : get_list(key)) out.push_back(parse_number<double>(key, s));
  return out;
}

std::string KeyValueConfig::resolved() const {
  std::ostringstream os;
  for (const auto& k : kKeys) os << k.key << " = " << get(k.key) << "\n";
  return os.str();
}

int auto_timesteps(double lambda, double rel_error, int n_slots) {
  if (lambda <= 0.0) return n_slots;
  const long long k = min_timesteps(lambda, rel_error, n_slots);
  if (k > 2'000'000'000LL) throw ConfigError("automatic timestep count overflows");
  return static_cast<int>(k);
}

InstanceConfig instance_config(const KeyValueConfig& cfg) {
  InstanceConfig ic;
  const double horizon = cfg.get_double("horizon_h");
  const double slot_len = cfg.get_double("slots.length_h");
  if (!(horizon > 0.0) || !(slot_len > 0.0))
    throw ConfigError("horizon_h and slots.length_h must be positive");
  const double ratio = horizon / slot_len;
  const long long n_slots = std::llround(ratio);
  if (n_slots < 1 || std::abs(ratio - static_cast<double>(n_slots)) > 1e-9)
    throw ConfigError("slots.length_h must divide horizon_h evenly");
  ic.slots = SlotGrid(static_cast<int>(n_slots), slot_len);
  ic.capacity = static_cast<int>(cfg.get_int("capacity"));
  ic.lambda = cfg.get_double("demand.lambda");
  if (ic.lambda < 0.0) throw ConfigError("demand.lambda must be >= 0");

  const long long k = cfg.get_int("demand.timesteps");
  if (k < 0) throw ConfigError("demand.timesteps must be >= 0");
  if (k == 0) {
    const double eps = cfg.get_double("demand.rel_error");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("demand.rel_error must lie in (0, 1)");
    ic.timesteps = auto_timesteps(ic.lambda, eps, ic.slots.n_slots());
  } else {
    ic.timesteps = static_cast<int>(k);
  }

  const std::string mode = cfg.get("demand.mode");
  if (mode == "discrete") ic.mode = ArrivalMode::discrete;
  else if (mode == "continuous") ic.mode = ArrivalMode::continuous;
  else throw ConfigError("demand.mode must be discrete or continuous");

  ic.duration_mean_hours = cfg.get_double("request.duration_mean_h");
  ic.start_mean_hours = cfg.get_double("request.start_mean_h");
  ic.start_sd_hours = cfg.get_double("request.start_sd_h");
  ic.budget.mean = cfg.get_double("budget.mean");
  ic.budget.sd = cfg.get_double("budget.sd");
  ic.budget.floor = cfg.get_double("budget.floor");

  const auto rates = cfg.get_doubles("prices.rates");
  ic.prices = rates.empty() ? PriceGrid::linspace(cfg.get_double("prices.min"),
                                                  cfg.get_double("prices.max"),
                                                  cfg.get_double("prices.step"))
                            : PriceGrid(rates);
  ic.seed = cfg.get_u64("seed");
  ic.validate();
  return ic;
}

}  // namespace evprice
