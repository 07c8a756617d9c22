#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evprice/market.hpp"

namespace evprice {

struct KeyInfo {
  std::string_view key;
  std::string_view default_value;
  std::string_view help;
};

/// Every key accepted in config files and `--set` overrides.
std::span<const KeyInfo> known_keys();

/// Flat key=value configuration with dotted section prefixes
/// (`mcts.iterations = 10000`). Lines starting with `#` are comments.
/// Unknown keys are rejected with ConfigError.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is, std::string_view source = "<input>");
  static KeyValueConfig from_file(const std::filesystem::path& path);

  /// Sets one key; `assignment` form "key=value" is accepted by set_assignment.
  void set(const std::string& key, const std::string& value);
  void set_assignment(std::string_view assignment);

  bool has(std::string_view key) const;
  std::string get(std::string_view key) const;
  double get_double(std::string_view key) const;
  long long get_int(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;

  /// Every known key with its effective value, one `key = value` per line.
  std::string resolved() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Builds the instance from `horizon_h`, `slots.*`, `capacity`, `demand.*`,
/// `request.*`, `budget.*`, `prices.*` and `seed`. A `demand.timesteps` of 0
/// picks the smallest slot-aligned k meeting `demand.rel_error`.
InstanceConfig instance_config(const KeyValueConfig& cfg);

/// Timestep count used when `demand.timesteps` is 0.
int auto_timesteps(double lambda, double rel_error, int n_slots);

}  // namespace evprice
