#pragma once

// Run configuration: a flat `key = value` file (with `#` comments) whose
// keys can each be overridden from the command line.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eofair/dataset.hpp"
#include "eofair/harness.hpp"

namespace eofair {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;  // empty: unset
  std::string_view help;
};

/// Every recognised key, in documentation order.
const std::vector<ConfigKey>& config_keys();

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  /// Throws for keys missing from config_keys().
  void set(std::string_view key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  std::string get_or_default(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

double parse_double(std::string_view key, std::string_view text);
long long parse_integer(std::string_view key, std::string_view text);
std::vector<double> parse_double_list(std::string_view key, std::string_view text);

TrainConfig train_config_from(const KeyValueConfig& cfg);
SynthSpec synth_spec_from(const KeyValueConfig& cfg);

struct SweepSettings {
  SweepParam param = SweepParam::lambda;
  std::vector<double> values;
  int repeats = 1;
};

SweepSettings sweep_settings_from(const KeyValueConfig& cfg);
std::vector<double> size_fractions_from(const KeyValueConfig& cfg);

/// Train/dev/test from CSV files or the synthetic generator, per the data keys.
Split load_data(const KeyValueConfig& cfg);

}  // namespace eofair
