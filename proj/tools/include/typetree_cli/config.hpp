#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "typetree/branching.hpp"
#include "typetree/erm.hpp"
#include "typetree/yule.hpp"

namespace typetree::cli {

/// Scalar or array value of one `key = value` line.
struct ConfigValue {
  std::vector<double> values;
  bool is_array = false;
  int line = 0;
};

/// Parsed key-value text: `key = number` or `key = [n1, n2, ...]`, `#` comments.
struct Config {
  std::map<std::string, ConfigValue> entries;

  bool has(const std::string& key) const { return entries.count(key) > 0; }
  std::optional<double> scalar(const std::string& key) const;
  double scalar_or(const std::string& key, double fallback) const;
  std::vector<double> array(const std::string& key) const;
};

Config parse_config(const std::string& text);
Config load_config(const std::string& path);

/// Rate or probability key, types 0-based.
struct RateKey {
  char family = 'q';  // q, b or d
  int i = 0;
  int j1 = -1, j2 = -1;  // birth pair (q) or offspring type (b, in j1)
  int j = -1;            // mutation target (q)
};

/// Parses q.1.11, q.1.1.1, q.1.2, b.1.2, d.1 style keys; nullopt for other keys.
std::optional<RateKey> parse_rate_key(const std::string& key, int k);

/// k from the `k` entry, otherwise 1.
int config_k(const Config& c);

ErmParams erm_params(const Config& c);
YuleParams yule_params(const Config& c);
BdParams bd_params(const Config& c);

}  // namespace typetree::cli
