#include "typetree_cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "typetree/error.hpp"

namespace typetree::cli {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, int line, int col) {
  std::string t = trim(s);
  if (t.empty()) throw ParseError("missing number", line, col);
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (...) {
    throw ParseError("not a number: '" + t + "'", line, col);
  }
  if (used != t.size()) throw ParseError("trailing characters after number: '" + t + "'", line, col);
  return v;
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::vector<std::string> split_dots(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string p;
  while (std::getline(ss, p, '.')) parts.push_back(p);
  return parts;
}

}  // namespace

Config parse_config(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno, 1);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    int vcol = static_cast<int>(eq) + 2;
    if (key.empty()) throw ParseError("empty key", lineno, 1);
    if (key.size() > 1 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    if (cfg.has(key)) throw ParseError("duplicate key '" + key + "'", lineno, 1);
    ConfigValue cv;
    cv.line = lineno;
    if (!val.empty() && val.front() == '[') {
      if (val.back() != ']') throw ParseError("unterminated array", lineno, vcol);
      cv.is_array = true;
      std::string inner = trim(val.substr(1, val.size() - 2));
      if (!inner.empty()) {
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (trim(item).empty()) continue;  // trailing comma
          cv.values.push_back(parse_number(item, lineno, vcol));
        }
      }
    } else {
      cv.values.push_back(parse_number(val, lineno, vcol));
    }
    cfg.entries.emplace(key, std::move(cv));
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::usage, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::optional<double> Config::scalar(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) return std::nullopt;
  if (it->second.is_array || it->second.values.size() != 1)
    fail(ErrorKind::parameter, "config key '" + key + "' must be a scalar");
  return it->second.values[0];
}

double Config::scalar_or(const std::string& key, double fallback) const {
  auto v = scalar(key);
  return v ? *v : fallback;
}

std::vector<double> Config::array(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) return {};
  return it->second.values;
}

int config_k(const Config& c) {
  double k = c.scalar_or("k", 1);
  if (k < 1 || k != std::floor(k) || k > 1000) fail(ErrorKind::parameter, "k must be a positive integer");
  return static_cast<int>(k);
}

std::optional<RateKey> parse_rate_key(const std::string& key, int k) {
  auto parts = split_dots(key);
  if (parts.size() < 2) return std::nullopt;
  const std::string& fam = parts[0];
  if (fam != "q" && fam != "b" && fam != "d") return std::nullopt;
  for (size_t i = 1; i < parts.size(); ++i)
    if (!all_digits(parts[i])) fail(ErrorKind::parameter, "malformed rate key '" + key + "'");
  auto type = [&](const std::string& s) {
    int t = std::stoi(s);
    if (t < 1 || t > k)
      fail(ErrorKind::parameter, "type " + s + " in '" + key + "' is outside 1.." + std::to_string(k));
    return t - 1;
  };
  RateKey r;
  r.family = fam[0];
  r.i = type(parts[1]);
  if (fam == "d") {
    if (parts.size() != 2) fail(ErrorKind::parameter, "death keys look like d.<i>: '" + key + "'");
    return r;
  }
  if (fam == "b") {
    if (parts.size() != 3) fail(ErrorKind::parameter, "birth-death keys look like b.<i>.<j>: '" + key + "'");
    r.j1 = type(parts[2]);
    return r;
  }
  if (parts.size() == 4) {
    r.j1 = type(parts[2]);
    r.j2 = type(parts[3]);
  } else if (parts.size() == 3 && k < 10 && parts[2].size() == 2) {
    r.j1 = type(parts[2].substr(0, 1));
    r.j2 = type(parts[2].substr(1, 1));
  } else if (parts.size() == 3) {
    r.j = type(parts[2]);
    if (r.j == r.i) fail(ErrorKind::parameter, "mutation key '" + key + "' has identical types");
  } else {
    fail(ErrorKind::parameter, "malformed rate key '" + key + "'");
  }
  if (r.j1 > r.j2) std::swap(r.j1, r.j2);
  return r;
}

namespace {

const std::vector<std::string> kReserved = {"k", "initial", "T", "n", "breakpoints"};

bool reserved(const std::string& key) {
  return std::find(kReserved.begin(), kReserved.end(), key) != kReserved.end();
}

void reject_unknown(const Config& c, int k, const std::string& families) {
  for (const auto& [key, v] : c.entries) {
    if (reserved(key)) continue;
    auto rk = parse_rate_key(key, k);
    if (!rk || families.find(rk->family) == std::string::npos)
      fail(ErrorKind::parameter, "unknown config key '" + key + "' (line " + std::to_string(v.line) + ")");
  }
}

}  // namespace

ErmParams erm_params(const Config& c) {
  const int k = config_k(c);
  reject_unknown(c, k, "q");
  ErmParams p;
  p.k = k;
  p.q.assign(k, std::vector<double>(num_pairs(k), 0.0));
  for (const auto& [key, v] : c.entries) {
    if (reserved(key)) continue;
    auto rk = parse_rate_key(key, k);
    if (rk->j >= 0) fail(ErrorKind::parameter, "ERM has no mutation rates: '" + key + "'");
    auto s = c.scalar(key);
    p.q[rk->i][pair_index(k, rk->j1, rk->j2)] = *s;
  }
  if (k == 1) p.q = {{1.0}};
  p.validate();
  return p;
}

YuleParams yule_params(const Config& c) {
  const int k = config_k(c);
  reject_unknown(c, k, "q");
  YuleParams yp;
  yp.k = k;
  yp.breakpoints = c.array("breakpoints");
  const size_t nseg = yp.breakpoints.size() + 1;
  YuleRates zero;
  zero.birth.assign(k, std::vector<double>(num_pairs(k), 0.0));
  zero.mutation.assign(k, std::vector<double>(k, 0.0));
  yp.segments.assign(nseg, zero);
  bool any = false;
  for (const auto& [key, v] : c.entries) {
    if (reserved(key)) continue;
    auto rk = parse_rate_key(key, k);
    if (v.is_array && v.values.size() != nseg)
      fail(ErrorKind::parameter, "schedule '" + key + "' needs " + std::to_string(nseg) + " values");
    for (size_t s = 0; s < nseg; ++s) {
      double x = v.is_array ? v.values[s] : v.values[0];
      if (rk->j >= 0) yp.segments[s].mutation[rk->i][rk->j] = x;
      else yp.segments[s].birth[rk->i][pair_index(k, rk->j1, rk->j2)] = x;
    }
    any = true;
  }
  if (!any && k == 1) return YuleParams::single_type(1.0);
  yp.validate();
  return yp;
}

BdParams bd_params(const Config& c) {
  const int k = config_k(c);
  reject_unknown(c, k, "bd");
  bool any = false;
  BdParams bd;
  bd.k = k;
  bd.b.assign(k, std::vector<double>(k, 0.0));
  bd.d.assign(k, 0.0);
  for (const auto& [key, v] : c.entries) {
    if (reserved(key)) continue;
    auto rk = parse_rate_key(key, k);
    double x = *c.scalar(key);
    if (rk->family == 'd') bd.d[rk->i] = x;
    else bd.b[rk->i][rk->j1] = x;
    any = true;
  }
  if (!any && k == 1) return BdParams::single_type(1.0, 0.0);
  bd.validate();
  return bd;
}

}  // namespace typetree::cli
