#include "typetree_cli/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>

#include "typetree/branching.hpp"
#include "typetree/census.hpp"
#include "typetree/erm.hpp"
#include "typetree/erm_analytics.hpp"
#include "typetree/error.hpp"
#include "typetree/harness.hpp"
#include "typetree/inference.hpp"
#include "typetree/newick.hpp"
#include "typetree/yule.hpp"
#include "typetree_cli/config.hpp"

namespace typetree::cli {

using json = nlohmann::ordered_json;
using numerics::Vec;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string config;
  std::string out;
  std::string format;
  int jobs = 1;
};

/// Thrown for bad flag combinations found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string cherry_label(const std::array<int, 3>& c) {
  return "C_" + std::to_string(c[0] + 1) + "_" + std::to_string(c[1] + 1) + "_" + std::to_string(c[2] + 1);
}
std::string pendant_label(const std::array<int, 2>& p) {
  return "L_" + std::to_string(p[0] + 1) + "_" + std::to_string(p[1] + 1);
}

std::vector<std::string> cherry_labels(int k, Ordering o) {
  auto order = IndexOrder::make(k, o);
  std::vector<std::string> out;
  for (int i = 0; i < order.num_cherries(); ++i) out.push_back(cherry_label(order.cherry_at(i)));
  return out;
}
std::vector<std::string> pendant_labels(int k, Ordering o) {
  auto order = IndexOrder::make(k, o);
  std::vector<std::string> out;
  for (int i = 0; i < order.num_pendants(); ++i) out.push_back(pendant_label(order.pendant_at(i)));
  return out;
}
std::vector<std::string> leaf_labels(int k) {
  std::vector<std::string> out;
  for (int i = 1; i <= k; ++i) out.push_back("N_" + std::to_string(i));
  return out;
}

template <class V>
json labeled(const std::vector<std::string>& labels, const V& values) {
  json j = json::object();
  for (size_t i = 0; i < labels.size(); ++i) j[labels[i]] = static_cast<double>(values[i]);
  return j;
}

json census_json(const Census& c) {
  json j;
  j["k"] = c.k;
  j["ordering"] = to_string(c.ordering);
  j["leaves"] = labeled(leaf_labels(c.k), c.leaf_counts);
  j["cherries"] = labeled(cherry_labels(c.k, c.ordering), c.cherry_counts);
  j["pendants"] = labeled(pendant_labels(c.k, c.ordering), c.pendant_counts);
  return j;
}

std::string census_csv(const Census& c) { return census_csv_header(c.k) + "\n" + census_csv_row(c) + "\n"; }

/// Writes the three CSV columns (section, label, value).
void table_rows(std::ostringstream& os, const std::string& section, const std::vector<std::string>& labels,
                const std::vector<double>& values) {
  for (size_t i = 0; i < labels.size(); ++i) os << section << ',' << labels[i] << ',' << num(values[i]) << '\n';
}

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string read_all(std::istream& is) {
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path.empty() || path == "-") return read_all(in);
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open '" + path + "'");
  return read_all(f);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number in list: '" + item + "'");
    }
  }
  return out;
}

void require_format(const std::string& f, std::initializer_list<const char*> allowed, const std::string& cmd) {
  for (const char* a : allowed)
    if (f == a) return;
  throw UsageError("format '" + f + "' is not available for " + cmd);
}

Config load(const Globals& g) { return g.config.empty() ? Config{} : load_config(g.config); }

int initial_type(const Config& c, std::optional<int> flag, int k) {
  int t = flag ? *flag : static_cast<int>(c.scalar_or("initial", 1));
  if (t < 1 || t > k) fail(ErrorKind::parameter, "initial type must be in 1.." + std::to_string(k));
  return t;
}

json yule_rates_json(const YuleRates& r, int k) {
  json j;
  json births = json::object(), muts = json::object();
  for (int i = 0; i < k; ++i) {
    for (int c = 0; c < num_pairs(k); ++c) {
      auto [a, b] = pair_at(k, c);
      births["q_" + std::to_string(i + 1) + "_" + std::to_string(a + 1) + "_" + std::to_string(b + 1)] =
          r.birth[i][c];
    }
    for (int m = 0; m < k; ++m)
      if (m != i) muts["q_" + std::to_string(i + 1) + "_" + std::to_string(m + 1)] = r.mutation[i][m];
  }
  j["birth"] = births;
  j["mutation"] = muts;
  return j;
}

// ----- subcommand state -----

struct SimulateOpts {
  std::string model;
  std::optional<long> n;
  std::optional<double> t;
  std::optional<int> initial;
  bool prune = false;
};

struct TreeOpts {
  std::string tree;
  std::optional<double> t;
  int k = 0;
  std::string ordering = "default";
};

struct AnalyticsOpts {
  std::string model;
  bool limits = false;
  std::optional<long> n;
  std::optional<double> t;
  std::optional<int> initial;
  std::string method = "auto";
};

struct ExtinctionOpts {
  std::optional<double> t;
  int grid = 101;
  bool ancestral = false;
};

struct InferOpts {
  std::string target;
  std::string model;
  std::string census;
  std::string fractions;
  std::string input;
  std::string r;
  std::optional<double> lambda;
};

struct CompareOpts {
  std::string other;
};

struct ReplicateOpts {
  std::string model = "erm";
  std::string stat = "cherries";
  std::optional<long> n;
  std::optional<double> t;
  long reps = 1000;
  std::optional<int> initial;
};

// ----- commands -----

std::string cmd_simulate(const Globals& g, const SimulateOpts& o) {
  Config cfg = load(g);
  std::string fmt = g.format.empty() ? "newick" : g.format;
  Rng rng = make_rng(g.seed, 0);
  TypedTree tree;
  std::vector<PopulationPoint> trajectory;
  if (o.model == "erm") {
    if (o.t) throw UsageError("simulate erm takes --n, not --t");
    ErmParams p = erm_params(cfg);
    long n = o.n ? *o.n : static_cast<long>(cfg.scalar_or("n", 0));
    if (n < 1) throw UsageError("simulate erm needs --n >= 1");
    tree = simulate_erm(p, n, initial_type(cfg, o.initial, p.k), rng);
  } else if (o.model == "yule") {
    YuleParams yp = yule_params(cfg);
    YuleStop stop;
    if (o.n) stop.leaves = *o.n;
    if (o.t) stop.time = *o.t;
    if (!stop.leaves && !stop.time) {
      if (cfg.has("T")) stop.time = *cfg.scalar("T");
      if (cfg.has("n")) stop.leaves = static_cast<long>(*cfg.scalar("n"));
    }
    if (!stop.leaves && !stop.time) throw UsageError("simulate yule needs --t or --n");
    tree = simulate_yule(yp, stop, initial_type(cfg, o.initial, yp.k), rng);
  } else {
    if (o.n) throw UsageError("simulate bd takes --t, not --n");
    BdParams bd = bd_params(cfg);
    double T = o.t ? *o.t : cfg.scalar_or("T", -1);
    if (T < 0) throw UsageError("simulate bd needs --t >= 0");
    BdOptions opt;
    auto sim = simulate_bd(bd, T, initial_type(cfg, o.initial, bd.k), rng, opt);
    tree = o.prune ? prune_to_ancestral(sim.tree, T) : sim.tree;
    trajectory = std::move(sim.trajectory);
  }
  if (fmt == "newick") return tree.empty() ? ";\n" : to_newick(tree) + "\n";
  if (fmt == "csv") {
    if (o.model == "bd" && !o.prune) {
      std::ostringstream os;
      os << "t";
      for (int i = 1; i <= tree.k; ++i) os << ",Z_" << i;
      os << '\n';
      for (const auto& pt : trajectory) {
        os << num(pt.time);
        for (long c : pt.counts) os << ',' << c;
        os << '\n';
      }
      return os.str();
    }
    Census c = tree.empty() ? Census::zero(tree.k) : census(tree);
    return census_csv(c);
  }
  json j;
  j["model"] = o.model;
  j["seed"] = g.seed;
  j["newick"] = tree.empty() ? std::string(";") : to_newick(tree);
  j["leaves"] = tree.num_leaves();
  if (o.model == "bd") j["extant"] = tree.num_extant();
  if (!tree.empty() && (o.model != "bd" || o.prune))
    j["census"] = census_json(census(tree).reindexed(default_ordering(tree.k)));
  return j.dump(2) + "\n";
}

TypedTree read_tree(const TreeOpts& o, std::istream& in) {
  std::string text = read_input(o.tree, in);
  return parse_newick(text, o.k);
}

std::string cmd_prune(const Globals& g, const TreeOpts& o, std::istream& in) {
  std::string fmt = g.format.empty() ? "newick" : g.format;
  TypedTree full = read_tree(o, in);
  double T = 0;
  if (o.t) {
    T = *o.t;
  } else {
    for (const auto& nd : full.nodes) T = std::max(T, nd.time);
  }
  TypedTree pruned = prune_to_ancestral(full, T);
  if (fmt == "newick") return pruned.empty() ? ";\n" : to_newick(pruned) + "\n";
  if (fmt == "csv") return census_csv(pruned.empty() ? Census::zero(full.k) : census(pruned));
  json j;
  j["T"] = T;
  j["newick"] = pruned.empty() ? std::string(";") : to_newick(pruned);
  j["empty"] = pruned.empty();
  j["unary"] = pruned.count_kind(NodeKind::unary);
  return j.dump(2) + "\n";
}

std::string cmd_census(const Globals& g, const TreeOpts& o, std::istream& in) {
  std::string fmt = g.format.empty() ? "csv" : g.format;
  require_format(fmt, {"csv", "json"}, "census");
  TypedTree tree = read_tree(o, in);
  Census c = census(tree);
  if (fmt == "csv") return census_csv(c);
  Ordering ord = o.ordering == "generic_lex" ? Ordering::generic_lex
                 : o.ordering == "paper_k2" ? Ordering::paper_k2
                                         : default_ordering(c.k);
  return census_json(c.reindexed(ord)).dump(2) + "\n";
}

MomentMethod parse_method(const std::string& m) {
  if (m == "auto") return MomentMethod::automatic;
  if (m == "closed") return MomentMethod::closed_form;
  return MomentMethod::recurrence;
}

std::string cmd_analytics_erm(const Globals& g, const AnalyticsOpts& o) {
  std::string fmt = g.format.empty() ? "json" : g.format;
  require_format(fmt, {"csv", "json"}, "analytics");
  Config cfg = load(g);
  ErmParams p = erm_params(cfg);
  int init = initial_type(cfg, o.initial, p.k);
  Ordering ord = default_ordering(p.k);
  if (o.limits) {
    LimitFractions lf = limit_fractions_erm(p, init);
    auto labels = cherry_labels(p.k, ord);
    auto pl = pendant_labels(p.k, ord);
    labels.insert(labels.end(), pl.begin(), pl.end());
    if (fmt == "csv") {
      std::ostringstream os;
      os << "section,label,value\n";
      table_rows(os, "v1", labels, to_std(lf.v1));
      return os.str();
    }
    json j;
    j["model"] = "erm";
    j["v1"] = labeled(labels, lf.v1);
    j["restricted"] = lf.restricted;
    json sup = json::array();
    for (int s : lf.support) sup.push_back(labels[s]);
    j["support"] = sup;
    if (lf.closed_form_checked) j["closed_form_discrepancy"] = lf.closed_form_discrepancy;
    if (p.k == 2) {
      UrnSpec us = urn_matrix(p);
      json ev = json::array();
      for (Eigen::Index i = 0; i < us.eigenvalues.size(); ++i) ev.push_back(us.eigenvalues(i).real());
      j["eigenvalues"] = ev;
      j["lambda2"] = us.lambda2;
    }
    return j.dump(2) + "\n";
  }
  long n = o.n ? *o.n : static_cast<long>(cfg.scalar_or("n", 0));
  if (n < 1) throw UsageError("analytics erm needs --n >= 1 or --limits");
  MomentReport r = moment_report(p, n, init, parse_method(o.method));
  auto cl = cherry_labels(p.k, ord);
  if (fmt == "csv") {
    std::ostringstream os;
    os << "section,label,value\n";
    table_rows(os, "nu", leaf_labels(p.k), r.nu);
    table_rows(os, "mu", cl, r.mu);
    if (!r.sigma2.empty()) table_rows(os, "sigma2", cl, r.sigma2);
    return os.str();
  }
  json j;
  j["model"] = "erm";
  j["n"] = n;
  j["initial"] = init;
  j["method"] = to_string(r.method);
  j["nu"] = labeled(leaf_labels(p.k), r.nu);
  j["mu"] = labeled(cl, r.mu);
  if (!r.sigma2.empty()) j["sigma2"] = labeled(cl, r.sigma2);
  if (p.k == 2) j["asymptotics_apply"] = r.asymptotics_apply;
  return j.dump(2) + "\n";
}

std::string cmd_analytics_yule(const Globals& g, const AnalyticsOpts& o) {
  std::string fmt = g.format.empty() ? "json" : g.format;
  require_format(fmt, {"csv", "json"}, "analytics");
  Config cfg = load(g);
  YuleParams yp = yule_params(cfg);
  const int k = yp.k;
  auto cl = cherry_labels(k, Ordering::generic_lex);
  auto pl = pendant_labels(k, Ordering::generic_lex);
  if (o.limits) {
    YuleLimits L = limit_fractions(yp);
    std::vector<double> w;
    for (const auto& b : L.w)
      for (Eigen::Index i = 0; i < b.size(); ++i) w.push_back(b(i));
    if (fmt == "csv") {
      std::ostringstream os;
      os << "section,label,value\n";
      table_rows(os, "lambda", {"lambda"}, {L.lambda});
      table_rows(os, "u", leaf_labels(k), to_std(L.u));
      table_rows(os, "w", cl, w);
      table_rows(os, "w_star", pl, to_std(L.w_star));
      return os.str();
    }
    json j;
    j["model"] = "yule";
    j["lambda"] = L.lambda;
    j["u"] = labeled(leaf_labels(k), L.u);
    j["w"] = labeled(cl, w);
    j["w_star"] = labeled(pl, L.w_star);
    j["identity_residual"] = L.identity_residual;
    return j.dump(2) + "\n";
  }
  double t = o.t ? *o.t : cfg.scalar_or("T", -1);
  if (t < 0) throw UsageError("analytics yule needs --t >= 0 or --limits");
  YuleMethod method = o.method == "expm" ? YuleMethod::matrix_exp : YuleMethod::ode;
  YuleMoments m = yule_moments(yp, t, initial_type(cfg, o.initial, k), method);
  if (fmt == "csv") {
    std::ostringstream os;
    os << "section,label,value\n";
    table_rows(os, "rho", {"rho"}, {m.rho});
    table_rows(os, "nu", leaf_labels(k), to_std(m.nu));
    table_rows(os, "mu", cl, to_std(m.mu));
    table_rows(os, "gamma", pl, to_std(m.gamma));
    return os.str();
  }
  json j;
  j["model"] = "yule";
  j["t"] = t;
  j["rho"] = m.rho;
  j["nu"] = labeled(leaf_labels(k), m.nu);
  j["mu"] = labeled(cl, m.mu);
  j["gamma"] = labeled(pl, m.gamma);
  if (method == YuleMethod::ode) j["max_residual"] = m.max_residual;
  return j.dump(2) + "\n";
}

std::string cmd_extinction(const Globals& g, const ExtinctionOpts& o) {
  std::string fmt = g.format.empty() ? "csv" : g.format;
  require_format(fmt, {"csv", "json"}, "extinction");
  Config cfg = load(g);
  BdParams bd = bd_params(cfg);
  double T = o.t ? *o.t : cfg.scalar_or("T", -1);
  if (T < 0) throw UsageError("extinction needs --t >= 0");
  if (o.grid < 2) throw UsageError("--grid must be at least 2");
  ExtinctionOptions opt;
  opt.grid_points = o.grid;
  ExtinctionTable tab = extinction_probabilities(bd, T, opt);
  const int k = bd.k;
  std::vector<AncestralRates> rates;
  if (o.ancestral)
    for (double t : tab.times) rates.push_back(ancestral_rates(bd, tab, t));
  if (fmt == "csv") {
    std::ostringstream os;
    os << "t";
    for (int i = 1; i <= k; ++i) os << ",p_" << i;
    if (o.ancestral)
      for (int i = 1; i <= k; ++i)
        for (int j = 1; j <= k; ++j) os << ",qb_" << i << "_" << j << (i != j ? ",qm_" + std::to_string(i) + "_" + std::to_string(j) : "");
    os << '\n';
    for (size_t m = 0; m < tab.times.size(); ++m) {
      os << num(tab.times[m]);
      for (int i = 0; i < k; ++i) os << ',' << num(tab.p[i][m]);
      if (o.ancestral)
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            os << ',' << num(rates[m].birth(i, j));
            if (i != j) os << ',' << num(rates[m].mutation(i, j));
          }
      os << '\n';
    }
    return os.str();
  }
  json j;
  j["T"] = T;
  j["times"] = tab.times;
  j["p"] = tab.p;
  j["max_residual"] = tab.max_residual;
  return j.dump(2) + "\n";
}

json yule_estimate_json(const YuleEstimate& e, int k) {
  json j;
  j["rates"] = yule_rates_json(e.rates, k);
  j["lambda"] = e.lambda;
  j["u"] = e.u;
  j["stage1_rank"] = e.stage1_rank;
  j["stage1_residual"] = e.stage1_residual;
  j["stage2_residual"] = e.stage2_residual;
  j["warnings"] = e.warnings;
  return j;
}

json p_json(const PEstimate& e) {
  json j;
  j["p"] = e.p;
  j["estimates"] = e.estimates;
  j["spread"] = e.spread;
  return j;
}

struct FractionInput {
  std::vector<Vec> w;
  Vec w_star;
  std::vector<double> r;
  std::optional<double> lambda;
  int k = 0;
};

/// Fractions from a JSON file {"w": [[..],..], "w_star": [..], "r": [..], "lambda": x},
/// or, without --input, the limiting fractions of the --config model.
FractionInput fraction_input(const Globals& g, const InferOpts& o, std::istream& in) {
  FractionInput f;
  if (!o.input.empty()) {
    json j;
    try {
      j = json::parse(read_input(o.input, in));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON input: ") + e.what(), 1, 1);
    }
    try {
      for (const auto& row : j.at("w")) {
        auto v = row.get<std::vector<double>>();
        f.w.push_back(Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
      auto ws = j.at("w_star").get<std::vector<double>>();
      f.w_star = Eigen::Map<Vec>(ws.data(), static_cast<Eigen::Index>(ws.size()));
      if (j.contains("r")) f.r = j["r"].get<std::vector<double>>();
      if (j.contains("lambda")) f.lambda = j["lambda"].get<double>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("fraction JSON needs w and w_star arrays: ") + e.what(), 1, 1);
    }
    f.k = static_cast<int>(f.w.size());
  } else {
    if (g.config.empty()) throw UsageError("give --input fractions or a --config model");
    YuleParams yp = yule_params(load(g));
    YuleLimits L = limit_fractions(yp);
    f.w = L.w;
    f.w_star = L.w_star;
    f.k = yp.k;
    for (int i = 0; i < yp.k; ++i) f.r.push_back(yp.limit().birth_total(i));
    f.lambda = L.lambda;
  }
  if (!o.r.empty()) f.r = parse_list(o.r);
  if (o.lambda) f.lambda = o.lambda;
  return f;
}

std::string cmd_infer(const Globals& g, const InferOpts& o, std::istream& in) {
  std::string fmt = g.format.empty() ? "json" : g.format;
  require_format(fmt, {"json"}, "infer");
  json j;
  j["target"] = o.target;
  if (o.target == "erm") {
    std::vector<double> x;
    if (!o.census.empty()) {
      Census c = parse_census_csv(read_input(o.census, in)).reindexed(Ordering::paper_k2);
      x.assign(c.cherry_counts.begin(), c.cherry_counts.end());
    } else if (!o.fractions.empty()) {
      x = parse_list(o.fractions);
    } else if (!g.config.empty()) {
      LimitFractions lf = limit_fractions_erm(erm_params(load(g)));
      x = to_std(lf.v1);
    } else {
      throw UsageError("infer erm needs --census, --fractions or --config");
    }
    if (x.size() == 10) x.resize(6);
    ErmEstimate e = infer_erm(x);
    j["q"] = {{"q_1_1_1", e.params.q[0][0]}, {"q_1_1_2", e.params.q[0][1]}, {"q_1_2_2", e.params.q[0][2]},
              {"q_2_1_1", e.params.q[1][0]}, {"q_2_1_2", e.params.q[1][1]}, {"q_2_2_2", e.params.q[1][2]}};
    j["block_totals"] = e.block_totals;
    SolvabilityReport s = reconstruction_solvable(x);
    j["reconstruction"] = {{"status", to_string(s.status)}, {"value", s.value}, {"threshold", s.threshold}};
    return j.dump(2) + "\n";
  }
  FractionInput f = fraction_input(g, o, in);
  if (o.target == "yule") {
    if (f.r.empty()) throw UsageError("infer yule needs per-type birth totals (--r or \"r\" in the input)");
    j["estimate"] = yule_estimate_json(infer_yule(f.w, f.w_star, f.r, f.lambda), f.k);
    return j.dump(2) + "\n";
  }
  if (f.k != 2 || f.w_star.size() != 4) fail(ErrorKind::parameter, "p estimators need k = 2 fractions");
  std::array<double, 3> w1{f.w[0](0), f.w[0](1), f.w[0](2)}, w2{f.w[1](0), f.w[1](1), f.w[1](2)};
  j["model"] = o.model;
  if (o.model == "clado") {
    PEstimate e = estimate_p_cladogenetic(w1);
    j["estimate"] = p_json(e);
    j["estimate"]["roots"] = e.roots;
    j["estimate"]["tie"] = e.tie;
  } else {
    std::array<double, 4> ws{f.w_star(0), f.w_star(1), f.w_star(2), f.w_star(3)};
    j["estimate"] = p_json(estimate_p_anagenetic(w1, w2, ws));
  }
  return j.dump(2) + "\n";
}

std::string cmd_compare(const Globals& g, const CompareOpts& o) {
  std::string fmt = g.format.empty() ? "json" : g.format;
  require_format(fmt, {"json"}, "compare");
  if (g.config.empty() || o.other.empty()) throw UsageError("compare needs --config and --other");
  YuleParams a = yule_params(load(g));
  YuleParams b = yule_params(load_config(o.other));
  ComparisonReport r = compare_models(a, b);
  json j;
  j["a1"] = r.a1;
  j["a1_prime"] = r.a1_prime;
  j["w"] = r.w;
  j["w_prime"] = r.w_prime;
  j["direction"] = r.direction;
  j["matches_claim"] = r.matches_claim;
  return j.dump(2) + "\n";
}

std::string cmd_replicate(const Globals& g, const ReplicateOpts& o) {
  std::string fmt = g.format.empty() ? "json" : g.format;
  require_format(fmt, {"csv", "json"}, "replicate");
  if (o.reps < 1) throw UsageError("--reps must be >= 1");
  Config cfg = load(g);
  std::function<TypedTree(Rng&)> grow;
  int k = 1;
  if (o.model == "erm") {
    auto p = std::make_shared<ErmParams>(erm_params(cfg));
    long n = o.n ? *o.n : static_cast<long>(cfg.scalar_or("n", 0));
    if (n < 1) throw UsageError("replicate --model erm needs --n >= 1");
    int init = initial_type(cfg, o.initial, p->k);
    k = p->k;
    grow = [p, n, init](Rng& rng) { return simulate_erm(*p, n, init, rng); };
  } else if (o.model == "yule") {
    auto yp = std::make_shared<YuleParams>(yule_params(cfg));
    YuleStop stop;
    if (o.n) stop.leaves = *o.n;
    if (o.t) stop.time = *o.t;
    if (!stop.leaves && !stop.time) throw UsageError("replicate --model yule needs --t or --n");
    int init = initial_type(cfg, o.initial, yp->k);
    k = yp->k;
    grow = [yp, stop, init](Rng& rng) { return simulate_yule(*yp, stop, init, rng); };
  } else {
    auto bd = std::make_shared<BdParams>(bd_params(cfg));
    double T = o.t ? *o.t : cfg.scalar_or("T", -1);
    if (T < 0) throw UsageError("replicate --model bd needs --t");
    int init = initial_type(cfg, o.initial, bd->k);
    k = bd->k;
    grow = [bd, T, init](Rng& rng) { return prune_to_ancestral(simulate_bd(*bd, T, init, rng, {}).tree, T); };
  }
  std::vector<std::string> names;
  if (o.stat == "census") {
    names = leaf_labels(k);
    auto cl = cherry_labels(k, Ordering::generic_lex), pl = pendant_labels(k, Ordering::generic_lex);
    names.insert(names.end(), cl.begin(), cl.end());
    names.insert(names.end(), pl.begin(), pl.end());
  } else {
    names = {o.stat};
  }
  const std::string stat = o.stat;
  const size_t dim = names.size();
  VectorStatistic fn = [grow, stat, dim](Rng& rng, long) {
    TypedTree t = grow(rng);
    std::vector<double> v;
    if (t.empty()) return std::vector<double>(dim, 0.0);
    if (stat == "leaves") return std::vector<double>{static_cast<double>(t.num_leaves())};
    if (stat == "unary") return std::vector<double>{static_cast<double>(t.count_kind(NodeKind::unary))};
    Census c = census(t);
    if (stat == "cherries") return std::vector<double>{static_cast<double>(c.total_cherries())};
    if (stat == "pendants") return std::vector<double>{static_cast<double>(c.total_pendants())};
    for (auto x : c.leaf_counts) v.push_back(static_cast<double>(x));
    for (auto x : c.cherry_counts) v.push_back(static_cast<double>(x));
    for (auto x : c.pendant_counts) v.push_back(static_cast<double>(x));
    return v;
  };
  ReplicateOptions ro;
  ro.reps = o.reps;
  ro.base_seed = g.seed;
  ro.jobs = g.jobs;
  ro.keep_values = fmt == "csv";
  auto summaries = run_replicates(fn, dim, ro);
  if (fmt == "csv") {
    std::ostringstream os;
    write_replicate_csv(os, names, summaries);
    return os.str();
  }
  json j;
  j["model"] = o.model;
  j["stat"] = o.stat;
  j["reps"] = o.reps;
  j["seed"] = g.seed;
  j["failures"] = summaries.front().failures;
  json stats = json::object();
  for (size_t i = 0; i < dim; ++i) {
    const auto& s = summaries[i];
    json e;
    e["mean"] = s.mean;
    e["variance"] = s.variance;
    e["std_error"] = s.std_error ? json(*s.std_error) : json(nullptr);
    stats[names[i]] = e;
  }
  j["stats"] = stats;
  if (!summaries.front().failure_messages.empty()) j["failure_messages"] = summaries.front().failure_messages;
  return j.dump(2) + "\n";
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage:
    case ErrorKind::parse: return Exit::usage;
    case ErrorKind::numerical: return Exit::numerical;
    default: return Exit::model;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-type tree shape simulation, analytics and inference", "typetree"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed (all randomness derives from it)");
  app.add_option("--config", g.config, "Parameter file (key = value lines)");
  app.add_option("--out", g.out, "Write data to this file instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json", "newick"}));
  app.add_option("--jobs", g.jobs, "Worker threads for replicate runs")->check(CLI::PositiveNumber);

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one tree");
  simulate->add_option("model", sim.model, "erm, yule or bd")->required()->check(CLI::IsMember({"erm", "yule", "bd"}));
  simulate->add_option("--n", sim.n, "Number of leaves");
  simulate->add_option("--t", sim.t, "Time horizon");
  simulate->add_option("--initial", sim.initial, "Initial type (1-based)");
  simulate->add_flag("--prune", sim.prune, "bd: output the ancestral tree");

  TreeOpts tree_opts;
  auto* prune = app.add_subcommand("prune", "Prune a full birth-death tree to its ancestral tree");
  prune->add_option("--tree", tree_opts.tree, "Newick file ('-' or absent: stdin)");
  prune->add_option("--t", tree_opts.t, "Horizon (default: latest node time)");
  prune->add_option("--k", tree_opts.k, "Number of types (default: inferred)");

  auto* census_cmd = app.add_subcommand("census", "Count leaves, cherries and pendants of a tree");
  census_cmd->add_option("--tree", tree_opts.tree, "Newick file ('-' or absent: stdin)");
  census_cmd->add_option("--k", tree_opts.k, "Number of types (default: inferred)");
  census_cmd->add_option("--ordering", tree_opts.ordering, "json cherry order")
      ->check(CLI::IsMember({"default", "generic_lex", "paper_k2"}));

  AnalyticsOpts an;
  auto* analytics = app.add_subcommand("analytics", "Exact moments and limiting fractions");
  analytics->add_option("model", an.model, "erm or yule")->required()->check(CLI::IsMember({"erm", "yule"}));
  auto* lim = analytics->add_flag("--limits", an.limits, "Limiting fractions");
  analytics->add_option("--n", an.n, "erm: number of leaves")->excludes(lim);
  analytics->add_option("--t", an.t, "yule: time")->excludes(lim);
  analytics->add_option("--initial", an.initial, "Initial type (1-based)");
  analytics->add_option("--method", an.method, "erm: auto|closed|recurrence; yule: ode|expm")
      ->check(CLI::IsMember({"auto", "closed", "recurrence", "ode", "expm"}));

  ExtinctionOpts ex;
  auto* extinction = app.add_subcommand("extinction", "Extinction probabilities of a birth-death process");
  extinction->add_option("--t", ex.t, "Horizon T");
  extinction->add_option("--grid", ex.grid, "Number of grid times");
  extinction->add_flag("--ancestral", ex.ancestral, "Add reconstructed-process rates");

  InferOpts inf;
  auto* infer = app.add_subcommand("infer", "Estimate parameters from fractions");
  infer->add_option("target", inf.target, "erm, yule or p")->required()->check(CLI::IsMember({"erm", "yule", "p"}));
  infer->add_option("--model", inf.model, "p: clado or ana")->check(CLI::IsMember({"clado", "ana"}));
  infer->add_option("--census", inf.census, "erm: census CSV file");
  infer->add_option("--fractions", inf.fractions, "erm: comma-separated cherry fractions (C1_11,C1_12,C1_22,C2_22,C2_12,C2_11)");
  infer->add_option("--input", inf.input, "yule/p: JSON with w, w_star (and optionally r, lambda)");
  infer->add_option("--r", inf.r, "yule: comma-separated per-type birth totals");
  infer->add_option("--lambda", inf.lambda, "yule: growth rate");

  CompareOpts cmp;
  auto* compare = app.add_subcommand("compare", "Compare two mutation-free two-type models");
  compare->add_option("--other", cmp.other, "Second model config")->required();

  ReplicateOpts rep;
  auto* replicate = app.add_subcommand("replicate", "Monte Carlo summary of a tree statistic");
  replicate->add_option("--model", rep.model, "erm, yule or bd")->check(CLI::IsMember({"erm", "yule", "bd"}));
  replicate->add_option("--stat", rep.stat, "leaves, cherries, pendants, unary or census")
      ->check(CLI::IsMember({"leaves", "cherries", "pendants", "unary", "census"}));
  replicate->add_option("--n", rep.n, "Leaves per tree");
  replicate->add_option("--t", rep.t, "Time horizon");
  replicate->add_option("--reps", rep.reps, "Number of replicates");
  replicate->add_option("--initial", rep.initial, "Initial type (1-based)");

  std::vector<const char*> argv{"typetree"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return Exit::usage;
  }

  std::string result;
  try {
    if (infer->parsed() && inf.target == "p" && inf.model.empty())
      throw UsageError("infer p needs --model clado|ana");
    if (simulate->parsed()) result = cmd_simulate(g, sim);
    else if (prune->parsed()) result = cmd_prune(g, tree_opts, in);
    else if (census_cmd->parsed()) result = cmd_census(g, tree_opts, in);
    else if (analytics->parsed())
      result = an.model == "erm" ? cmd_analytics_erm(g, an) : cmd_analytics_yule(g, an);
    else if (extinction->parsed()) result = cmd_extinction(g, ex);
    else if (infer->parsed()) result = cmd_infer(g, inf, in);
    else if (compare->parsed()) result = cmd_compare(g, cmp);
    else result = cmd_replicate(g, rep);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return Exit::usage;
  } catch (const NonIdentifiableError& e) {
    json j;
    j["error"] = e.what();
    j["null_space"] = e.null_space();
    err << "error: " << e.what() << "\n" << j.dump(2) << "\n";
    return Exit::model;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << " (line " << e.line() << ", column " << e.column() << ")\n";
    return Exit::usage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return Exit::numerical;
  }

  if (g.out.empty()) {
    out << result;
  } else {
    std::ofstream f(g.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << g.out << "'\n";
      return Exit::usage;
    }
    f << result;
  }
  return Exit::ok;
}

}  // namespace typetree::cli
