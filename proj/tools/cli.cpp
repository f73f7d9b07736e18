#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uip/bounds.hpp"
#include "uip/bundling.hpp"
#include "uip/errors.hpp"
#include "uip/instance_io.hpp"
#include "uip/parallel.hpp"
#include "uip/pricing.hpp"
#include "uip/rng.hpp"
#include "uip/simulator.hpp"

namespace uip::cli {

namespace {

using nlohmann::json;
using model::BundleOption;
using model::MarketInstance;
using model::OptionSet;

struct Options {
  std::string command;
  std::string instance;
  std::string scenario;
  std::string L = "5";
  std::string lambda = "10";
  double mu = 0.1;
  double beta_p = -1.0;
  double quality_scale = 1.0;
  int ks = -1;
  int kb = -1;
  int seeds = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  int threads = 0;
  std::string set;
  std::string lambda_grid = "0.5:50:log";
  int n_gen = 50;
  int n_eval = 10;
  std::string value_kind = "dfa";
  std::string config;
  std::string regions;
  std::string coeffs;
  std::string framework;
  std::string bundling;
  std::string pricing;
  std::string choice;
  int replications = 0;
  int horizon = 0;

  json to_json() const {
    return {{"command", command},   {"instance", instance},
            {"scenario", scenario}, {"L", L},
            {"lambda", lambda},     {"mu", mu},
            {"beta_p", beta_p},     {"quality_scale", quality_scale},
            {"ks", ks},             {"kb", kb},
            {"seeds", seeds},       {"seed", seed},
            {"set", set},           {"lambda_grid", lambda_grid},
            {"n_gen", n_gen},       {"n_eval", n_eval},
            {"value", value_kind},  {"config", config},
            {"regions", regions},   {"coeffs", coeffs},
            {"framework", framework}, {"bundling", bundling},
            {"pricing", pricing},   {"choice", choice},
            {"replications", replications}, {"horizon", horizon}};
  }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json extra = json::object();
};

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
    return buf;
  }
  return v.is_null() ? "" : v.dump();
}

std::string spec_hash(const Options& o) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(o.to_json().dump())));
  return buf;
}

std::string provenance(const Options& o) {
  return std::string("# uip ") + kVersion + " command=" + o.command + " seed=" + std::to_string(o.seed) +
         " spec=" + spec_hash(o);
}

std::string render(const Table& t, const Options& o) {
  std::ostringstream os;
  if (o.format == "json") {
    json j;
    j["provenance"] = {{"version", kVersion}, {"command", o.command}, {"seed", o.seed}, {"spec", spec_hash(o)}};
    j["rows"] = json::array();
    for (const auto& r : t.rows) {
      json row = json::object();
      for (std::size_t c = 0; c < t.columns.size(); ++c) row[t.columns[c]] = r[c];
      j["rows"].push_back(row);
    }
    for (const auto& [k, v] : t.extra.items()) j[k] = v;
    os << j.dump(2) << '\n';
    return os.str();
  }
  os << provenance(o) << '\n';
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << cell(r[c]);
    os << '\n';
  }
  return os.str();
}

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + o.out);
  f << text;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_same_v<T, int>) v.push_back(std::stoi(tok, &used));
      else v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad value in --") + what + ": " + tok);
    }
  }
  if (v.empty()) throw ConfigError(std::string("--") + what + " is empty");
  return v;
}

/// "a:b:log", "a:b:log:n" or "a:b:lin:n".
std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() < 3 || parts.size() > 4) throw ConfigError("grid must look like a:b:log[:n]");
  const double a = std::stod(parts[0]), b = std::stod(parts[1]);
  const int n = parts.size() == 4 ? std::stoi(parts[3]) : 25;
  if (!(a > 0.0 && b > a) || n < 2) throw ConfigError("grid needs 0 < a < b and at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double x = static_cast<double>(k) / (n - 1);
    if (parts[2] == "log") g[static_cast<std::size_t>(k)] = a * std::pow(b / a, x);
    else if (parts[2] == "lin") g[static_cast<std::size_t>(k)] = a + (b - a) * x;
    else throw ConfigError("grid spacing must be log or lin");
  }
  return g;
}

struct Case {
  std::string source;
  std::uint64_t seed = 0;
  int L = 0;
  double lambda = 0.0;
  MarketInstance instance;
};

/// The instance file, or one synthetic instance per (L, lambda, seed).
std::vector<Case> cases(const Options& o, const std::string& default_scenario, int default_ks, int default_kb) {
  std::vector<Case> out;
  auto apply_caps = [&](MarketInstance& m) {
    if (o.ks >= 0) m.max_bundles = o.ks;
    if (o.kb >= 0) m.max_bundle_size = o.kb;
  };
  if (!o.instance.empty()) {
    Case c;
    c.source = o.instance;
    c.instance = io::load_instance(o.instance);
    apply_caps(c.instance);
    c.L = static_cast<int>(c.instance.item_count());
    c.lambda = c.instance.demand;
    out.push_back(std::move(c));
    return out;
  }
  const std::string scenario = o.scenario.empty() ? default_scenario : o.scenario;
  for (int L : parse_list<int>(o.L, "L")) {
    if (L < 1) throw ConfigError("--L must be positive");
    for (double lambda : parse_list<double>(o.lambda, "lambda")) {
      for (int s = 0; s < o.seeds; ++s) {
        model::SyntheticParams p;
        p.demand = lambda;
        p.arrival_prob = o.mu;
        p.beta_p = o.beta_p;
        p.max_bundles = o.ks >= 0 ? o.ks : default_ks;
        p.max_bundle_size = o.kb >= 0 ? o.kb : default_kb;
        Case c;
        c.source = scenario;
        c.seed = o.seed + static_cast<std::uint64_t>(s);
        c.L = L;
        c.lambda = lambda;
        c.instance = model::generate_synthetic(c.seed, static_cast<std::size_t>(L), scenario, o.quality_scale, p);
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

Table cmd_exact(const Options& o) {
  Table t{{"source", "seed", "L", "lambda", "horizon", "set", "value"}, {}, {}};
  const auto cs = cases(o, "A", 0, 1);
  std::vector<double> values(cs.size());
  std::vector<OptionSet> sets(cs.size());
  for (std::size_t k = 0; k < cs.size(); ++k) {
    sets[k] = o.set.empty() ? OptionSet::singletons(cs[k].instance.item_count()) : OptionSet::from_encoding(o.set);
    sets[k].validate(cs[k].instance.item_count(), cs[k].instance.max_bundles, cs[k].instance.max_bundle_size);
  }
  parallel_for(cs.size(), [&](std::size_t k) { values[k] = pricing::exact_dp(cs[k].instance, sets[k]).value(); });
  for (std::size_t k = 0; k < cs.size(); ++k)
    t.rows.push_back({cs[k].source, cs[k].seed, cs[k].L, cs[k].lambda, cs[k].instance.horizon(), sets[k].encoding(),
                      values[k]});
  return t;
}

Table cmd_bounds_table(const Options& o) {
  static const char* kinds[] = {"fluid", "upper", "dfa", "lower", "static"};
  Table t{{"kind", "L", "lambda", "mean_rel_err", "seeds"}, {}, {}};
  const auto cs = cases(o, "bounds-two-type", 0, 1);
  std::vector<std::array<double, 5>> err(cs.size());
  parallel_for(cs.size(), [&](std::size_t k) {
    const auto& inst = cs[k].instance;
    const auto S = OptionSet::singletons(inst.item_count());
    const double v = pricing::exact_dp(inst, S).value();
    const double b[5] = {bounds::fluid(inst, S).value, bounds::backward_upper(inst, S).value,
                         bundling::dfa_under_upper(inst, S).value, bounds::backward_lower(inst, S).value,
                         bounds::static_bound(inst, S).value};
    for (int i = 0; i < 5; ++i) err[k][static_cast<std::size_t>(i)] = (b[i] - v) / v;
  });
  // Cases come grouped by (L, lambda) with `seeds` consecutive entries.
  const std::size_t group = o.instance.empty() ? static_cast<std::size_t>(o.seeds) : 1;
  for (std::size_t g = 0; g < cs.size(); g += group) {
    for (std::size_t i = 0; i < 5; ++i) {
      double m = 0.0;
      for (std::size_t k = g; k < g + group; ++k) m += err[k][i];
      t.rows.push_back({kinds[i], cs[g].L, cs[g].lambda, m / static_cast<double>(group), group});
    }
  }
  return t;
}

MarketInstance figure1_instance(double mu, double beta_p) {
  MarketInstance m;
  for (int i = 0; i < 3; ++i) m.items.push_back(model::Item{i, 0.0});
  m.customer = io::table_customer({{"0", {1.0}}, {"1", {1.5}}, {"2", {2.5}}, {"0-1", {3.0}}, {"1-2", {4.0}}}, {1.0},
                                  beta_p);
  m.arrival_prob = mu;
  m.max_bundles = 1;
  m.max_bundle_size = 2;
  return m;
}

Table cmd_figure1(const Options& o) {
  Table t{{"lambda", "V_S0", "V_S1", "V_S2", "best"}, {}, {}};
  const auto grid = parse_grid(o.lambda_grid);
  const auto base = figure1_instance(o.mu, o.beta_p);
  const OptionSet sets[3] = {OptionSet::singletons(3), OptionSet::from_encoding("0-1|2"),
                             OptionSet::from_encoding("0|1-2")};
  std::vector<std::array<double, 3>> v(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    const auto inst = base.with_demand(grid[k]);
    for (std::size_t s = 0; s < 3; ++s) v[k][s] = pricing::exact_dp(inst, sets[s]).value();
  });
  const double sign = o.beta_p < 0.0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < 3; ++s)
      if (sign * v[k][s] > sign * v[k][best]) best = s;
    t.rows.push_back({grid[k], v[k][0], v[k][1], v[k][2], "S" + std::to_string(best)});
  }
  return t;
}

Table cmd_bundle(const Options& o) {
  Table t{{"source", "seed", "L", "lambda", "set", "bundles", "v_dfa", "v_dfa_singletons", "z_star", "gap",
           "iterations", "pool"},
          {},
          {}};
  const auto cs = cases(o, "A", 3, 3);
  bundling::ColumnGenConfig cfg;
  cfg.n_gen = o.n_gen;
  cfg.n_eval = o.n_eval;
  if (cfg.n_gen < 0 || cfg.n_eval < 1) throw ConfigError("--n-gen must be >= 0 and --n-eval >= 1");
  t.extra["traces"] = json::array();
  for (const auto& c : cs) {
    const auto r = bundling::column_generation(c.instance, cfg);
    const double base = bundling::dfa_under_upper(c.instance, OptionSet::singletons(c.instance.item_count())).value;
    const auto z = bundling::best_upper_bound_partition(c.instance);
    t.rows.push_back({c.source, c.seed, c.L, c.lambda, r.set.encoding(), r.set.bundle_count(), r.dfa.value, base,
                      z.z_star, bundling::optimality_gap(c.instance, z.z_star, r.dfa.value), r.trace.iterations.size(),
                      r.trace.pool_size});
    t.extra["traces"].push_back(r.trace.to_json());
  }
  return t;
}

Table cmd_greedy(const Options& o) {
  Table t{{"source", "seed", "L", "lambda", "value_kind", "set", "bundles", "v_dfa", "z_star", "gap"}, {}, {}};
  const auto kind = bundling::parse_value_kind(o.value_kind);
  const auto cs = cases(o, "A", 3, 3);
  for (const auto& c : cs) {
    const auto s = bundling::greedy_bundle(c.instance, kind);
    const double v = bundling::dfa_under_upper(c.instance, s).value;
    const auto z = bundling::best_upper_bound_partition(c.instance);
    t.rows.push_back({c.source, c.seed, c.L, c.lambda, bundling::to_string(kind), s.encoding(), s.bundle_count(), v,
                      z.z_star, bundling::optimality_gap(c.instance, z.z_star, v)});
  }
  return t;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

std::string cmd_simulate(const Options& o) {
  freight::SimConfig cfg = o.config.empty() ? freight::SimConfig{} : freight::SimConfig::from_json(read_json(o.config));
  json overrides = json::object();
  if (!o.framework.empty()) overrides["framework"] = o.framework;
  if (!o.bundling.empty()) overrides["bundling"] = o.bundling;
  if (!o.pricing.empty()) overrides["pricing"] = o.pricing;
  if (!o.choice.empty()) overrides["choice_mode"] = o.choice;
  if (o.replications > 0) overrides["replications"] = o.replications;
  if (o.horizon > 0) overrides["horizon_periods"] = o.horizon;
  overrides["seed"] = o.seed;
  auto merged = cfg.to_json();
  merged.update(overrides);
  cfg = freight::SimConfig::from_json(merged);
  const auto regions =
      o.regions.empty() ? freight::RegionModel::default_model() : freight::RegionModel::from_json(read_json(o.regions));
  const auto coeffs = o.coeffs.empty() ? freight::FreightCoeffs::default_coeffs()
                                       : freight::FreightCoeffs::from_json(read_json(o.coeffs));
  const auto m = freight::simulate(cfg, coeffs, regions);
  if (o.format == "json") {
    json j = m.to_json();
    j["provenance"] = {{"version", kVersion}, {"command", o.command}, {"seed", o.seed}, {"spec", spec_hash(o)}};
    j["config"] = cfg.to_json();
    return j.dump(2) + "\n";
  }
  return provenance(o) + "\n" + m.to_csv();
}

Table cmd_condition_scatter(const Options& o) {
  Table t{{"seed", "lambda", "bundle_size", "delta_kappa", "threshold", "predicted", "improvement", "improved"}, {}, {}};
  const int L = 5;
  std::vector<std::vector<json>> rows(static_cast<std::size_t>(o.seeds));
  parallel_for(rows.size(), [&](std::size_t k) {
    const std::uint64_t seed = o.seed + k;
    Rng rng(substream_seed(seed, "instance-gen"));
    const double lambda = std::exp(rng.uniform(std::log(1.0), std::log(100.0)));
    const int size = rng.bernoulli(0.5) ? 2 : 3;
    std::vector<int> order{0, 1, 2, 3, 4};
    for (int i = L - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[rng.next() % (i + 1)]);
    const std::vector<int> members(order.begin(), order.begin() + size);
    const double mult = rng.uniform(0.5, 1.5);

    const auto base = model::generate_synthetic(seed, L, o.scenario.empty() ? "A" : o.scenario, o.quality_scale);
    std::map<std::string, std::vector<double>> table;
    for (int i = 0; i < L; ++i) table[BundleOption{i}.key()] = base.customer.qualities(BundleOption{i});
    std::vector<double> qb(base.customer.type_count(), 0.0);
    for (int i : members)
      for (std::size_t w = 0; w < qb.size(); ++w) qb[w] += base.customer.quality(BundleOption{i}, static_cast<int>(w));
    for (auto& q : qb) q *= mult;
    const BundleOption bundle(members);
    table[bundle.key()] = qb;

    MarketInstance inst;
    inst.items = base.items;
    inst.customer = io::table_customer(table, base.customer.pmf(), o.beta_p);
    inst.arrival_prob = o.mu;
    inst.demand = lambda;
    inst.max_bundles = 1;
    inst.max_bundle_size = size;
    OptionSet S;
    S.options.push_back(bundle);
    for (int i = 0; i < L; ++i)
      if (!bundle.contains(i)) S.options.push_back(BundleOption{i});
    const auto S0 = OptionSet::singletons(L);
    const auto cond = pricing::bundling_condition(inst.customer, S, S0, lambda);
    const double imp = pricing::exact_dp(inst, S).value() - pricing::exact_dp(inst, S0).value();
    const double sign = o.beta_p < 0.0 ? 1.0 : -1.0;
    rows[k] = {seed, lambda, size, cond.delta_kappa, cond.threshold, cond.satisfied, imp, sign * imp > 0.0};
  });
  t.rows = std::move(rows);
  return t;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--instance", o.instance, "instance JSON file (overrides the synthetic generator)");
  sub->add_option("--scenario", o.scenario, "synthetic scenario: A, B, C or bounds-two-type");
  sub->add_option("--L", o.L, "item counts, comma separated");
  sub->add_option("--lambda", o.lambda, "demand levels, comma separated");
  sub->add_option("--mu", o.mu, "per-period arrival probability");
  sub->add_option("--beta-p", o.beta_p, "price sensitivity");
  sub->add_option("--quality-scale", o.quality_scale, "scale of synthetic qualities");
  sub->add_option("--ks", o.ks, "maximum number of bundles");
  sub->add_option("--kb", o.kb, "maximum bundle size");
  sub->add_option("--seeds", o.seeds, "number of seeds")->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "base seed");
  sub->add_option("--out", o.out, "output file (default: stdout)");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--threads", o.threads, "worker threads (0: all cores; UIP_THREADS overrides)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pricing and bundling of unique items under multinomial logit demand"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* exact = app.add_subcommand("exact", "exact optimal expected revenue of an option set");
  exact->add_option("--set", o.set, "option set, e.g. 0-1|2 (default: all singletons)");
  auto* bt = app.add_subcommand("bounds-table", "mean relative error of every bound against the exact value");
  auto* fig = app.add_subcommand("figure1", "revenue of three option sets over a demand grid");
  fig->add_option("--lambda-grid", o.lambda_grid, "a:b:log[:n] or a:b:lin:n");
  auto* bundle = app.add_subcommand("bundle", "column-generation bundling");
  bundle->add_option("--n-gen", o.n_gen, "maximum generated columns");
  bundle->add_option("--n-eval", o.n_eval, "partitions evaluated at the end");
  auto* greedy = app.add_subcommand("greedy", "greedy bundling");
  greedy->add_option("--value", o.value_kind, "dfa, upper, fluid or static");
  auto* sim = app.add_subcommand("simulate", "freight marketplace simulation");
  sim->add_option("--config", o.config, "simulation config JSON");
  sim->add_option("--regions", o.regions, "region model JSON");
  sim->add_option("--coeffs", o.coeffs, "carrier choice coefficients JSON");
  sim->add_option("--framework", o.framework, "no_bundle, rolling_horizon or personalized");
  sim->add_option("--bundling", o.bundling, "greedy or min_empty_miles");
  sim->add_option("--pricing", o.pricing, "linear or custom");
  sim->add_option("--choice", o.choice, "mnl or sequential_logit");
  sim->add_option("--replications", o.replications, "replication count");
  sim->add_option("--horizon", o.horizon, "periods with new supply");
  auto* scatter = app.add_subcommand("condition-scatter", "bundling condition against the observed improvement");
  for (auto* s : {exact, bt, fig, bundle, greedy, sim, scatter}) add_common(s, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (const char* env = std::getenv("UIP_THREADS")) o.threads = std::atoi(env);
    set_default_threads(o.threads);
    o.command = app.get_subcommands().front()->get_name();
    std::string text;
    if (o.command == "exact") text = render(cmd_exact(o), o);
    else if (o.command == "bounds-table") text = render(cmd_bounds_table(o), o);
    else if (o.command == "figure1") text = render(cmd_figure1(o), o);
    else if (o.command == "bundle") text = render(cmd_bundle(o), o);
    else if (o.command == "greedy") text = render(cmd_greedy(o), o);
    else if (o.command == "simulate") text = cmd_simulate(o);
    else text = render(cmd_condition_scatter(o), o);
    emit(text, o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace uip::cli
