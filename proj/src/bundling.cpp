#include "uip/bundling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "uip/errors.hpp"
#include "uip/numerics.hpp"
#include "uip/optim.hpp"
#include "uip/parallel.hpp"

namespace uip::bundling {

namespace {

/// Every feasible option with its backward-upper recursion, in canonical sign.
class Catalog {
 public:
  explicit Catalog(const MarketInstance& instance) {
    options_ = model::enumerate_options(instance);
    table_ = model::tabulate(instance, options_);
    r_.resize(options_.size());
    tau_.resize(options_.size());
    parallel_for(options_.size(), [&](std::size_t i) { r_[i] = bounds::option_upper(table_, i, &tau_[i]); });
    for (std::size_t i = 0; i < options_.size(); ++i) index_[options_[i]] = i;
    const std::size_t L = instance.item_count();
    singleton_.resize(L);
    for (std::size_t l = 0; l < L; ++l) singleton_[l] = index_.at(BundleOption{static_cast<int>(l)});
  }

  const std::vector<BundleOption>& options() const { return options_; }
  const model::OptionTable& table() const { return table_; }
  double r(std::size_t i) const { return r_[i]; }
  std::size_t index(const BundleOption& o) const { return index_.at(o); }
  std::size_t singleton(std::size_t item) const { return singleton_[item]; }

  /// Canonical DFA value of the given options under their tau^U columns.
  double dfa(const std::vector<std::size_t>& members, std::vector<double>* availability = nullptr) const {
    model::OptionTable sub;
    sub.pmf = table_.pmf;
    sub.beta = table_.beta;
    sub.sign = table_.sign;
    sub.mu = table_.mu;
    sub.horizon = table_.horizon;
    const std::size_t K = table_.types(), n = members.size();
    const auto T = static_cast<std::size_t>(table_.horizon);
    std::vector<double> tau(T * n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = members[k];
      sub.options.push_back(options_[i]);
      sub.salvage.push_back(table_.salvage[i]);
      for (std::size_t w = 0; w < K; ++w) sub.quality.push_back(table_.q(i, w));
      for (std::size_t t = 0; t < T; ++t) tau[t * n + k] = tau_[i][t];
    }
    return bounds::dfa_value(sub, tau, availability);
  }

  std::vector<std::size_t> members(const OptionSet& set) const {
    std::vector<std::size_t> m;
    for (const auto& o : set.options) m.push_back(index(o));
    return m;
  }

  bounds::BoundResult dfa_result(const OptionSet& set) const {
    const auto m = members(set);
    bounds::BoundResult res;
    res.kind = bounds::BoundKind::dfa;
    res.value = table_.sign * dfa(m, &res.availability);
    std::vector<std::vector<double>> cols;
    for (std::size_t i : m) {
      cols.push_back(tau_[i]);
      for (double& p : cols.back()) p *= table_.sign;
    }
    auto traj = bounds::PriceTrajectory::from_columns(cols, table_.horizon);
    std::vector<double> salvage;
    for (std::size_t i : m) salvage.push_back(table_.salvage[i]);
    traj.homogeneous = true;
    traj.monotone_ok = bounds::check_monotone(traj, salvage, table_.sign);
    res.status = traj.monotone_ok ? bounds::BoundStatus::certified : bounds::BoundStatus::uncertified;
    res.trajectory = std::move(traj);
    return res;
  }

 private:
  std::vector<BundleOption> options_;
  model::OptionTable table_;
  std::vector<double> r_;
  std::vector<std::vector<double>> tau_;
  std::map<BundleOption, std::size_t> index_;
  std::vector<std::size_t> singleton_;
};

OptionSet set_from(const std::vector<BundleOption>& options, const std::vector<int>& chosen) {
  OptionSet s;
  for (int k : chosen) s.options.push_back(options[static_cast<std::size_t>(k)]);
  return s.canonical();
}

/// Picks the best (value, set) with ties going to fewer bundles, then the smaller encoding.
bool better(double v, const OptionSet& s, double best_v, const OptionSet& best_s) {
  const double tol = 1e-12 * std::max(1.0, std::abs(best_v));
  if (v > best_v + tol) return true;
  if (v < best_v - tol) return false;
  if (s.bundle_count() != best_s.bundle_count()) return s.bundle_count() < best_s.bundle_count();
  return s.encoding() < best_s.encoding();
}

}  // namespace

nlohmann::json ColumnGenTrace::to_json() const {
  nlohmann::json j;
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : iterations)
    j["iterations"].push_back({{"option", it.option.key()},
                               {"perturbed_reduced_cost", it.perturbed},
                               {"delta", it.delta},
                               {"reduced_cost", it.reduced},
                               {"master_objective", it.master_objective}});
  j["master_objectives"] = master_objectives;
  j["evaluated_sets"] = nlohmann::json::array();
  for (const auto& [set, v] : evaluated_sets) j["evaluated_sets"].push_back({{"set", set.encoding()}, {"dfa", v}});
  j["pool_size"] = pool_size;
  return j;
}

ColumnGenResult column_generation(const MarketInstance& instance, const ColumnGenConfig& config) {
  if (config.n_gen < 0 || config.n_eval < 1) throw ConfigError("column generation needs n_gen >= 0 and n_eval >= 1");
  instance.validate();
  const Catalog cat(instance);
  const std::size_t L = instance.item_count();
  const auto& options = cat.options();
  const double sign = cat.table().sign;

  std::vector<std::size_t> base_members(L);
  for (std::size_t l = 0; l < L; ++l) base_members[l] = cat.singleton(l);
  const double dfa0 = cat.dfa(base_members);
  double upper0 = 0.0;
  for (std::size_t l = 0; l < L; ++l) upper0 += cat.r(cat.singleton(l));

  ColumnGenResult out;
  const OptionSet baseline = OptionSet::singletons(L);

  // Master P_LP over the pool: item rows (=1), one cardinality row over bundles (<= K_s).
  const bool bundles_possible = instance.max_bundles > 0 && instance.max_bundle_size > 1;
  std::vector<std::size_t> pool = base_members;
  std::vector<double> rewards(L, 0.0);
  std::vector<char> in_pool(options.size(), 0);
  for (std::size_t i : pool) in_pool[i] = 1;

  optim::LinearProgram master;
  for (std::size_t l = 0; l < L; ++l) master.constraints.push_back({{}, optim::Relation::eq, 1.0});
  master.constraints.push_back({{}, optim::Relation::le, static_cast<double>(instance.max_bundles)});
  auto add_column = [&](std::size_t i, double reward) {
    master.add_variable(reward, 0.0, 1.0);
    for (int l : options[i].items()) master.constraints[static_cast<std::size_t>(l)].coeffs.back() = 1.0;
    if (options[i].is_bundle()) master.constraints[L].coeffs.back() = 1.0;
  };
  for (std::size_t i : pool) add_column(i, 0.0);

  optim::LpBasis basis;
  bool warm = false;
  const std::size_t limit = L + static_cast<std::size_t>(config.n_gen);
  while (bundles_possible && pool.size() < limit) {
    const auto sol = optim::simplex_solve(master, warm ? &basis : nullptr);
    if (sol.status != optim::LpStatus::optimal) throw NumericalFailure("column generation master is not optimal");
    basis = sol.basis;
    warm = true;
    out.trace.master_objectives.push_back(sol.objective);
    const double mu_ks = sol.duals[L];

    std::size_t best = options.size();
    double best_pert = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < options.size(); ++i) {
      if (in_pool[i] || !options[i].is_bundle()) continue;
      double upper_i = upper0 + cat.r(i), duals = mu_ks;
      for (int l : options[i].items()) {
        upper_i -= cat.r(cat.singleton(static_cast<std::size_t>(l)));
        duals += sol.duals[static_cast<std::size_t>(l)];
      }
      const double pert = upper_i - dfa0 - duals;
      if (pert > best_pert) {
        best_pert = pert;
        best = i;
      }
    }
    if (best == options.size() || !(best_pert > 0.0)) break;

    std::vector<std::size_t> members;
    for (std::size_t l = 0; l < L; ++l)
      if (!options[best].contains(static_cast<int>(l))) members.push_back(cat.singleton(l));
    members.push_back(best);
    const double delta = cat.dfa(members) - dfa0;
    double duals = mu_ks;
    for (int l : options[best].items()) duals += sol.duals[static_cast<std::size_t>(l)];
    out.trace.iterations.push_back({options[best], best_pert, delta, delta - duals, sol.objective});

    pool.push_back(best);
    rewards.push_back(delta);
    in_pool[best] = 1;
    add_column(best, delta);
  }
  if (bundles_possible && warm) {
    const auto sol = optim::simplex_solve(master, &basis);
    out.trace.master_objectives.push_back(sol.objective);
  }
  out.trace.pool_size = pool.size();

  // Top partitions of the integer master over the pool, plus the baseline.
  std::vector<OptionSet> candidates;
  if (bundles_possible && pool.size() > L) {
    optim::SetPartitionMilp milp;
    milp.item_count = L;
    milp.max_bundles = instance.max_bundles;
    for (std::size_t k = 0; k < pool.size(); ++k) milp.options.push_back(options[pool[k]]);
    milp.rewards = rewards;
    for (const auto& s : optim::enumerate_top_solutions(milp, static_cast<std::size_t>(config.n_eval)))
      candidates.push_back(set_from(milp.options, s.chosen()));
  }
  if (config.include_baseline || candidates.empty()) {
    if (std::find(candidates.begin(), candidates.end(), baseline.canonical()) == candidates.end())
      candidates.push_back(baseline.canonical());
  }
  std::vector<double> values(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t c) { values[c] = cat.dfa(cat.members(candidates[c])); });

  std::size_t arg = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    out.trace.evaluated_sets.emplace_back(candidates[c], sign * values[c]);
    if (c > 0 && better(values[c], candidates[c], values[arg], candidates[arg])) arg = c;
  }
  out.set = candidates[arg];
  out.dfa = cat.dfa_result(out.set);
  out.dfa.value = sign * values[arg];
  return out;
}

ValueKind parse_value_kind(const std::string& name) {
  if (name == "dfa") return ValueKind::dfa;
  if (name == "upper") return ValueKind::upper;
  if (name == "fluid") return ValueKind::fluid;
  if (name == "static") return ValueKind::static_approx;
  throw ConfigError("unknown value kind: " + name);
}

std::string to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::dfa: return "dfa";
    case ValueKind::upper: return "upper";
    case ValueKind::fluid: return "fluid";
    case ValueKind::static_approx: return "static";
  }
  return "unknown";
}

std::vector<double> item_marginals(const MarketInstance& instance, ValueKind kind) {
  const std::size_t L = instance.item_count();
  const double sign = instance.sign();
  std::vector<double> out(L);
  if (kind == ValueKind::upper) {
    const auto u = bounds::backward_upper(instance, OptionSet::singletons(L));
    for (std::size_t l = 0; l < L; ++l) out[l] = sign * u.per_option[l];
    return out;
  }
  auto value = [&](const OptionSet& s) -> double {
    if (s.size() == 0) return 0.0;
    switch (kind) {
      case ValueKind::dfa: return sign * dfa_under_upper(instance, s).value;
      case ValueKind::fluid: return sign * bounds::fluid(instance, s).value;
      default: return sign * bounds::static_bound(instance, s).value;
    }
  };
  const OptionSet base = OptionSet::singletons(L);
  std::vector<double> without(L);
  parallel_for(L, [&](std::size_t l) {
    OptionSet s;
    for (std::size_t k = 0; k < L; ++k)
      if (k != l) s.options.push_back(BundleOption{static_cast<int>(k)});
    without[l] = value(s);
  });
  const double full = value(base);
  for (std::size_t l = 0; l < L; ++l) out[l] = full - without[l];
  return out;
}

std::vector<std::size_t> greedy_sweep(std::span<const BundleOption> candidates, std::span<const double> quality,
                                      std::span<const double> pmf, double beta, std::span<const double> item_marginals,
                                      int max_bundles) {
  const std::size_t K = pmf.size();
  std::vector<double> key(candidates.size()), x(K);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double delta = 0.0;
    for (int l : candidates[i].items()) delta += item_marginals[static_cast<std::size_t>(l)];
    for (std::size_t w = 0; w < K; ++w) x[w] = quality[i * K + w] + beta * delta;
    key[i] = numerics::log_sum_exp(x, pmf);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  std::uint64_t used = 0;
  int bundles = 0;
  std::vector<std::size_t> chosen;
  for (std::size_t i : order) {
    const auto& o = candidates[i];
    if (o.item_mask() & used) continue;
    if (o.is_bundle() && bundles >= max_bundles) continue;
    used |= o.item_mask();
    bundles += o.is_bundle() ? 1 : 0;
    chosen.push_back(i);
  }
  return chosen;
}

OptionSet greedy_bundle(const MarketInstance& instance, ValueKind kind) {
  instance.validate();
  const auto options = model::enumerate_options(instance);
  const auto table = model::tabulate(instance, options);
  const auto marginals = item_marginals(instance, kind);
  const auto chosen = greedy_sweep(options, table.quality, table.pmf, table.beta, marginals, instance.max_bundles);
  OptionSet s;
  for (std::size_t i : chosen) s.options.push_back(options[i]);
  s = s.canonical();
  s.validate(instance.item_count(), instance.max_bundles, instance.max_bundle_size);
  return s;
}

UpperBoundPartition best_upper_bound_partition(const MarketInstance& instance) {
  instance.validate();
  const Catalog cat(instance);
  optim::SetPartitionMilp milp;
  milp.item_count = instance.item_count();
  milp.max_bundles = instance.max_bundles;
  milp.options = cat.options();
  for (std::size_t i = 0; i < milp.options.size(); ++i) milp.rewards.push_back(cat.r(i));
  const auto sol = optim::bnb_solve(milp);
  UpperBoundPartition out;
  out.set = set_from(milp.options, sol.chosen());
  double z = 0.0;
  for (int k : sol.chosen()) z += cat.r(static_cast<std::size_t>(k));
  out.z_star = cat.table().sign * z;
  return out;
}

double optimality_gap(const MarketInstance& instance, double z_star, double value) {
  if (z_star == 0.0) throw DomainError("optimality gap undefined for Z* = 0");
  return instance.sign() * (z_star - value) / std::abs(z_star);
}

bounds::BoundResult dfa_under_upper(const MarketInstance& instance, const OptionSet& set) {
  const auto u = bounds::backward_upper(instance, set);
  return bounds::dfa(instance, set, *u.trajectory);
}

OptionSet min_empty_miles(std::span<const model::Item> loads, const freight::RegionModel& regions, int max_bundles) {
  const std::size_t L = loads.size();
  for (const auto& l : loads)
    if (!l.freight) throw MissingFreightData("load " + std::to_string(l.id) + " has no freight data");
  if (L > 64) throw CapExceeded("min_empty_miles supports at most 64 loads");
  optim::SetPartitionMilp milp;
  milp.item_count = L;
  milp.max_bundles = max_bundles < 0 ? static_cast<int>(L / 2) : max_bundles;
  for (std::size_t k = 0; k < L; ++k) {
    milp.options.push_back(BundleOption{static_cast<int>(k)});
    milp.rewards.push_back(0.0);
  }
  for (std::size_t k = 0; k < L; ++k) {
    const double ek = regions.ehat[regions.nearest(loads[k].freight->dropoff)];
    for (std::size_t l = 0; l < L; ++l) {
      if (k == l) continue;
      const double e = model::distance(loads[k].freight->dropoff, loads[l].freight->pickup);
      milp.options.push_back(BundleOption{static_cast<int>(k), static_cast<int>(l)});
      milp.rewards.push_back(-(e - ek));
    }
  }
  return set_from(milp.options, optim::bnb_solve(milp).chosen());
}

double expected_empty_miles(const OptionSet& set, std::span<const model::Item> loads,
                            const freight::RegionModel& regions) {
  double total = 0.0;
  for (const auto& o : set.options) {
    const auto& items = o.items();
    for (std::size_t k = 0; k + 1 < items.size(); ++k)
      total += model::distance(loads[static_cast<std::size_t>(items[k])].freight->dropoff,
                               loads[static_cast<std::size_t>(items[k + 1])].freight->pickup);
    total += regions.ehat[regions.nearest(loads[static_cast<std::size_t>(items.back())].freight->dropoff)];
  }
  return total;
}

}  // namespace uip::bundling
