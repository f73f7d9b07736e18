#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uip/bounds.hpp"
#include "uip/freight.hpp"
#include "uip/model.hpp"

namespace uip::bundling {

using model::BundleOption;
using model::MarketInstance;
using model::OptionSet;

struct ColumnGenConfig {
  int n_gen = 50;
  int n_eval = 10;
  bool include_baseline = true;
};

struct ColumnGenIteration {
  BundleOption option;
  double perturbed = 0.0;         ///< perturbed reduced cost used for selection
  double delta = 0.0;             ///< exact V^DFA improvement of the option over all-singletons
  double reduced = 0.0;           ///< exact reduced cost: delta minus the duals of its rows
  double master_objective = 0.0;  ///< master LP value whose duals priced this column
};

struct ColumnGenTrace {
  std::vector<ColumnGenIteration> iterations;
  std::vector<double> master_objectives;  ///< every master solve, in order
  std::vector<std::pair<OptionSet, double>> evaluated_sets;
  std::size_t pool_size = 0;              ///< |O-bar| at termination

  nlohmann::json to_json() const;
};

struct ColumnGenResult {
  OptionSet set;
  bounds::BoundResult dfa;
  ColumnGenTrace trace;
};

ColumnGenResult column_generation(const MarketInstance& instance, const ColumnGenConfig& config = {});

enum class ValueKind { dfa, upper, fluid, static_approx };
ValueKind parse_value_kind(const std::string& name);
std::string to_string(ValueKind kind);

/// Marginal value of each item in the all-singletons set under the chosen approximation (canonical sign).
std::vector<double> item_marginals(const MarketInstance& instance, ValueKind kind);

/// Ranking sweep shared by the static greedy and the simulator. quality is [option * types + type];
/// beta and marginals must use the same sign convention. Returns the chosen candidate indices.
std::vector<std::size_t> greedy_sweep(std::span<const BundleOption> candidates, std::span<const double> quality,
                                      std::span<const double> pmf, double beta, std::span<const double> item_marginals,
                                      int max_bundles);

OptionSet greedy_bundle(const MarketInstance& instance, ValueKind kind);

struct UpperBoundPartition {
  OptionSet set;
  double z_star = 0.0;
};

/// Partition maximizing the sum of per-option backward upper bounds over every feasible option.
UpperBoundPartition best_upper_bound_partition(const MarketInstance& instance);

/// (Z* - V) / |Z*| in the canonical (revenue) direction.
double optimality_gap(const MarketInstance& instance, double z_star, double value);

/// V^DFA under the set's own backward-upper trajectory.
bounds::BoundResult dfa_under_upper(const MarketInstance& instance, const OptionSet& set);

/// Pairing that minimizes expected empty miles after drop-offs. max_bundles < 0 means unlimited.
OptionSet min_empty_miles(std::span<const model::Item> loads, const freight::RegionModel& regions,
                          int max_bundles = -1);
double expected_empty_miles(const OptionSet& set, std::span<const model::Item> loads,
                            const freight::RegionModel& regions);

}  // namespace uip::bundling
