#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uip/freight.hpp"
#include "uip/rng.hpp"

namespace uip::freight {

enum class Framework { no_bundle, rolling_horizon, personalized };
enum class BundlingMethod { greedy, min_empty_miles };
enum class BundlePricing { linear, custom };
enum class ChoiceMode { mnl, sequential_logit };

struct SupplyConfig {
  double loads_per_period = 0.35;  ///< Poisson mean
  int lead_min = 8;                ///< periods between supply and expiration
  int lead_max = 40;
  double spread = 25.0;            ///< std-dev of pickup/dropoff scatter around region centroids
  std::vector<double> origin_pmf;  ///< empty: use the carrier arrival pmf
  std::vector<double> dest_pmf;
};

struct SimConfig {
  Framework framework = Framework::rolling_horizon;
  int rebundle_period = 10;
  BundlingMethod bundling = BundlingMethod::greedy;
  BundlePricing pricing = BundlePricing::linear;
  ChoiceMode choice_mode = ChoiceMode::mnl;
  std::vector<double> topk_pmf;  ///< P(k observed options), k = 0..size-1; empty: default_topk_pmf()
  SupplyConfig supply;
  double carrier_prob = 0.9;       ///< per-period carrier arrival probability
  double carrier_spread = 10.0;    ///< std-dev of carrier position around the region centroid
  double alpha = 0.5;              ///< curvature of the logarithmic price trajectory
  double cost_per_mile = 2.5;      ///< reference cost for salvage
  double salvage_multiplier = 3.0;
  int bundling_pool = 24;          ///< loads (earliest deadlines first) considered when forming bundles
  int horizon_periods = 300;
  std::uint64_t seed = 1;
  int replications = 20;

  void validate(const RegionModel& regions) const;
  nlohmann::json to_json() const;
  static SimConfig from_json(const nlohmann::json& j);
};

/// Truncated geometric on k = 1..20 with mean close to 5.
std::vector<double> default_topk_pmf();

struct ReplicationResult {
  std::size_t loads = 0;
  std::size_t unmet = 0;
  std::size_t bookings = 0;
  std::size_t bundles_booked = 0;
  double booked_cost = 0.0;
  double salvage_cost = 0.0;
  double loaded_miles = 0.0;
  double empty_miles = 0.0;

  double total_cost() const { return booked_cost + salvage_cost; }
  double cost_per_loaded_mile() const { return loaded_miles > 0.0 ? total_cost() / loaded_miles : 0.0; }
  double avg_empty_miles() const { return loads ? empty_miles / static_cast<double>(loads) : 0.0; }
  double unmet_rate() const { return loads ? static_cast<double>(unmet) / static_cast<double>(loads) : 0.0; }
  bool operator==(const ReplicationResult&) const = default;
};

struct MetricSummary {
  double mean = 0.0;
  double half_width = 0.0;
};

struct SimMetrics {
  std::vector<ReplicationResult> samples;
  double confidence = 0.99;
  MetricSummary cost_per_loaded_mile;
  MetricSummary avg_empty_miles;
  MetricSummary unmet_deadline_rate;

  nlohmann::json to_json() const;
  /// One row per replication followed by a summary row.
  std::string to_csv() const;
};

/// Index of the accepted option among the observed ones, or -1 for no booking.
/// utilities are q + beta_p * price in the order the carrier reads them.
int draw_choice(std::span<const double> utilities, ChoiceMode mode, Rng& rng);

ReplicationResult simulate_replication(const SimConfig& config, const FreightCoeffs& coeffs,
                                       const RegionModel& regions, std::uint64_t seed);

SimMetrics simulate(const SimConfig& config, const FreightCoeffs& coeffs, const RegionModel& regions);

std::string to_string(Framework f);
std::string to_string(BundlingMethod m);
std::string to_string(BundlePricing p);
std::string to_string(ChoiceMode c);

}  // namespace uip::freight
