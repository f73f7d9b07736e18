#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uip/model.hpp"

namespace uip::freight {

using model::BundleOption;
using model::Item;
using model::Point;

struct Region {
  int id = 0;
  Point centroid;
};

struct RegionModel {
  std::vector<Region> regions;
  std::vector<double> arrival_pmf;
  std::vector<double> ehat;  ///< expected deadhead miles after a drop-off in each region

  std::size_t size() const { return regions.size(); }
  /// Index of the region whose centroid is closest (lowest index on ties).
  std::size_t nearest(Point p) const;
  void validate() const;

  nlohmann::json to_json() const;
  static RegionModel from_json(const nlohmann::json& j);
  /// Four regions laid out like a city triangle, miles as units.
  static RegionModel default_model();
};

struct FreightCoeffs {
  double beta0 = -2.0;
  double beta_d = -0.008;
  double beta_e = -0.01;
  double beta_b = -0.5;
  double beta_p = 0.01;
  std::vector<double> beta_org;
  std::vector<double> beta_dst;

  void validate(std::size_t regions) const;
  nlohmann::json to_json() const;
  static FreightCoeffs from_json(const nlohmann::json& j);
  static FreightCoeffs default_coeffs();
};

enum class PricingKind { expiration_log, linear_bundle, custom_bundle };

struct PricingPolicy {
  PricingKind kind = PricingKind::expiration_log;
  double alpha = 1.0;
};

/// Total in-load miles of an option.
double loaded_miles(const BundleOption& option, std::span<const Item> loads);
/// Deadhead miles starting from `start`: to the first pickup plus every drop-off to next pickup.
double empty_miles(const BundleOption& option, std::span<const Item> loads, Point start);

double perceived_quality(const BundleOption& option, std::span<const Item> loads, std::size_t region,
                         const FreightCoeffs& coeffs, const RegionModel& regions);
/// Same formula for a carrier standing at an arbitrary point.
double perceived_quality(const BundleOption& option, std::span<const Item> loads, Point start,
                         const FreightCoeffs& coeffs, const RegionModel& regions);
std::vector<double> perceived_qualities(const BundleOption& option, std::span<const Item> loads,
                                        const FreightCoeffs& coeffs, const RegionModel& regions);

/// Customer model over the given loads: one type per region, pmf = arrival pmf.
model::CustomerModel freight_customer(std::vector<Item> loads, const FreightCoeffs& coeffs, const RegionModel& regions);

/// Optimal one-period price if the load were the only option, averaged over regions.
double expiration_price(std::span<const double> quality, std::span<const double> pmf, double salvage, double beta_p);
double expiration_price(std::size_t load, std::span<const Item> loads, const FreightCoeffs& coeffs,
                        const RegionModel& regions);

/// Logarithmic trajectory that reaches pbar at the period before expiration. t is absolute time.
double log_price(int t, int expiration, double pbar, double kappa, double alpha, double mu, double beta_p);

/// Marginal value implied by treating `price` as the optimal single-option price.
double load_marginal_value(std::span<const double> quality, std::span<const double> pmf, double price, double beta_p);

/// Optimal single-option price of a bundle at marginal value `delta`.
double custom_bundle_price(std::span<const double> quality, std::span<const double> pmf, double delta, double beta_p);

}  // namespace uip::freight
