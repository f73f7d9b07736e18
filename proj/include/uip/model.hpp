#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace uip::model {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

struct FreightItemData {
  Point pickup;
  Point dropoff;
  int expiration = 0;  ///< absolute period at which the load expires
};

struct Features {
  double a = 0.0;
  double b = 0.0;
};

struct Item {
  int id = 0;
  double salvage = 0.0;
  std::optional<Features> features;
  std::optional<FreightItemData> freight;
};

/// Ordered sequence of item positions (indices into the instance's item list).
class BundleOption {
 public:
  BundleOption() = default;
  explicit BundleOption(std::vector<int> items);
  BundleOption(std::initializer_list<int> items);

  const std::vector<int>& items() const { return items_; }
  std::size_t cardinality() const { return items_.size(); }
  bool is_bundle() const { return items_.size() > 1; }
  bool contains(int item) const;
  std::uint64_t item_mask() const;
  std::string key() const;

  auto operator<=>(const BundleOption&) const = default;
  bool operator==(const BundleOption&) const = default;

 private:
  std::vector<int> items_;
};

double option_salvage(const BundleOption& option, std::span<const Item> items);

struct OptionSet {
  std::vector<BundleOption> options;

  std::size_t size() const { return options.size(); }
  int bundle_count() const;
  std::size_t bundled_items() const;
  /// Throws InvalidOptionSet on overlaps, omissions, oversize options or too many bundles.
  void validate(std::size_t item_count, int max_bundles, int max_bundle_size) const;
  /// Options sorted lexicographically; the order used for tie-breaks.
  OptionSet canonical() const;
  std::string encoding() const;

  static OptionSet singletons(std::size_t item_count);
  /// Inverse of encoding(): "0-1|2". Throws InvalidOptionSet on malformed text.
  static OptionSet from_encoding(const std::string& text);
  bool operator==(const OptionSet&) const = default;
};

/// q_i^omega. Implementations must be pure; the memo may call them from several threads.
using QualityFn = std::function<double(const BundleOption&, int type)>;

class QualityMemo;

class CustomerModel {
 public:
  CustomerModel();
  CustomerModel(std::vector<double> pmf, double beta_p, QualityFn quality,
                nlohmann::json quality_spec = nullptr, std::size_t memo_capacity = 0);

  std::size_t type_count() const { return pmf_.size(); }
  const std::vector<double>& pmf() const { return pmf_; }
  double beta_p() const { return beta_p_; }
  double quality(const BundleOption& option, int type) const;
  std::vector<double> qualities(const BundleOption& option) const;
  const nlohmann::json& quality_spec() const { return spec_; }

 private:
  std::vector<double> pmf_;
  double beta_p_;
  QualityFn quality_;
  nlohmann::json spec_;
  std::shared_ptr<QualityMemo> memo_;
};

struct MarketInstance {
  std::vector<Item> items;
  CustomerModel customer;
  double demand = 0.0;        ///< lambda
  double arrival_prob = 0.1;  ///< mu
  int max_bundles = 0;        ///< K_s
  int max_bundle_size = 1;    ///< K_b

  std::size_t item_count() const { return items.size(); }
  int horizon() const;
  /// +1 for retail (beta_p < 0), -1 for the cost convention (beta_p > 0).
  double sign() const { return customer.beta_p() < 0.0 ? 1.0 : -1.0; }
  void validate() const;

  /// Same instance with demand chosen so that horizon() == periods.
  MarketInstance with_horizon(int periods) const;
  MarketInstance with_demand(double lambda) const;
};

/// Canonical-sign snapshot of a list of options: beta < 0, salvage negated when beta_p > 0.
struct OptionTable {
  std::vector<BundleOption> options;
  std::vector<double> quality;  ///< row-major [option * types + type]
  std::vector<double> salvage;
  std::vector<double> pmf;
  double beta = -1.0;
  double sign = 1.0;
  double mu = 0.1;
  int horizon = 0;

  std::size_t size() const { return options.size(); }
  std::size_t types() const { return pmf.size(); }
  double q(std::size_t i, std::size_t w) const { return quality[i * pmf.size() + w]; }
  std::span<const double> q_row(std::size_t i) const { return {quality.data() + i * pmf.size(), pmf.size()}; }
  /// Qualities of all options for one type.
  std::vector<double> q_type(std::size_t w) const;
};

OptionTable tabulate(const MarketInstance& instance, std::span<const BundleOption> options);
OptionTable tabulate(const MarketInstance& instance, const OptionSet& set);

struct ChoiceVector {
  std::vector<double> probs;
  double outside = 1.0;
};

ChoiceVector mnl_choice(std::span<const double> quality, double beta_p, std::span<const double> prices);
ChoiceVector mnl_choice(const MarketInstance& instance, const OptionSet& set,
                        std::span<const double> prices, int type);

std::vector<double> extended_choice(std::span<const double> quality, double beta_p,
                                    std::span<const double> prices, std::span<const double> availability);
std::vector<double> extended_choice(const MarketInstance& instance, const OptionSet& set,
                                    std::span<const double> prices, std::span<const double> availability,
                                    int type);

/// kappa = ln E_X e^{q^X}.
double aggregated_quality(std::span<const double> qualities, std::span<const double> pmf);
double aggregated_quality(const BundleOption& option, const CustomerModel& customer);

inline constexpr std::size_t kDefaultOptionCap = 200000;

/// Ordered sequences of distinct items of length 1..max_size, grouped by length, lexicographic inside.
std::vector<BundleOption> enumerate_options(std::size_t item_count, int max_size,
                                            std::size_t cap = kDefaultOptionCap);
std::vector<BundleOption> enumerate_options(const MarketInstance& instance,
                                            std::size_t cap = kDefaultOptionCap);

struct SyntheticParams {
  double demand = 10.0;
  double arrival_prob = 0.1;
  int max_bundles = 1;
  int max_bundle_size = 2;
  double beta_p = -1.0;
};

/// Quality function of a named synthetic scenario over items carrying features.
QualityFn scenario_quality(const std::string& scenario, double beta, std::vector<Item> items);
std::size_t scenario_types(const std::string& scenario);

MarketInstance generate_synthetic(std::uint64_t seed, std::size_t count, const std::string& scenario,
                                  double beta, const SyntheticParams& params = {});

}  // namespace uip::model
