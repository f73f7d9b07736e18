#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uip/model.hpp"

namespace uip::pricing {

using model::ChoiceVector;
using model::CustomerModel;
using model::MarketInstance;
using model::OptionSet;

struct SinglePeriodOptimum {
  double gamma = 0.0;
  double revenue = 0.0;  ///< -gamma / beta_p
  std::vector<double> prices;
  ChoiceVector choice;
};

/// Optimal one-period prices for options with the given qualities and marginal values.
SinglePeriodOptimum single_period_optimum(std::span<const double> quality, double beta_p,
                                          std::span<const double> marginals);
SinglePeriodOptimum single_period_optimum(const MarketInstance& instance, const OptionSet& set,
                                          std::span<const double> marginals, int type);

/// Gamma alone, for hot loops: W(sum_i e^{q_i + beta Delta_i - 1}).
double optimal_gamma(std::span<const double> quality, double beta_p, std::span<const double> marginals);

/// Inverse of the MNL map: p_i = (ln rho_i - ln rho_0 - q_i) / beta_p.
std::vector<double> price_from_probs(const ChoiceVector& choice, std::span<const double> quality, double beta_p);
std::vector<double> price_from_probs(const MarketInstance& instance, const OptionSet& set, const ChoiceVector& choice,
                                     int type);

struct DpOptions {
  bool keep_trajectory = false;    ///< keep every period instead of only the last two
  std::size_t cap = 200'000'000;   ///< bound on T * 2^N * types
};

inline constexpr std::size_t kMaxDpOptions = 14;

class DpSolution {
 public:
  int horizon() const { return horizon_; }
  std::size_t option_count() const { return table_.size(); }
  std::uint32_t full_mask() const { return (std::uint32_t{1} << table_.size()) - 1; }
  bool has_period(int t) const { return t >= first_layer_ && t <= horizon_; }

  /// V*_t(subset) in reported sign. Subsets are bitmasks over the option list.
  double value(int t, std::uint32_t subset) const;
  double value() const { return value(horizon_, full_mask()); }

  /// Delta_i used in period t: V*_{t-1}(S) - V*_{t-1}(S \ i), one entry per member of S (ascending index).
  std::vector<double> marginal_values(int t, std::uint32_t subset) const;
  /// Optimal period-t prices for one type, one entry per member of S (ascending index).
  SinglePeriodOptimum optimum(int t, std::uint32_t subset, int type) const;
  std::vector<double> optimal_prices(int t, std::uint32_t subset, int type) const;

  /// Gamma_t^omega at the full set for t = 1..T, laid out [(t-1) * types + omega].
  const std::vector<double>& full_set_gamma() const { return full_gamma_; }
  const model::OptionTable& table() const { return table_; }

 private:
  friend DpSolution exact_dp(const MarketInstance&, const OptionSet&, const DpOptions&);
  double canonical(int t, std::uint32_t subset) const;

  model::OptionTable table_;
  int horizon_ = 0;
  int first_layer_ = 0;
  std::vector<double> layers_;
  std::vector<double> full_gamma_;
};

DpSolution exact_dp(const MarketInstance& instance, const OptionSet& set, const DpOptions& options = {});

struct AsymptoticProfile {
  double value = 0.0;
  std::vector<double> prices;
  std::vector<double> choice_probs;  ///< [option * types + type]
};

AsymptoticProfile asymptotic_profile(const MarketInstance& instance, const OptionSet& set);

struct BundlingCondition {
  double delta_kappa = 0.0;
  double threshold = 0.0;
  bool satisfied = true;
};

/// baseline must be the all-singletons partition of the same items (else PartitionMismatch).
BundlingCondition bundling_condition(const CustomerModel& customer, const OptionSet& set, const OptionSet& baseline,
                                     double demand);

/// U = ln sum_t E_X[Gamma_t^X(S)], from the full-set Gammas recorded by exact_dp.
double cumulative_aggregated_utility(const MarketInstance& instance, const OptionSet& set, const DpSolution& dp);

}  // namespace uip::pricing
