#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uip/model.hpp"

namespace uip::bounds {

using model::MarketInstance;
using model::OptionSet;
using model::OptionTable;

enum class BoundKind { upper_backward, lower_backward, dfa, fluid, static_approx };
enum class BoundStatus { certified, uncertified, stalled };

std::string to_string(BoundKind kind);
std::string to_string(BoundStatus status);

/// tau_{t,i} for t = 1..T, stored row-major as [(t-1) * options + i].
struct PriceTrajectory {
  int periods = 0;
  std::size_t options = 0;
  std::vector<double> prices;
  bool homogeneous = true;
  bool monotone_ok = false;

  double at(int t, std::size_t i) const { return prices[static_cast<std::size_t>(t - 1) * options + i]; }
  std::vector<double> column(std::size_t i) const;
  static PriceTrajectory from_columns(const std::vector<std::vector<double>>& columns, int periods);
};

/// Monotone in canonical sign: tau_t >= tau_{t-1} - 1e-12 and tau_1 >= salvage - 1e-12.
bool check_monotone(const PriceTrajectory& trajectory, std::span<const double> canonical_salvage, double sign);

struct BoundResult {
  BoundKind kind = BoundKind::upper_backward;
  double value = 0.0;
  BoundStatus status = BoundStatus::certified;
  std::vector<double> per_option;
  std::optional<PriceTrajectory> trajectory;
  std::vector<double> availability;  ///< A_hat, [t * options + i] for t = 0..T
  std::optional<double> certificate;
  int iterations = 0;

  double availability_at(int t, std::size_t i, std::size_t options) const {
    return availability[static_cast<std::size_t>(t) * options + i];
  }
  nlohmann::json to_json() const;
};

BoundResult backward_upper(const MarketInstance& instance, const OptionSet& set);
BoundResult backward_lower(const MarketInstance& instance, const OptionSet& set);
/// Status is uncertified unless the trajectory is homogeneous and monotone.
BoundResult dfa(const MarketInstance& instance, const OptionSet& set, const PriceTrajectory& trajectory);

struct FluidOptions {
  int max_iter = 20000;
  double rel_tol = 1e-6;
  double epsilon = 1e-9;
};
BoundResult fluid(const MarketInstance& instance, const OptionSet& set, const FluidOptions& options = {});

struct StaticOptions {
  int random_starts = 8;
  std::uint64_t seed = 0;
  int max_iter = 3000;
  double epsilon = 1e-9;
};
BoundResult static_bound(const MarketInstance& instance, const OptionSet& set, const StaticOptions& options = {});

// Canonical-sign kernels shared with the bundling algorithms.

/// r_{t,i} recursion for one option. Returns r_T; fills tau (length T) when given.
double option_upper(const OptionTable& table, std::size_t i, std::vector<double>* tau = nullptr);
/// DFA value for prices tau laid out [(t-1) * N + i]. Fills availability rows t = 0..T when given.
double dfa_value(const OptionTable& table, std::span<const double> tau, std::vector<double>* availability = nullptr);

}  // namespace uip::bounds
