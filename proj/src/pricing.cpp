#include "uip/pricing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "uip/errors.hpp"
#include "uip/numerics.hpp"

namespace uip::pricing {

double optimal_gamma(std::span<const double> quality, double beta_p, std::span<const double> marginals) {
  const std::size_t n = quality.size();
  double m = -std::numeric_limits<double>::infinity();
  // Inline log-sum-exp; this runs T * 2^N * |Omega| times inside the DP.
  double buf[64];
  std::vector<double> big;
  double* x = buf;
  if (n > 64) {
    big.resize(n);
    x = big.data();
  }
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = quality[i] + beta_p * marginals[i] - 1.0;
    m = std::max(m, x[i]);
  }
  if (std::isinf(m)) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return numerics::lambert_w_exp(m + std::log(s));
}

SinglePeriodOptimum single_period_optimum(std::span<const double> quality, double beta_p,
                                          std::span<const double> marginals) {
  const std::size_t n = quality.size();
  if (n == 0) throw DomainError("single_period_optimum needs at least one option");
  if (marginals.size() != n) throw DimensionMismatch("marginals and qualities differ in length");
  for (double d : marginals)
    if (!std::isfinite(d)) throw DomainError("marginal values must be finite");

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = quality[i] + beta_p * marginals[i] - 1.0;
  const double lse = numerics::log_sum_exp(x);
  SinglePeriodOptimum out;
  out.gamma = numerics::lambert_w_exp(lse);
  out.revenue = -out.gamma / beta_p;
  out.prices.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.prices[i] = marginals[i] - (1.0 + out.gamma) / beta_p;
  const double share = out.gamma / (1.0 + out.gamma);
  out.choice.probs.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.choice.probs[i] = share * std::exp(x[i] - lse);
  out.choice.outside = 1.0 / (1.0 + out.gamma);
  return out;
}

SinglePeriodOptimum single_period_optimum(const MarketInstance& instance, const OptionSet& set,
                                          std::span<const double> marginals, int type) {
  std::vector<double> q(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) q[i] = instance.customer.quality(set.options[i], type);
  return single_period_optimum(q, instance.customer.beta_p(), marginals);
}

std::vector<double> price_from_probs(const ChoiceVector& choice, std::span<const double> quality, double beta_p) {
  if (choice.probs.size() != quality.size()) throw DimensionMismatch("choice and quality vectors differ in length");
  if (!(choice.outside > 0.0)) throw DomainError("outside probability must be positive");
  std::vector<double> p(quality.size());
  const double l0 = std::log(choice.outside);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(choice.probs[i] > 0.0)) throw DomainError("choice probabilities must be positive");
    p[i] = (std::log(choice.probs[i]) - l0 - quality[i]) / beta_p;
  }
  return p;
}

std::vector<double> price_from_probs(const MarketInstance& instance, const OptionSet& set, const ChoiceVector& choice,
                                     int type) {
  std::vector<double> q(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) q[i] = instance.customer.quality(set.options[i], type);
  return price_from_probs(choice, q, instance.customer.beta_p());
}

// ---------------------------------------------------------------------------------------------

double DpSolution::canonical(int t, std::uint32_t subset) const {
  if (!has_period(t)) throw MissingDp("period " + std::to_string(t) + " not stored; request keep_trajectory");
  if (subset > full_mask()) throw DomainError("subset mask out of range");
  const std::size_t states = std::size_t{1} << table_.size();
  return layers_[static_cast<std::size_t>(t - first_layer_) * states + subset];
}

double DpSolution::value(int t, std::uint32_t subset) const { return table_.sign * canonical(t, subset); }

std::vector<double> DpSolution::marginal_values(int t, std::uint32_t subset) const {
  if (t < 1) throw DomainError("marginal values are defined for t >= 1");
  std::vector<double> d;
  const double base = canonical(t - 1, subset);
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const std::uint32_t bit = std::uint32_t{1} << i;
    if (subset & bit) d.push_back(table_.sign * (base - canonical(t - 1, subset & ~bit)));
  }
  return d;
}

SinglePeriodOptimum DpSolution::optimum(int t, std::uint32_t subset, int type) const {
  const auto delta = marginal_values(t, subset);
  std::vector<double> q;
  for (std::size_t i = 0; i < table_.size(); ++i)
    if (subset & (std::uint32_t{1} << i)) q.push_back(table_.q(i, static_cast<std::size_t>(type)));
  return single_period_optimum(q, table_.sign * table_.beta, delta);
}

std::vector<double> DpSolution::optimal_prices(int t, std::uint32_t subset, int type) const {
  return optimum(t, subset, type).prices;
}

DpSolution exact_dp(const MarketInstance& instance, const OptionSet& set, const DpOptions& options) {
  const std::size_t n = set.size();
  if (n > kMaxDpOptions) throw CapExceeded("exact DP supports at most 14 options");
  DpSolution sol;
  sol.table_ = model::tabulate(instance, set);
  const auto& tab = sol.table_;
  const int T = tab.horizon;
  const std::size_t K = tab.types();
  const std::size_t states = std::size_t{1} << n;
  const double work = static_cast<double>(T) * static_cast<double>(states) * static_cast<double>(K);
  if (work > static_cast<double>(options.cap)) throw CapExceeded("T * 2^N * types exceeds the DP cap");

  sol.horizon_ = T;
  sol.first_layer_ = options.keep_trajectory ? 0 : std::max(0, T - 1);
  const std::size_t stored = static_cast<std::size_t>(T - sol.first_layer_ + 1);
  sol.layers_.assign(stored * states, 0.0);
  sol.full_gamma_.assign(static_cast<std::size_t>(T) * K, 0.0);

  std::vector<double> prev(states), cur(states);
  for (std::size_t mask = 0; mask < states; ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) s += tab.salvage[i];
    prev[mask] = s;
  }
  auto store = [&](int t, const std::vector<double>& layer) {
    if (t < sol.first_layer_) return;
    std::copy(layer.begin(), layer.end(), sol.layers_.begin() + static_cast<std::ptrdiff_t>((t - sol.first_layer_) * states));
  };
  store(0, prev);

  const double beta = tab.beta;
  const std::size_t full = states - 1;
  std::vector<double> q(n), delta(n);
  for (int t = 1; t <= T; ++t) {
    cur[0] = prev[0];
    for (std::size_t mask = 1; mask < states; ++mask) {
      std::size_t m = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        if (mask & bit) {
          delta[m] = prev[mask] - prev[mask & ~bit];
          ++m;
        }
      }
      double acc = 0.0;
      for (std::size_t w = 0; w < K; ++w) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (mask & (std::size_t{1} << i)) q[k++] = tab.q(i, w);
        const double g = optimal_gamma(std::span<const double>(q.data(), m), beta, std::span<const double>(delta.data(), m));
        acc += tab.pmf[w] * g;
        if (mask == full) sol.full_gamma_[static_cast<std::size_t>(t - 1) * K + w] = g;
      }
      cur[mask] = prev[mask] + tab.mu * acc / (-beta);
    }
    store(t, cur);
    std::swap(prev, cur);
  }
  return sol;
}

AsymptoticProfile asymptotic_profile(const MarketInstance& instance, const OptionSet& set) {
  if (!(instance.demand > 0.0)) throw DomainError("asymptotic profile needs positive demand");
  const auto tab = model::tabulate(instance, set);
  const double ln_lambda = std::log(instance.demand);
  AsymptoticProfile out;
  const std::size_t K = tab.types();
  double kappa_sum = 0.0;
  out.prices.resize(tab.size());
  out.choice_probs.resize(tab.size() * K);
  for (std::size_t i = 0; i < tab.size(); ++i) {
    const double kappa = model::aggregated_quality(tab.q_row(i), tab.pmf);
    kappa_sum += kappa;
    out.prices[i] = tab.sign * (-1.0 / tab.beta) * (ln_lambda + kappa);
    for (std::size_t w = 0; w < K; ++w) out.choice_probs[i * K + w] = std::exp(tab.q(i, w) - kappa) / instance.demand;
  }
  out.value = tab.sign * (-1.0 / tab.beta) * (static_cast<double>(tab.size()) * (ln_lambda - 1.0) + kappa_sum);
  return out;
}

BundlingCondition bundling_condition(const CustomerModel& customer, const OptionSet& set, const OptionSet& baseline,
                                     double demand) {
  std::vector<int> a, b;
  for (const auto& o : set.options) a.insert(a.end(), o.items().begin(), o.items().end());
  for (const auto& o : baseline.options) {
    if (o.is_bundle()) throw PartitionMismatch("baseline must contain singletons only");
    b.push_back(o.items().front());
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw PartitionMismatch("set and baseline cover different items");

  BundlingCondition out;
  double kappa_set = 0.0, kappa_base = 0.0, excess = 0.0;
  for (const auto& o : set.options) {
    kappa_set += model::aggregated_quality(o, customer);
    excess += static_cast<double>(o.cardinality()) - 1.0;
  }
  for (const auto& o : baseline.options) kappa_base += model::aggregated_quality(o, customer);
  out.delta_kappa = kappa_set - kappa_base;
  out.threshold = excess == 0.0 ? 0.0 : (std::log(demand) - 1.0) * excess;
  out.satisfied = out.delta_kappa >= out.threshold;
  return out;
}

double cumulative_aggregated_utility(const MarketInstance& instance, const OptionSet& set, const DpSolution& dp) {
  if (dp.option_count() != set.size() || dp.horizon() != instance.horizon())
    throw MissingDp("DP solution does not belong to this instance and set");
  const auto& g = dp.full_set_gamma();
  const auto& pmf = instance.customer.pmf();
  const std::size_t K = pmf.size();
  double total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) total += pmf[k % K] * g[k];
  return std::log(total);
}

}  // namespace uip::pricing
