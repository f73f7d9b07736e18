#pragma once
// Instance builders shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "uip/errors.hpp"
#include "uip/freight.hpp"
#include "uip/model.hpp"
#include "uip/optim.hpp"
#include "uip/rng.hpp"

namespace support {

using QualityTable = std::map<std::string, std::vector<double>>;

/// Instance whose qualities come from a table keyed by option key ("0", "0-1", ...).
inline uip::model::MarketInstance table_instance(std::vector<double> salvage, QualityTable table,
                                                 std::vector<double> pmf, double beta_p, double mu, int periods,
                                                 int max_bundles = 0, int max_bundle_size = 1) {
  uip::model::MarketInstance m;
  for (std::size_t i = 0; i < salvage.size(); ++i) m.items.push_back(uip::model::Item{static_cast<int>(i), salvage[i]});
  auto shared = std::make_shared<QualityTable>(std::move(table));
  m.customer = uip::model::CustomerModel(std::move(pmf), beta_p, [shared](const uip::model::BundleOption& o, int w) {
    auto it = shared->find(o.key());
    if (it == shared->end()) throw uip::DomainError("no quality for option " + o.key());
    return it->second.at(static_cast<std::size_t>(w));
  });
  m.arrival_prob = mu;
  m.max_bundles = max_bundles;
  m.max_bundle_size = max_bundle_size;
  return m.with_horizon(periods);
}

/// Random qualities in [qlo, qhi] for every ordered option up to max_size.
inline uip::model::MarketInstance random_instance(uip::Rng& rng, std::size_t items, std::size_t types, int max_size,
                                                  int periods, double mu = 0.1, double qlo = -1.0,
                                                  double qhi = 2.0, double salvage_hi = 0.0,
                                                  double beta_p = -1.0) {
  QualityTable table;
  for (const auto& o : uip::model::enumerate_options(items, max_size)) {
    std::vector<double> q(types);
    for (auto& v : q) v = rng.uniform(qlo, qhi);
    table[o.key()] = q;
  }
  std::vector<double> pmf(types);
  double total = 0.0;
  for (auto& p : pmf) total += (p = rng.uniform(0.2, 1.0));
  for (auto& p : pmf) p /= total;
  std::vector<double> salvage(items);
  for (auto& s : salvage) s = salvage_hi > 0.0 ? rng.uniform(0.0, salvage_hi) : 0.0;
  return table_instance(salvage, std::move(table), pmf, beta_p, mu, periods, static_cast<int>(items), max_size);
}

/// Mask of all options.
inline std::uint32_t full(std::size_t n) { return (std::uint32_t{1} << n) - 1; }

/// Random partition into options of size <= 2.
inline uip::model::OptionSet random_partition(uip::Rng& rng, std::size_t items) {
  std::vector<int> perm(items);
  for (std::size_t i = 0; i < items; ++i) perm[i] = static_cast<int>(i);
  for (std::size_t i = items; i > 1; --i) std::swap(perm[i - 1], perm[rng.next() % i]);
  uip::model::OptionSet set;
  for (std::size_t i = 0; i < items;) {
    if (i + 1 < items && rng.bernoulli(0.5)) {
      set.options.push_back(uip::model::BundleOption{perm[i], perm[i + 1]});
      i += 2;
    } else {
      set.options.push_back(uip::model::BundleOption{perm[i]});
      ++i;
    }
  }
  return set;
}

/// Random bounded LP with mixed relations.
inline uip::optim::LinearProgram random_lp(uip::Rng& rng) {
  using namespace uip::optim;
  LinearProgram lp;
  const std::size_t n = 2 + rng.next() % 3, m = 2 + rng.next() % 4;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = rng.bernoulli(0.3) ? rng.uniform(-1.0, 1.0) : 0.0;
    const double hi = rng.bernoulli(0.5) ? lo + rng.uniform(0.5, 5.0) : kInf;
    lp.add_variable(rng.uniform(-2.0, 3.0), lo, hi);
  }
  for (std::size_t r = 0; r < m; ++r) {
    Constraint c;
    c.coeffs.resize(n);
    for (auto& a : c.coeffs) a = rng.bernoulli(0.2) ? 0.0 : rng.uniform(-1.0, 2.0);
    const double u = rng.uniform();
    c.relation = u < 0.6 ? Relation::le : (u < 0.85 ? Relation::ge : Relation::eq);
    c.rhs = rng.uniform(-1.0, 6.0);
    lp.constraints.push_back(c);
  }
  // Keeps the region bounded.
  lp.constraints.push_back(Constraint{std::vector<double>(n, 1.0), Relation::le, 20.0});
  return lp;
}

/// LP optimum by vertex enumeration; -inf when infeasible.
inline double enumerate_lp(const uip::optim::LinearProgram& lp) {
  using uip::optim::Relation;
  const std::size_t n = lp.variables();
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (const auto& c : lp.constraints) {
    if (c.relation != Relation::ge) {
      a.push_back(c.coeffs);
      b.push_back(c.rhs);
    }
    if (c.relation != Relation::le) {
      std::vector<double> neg(c.coeffs);
      for (auto& v : neg) v = -v;
      a.push_back(neg);
      b.push_back(-c.rhs);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = -1.0;
    a.push_back(e);
    b.push_back(-lp.lower[j]);
    if (std::isfinite(lp.upper[j])) {
      e[j] = 1.0;
      a.push_back(e);
      b.push_back(lp.upper[j]);
    }
  }
  return oracle::vertex_enumeration(lp.objective, a, b);
}

inline uip::optim::SetPartitionMilp random_milp(uip::Rng& rng, std::size_t items, int max_size, int max_bundles) {
  uip::optim::SetPartitionMilp milp;
  milp.item_count = items;
  milp.max_bundles = max_bundles;
  milp.options = uip::model::enumerate_options(items, max_size);
  for (const auto& o : milp.options) {
    const double base = rng.uniform(0.0, 1.0) * static_cast<double>(o.cardinality());
    milp.rewards.push_back(o.is_bundle() ? base + rng.uniform(-0.5, 0.8) : base);
  }
  return milp;
}

struct Brute {
  double best = -1e300;
  std::vector<double> all;  ///< every feasible objective, descending
};

inline Brute brute_force(const uip::optim::SetPartitionMilp& milp) {
  std::vector<std::vector<int>> lists;
  for (const auto& o : milp.options) lists.push_back(o.items());
  Brute out;
  for (const auto& part : oracle::all_partitions(lists, static_cast<int>(milp.item_count))) {
    int bundles = 0;
    double v = 0.0;
    for (int k : part) {
      bundles += milp.options[static_cast<std::size_t>(k)].is_bundle() ? 1 : 0;
      v += milp.rewards[static_cast<std::size_t>(k)];
    }
    if (bundles > milp.max_bundles) continue;
    out.best = std::max(out.best, v);
    out.all.push_back(v);
  }
  std::sort(out.all.begin(), out.all.end(), std::greater<>());
  return out;
}

inline uip::model::Item freight_load(int id, uip::model::Point from, uip::model::Point to) {
  uip::model::Item it{id, 0.0};
  it.freight = uip::model::FreightItemData{from, to, 10};
  return it;
}

/// Minimum total follow-on deadhead over every set of disjoint directed pairs.
inline double min_pairing_miles(const std::vector<uip::model::Item>& loads, const uip::freight::RegionModel& regions) {
  using uip::model::distance;
  const std::size_t n = loads.size();
  auto ehat = [&](std::size_t k) {
    const auto d = loads[k].freight->dropoff;
    std::size_t best = 0;
    for (std::size_t r = 1; r < regions.size(); ++r)
      if (distance(d, regions.regions[r].centroid) < distance(d, regions.regions[best].centroid)) best = r;
    return regions.ehat[best];
  };
  std::vector<bool> used(n, false);
  std::function<double(std::size_t)> rec = [&](std::size_t k) -> double {
    while (k < n && used[k]) ++k;
    if (k == n) return 0.0;
    used[k] = true;
    double best = ehat(k) + rec(k + 1);
    for (std::size_t l = k + 1; l < n; ++l) {
      if (used[l]) continue;
      used[l] = true;
      const double kl = distance(loads[k].freight->dropoff, loads[l].freight->pickup) + ehat(l);
      const double lk = distance(loads[l].freight->dropoff, loads[k].freight->pickup) + ehat(k);
      best = std::min(best, std::min(kl, lk) + rec(k + 1));
      used[l] = false;
    }
    used[k] = false;
    return best;
  };
  return rec(0);
}

}  // namespace support
