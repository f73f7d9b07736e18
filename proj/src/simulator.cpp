#include "uip/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "uip/bundling.hpp"
#include "uip/errors.hpp"
#include "uip/numerics.hpp"
#include "uip/parallel.hpp"

namespace uip::freight {

namespace {

constexpr double kZ99 = 2.5758293035489004;

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  throw ConfigError(std::string("unknown ") + what + ": " + s);
}

Framework parse_framework(const std::string& s) {
  return parse_enum<Framework>(s, {{"no_bundle", Framework::no_bundle},
                                   {"rolling_horizon", Framework::rolling_horizon},
                                   {"personalized", Framework::personalized}},
                               "framework");
}
BundlingMethod parse_bundling(const std::string& s) {
  return parse_enum<BundlingMethod>(
      s, {{"greedy", BundlingMethod::greedy}, {"min_empty_miles", BundlingMethod::min_empty_miles}}, "bundling method");
}
BundlePricing parse_pricing(const std::string& s) {
  return parse_enum<BundlePricing>(s, {{"linear", BundlePricing::linear}, {"custom", BundlePricing::custom}},
                                   "bundle pricing");
}
ChoiceMode parse_choice(const std::string& s) {
  return parse_enum<ChoiceMode>(s, {{"mnl", ChoiceMode::mnl}, {"sequential_logit", ChoiceMode::sequential_logit}},
                                "choice mode");
}

void check_pmf(const std::vector<double>& pmf, std::size_t size, const char* what) {
  if (size && pmf.size() != size) throw ConfigError(std::string(what) + " has the wrong length");
  double s = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw ConfigError(std::string(what) + " has a negative entry");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError(std::string(what) + " must sum to 1");
}

struct LoadInfo {
  std::vector<double> quality;  // singleton quality per region
  double kappa = 0.0;
  double pbar = 0.0;
};

class Replication {
 public:
  Replication(const SimConfig& cfg, const FreightCoeffs& coeffs, const RegionModel& regions, std::uint64_t seed)
      : cfg_(cfg),
        coeffs_(coeffs),
        regions_(regions),
        topk_(cfg.topk_pmf.empty() ? default_topk_pmf() : cfg.topk_pmf),
        origin_pmf_(cfg.supply.origin_pmf.empty() ? regions.arrival_pmf : cfg.supply.origin_pmf),
        dest_pmf_(cfg.supply.dest_pmf.empty() ? regions.arrival_pmf : cfg.supply.dest_pmf),
        supply_rng_(substream_seed(seed, "supply")),
        carrier_rng_(substream_seed(seed, "carriers")),
        choice_rng_(substream_seed(seed, "choice")) {}

  ReplicationResult run() {
    for (int t = 0; t < cfg_.horizon_periods || !live_.empty(); ++t) {
      if (t < cfg_.horizon_periods) supply(t);
      expire(t);
      if (cfg_.framework == Framework::rolling_horizon && t % cfg_.rebundle_period == 0) {
        bundles_ = form_bundles(t, nullptr);
      }
      arrival(t);
    }
    return out_;
  }

 private:
  model::Point scatter(model::Point c, double sd, Rng& rng) {
    return {c.x + sd * rng.normal(), c.y + sd * rng.normal()};
  }

  void supply(int t) {
    const auto n = supply_rng_.poisson(cfg_.supply.loads_per_period);
    for (std::uint64_t k = 0; k < n; ++k) {
      const auto o = supply_rng_.categorical(origin_pmf_);
      const auto d = supply_rng_.categorical(dest_pmf_);
      model::Item it;
      it.id = static_cast<int>(items_.size());
      const auto from = scatter(regions_.regions[o].centroid, cfg_.supply.spread, supply_rng_);
      const auto to = scatter(regions_.regions[d].centroid, cfg_.supply.spread, supply_rng_);
      const int span = cfg_.supply.lead_max - cfg_.supply.lead_min + 1;
      const int lead = cfg_.supply.lead_min + static_cast<int>(supply_rng_.next() % static_cast<std::uint64_t>(span));
      it.freight = model::FreightItemData{from, to, t + lead};
      it.salvage = cfg_.salvage_multiplier * cfg_.cost_per_mile * model::distance(from, to);
      items_.push_back(it);

      LoadInfo info;
      const BundleOption single{it.id};
      info.quality = perceived_qualities(single, items_, coeffs_, regions_);
      info.kappa = model::aggregated_quality(info.quality, regions_.arrival_pmf);
      info.pbar = expiration_price(info.quality, regions_.arrival_pmf, it.salvage, coeffs_.beta_p);
      info_.push_back(std::move(info));
      live_.push_back(it.id);
      ++out_.loads;
    }
  }

  void expire(int t) {
    std::vector<int> keep;
    bool dropped = false;
    for (int id : live_) {
      const auto& f = *items_[static_cast<std::size_t>(id)].freight;
      if (f.expiration > t) {
        keep.push_back(id);
        continue;
      }
      // Delivered by a proprietary truck starting at the origin region's centroid.
      const auto origin = regions_.regions[regions_.nearest(f.pickup)].centroid;
      out_.salvage_cost += items_[static_cast<std::size_t>(id)].salvage;
      out_.loaded_miles += model::distance(f.pickup, f.dropoff);
      out_.empty_miles += model::distance(origin, f.pickup);
      ++out_.unmet;
      dropped = true;
    }
    live_.swap(keep);
    if (dropped) prune_bundles();
  }

  bool is_live(int id) const { return std::find(live_.begin(), live_.end(), id) != live_.end(); }

  // A bundle whose member left the platform breaks up; survivors are offered alone.
  void prune_bundles() {
    std::erase_if(bundles_, [&](const BundleOption& b) {
      return !std::all_of(b.items().begin(), b.items().end(), [&](int id) { return is_live(id); });
    });
  }

  double price(int id, int t) const {
    const auto& info = info_[static_cast<std::size_t>(id)];
    return log_price(t, items_[static_cast<std::size_t>(id)].freight->expiration, info.pbar, info.kappa, cfg_.alpha,
                     cfg_.carrier_prob, coeffs_.beta_p);
  }

  double marginal(int id, int t) const {
    return load_marginal_value(info_[static_cast<std::size_t>(id)].quality, regions_.arrival_pmf, price(id, t),
                               coeffs_.beta_p);
  }

  // Pairs among the loads with the earliest deadlines. `at` restricts the greedy key to one carrier position.
  std::vector<BundleOption> form_bundles(int t, const model::Point* at) {
    std::vector<int> pool(live_);
    std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
      return items_[static_cast<std::size_t>(a)].freight->expiration <
             items_[static_cast<std::size_t>(b)].freight->expiration;
    });
    if (pool.size() > static_cast<std::size_t>(cfg_.bundling_pool)) pool.resize(static_cast<std::size_t>(cfg_.bundling_pool));
    if (pool.size() < 2) return {};
    std::vector<model::Item> local;
    for (int id : pool) local.push_back(items_[static_cast<std::size_t>(id)]);

    std::vector<BundleOption> chosen;
    if (cfg_.bundling == BundlingMethod::min_empty_miles) {
      chosen = bundling::min_empty_miles(local, regions_).options;
    } else {
      const std::size_t n = local.size();
      std::vector<BundleOption> cands;
      for (std::size_t k = 0; k < n; ++k) cands.push_back(BundleOption{static_cast<int>(k)});
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          if (k != l) cands.push_back(BundleOption{static_cast<int>(k), static_cast<int>(l)});
      const std::vector<double> single{1.0};
      const auto& pmf = at ? single : regions_.arrival_pmf;
      std::vector<double> q;
      q.reserve(cands.size() * pmf.size());
      for (const auto& c : cands) {
        if (at) {
          q.push_back(perceived_quality(c, local, *at, coeffs_, regions_));
        } else {
          for (std::size_t w = 0; w < regions_.size(); ++w) q.push_back(perceived_quality(c, local, w, coeffs_, regions_));
        }
      }
      std::vector<double> marg(n);
      for (std::size_t k = 0; k < n; ++k) marg[k] = marginal(pool[k], t);
      for (std::size_t i : bundling::greedy_sweep(cands, q, pmf, coeffs_.beta_p, marg, static_cast<int>(n / 2)))
        chosen.push_back(cands[i]);
    }
    std::vector<BundleOption> out;
    for (const auto& o : chosen) {
      if (!o.is_bundle()) continue;
      std::vector<int> ids;
      for (int k : o.items()) ids.push_back(pool[static_cast<std::size_t>(k)]);
      out.emplace_back(std::move(ids));
    }
    return out;
  }

  std::vector<BundleOption> menu(const std::vector<BundleOption>& bundles) const {
    std::vector<BundleOption> options(bundles);
    for (int id : live_) {
      const bool bundled = std::any_of(bundles.begin(), bundles.end(), [&](const BundleOption& b) { return b.contains(id); });
      if (!bundled) options.push_back(BundleOption{id});
    }
    return options;
  }

  double option_price(const BundleOption& o, int t, double delta) const {
    if (!o.is_bundle() || cfg_.pricing == BundlePricing::linear) {
      double p = 0.0;
      for (int id : o.items()) p += price(id, t);
      return p;
    }
    const auto q = perceived_qualities(o, items_, coeffs_, regions_);
    return custom_bundle_price(q, regions_.arrival_pmf, delta, coeffs_.beta_p);
  }

  void arrival(int t) {
    // Carrier draws happen every period so that policies compared under one seed see the same carriers.
    const bool arrives = carrier_rng_.bernoulli(cfg_.carrier_prob);
    const auto region = carrier_rng_.categorical(regions_.arrival_pmf);
    const auto pos = scatter(regions_.regions[region].centroid, cfg_.carrier_spread, carrier_rng_);
    const auto k = carrier_rng_.categorical(topk_);
    if (!arrives || live_.empty()) return;

    std::vector<BundleOption> bundles;
    if (cfg_.framework == Framework::rolling_horizon) bundles = bundles_;
    else if (cfg_.framework == Framework::personalized) bundles = form_bundles(t, &pos);
    const auto options = menu(bundles);

    const std::size_t n = options.size();
    std::vector<double> q(n), delta(n), key(n);
    for (std::size_t i = 0; i < n; ++i) {
      q[i] = perceived_quality(options[i], items_, pos, coeffs_, regions_);
      for (int id : options[i].items()) delta[i] += marginal(id, t);
      key[i] = q[i] + coeffs_.beta_p * delta[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
    order.resize(std::min(n, k));
    if (order.empty()) return;

    std::vector<double> u, prices;
    for (std::size_t i : order) {
      prices.push_back(option_price(options[i], t, delta[i]));
      u.push_back(q[i] + coeffs_.beta_p * prices.back());
    }
    const int c = draw_choice(u, cfg_.choice_mode, choice_rng_);
    if (c < 0) return;
    const auto& booked = options[order[static_cast<std::size_t>(c)]];
    out_.booked_cost += prices[static_cast<std::size_t>(c)];
    out_.loaded_miles += loaded_miles(booked, items_);
    out_.empty_miles += empty_miles(booked, items_, pos);
    ++out_.bookings;
    if (booked.is_bundle()) ++out_.bundles_booked;
    std::erase_if(live_, [&](int id) { return booked.contains(id); });
    prune_bundles();
  }

  const SimConfig& cfg_;
  const FreightCoeffs& coeffs_;
  const RegionModel& regions_;
  std::vector<double> topk_, origin_pmf_, dest_pmf_;
  Rng supply_rng_, carrier_rng_, choice_rng_;
  std::vector<model::Item> items_;
  std::vector<LoadInfo> info_;
  std::vector<int> live_;
  std::vector<BundleOption> bundles_;
  ReplicationResult out_;
};

MetricSummary summarize(const std::vector<ReplicationResult>& samples, double (ReplicationResult::*metric)() const) {
  MetricSummary s;
  const double n = static_cast<double>(samples.size());
  if (samples.empty()) return s;
  for (const auto& r : samples) s.mean += (r.*metric)();
  s.mean /= n;
  if (samples.size() < 2) return s;
  double ss = 0.0;
  for (const auto& r : samples) ss += ((r.*metric)() - s.mean) * ((r.*metric)() - s.mean);
  s.half_width = kZ99 * std::sqrt(ss / (n - 1.0) / n);
  return s;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<double> default_topk_pmf() {
  std::vector<double> pmf(21, 0.0);
  double total = 0.0;
  for (int k = 1; k <= 20; ++k) total += pmf[static_cast<std::size_t>(k)] = 0.2 * std::pow(0.8, k - 1);
  for (auto& p : pmf) p /= total;
  return pmf;
}

void SimConfig::validate(const RegionModel& regions) const {
  regions.validate();
  if (horizon_periods < 1) throw ConfigError("horizon_periods must be at least 1");
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (rebundle_period < 1) throw ConfigError("rebundle_period must be at least 1");
  if (!(carrier_prob >= 0.0 && carrier_prob <= 1.0)) throw ConfigError("carrier_prob must lie in [0, 1]");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (!(salvage_multiplier >= 0.0) || !(cost_per_mile >= 0.0)) throw ConfigError("salvage inputs must be non-negative");
  if (bundling_pool < 2 || bundling_pool > 64) throw ConfigError("bundling_pool must lie in [2, 64]");
  if (!topk_pmf.empty()) check_pmf(topk_pmf, 0, "topk_pmf");
  if (!(supply.loads_per_period >= 0.0)) throw ConfigError("loads_per_period must be non-negative");
  if (supply.lead_min < 1 || supply.lead_max < supply.lead_min) throw ConfigError("lead times must satisfy 1 <= min <= max");
  if (!(supply.spread >= 0.0) || !(carrier_spread >= 0.0)) throw ConfigError("spreads must be non-negative");
  if (!supply.origin_pmf.empty()) check_pmf(supply.origin_pmf, regions.size(), "origin_pmf");
  if (!supply.dest_pmf.empty()) check_pmf(supply.dest_pmf, regions.size(), "dest_pmf");
}

nlohmann::json SimConfig::to_json() const {
  return {{"framework", to_string(framework)},
          {"rebundle_period", rebundle_period},
          {"bundling", to_string(bundling)},
          {"pricing", to_string(pricing)},
          {"choice_mode", to_string(choice_mode)},
          {"topk_pmf", topk_pmf.empty() ? default_topk_pmf() : topk_pmf},
          {"supply",
           {{"loads_per_period", supply.loads_per_period},
            {"lead_min", supply.lead_min},
            {"lead_max", supply.lead_max},
            {"spread", supply.spread},
            {"origin_pmf", supply.origin_pmf},
            {"dest_pmf", supply.dest_pmf}}},
          {"carrier_prob", carrier_prob},
          {"carrier_spread", carrier_spread},
          {"alpha", alpha},
          {"cost_per_mile", cost_per_mile},
          {"salvage_multiplier", salvage_multiplier},
          {"bundling_pool", bundling_pool},
          {"horizon_periods", horizon_periods},
          {"seed", seed},
          {"replications", replications}};
}

SimConfig SimConfig::from_json(const nlohmann::json& j) {
  SimConfig c;
  try {
    if (j.contains("framework")) c.framework = parse_framework(j["framework"].get<std::string>());
    if (j.contains("bundling")) c.bundling = parse_bundling(j["bundling"].get<std::string>());
    if (j.contains("pricing")) c.pricing = parse_pricing(j["pricing"].get<std::string>());
    if (j.contains("choice_mode")) c.choice_mode = parse_choice(j["choice_mode"].get<std::string>());
    c.rebundle_period = j.value("rebundle_period", c.rebundle_period);
    c.topk_pmf = j.value("topk_pmf", c.topk_pmf);
    if (j.contains("supply")) {
      const auto& s = j["supply"];
      c.supply.loads_per_period = s.value("loads_per_period", c.supply.loads_per_period);
      c.supply.lead_min = s.value("lead_min", c.supply.lead_min);
      c.supply.lead_max = s.value("lead_max", c.supply.lead_max);
      c.supply.spread = s.value("spread", c.supply.spread);
      c.supply.origin_pmf = s.value("origin_pmf", c.supply.origin_pmf);
      c.supply.dest_pmf = s.value("dest_pmf", c.supply.dest_pmf);
    }
    c.carrier_prob = j.value("carrier_prob", c.carrier_prob);
    c.carrier_spread = j.value("carrier_spread", c.carrier_spread);
    c.alpha = j.value("alpha", c.alpha);
    c.cost_per_mile = j.value("cost_per_mile", c.cost_per_mile);
    c.salvage_multiplier = j.value("salvage_multiplier", c.salvage_multiplier);
    c.bundling_pool = j.value("bundling_pool", c.bundling_pool);
    c.horizon_periods = j.value("horizon_periods", c.horizon_periods);
    c.seed = j.value("seed", c.seed);
    c.replications = j.value("replications", c.replications);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad simulation config: ") + e.what());
  }
  return c;
}

int draw_choice(std::span<const double> utilities, ChoiceMode mode, Rng& rng) {
  if (utilities.empty()) return -1;
  if (mode == ChoiceMode::sequential_logit) {
    for (std::size_t j = 0; j < utilities.size(); ++j) {
      const double p = 1.0 / (1.0 + std::exp(-utilities[j]));
      if (rng.bernoulli(p)) return static_cast<int>(j);
    }
    return -1;
  }
  const double top = std::max(0.0, *std::max_element(utilities.begin(), utilities.end()));
  std::vector<double> w(utilities.size() + 1);
  for (std::size_t j = 0; j < utilities.size(); ++j) w[j] = std::exp(utilities[j] - top);
  w.back() = std::exp(-top);
  const auto c = rng.categorical(w);
  return c == utilities.size() ? -1 : static_cast<int>(c);
}

ReplicationResult simulate_replication(const SimConfig& config, const FreightCoeffs& coeffs, const RegionModel& regions,
                                       std::uint64_t seed) {
  config.validate(regions);
  coeffs.validate(regions.size());
  return Replication(config, coeffs, regions, seed).run();
}

SimMetrics simulate(const SimConfig& config, const FreightCoeffs& coeffs, const RegionModel& regions) {
  config.validate(regions);
  coeffs.validate(regions.size());
  SimMetrics m;
  m.samples.resize(static_cast<std::size_t>(config.replications));
  parallel_for(m.samples.size(), [&](std::size_t r) {
    m.samples[r] = Replication(config, coeffs, regions, config.seed ^ splitmix64(r)).run();
  });
  m.cost_per_loaded_mile = summarize(m.samples, &ReplicationResult::cost_per_loaded_mile);
  m.avg_empty_miles = summarize(m.samples, &ReplicationResult::avg_empty_miles);
  m.unmet_deadline_rate = summarize(m.samples, &ReplicationResult::unmet_rate);
  return m;
}

nlohmann::json SimMetrics::to_json() const {
  auto metric = [](const MetricSummary& s) { return nlohmann::json{{"mean", s.mean}, {"half_width", s.half_width}}; };
  nlohmann::json j;
  j["confidence"] = confidence;
  j["cost_per_loaded_mile"] = metric(cost_per_loaded_mile);
  j["avg_empty_miles"] = metric(avg_empty_miles);
  j["unmet_deadline_rate"] = metric(unmet_deadline_rate);
  j["samples"] = nlohmann::json::array();
  for (const auto& r : samples)
    j["samples"].push_back({{"loads", r.loads},
                            {"unmet", r.unmet},
                            {"bookings", r.bookings},
                            {"bundles_booked", r.bundles_booked},
                            {"booked_cost", r.booked_cost},
                            {"salvage_cost", r.salvage_cost},
                            {"loaded_miles", r.loaded_miles},
                            {"empty_miles", r.empty_miles}});
  return j;
}

std::string SimMetrics::to_csv() const {
  std::ostringstream os;
  os << "replication,loads,unmet,bookings,bundles_booked,booked_cost,salvage_cost,loaded_miles,empty_miles,"
        "cost_per_loaded_mile,avg_empty_miles,unmet_deadline_rate,cost_per_loaded_mile_hw,avg_empty_miles_hw,"
        "unmet_deadline_rate_hw\n";
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& s = samples[r];
    os << r << ',' << s.loads << ',' << s.unmet << ',' << s.bookings << ',' << s.bundles_booked << ','
       << num(s.booked_cost) << ',' << num(s.salvage_cost) << ',' << num(s.loaded_miles) << ',' << num(s.empty_miles)
       << ',' << num(s.cost_per_loaded_mile()) << ',' << num(s.avg_empty_miles()) << ',' << num(s.unmet_rate())
       << ",,,\n";
  }
  os << "summary,,,,,,,,," << num(cost_per_loaded_mile.mean) << ',' << num(avg_empty_miles.mean) << ','
     << num(unmet_deadline_rate.mean) << ',' << num(cost_per_loaded_mile.half_width) << ','
     << num(avg_empty_miles.half_width) << ',' << num(unmet_deadline_rate.half_width) << '\n';
  return os.str();
}

std::string to_string(Framework f) {
  switch (f) {
    case Framework::no_bundle: return "no_bundle";
    case Framework::rolling_horizon: return "rolling_horizon";
    case Framework::personalized: return "personalized";
  }
  return "?";
}
std::string to_string(BundlingMethod m) { return m == BundlingMethod::greedy ? "greedy" : "min_empty_miles"; }
std::string to_string(BundlePricing p) { return p == BundlePricing::linear ? "linear" : "custom"; }
std::string to_string(ChoiceMode c) { return c == ChoiceMode::mnl ? "mnl" : "sequential_logit"; }

}  // namespace uip::freight
