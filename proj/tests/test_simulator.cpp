#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "uip/errors.hpp"
#include "uip/model.hpp"
#include "uip/parallel.hpp"
#include "uip/simulator.hpp"

using namespace uip;
using namespace uip::freight;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.horizon_periods = 120;
  c.replications = 12;
  c.seed = 77;
  return c;
}

}  // namespace

TEST_CASE("zero supply gives zero metrics") {
  auto cfg = small_config();
  cfg.supply.loads_per_period = 0.0;
  const auto m = simulate(cfg, FreightCoeffs::default_coeffs(), RegionModel::default_model());
  for (const auto& r : m.samples) CHECK(r == ReplicationResult{});
  CHECK(m.cost_per_loaded_mile.mean == 0.0);
  CHECK(m.avg_empty_miles.mean == 0.0);
  CHECK(m.unmet_deadline_rate.mean == 0.0);
}

TEST_CASE("nobody sees an option: every load misses its deadline") {
  auto cfg = small_config();
  cfg.topk_pmf = {1.0};
  const auto m = simulate(cfg, FreightCoeffs::default_coeffs(), RegionModel::default_model());
  for (const auto& r : m.samples) {
    CHECK(r.bookings == 0);
    CHECK(r.loads > 0);
    CHECK(r.unmet_rate() == 1.0);
  }
  CHECK(m.unmet_deadline_rate.mean == 1.0);
}

TEST_CASE("simulation is deterministic and thread-count independent") {
  const auto regions = RegionModel::default_model();
  const auto coeffs = FreightCoeffs::default_coeffs();
  for (auto fw : {Framework::no_bundle, Framework::rolling_horizon, Framework::personalized}) {
    auto cfg = small_config();
    cfg.framework = fw;
    cfg.pricing = BundlePricing::custom;
    set_default_threads(1);
    const auto a = simulate(cfg, coeffs, regions);
    set_default_threads(4);
    const auto b = simulate(cfg, coeffs, regions);
    set_default_threads(0);
    CHECK(a.samples == b.samples);
    CHECK(a.to_csv() == b.to_csv());
    cfg.seed = 78;
    CHECK(simulate(cfg, coeffs, regions).samples != a.samples);
  }
}

TEST_CASE("every load is either booked or salvaged") {
  const auto regions = RegionModel::default_model();
  const auto coeffs = FreightCoeffs::default_coeffs();
  for (auto bm : {BundlingMethod::greedy, BundlingMethod::min_empty_miles}) {
    for (auto mode : {ChoiceMode::mnl, ChoiceMode::sequential_logit}) {
      auto cfg = small_config();
      cfg.bundling = bm;
      cfg.choice_mode = mode;
      for (const auto& r : simulate(cfg, coeffs, regions).samples) {
        // Bundles hold two loads.
        CHECK(r.loads == r.unmet + r.bookings + r.bundles_booked);
        CHECK(r.total_cost() == r.booked_cost + r.salvage_cost);
        CHECK(r.loaded_miles > 0.0);
        CHECK(r.unmet_rate() >= 0.0);
        CHECK(r.unmet_rate() <= 1.0);
      }
    }
  }
  auto cfg = small_config();
  cfg.framework = Framework::no_bundle;
  for (const auto& r : simulate(cfg, coeffs, regions).samples) CHECK(r.bundles_booked == 0);
}

TEST_CASE("choice draws match the choice probabilities") {
  const std::vector<double> q{0.5, -0.2, 1.0}, prices{1.0, 0.3, 2.0};
  const double beta = -1.2;
  const auto want = model::mnl_choice(q, beta, prices);
  std::vector<double> u(3);
  for (std::size_t j = 0; j < 3; ++j) u[j] = q[j] + beta * prices[j];

  const int n = 100000;
  Rng rng(31);
  std::vector<int> count(4, 0);
  for (int k = 0; k < n; ++k) {
    const int c = draw_choice(u, ChoiceMode::mnl, rng);
    ++count[c < 0 ? 3 : static_cast<std::size_t>(c)];
  }
  auto within = [&](int hits, double p) {
    const double sd = std::sqrt(p * (1.0 - p) / n);
    return std::abs(hits / static_cast<double>(n) - p) <= 3.0 * sd;
  };
  for (std::size_t j = 0; j < 3; ++j) CHECK(within(count[j], want.probs[j]));
  CHECK(within(count[3], want.outside));

  // Sequential binary decisions: option j is reached only if every earlier one was declined.
  std::fill(count.begin(), count.end(), 0);
  for (int k = 0; k < n; ++k) {
    const int c = draw_choice(u, ChoiceMode::sequential_logit, rng);
    ++count[c < 0 ? 3 : static_cast<std::size_t>(c)];
  }
  double reach = 1.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double a = 1.0 / (1.0 + std::exp(-u[j]));
    CHECK(within(count[j], reach * a));
    reach *= 1.0 - a;
  }
  CHECK(within(count[3], reach));
  CHECK(draw_choice(std::vector<double>{}, ChoiceMode::mnl, rng) == -1);
}

TEST_CASE("custom bundle prices do not raise missed deadlines") {
  const auto regions = RegionModel::default_model();
  const auto coeffs = FreightCoeffs::default_coeffs();
  auto cfg = small_config();
  cfg.replications = 60;
  cfg.horizon_periods = 200;
  cfg.pricing = BundlePricing::linear;
  const auto lin = simulate(cfg, coeffs, regions);
  cfg.pricing = BundlePricing::custom;
  const auto cus = simulate(cfg, coeffs, regions);
  CHECK(cus.unmet_deadline_rate.mean < lin.unmet_deadline_rate.mean);
}

TEST_CASE("config serialization and validation") {
  auto cfg = small_config();
  cfg.framework = Framework::personalized;
  cfg.choice_mode = ChoiceMode::sequential_logit;
  cfg.supply.origin_pmf = {0.25, 0.25, 0.25, 0.25};
  const auto back = SimConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  const auto regions = RegionModel::default_model();
  auto bad = cfg;
  bad.horizon_periods = 0;
  CHECK_THROWS_AS(bad.validate(regions), ConfigError);
  bad = cfg;
  bad.topk_pmf = {0.5, 0.2};
  CHECK_THROWS_AS(bad.validate(regions), ConfigError);
  bad = cfg;
  bad.supply.dest_pmf = {1.0};
  CHECK_THROWS_AS(bad.validate(regions), ConfigError);
  CHECK_THROWS_AS(SimConfig::from_json({{"framework", "daily"}}), ConfigError);

  const auto pmf = default_topk_pmf();
  double mean = 0.0, total = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    mean += static_cast<double>(k) * pmf[k];
    total += pmf[k];
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(pmf[0] == 0.0);
  CHECK(mean == doctest::Approx(5.0).epsilon(0.2));

  cfg.replications = 3;
  const auto csv = simulate(cfg, FreightCoeffs::default_coeffs(), regions).to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
