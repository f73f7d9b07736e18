#include <cmath>

#include "uip/errors.hpp"
#include "uip/model.hpp"
#include "uip/rng.hpp"

namespace uip::model {
namespace {

struct Sums {
  double a = 0.0;
  double b = 0.0;
};

Sums feature_sums(const BundleOption& option, const std::vector<Item>& items) {
  Sums s;
  for (int i : option.items()) {
    const auto& f = items.at(static_cast<std::size_t>(i)).features;
    if (!f) throw DomainError("synthetic scenario requires item features");
    s.a += f->a;
    s.b += f->b;
  }
  return s;
}

bool known_scenario(const std::string& s) { return s == "bounds-two-type" || s == "A" || s == "B" || s == "C"; }

}  // namespace

std::size_t scenario_types(const std::string& scenario) {
  if (!known_scenario(scenario)) throw UnknownScenario(scenario);
  return 2;
}

QualityFn scenario_quality(const std::string& scenario, double beta, std::vector<Item> items) {
  if (!known_scenario(scenario)) throw UnknownScenario(scenario);
  auto shared = std::make_shared<const std::vector<Item>>(std::move(items));
  return [scenario, beta, shared](const BundleOption& option, int type) {
    const Sums s = feature_sums(option, *shared);
    if (scenario == "bounds-two-type") {
      return type == 0 ? beta * (s.a + 0.5 * s.b) : beta * (0.5 * s.a + s.b);
    }
    if (type == 0) return 0.5 * beta * (s.a + s.b);
    if (scenario == "A") return beta * s.a;
    if (scenario == "B") return 2.0 * beta * std::min(s.a, s.b);
    return beta * std::pow(s.a, 1.5);
  };
}

MarketInstance generate_synthetic(std::uint64_t seed, std::size_t count, const std::string& scenario, double beta,
                                  const SyntheticParams& params) {
  if (!known_scenario(scenario)) throw UnknownScenario(scenario);
  Rng rng(substream_seed(seed, "instance-gen"));
  MarketInstance inst;
  for (std::size_t i = 0; i < count; ++i) {
    Item item;
    item.id = static_cast<int>(i);
    Features f;
    f.a = rng.uniform();
    f.b = rng.uniform();
    item.features = f;
    inst.items.push_back(item);
  }
  nlohmann::json spec = {{"kind", "scenario"}, {"name", scenario}, {"beta", beta}};
  inst.customer = CustomerModel({0.5, 0.5}, params.beta_p, scenario_quality(scenario, beta, inst.items), spec);
  inst.demand = params.demand;
  inst.arrival_prob = params.arrival_prob;
  inst.max_bundles = params.max_bundles;
  inst.max_bundle_size = params.max_bundle_size;
  inst.validate();
  return inst;
}

}  // namespace uip::model
