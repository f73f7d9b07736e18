#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "uip/errors.hpp"
#include "uip/freight.hpp"
#include "uip/instance_io.hpp"
#include "uip/pricing.hpp"

using namespace uip;
using model::BundleOption;

namespace {

void check_same_qualities(const model::MarketInstance& a, const model::MarketInstance& b) {
  REQUIRE(a.item_count() == b.item_count());
  for (const auto& o : model::enumerate_options(a.item_count(), a.max_bundle_size))
    for (std::size_t w = 0; w < a.customer.type_count(); ++w)
      CHECK(a.customer.quality(o, static_cast<int>(w)) == b.customer.quality(o, static_cast<int>(w)));
}

}  // namespace

TEST_CASE("scenario instance round trip") {
  model::SyntheticParams p;
  p.max_bundles = 2;
  p.max_bundle_size = 3;
  p.demand = 7.5;
  const auto a = model::generate_synthetic(5, 4, "B", 1.5, p);
  const auto j = io::instance_to_json(a);
  const auto b = io::instance_from_json(j);
  CHECK(io::instance_to_json(b) == j);
  CHECK(b.demand == a.demand);
  CHECK(b.max_bundles == 2);
  CHECK(b.max_bundle_size == 3);
  check_same_qualities(a, b);
}

TEST_CASE("table and freight round trips through a file") {
  model::MarketInstance t;
  t.items = {model::Item{0, 0.5}, model::Item{1, 0.0}};
  t.customer = io::table_customer({{"0", {1.0}}, {"1", {2.0}}, {"0-1", {3.5}}, {"1-0", {3.0}}}, {1.0}, -1.0);
  t.demand = 3.0;
  t.max_bundles = 1;
  t.max_bundle_size = 2;
  const auto path = (std::filesystem::temp_directory_path() / "uip_io_test.json").string();
  io::save_instance(path, t);
  const auto back = io::load_instance(path);
  std::remove(path.c_str());
  check_same_qualities(t, back);
  CHECK(back.items[0].salvage == 0.5);

  const auto regions = freight::RegionModel::default_model();
  std::vector<model::Item> loads(3);
  for (int i = 0; i < 3; ++i) {
    loads[static_cast<std::size_t>(i)].id = i;
    loads[static_cast<std::size_t>(i)].salvage = 100.0 * (i + 1);
    loads[static_cast<std::size_t>(i)].freight = model::FreightItemData{{10.0 * i, 5.0}, {200.0, 40.0 * i}, 9};
  }
  model::MarketInstance f;
  f.items = loads;
  f.customer = freight::freight_customer(loads, freight::FreightCoeffs::default_coeffs(), regions);
  f.demand = 2.0;
  f.max_bundles = 1;
  f.max_bundle_size = 2;
  const auto fb = io::instance_from_json(io::instance_to_json(f));
  check_same_qualities(f, fb);
  CHECK(fb.customer.beta_p() == f.customer.beta_p());
  CHECK(fb.items[2].freight->dropoff == f.items[2].freight->dropoff);
}

TEST_CASE("an instance with no periods is worth its salvage") {
  const auto j = nlohmann::json::parse(R"({
    "items": [{"id": 0, "salvage": 1.25}, {"id": 1, "salvage": 0.5}],
    "customer": {"types": 1, "pmf": [1.0], "beta_p": -1.0,
                 "quality_spec": {"kind": "table", "qualities": {"0": [1.0], "1": [0.0]}}},
    "lambda": 0.0, "mu": 0.1, "ks": 0, "kb": 1})");
  const auto inst = io::instance_from_json(j);
  CHECK(inst.horizon() == 0);
  CHECK(pricing::exact_dp(inst, model::OptionSet::singletons(2)).value() == doctest::Approx(1.75));
}

TEST_CASE("malformed documents") {
  CHECK_THROWS_AS(io::instance_from_json(nlohmann::json::object()), ConfigError);
  auto j = io::instance_to_json(model::generate_synthetic(1, 2, "A", 1.0));
  j["customer"]["quality_spec"]["name"] = "Z";
  CHECK_THROWS_AS(io::instance_from_json(j), UnknownScenario);
  j["customer"]["quality_spec"] = {{"kind", "mystery"}};
  CHECK_THROWS_AS(io::instance_from_json(j), ConfigError);
  CHECK_THROWS_AS(io::load_instance("/nonexistent/instance.json"), ConfigError);
}
