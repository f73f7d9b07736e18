#include "uip/instance_io.hpp"

#include <fstream>
#include <memory>

#include "uip/errors.hpp"
#include "uip/freight.hpp"

namespace uip::io {

using nlohmann::json;

model::CustomerModel table_customer(std::map<std::string, std::vector<double>> qualities, std::vector<double> pmf,
                                    double beta_p) {
  json spec = {{"kind", "table"}, {"qualities", qualities}};
  auto shared = std::make_shared<const std::map<std::string, std::vector<double>>>(std::move(qualities));
  return model::CustomerModel(
      std::move(pmf), beta_p,
      [shared](const model::BundleOption& o, int w) {
        const auto it = shared->find(o.key());
        if (it == shared->end()) throw DomainError("no quality listed for option " + o.key());
        return it->second.at(static_cast<std::size_t>(w));
      },
      std::move(spec));
}

json instance_to_json(const model::MarketInstance& instance) {
  json items = json::array();
  for (const auto& it : instance.items) {
    json e = {{"id", it.id}, {"salvage", it.salvage}};
    if (it.features) e["features"] = {it.features->a, it.features->b};
    if (it.freight)
      e["freight"] = {{"pickup", {it.freight->pickup.x, it.freight->pickup.y}},
                      {"dropoff", {it.freight->dropoff.x, it.freight->dropoff.y}},
                      {"expiration", it.freight->expiration}};
    items.push_back(e);
  }
  const auto& c = instance.customer;
  return {{"items", items},
          {"customer",
           {{"types", c.type_count()}, {"pmf", c.pmf()}, {"beta_p", c.beta_p()}, {"quality_spec", c.quality_spec()}}},
          {"lambda", instance.demand},
          {"mu", instance.arrival_prob},
          {"ks", instance.max_bundles},
          {"kb", instance.max_bundle_size}};
}

namespace {

model::Point point(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

model::CustomerModel customer_from(const json& c, const std::vector<model::Item>& items) {
  const auto pmf = c.at("pmf").get<std::vector<double>>();
  const double beta_p = c.at("beta_p").get<double>();
  if (c.contains("types") && c["types"].get<std::size_t>() != pmf.size())
    throw ConfigError("customer.types does not match the pmf length");
  const auto& spec = c.at("quality_spec");
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "scenario") {
    const auto name = spec.at("name").get<std::string>();
    if (model::scenario_types(name) != pmf.size()) throw ConfigError("scenario " + name + " needs a two-entry pmf");
    return model::CustomerModel(pmf, beta_p, model::scenario_quality(name, spec.at("beta").get<double>(), items), spec);
  }
  if (kind == "freight") {
    const auto regions = freight::RegionModel::from_json(spec.at("regions"));
    auto coeffs = freight::FreightCoeffs::from_json(spec.at("coeffs"));
    coeffs.beta_p = beta_p;
    if (regions.arrival_pmf != pmf) throw ConfigError("freight customer pmf must equal the region arrival pmf");
    return freight::freight_customer(items, coeffs, regions);
  }
  if (kind == "table")
    return table_customer(spec.at("qualities").get<std::map<std::string, std::vector<double>>>(), pmf, beta_p);
  throw ConfigError("unknown quality kind: " + kind);
}

}  // namespace

model::MarketInstance instance_from_json(const json& j) {
  model::MarketInstance m;
  try {
    for (const auto& e : j.at("items")) {
      model::Item it;
      it.id = e.at("id").get<int>();
      it.salvage = e.value("salvage", 0.0);
      if (e.contains("features") && !e["features"].is_null())
        it.features = model::Features{e["features"].at(0).get<double>(), e["features"].at(1).get<double>()};
      if (e.contains("freight") && !e["freight"].is_null()) {
        const auto& f = e["freight"];
        it.freight = model::FreightItemData{point(f.at("pickup")), point(f.at("dropoff")), f.value("expiration", 0)};
      }
      m.items.push_back(it);
    }
    m.customer = customer_from(j.at("customer"), m.items);
    m.demand = j.at("lambda").get<double>();
    m.arrival_prob = j.value("mu", 0.1);
    m.max_bundles = j.value("ks", 0);
    m.max_bundle_size = j.value("kb", 1);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad instance document: ") + e.what());
  }
  m.validate();
  return m;
}

model::MarketInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return instance_from_json(j);
}

void save_instance(const std::string& path, const model::MarketInstance& instance) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << instance_to_json(instance).dump(2) << '\n';
}

}  // namespace uip::io
