#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uip/model.hpp"

namespace uip::io {

/// Customer whose qualities are listed per option key ("0", "0-1", ...). Unlisted options throw DomainError.
model::CustomerModel table_customer(std::map<std::string, std::vector<double>> qualities, std::vector<double> pmf,
                                    double beta_p);

nlohmann::json instance_to_json(const model::MarketInstance& instance);
/// Throws ConfigError on malformed documents and UnknownScenario on unknown scenario names.
model::MarketInstance instance_from_json(const nlohmann::json& j);

model::MarketInstance load_instance(const std::string& path);
void save_instance(const std::string& path, const model::MarketInstance& instance);

}  // namespace uip::io
