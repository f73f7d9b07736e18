#include "uip/freight.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "uip/errors.hpp"
#include "uip/numerics.hpp"

namespace uip::freight {

std::size_t RegionModel::nearest(Point p) const {
  if (regions.empty()) throw ConfigError("region model has no regions");
  std::size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const double d = model::distance(p, regions[r].centroid);
    if (d < dist) {
      dist = d;
      best = r;
    }
  }
  return best;
}

void RegionModel::validate() const {
  if (regions.empty()) throw ConfigError("region model has no regions");
  if (arrival_pmf.size() != regions.size() || ehat.size() != regions.size())
    throw ConfigError("region pmf and ehat must have one entry per region");
  double s = 0.0;
  for (double p : arrival_pmf) {
    if (!(p >= 0.0)) throw ConfigError("arrival pmf entries must be non-negative");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError("arrival pmf must sum to 1");
  for (std::size_t a = 0; a < regions.size(); ++a)
    for (std::size_t b = a + 1; b < regions.size(); ++b)
      if (regions[a].centroid == regions[b].centroid) throw ConfigError("region centroids must be distinct");
}

nlohmann::json RegionModel::to_json() const {
  nlohmann::json j;
  j["regions"] = nlohmann::json::array();
  for (const auto& r : regions) j["regions"].push_back({{"id", r.id}, {"centroid", {r.centroid.x, r.centroid.y}}});
  j["arrival_pmf"] = arrival_pmf;
  j["ehat"] = ehat;
  return j;
}

RegionModel RegionModel::from_json(const nlohmann::json& j) {
  RegionModel m;
  try {
    for (const auto& r : j.at("regions"))
      m.regions.push_back(Region{r.at("id").get<int>(), Point{r.at("centroid").at(0).get<double>(), r.at("centroid").at(1).get<double>()}});
    m.arrival_pmf = j.at("arrival_pmf").get<std::vector<double>>();
    m.ehat = j.at("ehat").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad region model: ") + e.what());
  }
  m.validate();
  return m;
}

RegionModel RegionModel::default_model() {
  RegionModel m;
  m.regions = {{0, {0.0, 0.0}}, {1, {75.0, 70.0}}, {2, {200.0, 260.0}}, {3, {190.0, 20.0}}};
  m.arrival_pmf = {0.2, 0.15, 0.35, 0.3};
  m.ehat = {70.0, 90.0, 50.0, 60.0};
  return m;
}

void FreightCoeffs::validate(std::size_t regions) const {
  if (beta_p == 0.0 || !std::isfinite(beta_p)) throw ConfigError("beta_p must be finite and non-zero");
  if (!beta_org.empty() && beta_org.size() != regions) throw ConfigError("beta_org needs one entry per region");
  if (!beta_dst.empty() && beta_dst.size() != regions) throw ConfigError("beta_dst needs one entry per region");
}

nlohmann::json FreightCoeffs::to_json() const {
  return {{"beta0", beta0}, {"beta_d", beta_d}, {"beta_e", beta_e},    {"beta_b", beta_b},
          {"beta_p", beta_p}, {"beta_org", beta_org}, {"beta_dst", beta_dst}};
}

FreightCoeffs FreightCoeffs::from_json(const nlohmann::json& j) {
  FreightCoeffs c;
  c.beta0 = j.value("beta0", c.beta0);
  c.beta_d = j.value("beta_d", c.beta_d);
  c.beta_e = j.value("beta_e", c.beta_e);
  c.beta_b = j.value("beta_b", c.beta_b);
  c.beta_p = j.value("beta_p", c.beta_p);
  c.beta_org = j.value("beta_org", std::vector<double>{});
  c.beta_dst = j.value("beta_dst", std::vector<double>{});
  return c;
}

FreightCoeffs FreightCoeffs::default_coeffs() {
  FreightCoeffs c;
  c.beta_org = {0.0, 0.1, 0.2, 0.1};
  c.beta_dst = {-0.2, 0.0, 0.3, 0.1};
  return c;
}

namespace {

const model::FreightItemData& data(std::span<const Item> loads, int idx) {
  const auto& it = loads[static_cast<std::size_t>(idx)];
  if (!it.freight) throw MissingFreightData("load " + std::to_string(it.id) + " has no freight data");
  return *it.freight;
}

}  // namespace

double loaded_miles(const BundleOption& option, std::span<const Item> loads) {
  double d = 0.0;
  for (int l : option.items()) {
    const auto& f = data(loads, l);
    d += model::distance(f.pickup, f.dropoff);
  }
  return d;
}

double empty_miles(const BundleOption& option, std::span<const Item> loads, Point start) {
  double e = 0.0;
  Point at = start;
  for (int l : option.items()) {
    const auto& f = data(loads, l);
    e += model::distance(at, f.pickup);
    at = f.dropoff;
  }
  return e;
}

double perceived_quality(const BundleOption& option, std::span<const Item> loads, std::size_t region,
                         const FreightCoeffs& coeffs, const RegionModel& regions) {
  return perceived_quality(option, loads, regions.regions[region].centroid, coeffs, regions);
}

double perceived_quality(const BundleOption& option, std::span<const Item> loads, Point start,
                         const FreightCoeffs& coeffs, const RegionModel& regions) {
  const auto& first = data(loads, option.items().front());
  const auto& last = data(loads, option.items().back());
  double q = coeffs.beta0 + coeffs.beta_d * loaded_miles(option, loads) +
             coeffs.beta_e * empty_miles(option, loads, start);
  if (option.cardinality() == 2) q += coeffs.beta_b;
  if (!coeffs.beta_org.empty()) q += coeffs.beta_org[regions.nearest(first.pickup)];
  if (!coeffs.beta_dst.empty()) q += coeffs.beta_dst[regions.nearest(last.dropoff)];
  return q;
}

std::vector<double> perceived_qualities(const BundleOption& option, std::span<const Item> loads,
                                        const FreightCoeffs& coeffs, const RegionModel& regions) {
  std::vector<double> q(regions.size());
  for (std::size_t r = 0; r < q.size(); ++r) q[r] = perceived_quality(option, loads, r, coeffs, regions);
  return q;
}

model::CustomerModel freight_customer(std::vector<Item> loads, const FreightCoeffs& coeffs, const RegionModel& regions) {
  regions.validate();
  coeffs.validate(regions.size());
  auto shared = std::make_shared<const std::vector<Item>>(std::move(loads));
  nlohmann::json spec = {{"kind", "freight"}, {"coeffs", coeffs.to_json()}, {"regions", regions.to_json()}};
  return model::CustomerModel(
      regions.arrival_pmf, coeffs.beta_p,
      [shared, coeffs, regions](const BundleOption& o, int w) {
        return perceived_quality(o, *shared, static_cast<std::size_t>(w), coeffs, regions);
      },
      std::move(spec), 100000);
}

double expiration_price(std::span<const double> quality, std::span<const double> pmf, double salvage, double beta_p) {
  double e = 0.0;
  for (std::size_t w = 0; w < quality.size(); ++w)
    e += pmf[w] * numerics::lambert_w_exp(quality[w] + beta_p * salvage - 1.0);
  return salvage - (1.0 + e) / beta_p;
}

double expiration_price(std::size_t load, std::span<const Item> loads, const FreightCoeffs& coeffs,
                        const RegionModel& regions) {
  const BundleOption o{static_cast<int>(load)};
  const auto q = perceived_qualities(o, loads, coeffs, regions);
  return expiration_price(q, regions.arrival_pmf, loads[load].salvage, coeffs.beta_p);
}

double log_price(int t, int expiration, double pbar, double kappa, double alpha, double mu, double beta_p) {
  if (t > expiration - 1) throw DomainError("log_price: period is at or past the expiration");
  if (!(alpha >= 0.0)) throw DomainError("log_price: alpha must be non-negative");
  const double remaining = static_cast<double>(expiration - 1 - t);
  // ln(e^{-(b pbar + kappa)} + a mu n), computed without overflowing the exponential.
  const double x = -(beta_p * pbar + kappa);
  const double y = alpha * mu * remaining;
  double lg;
  if (y <= 0.0) lg = x;
  else if (x > std::log(y)) lg = x + std::log1p(y * std::exp(-x));
  else lg = std::log(y) + std::log1p(std::exp(x - std::log(y)));
  return (-1.0 / beta_p) * (lg + kappa);
}

double load_marginal_value(std::span<const double> quality, std::span<const double> pmf, double price, double beta_p) {
  double e = 0.0;
  for (std::size_t w = 0; w < quality.size(); ++w) e += pmf[w] * std::exp(quality[w] + beta_p * price);
  return price + (1.0 + e) / beta_p;
}

double custom_bundle_price(std::span<const double> quality, std::span<const double> pmf, double delta, double beta_p) {
  double e = 0.0;
  for (std::size_t w = 0; w < quality.size(); ++w)
    e += pmf[w] * numerics::lambert_w_exp(quality[w] + beta_p * delta - 1.0);
  return delta - (1.0 + e) / beta_p;
}

}  // namespace uip::freight
