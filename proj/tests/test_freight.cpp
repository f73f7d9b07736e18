#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "uip/errors.hpp"
#include "uip/freight.hpp"
#include "uip/pricing.hpp"
#include "uip/rng.hpp"

using namespace uip;
using namespace uip::freight;
using model::BundleOption;

namespace {

model::Item load(int id, model::Point from, model::Point to, double salvage = 0.0) {
  model::Item it{id, salvage};
  it.freight = model::FreightItemData{from, to, 10};
  return it;
}

FreightCoeffs zero_coeffs(std::size_t regions) {
  FreightCoeffs c;
  c.beta0 = c.beta_d = c.beta_e = c.beta_b = 0.0;
  c.beta_org.assign(regions, 0.0);
  c.beta_dst.assign(regions, 0.0);
  return c;
}

}  // namespace

TEST_CASE("region model") {
  const auto m = RegionModel::default_model();
  m.validate();
  CHECK(m.nearest({1, 1}) == 0);
  CHECK(m.nearest({195, 250}) == 2);
  const auto back = RegionModel::from_json(m.to_json());
  CHECK(back.regions.size() == 4);
  CHECK(back.ehat == m.ehat);

  auto bad = m;
  bad.arrival_pmf = {0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.regions[1].centroid = bad.regions[0].centroid;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  FreightCoeffs c;
  c.beta_p = 0.0;
  CHECK_THROWS_AS(c.validate(4), ConfigError);
  const auto rt = FreightCoeffs::from_json(FreightCoeffs::default_coeffs().to_json());
  CHECK(rt.beta_dst == FreightCoeffs::default_coeffs().beta_dst);
}

TEST_CASE("perceived quality examples") {
  const auto regions = RegionModel::default_model();
  std::vector<model::Item> loads{load(0, {0, 0}, {0, 0}), load(1, {75, 70}, {200, 260}),
                                 load(2, {200, 260}, {190, 20})};
  auto c = zero_coeffs(4);
  CHECK(perceived_quality(BundleOption{1, 2}, loads, 3, c, regions) == 0.0);
  c.beta0 = 1.0;
  CHECK(perceived_quality(BundleOption{0}, loads, 0, c, regions) == 1.0);

  // Dropoff of load 1 is the pickup of load 2: the only deadhead is centroid -> first pickup.
  const double leg = model::distance({0, 0}, {75, 70});
  CHECK(empty_miles(BundleOption{1, 2}, loads, {0, 0}) == doctest::Approx(leg));
  CHECK(loaded_miles(BundleOption{1, 2}, loads) ==
        doctest::Approx(model::distance({75, 70}, {200, 260}) + model::distance({200, 260}, {190, 20})));

  auto d = FreightCoeffs::default_coeffs();
  const double want = d.beta0 + d.beta_d * loaded_miles(BundleOption{1, 2}, loads) + d.beta_e * leg + d.beta_b +
                      d.beta_org[1] + d.beta_dst[3];
  CHECK(perceived_quality(BundleOption{1, 2}, loads, 0, d, regions) == doctest::Approx(want).epsilon(1e-14));

  std::vector<model::Item> bare{model::Item{0, 0.0}};
  CHECK_THROWS_AS(perceived_quality(BundleOption{0}, bare, 0, d, regions), MissingFreightData);
}

TEST_CASE("expiration price") {
  const std::vector<double> q{0.0}, pmf{1.0};
  CHECK(expiration_price(q, pmf, 0.0, -1.0) == doctest::Approx(1.0 + oracle::bisect_w(std::exp(-1.0))).epsilon(1e-12));
  CHECK(expiration_price(q, pmf, 0.0, -1.0) == doctest::Approx(1.278465).epsilon(1e-6));
  // Agrees with the one-option closed form at marginal = salvage.
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> qq{rng.uniform(-2.0, 2.0)};
    const double xi = rng.uniform(0.0, 3.0);
    const auto opt = pricing::single_period_optimum(qq, -1.0, std::vector<double>{xi});
    CHECK(expiration_price(qq, pmf, xi, -1.0) == doctest::Approx(opt.prices[0]).epsilon(1e-12));
    CHECK(expiration_price(qq, pmf, xi, -1.0) >= xi + 1.0 - 1e-12);
  }
  // Cost convention: price below salvage by at least 1/beta.
  const std::vector<double> q2{-1.0, 0.5}, pmf2{0.3, 0.7};
  CHECK(expiration_price(q2, pmf2, 500.0, 0.01) <= 500.0 - 100.0);
}

TEST_CASE("logarithmic price trajectory") {
  const double pbar = 400.0, kappa = -2.0, mu = 0.5, beta = 0.01;
  CHECK(log_price(9, 10, pbar, kappa, 1.0, mu, beta) == doctest::Approx(pbar).epsilon(1e-14));
  for (int t = 0; t < 10; ++t) CHECK(log_price(t, 10, pbar, kappa, 0.0, mu, beta) == doctest::Approx(pbar).epsilon(1e-14));
  // Cost convention: quoted cost rises toward the deadline.
  for (int t = 1; t < 10; ++t)
    CHECK(log_price(t, 10, pbar, kappa, 2.0, mu, beta) >= log_price(t - 1, 10, pbar, kappa, 2.0, mu, beta));
  // Retail convention: price falls toward the deadline.
  for (int t = 1; t < 10; ++t)
    CHECK(log_price(t, 10, 2.0, 0.0, 1.0, mu, -1.0) <= log_price(t - 1, 10, 2.0, 0.0, 1.0, mu, -1.0));
  CHECK_THROWS_AS(log_price(10, 10, pbar, kappa, 1.0, mu, beta), DomainError);
  // Large arguments stay finite.
  CHECK(std::isfinite(log_price(0, 1000000, 50000.0, 0.0, 5.0, 1.0, 0.01)));
  const double direct = (-1.0 / beta) * (std::log(std::exp(-(beta * pbar + kappa)) + 1.0 * mu * 4.0) + kappa);
  CHECK(log_price(5, 10, pbar, kappa, 1.0, mu, beta) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("marginal value inverts the optimal price") {
  Rng rng(9);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> q{rng.uniform(-2.0, 3.0)}, pmf{1.0};
    const double delta = rng.uniform(-1.0, 4.0);
    const auto opt = pricing::single_period_optimum(q, -1.0, std::vector<double>{delta});
    CHECK(std::abs(load_marginal_value(q, pmf, opt.prices[0], -1.0) - delta) <= 1e-6);
    // Cost convention: mirrored instance.
    CHECK(std::abs(load_marginal_value(q, pmf, -opt.prices[0], 1.0) + delta) <= 1e-6);
  }
  const std::vector<double> q{0.0}, pmf{1.0};
  CHECK(load_marginal_value(q, pmf, 60.0, -1.0) == doctest::Approx(59.0).epsilon(1e-12));
}

TEST_CASE("custom bundle price") {
  Rng rng(13);
  const std::vector<double> pmf{0.4, 0.6};
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> q{rng.uniform(-2.0, 2.0)};
    const double delta = rng.uniform(0.0, 3.0);
    const auto opt = pricing::single_period_optimum(q, -1.0, std::vector<double>{delta});
    CHECK(custom_bundle_price(q, std::vector<double>{1.0}, delta, -1.0) == doctest::Approx(opt.prices[0]).epsilon(1e-12));
  }
  // Markup magnitude grows with quality in both conventions.
  double prev_retail = -1e300, prev_cost = 1e300;
  for (double shift = -3.0; shift <= 3.0; shift += 0.5) {
    const std::vector<double> q{shift - 0.5, shift + 0.5};
    const double retail = custom_bundle_price(q, pmf, 1.0, -1.0);
    const double cost = custom_bundle_price(q, pmf, 300.0, 0.01);
    CHECK(retail > prev_retail);
    CHECK(cost < prev_cost);
    prev_retail = retail;
    prev_cost = cost;
  }
}
