#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "uip/errors.hpp"
#include "uip/numerics.hpp"
#include "uip/rng.hpp"

using namespace uip::numerics;

TEST_CASE("lambert_w0 reference points") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  const double omega = oracle::bisect_w(1.0);
  CHECK(std::abs(omega - 0.567143290409) < 1e-11);
  CHECK(std::abs(lambert_w0(1.0) - omega) < 1e-12);
  CHECK(lambert_w0(-std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("lambert_w0 rejects arguments below the branch point") {
  CHECK_THROWS_AS(lambert_w0(-0.5), uip::DomainError);
  CHECK_NOTHROW(lambert_w0(-std::exp(-1.0) - 1e-16));
}

TEST_CASE("lambert_w0 residual on random arguments") {
  uip::Rng rng(7);
  const double lo = -std::exp(-1.0);
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    // Mix of uniform and log-uniform draws to cover the branch point and the large-argument tail.
    double z;
    switch (k % 3) {
      case 0: z = rng.uniform(lo, 1.0); break;
      case 1: z = rng.uniform(lo, 1e6); break;
      default: z = std::exp(rng.uniform(-30.0, std::log(1e6))); break;
    }
    const double w = lambert_w0(z);
    CHECK_GE(w, -1.0);
    worst = std::max(worst, std::abs(w * std::exp(w) - z) / (1.0 + std::abs(z)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("lambert_w0 is monotone on a sorted sample") {
  std::vector<double> z;
  uip::Rng rng(11);
  for (int k = 0; k < 20000; ++k) z.push_back(rng.uniform(-std::exp(-1.0), 50.0));
  std::sort(z.begin(), z.end());
  double prev = -1.0;
  for (double v : z) {
    const double w = lambert_w0(v);
    CHECK(w >= prev);
    prev = w;
  }
}

TEST_CASE("lambert_w_exp reference points") {
  CHECK(lambert_w_exp(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(lambert_w_exp(0.0) - oracle::bisect_w(1.0)) < 1e-12);
  const double g = lambert_w_exp(700.0);
  CHECK(g > 690.0);
  CHECK(g < 700.0);
  CHECK(std::abs(g + std::log(g) - 700.0) <= 1e-12 * 701.0);
  // Deep negative tail: g ~ e^x.
  const double tiny = lambert_w_exp(-200.0);
  CHECK(tiny > 0.0);
  CHECK(std::abs(std::log(tiny) + tiny + 200.0) <= 1e-12 * 201.0);
}

TEST_CASE("lambert_w_exp matches lambert_w0 on (0, 700]") {
  uip::Rng rng(3);
  for (int k = 0; k < 20000; ++k) {
    const double z = std::exp(rng.uniform(-40.0, std::log(700.0)));
    const double a = lambert_w_exp(std::log(z));
    const double b = lambert_w0(z);
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("lambert_w_exp defining identity, monotonicity and nonexpansion") {
  uip::Rng rng(5);
  for (int k = 0; k < 20000; ++k) {
    const double x = rng.uniform(-700.0, 1000.0);
    const double g = lambert_w_exp(x);
    CHECK(g > 0.0);
    CHECK(std::abs(std::log(g) + g - x) <= 1e-12 * (1.0 + std::abs(x)));
  }
  for (int k = 0; k < 20000; ++k) {
    double a = rng.uniform(-50.0, 50.0), b = rng.uniform(-50.0, 50.0);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    const double d = lambert_w_exp(b) - lambert_w_exp(a);
    CHECK(d > 0.0);
    CHECK(d <= b - a);
  }
}

TEST_CASE("log_sum_exp") {
  const std::vector<double> v0{0.0}, w0{1.0};
  CHECK(log_sum_exp(v0, w0) == 0.0);
  const std::vector<double> v1{0.0, std::log(3.0)}, w1{0.5, 0.5};
  CHECK(log_sum_exp(v1, w1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const std::vector<double> v2{1000.0, 1000.0}, w2{1.0, 1.0};
  CHECK(log_sum_exp(v2, w2) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  const std::vector<double> v3{5.0, 99.0}, w3{1.0, 0.0};
  CHECK(log_sum_exp(v3, w3) == 5.0);
  const std::vector<double> empty;
  CHECK_THROWS_AS(log_sum_exp(empty, empty), uip::DomainError);
  const std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_AS(log_sum_exp(v1, zeros), uip::DomainError);
  CHECK_THROWS_AS(log_sum_exp(v1, w0), uip::DomainError);
}
