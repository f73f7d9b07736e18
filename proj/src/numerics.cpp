#include "uip/numerics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "uip/errors.hpp"

namespace uip::numerics {
namespace {

constexpr double kInvE = 0.36787944117144233;

double initial_guess(double z) {
  if (z < -0.25) {
    // Series around the branch point in p = sqrt(2(ez + 1)).
    const double p = std::sqrt(std::max(0.0, 2.0 * (std::exp(1.0) * z + 1.0)));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))));
  }
  if (z < 3.0) {
    const double l = std::log1p(z);
    return l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  const double l1 = std::log(z);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

// Newton on g + ln g = x, expressed as g <- g(1 + x - ln g)/(1 + g).
double polish_in_g(double g, double x, int steps) {
  for (int k = 0; k < steps; ++k) {
    const double next = g * (1.0 + x - std::log(g)) / (1.0 + g);
    if (!(next > 0.0)) break;
    const bool done = std::abs(next - g) <= 1e-16 * g;
    g = next;
    if (done) break;
  }
  return g;
}

}  // namespace

double lambert_w0(double z, const NumericTolerances& tol) {
  if (std::isnan(z)) throw DomainError("lambert_w0 of NaN");
  if (z < -kInvE) {
    if (z < -kInvE - 1e-15) throw DomainError("lambert_w0 argument below -1/e: " + std::to_string(z));
    return -1.0;
  }
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return z;

  double w = initial_guess(z);
  if (w <= -1.0) return -1.0;
  for (int it = 0; it < tol.max_iter; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    if (f == 0.0) break;
    const double wp1 = w + 1.0;
    if (wp1 <= 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    double next = w - step;
    if (next < -1.0) next = -1.0 + 0.5 * wp1;
    const bool small = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(w));
    w = next;
    if (small) break;
  }
  return w;
}

double lambert_w_exp(double x, const NumericTolerances& tol) {
  if (!std::isfinite(x)) throw DomainError("lambert_w_exp requires finite x");
  if (x < -30.0) {
    // g ~ e^x: solve y + e^y = x for y = ln g.
    double y = x;
    for (int it = 0; it < tol.max_iter; ++it) {
      const double ey = std::exp(y);
      const double step = (y + ey - x) / (1.0 + ey);
      y -= step;
      if (std::abs(step) <= 1e-16 * std::abs(y)) break;
    }
    return std::exp(y);
  }
  double g;
  if (x <= 2.0) {
    g = lambert_w0(std::exp(x), tol);
  } else {
    g = x - std::log(x);
  }
  return polish_in_g(g, x, tol.max_iter);
}

double log_sum_exp(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw DomainError("log_sum_exp of empty input");
  if (values.size() != weights.size()) throw DomainError("log_sum_exp: values and weights differ in length");
  double m = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (weights[k] < 0.0 || std::isnan(weights[k])) throw DomainError("log_sum_exp: negative weight");
    if (weights[k] > 0.0) {
      any = true;
      m = std::max(m, values[k]);
    }
  }
  if (!any) throw DomainError("log_sum_exp: all weights are zero");
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (weights[k] > 0.0) s += weights[k] * std::exp(values[k] - m);
  }
  return m + std::log(s);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw DomainError("log_sum_exp of empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace uip::numerics
