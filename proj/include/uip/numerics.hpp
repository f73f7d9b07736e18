#pragma once

#include <span>

namespace uip::numerics {

struct NumericTolerances {
  double residual_tol = 1e-12;
  int max_iter = 64;
};

/// Principal branch of Lambert W. Throws DomainError below -1/e (with 1e-15 slack).
double lambert_w0(double z, const NumericTolerances& tol = {});

/// W(e^x) for any finite x, without forming e^x.
double lambert_w_exp(double x, const NumericTolerances& tol = {});

/// ln sum_k w_k e^{v_k}. Terms with zero weight are ignored.
double log_sum_exp(std::span<const double> values, std::span<const double> weights);
double log_sum_exp(std::span<const double> values);

}  // namespace uip::numerics
