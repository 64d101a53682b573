#pragma once

#include <cmath>

namespace rnf::act {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }

inline double elu_grad_from_value(double x, double value) { return x >= 0.0 ? 1.0 : value + 1.0; }

/// ln(1+e^x), evaluated as x + ln(1+e^{-x}) for large x so it never overflows.
inline double softplus(double x) {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// Inverse of softplus on (0, inf); used to initialise positivity-constrained
/// raw parameters at a chosen value.
inline double softplus_inv(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

}  // namespace rnf::act
