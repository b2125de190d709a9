#pragma once

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <numbers>

#include "cvm/error.hpp"

namespace cvm {

/// Generalized binomial coefficient C_q^n = q(q-1)...(q-n+1)/n!.
inline double gen_binomial(double q, int n) {
  if (n < 0) throw PreconditionError("gen_binomial: n must be non-negative");
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= (q - i) / double(i + 1);
  return r;
}

inline double log_factorial(int n) { return std::lgamma(n + 1.0); }
inline double factorial(int n) { return std::tgamma(n + 1.0); }

inline double log_ball_volume(int n, double r) {
  return 0.5 * n * std::log(std::numbers::pi) + n * std::log(r) - std::lgamma(0.5 * n + 1.0);
}

/// Volume of the Euclidean ball of radius r in R^n.
inline double ball_volume(int n, double r) {
  if (n < 1 || !(r > 0)) throw PreconditionError("ball_volume: need n >= 1 and r > 0");
  return std::exp(log_ball_volume(n, r));
}

/// Radius of the centered ball with the given volume.
inline double ball_radius_for_volume(int n, double volume) {
  return std::exp((std::log(volume) - log_ball_volume(n, 1.0)) / n);
}

inline double digamma(double x) { return boost::math::digamma(x); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace cvm
