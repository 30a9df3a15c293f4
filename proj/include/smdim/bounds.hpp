#pragma once

#include "smdim/rational.hpp"

#include <cmath>
#include <cstddef>

namespace smdim::bounds {

/// Cumulative expected loss guaranteed to MRSOA on an ε_t-realizable stream:
/// Σ ε_t + γT + c·d.
inline Rational mrsoa_cumulative(const Rational& sum_eps, const Rational& gamma, std::size_t rounds, const Rational& c,
                                 int dimension) {
  return sum_eps + gamma * static_cast<long>(rounds) + c * dimension;
}

/// Agnostic regret guarantee c·d + γT + 1 + 2c·sqrt(d·T·ln(2cT)).
inline double agnostic_regret(double c, int dimension, double gamma, std::size_t rounds) {
  const double t = static_cast<double>(rounds);
  double bound = c * dimension + gamma * t + 1.0;
  if (c > 0 && dimension > 0 && rounds > 0) {
    bound += 2.0 * c * std::sqrt(dimension * t * std::log(2.0 * c * t));
  }
  return bound;
}

/// Regret of multiplicative weights against its best expert: c·sqrt(2T ln N).
inline double mw_regret(double c, std::size_t rounds, std::size_t experts) {
  if (experts <= 1) return 0.0;
  return c * std::sqrt(2.0 * static_cast<double>(rounds) * std::log(static_cast<double>(experts)));
}

/// Follow-the-leader regret for squared loss on the unit ball: 8(1 + ln T).
inline double ftl_squared_loss(std::size_t rounds) {
  return 8.0 * (1.0 + std::log(static_cast<double>(rounds)));
}

/// Two-point lower bound η·sqrt(T/8).
inline double sqrt_lower(double eta, std::size_t rounds) { return eta * std::sqrt(static_cast<double>(rounds) / 8.0); }

/// Exact test of value ≥ η·sqrt(T/8) for rational value and η ≥ 0.
inline bool meets_sqrt_lower(const Rational& value, const Rational& eta, std::size_t rounds) {
  if (value < 0) return false;
  return value * value * 8 >= eta * eta * static_cast<long>(rounds);
}

}  // namespace smdim::bounds
