#pragma once

#include <gtest/gtest.h>

#include <random>

#include "epchiral/observables.hpp"

namespace epchiral::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(0x5eed1234abcdULL);
  return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Complex random_complex(double re_lo, double re_hi, double im_lo, double im_hi) {
  return {Real(uniform(re_lo, re_hi)), Real(uniform(im_lo, im_hi))};
}

/// |a - b| / |b|, or |a| when b vanishes.
inline Real rel_err(const Complex& a, const Complex& b) {
  const Real d = abs(a - b);
  const Real n = abs(b);
  return is_zero(n) ? d : d / n;
}

inline Complex parse_complex(const char* re, const char* im) { return {Real::from_string(re), Real::from_string(im)}; }

inline PrecisionContext digits(int d) {
  PrecisionContext c;
  c.digits = d;
  c.max_digits = std::max(c.max_digits, d);
  return c;
}

inline LoopSpec loop(const char* kappa, const char* g0, const char* rho, const char* theta_i, const char* omega,
                     Direction d = Direction::CCW) {
  LoopSpec l;
  l.kappa = ExactReal::parse(kappa);
  l.g0 = ExactReal::parse(g0);
  l.rho = ExactReal::parse(rho);
  l.theta_i = ExactReal::parse(theta_i);
  l.omega = ExactReal::parse(omega);
  l.direction = d;
  return l;
}

/// Exponent such that x < 10^-n, for readable failure messages.
inline double digits_of(const Real& x) { return -log10_abs(x); }

}  // namespace epchiral::test
