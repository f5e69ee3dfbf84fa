#pragma once

// Complex gamma function at arbitrary precision.
//
// Stirling's asymptotic series for log Gamma, applied after shifting the
// argument upward with the recurrence Gamma(z+1) = z Gamma(z) until |z| is
// large enough for the series to reach the requested accuracy. The number
// of Stirling terms and the shift both grow with the digit count, so the
// method has no precision ceiling.

#include <mpfr.h>

#include <cmath>
#include <map>
#include <vector>

#include "epchiral/complex.hpp"

namespace epchiral {

/// Rising factorial (z)_n = z (z+1) ... (z+n-1); (z)_0 = 1.
inline Complex pochhammer(const Complex& z, long n, const PrecisionContext& ctx) {
  if (n < 0) throw DegenerateParameter("pochhammer: n must be >= 0");
  ScopedPrecision scope(ctx.working_digits());
  Complex r(1);
  Complex term = z;
  for (long k = 0; k < n; ++k) {
    r *= term;
    term.re += Real(1);
  }
  return r;
}

namespace detail {

/// Stirling coefficients B_{2k} / (2k (2k-1)), k = 1..n, at the current precision.
inline const std::vector<Real>& stirling_coefficients(size_t n) {
  thread_local std::map<mpfr_prec_t, std::vector<Real>> cache;
  auto& v = cache[current_bits()];
  if (v.size() >= n) return v;
  const Real two_pi = 2 * pi();
  for (size_t k = v.size() + 1; k <= n; ++k) {
    // B_{2k} = (-1)^{k+1} 2 (2k)! zeta(2k) / (2 pi)^{2k}
    Real zeta, fact;
    mpfr_zeta_ui(zeta.raw(), 2 * k, MPFR_RNDN);
    mpfr_fac_ui(fact.raw(), 2 * k, MPFR_RNDN);
    Real pw;
    mpfr_pow_ui(pw.raw(), two_pi.raw(), 2 * k, MPFR_RNDN);
    Real b = 2 * fact * zeta / pw;
    if (k % 2 == 0) b = -b;
    const double denom = static_cast<double>(2 * k) * static_cast<double>(2 * k - 1);
    v.push_back(b / denom);
  }
  return v;
}

inline bool near_nonpositive_integer(const Complex& z, int digits) {
  const Real n = round(z.re);
  if (n > 0.0) return false;
  return abs(z - Complex(n)) < tolerance(digits);
}

/// log Gamma(z) for Re z > 0 and |z| >= the Stirling threshold, current precision.
inline Complex stirling_log_gamma(const Complex& z, int digits) {
  const Complex log_z = log(z);
  Complex s = (z - Complex(0.5)) * log_z - z;
  s.re += log(2 * pi()) / 2;
  const Complex inv = Complex(1) / z;
  const Complex inv2 = inv * inv;
  const Real eps = tolerance(digits) * abs(s);
  Complex power = inv;
  size_t k = 0;
  size_t want = 16;
  while (true) {
    const auto& coef = stirling_coefficients(want);
    for (; k < coef.size(); ++k) {
      Complex term = coef[k] * power;
      s += term;
      if (abs(term) < eps) return s;
      power *= inv2;
    }
    want *= 2;
    if (want > 100000) throw PrecisionExhausted("stirling series did not converge");
  }
}

}  // namespace detail

/// Gamma(z) to ctx.digits significant digits.
inline Complex gamma_complex(const Complex& z, const PrecisionContext& ctx) {
  if (detail::near_nonpositive_integer(z, ctx.digits))
    throw PoleError("gamma: argument at a non-positive integer");
  const int work = ctx.working_digits();
  // Stirling error after optimal truncation is about exp(-2 pi |z|).
  const double threshold = 0.4 * work + 10.0;
  // exp() of a large log Gamma loses log10|log Gamma| digits of relative accuracy.
  const double mag = std::max(1.0, std::abs(to_double(z.re)) + std::abs(to_double(z.im)) + threshold);
  const int extra = 10 + static_cast<int>(std::ceil(std::log10(mag * std::log(mag + 2.0) + 1.0)));
  ScopedPrecision scope(work + extra);

  Complex w = z;
  w.round_to(current_bits());
  const double im = std::abs(to_double(w.im));
  double need_re = 1.0;
  if (im < threshold) need_re = std::max(need_re, std::sqrt(threshold * threshold - im * im));
  long shift = 0;
  const double re = to_double(w.re);
  if (re < need_re) shift = static_cast<long>(std::ceil(need_re - re));

  Complex product(1);
  for (long k = 0; k < shift; ++k) {
    product *= w;
    w.re += Real(1);
  }
  Complex g = exp(detail::stirling_log_gamma(w, work + extra));
  if (shift > 0) g = g / product;
  return g;
}

/// 1/Gamma(z); exactly zero at the poles of Gamma.
inline Complex rgamma_complex(const Complex& z, const PrecisionContext& ctx) {
  if (detail::near_nonpositive_integer(z, ctx.digits)) return Complex(0);
  ScopedPrecision scope(ctx.working_digits());
  return Complex(1) / gamma_complex(z, ctx);
}

}  // namespace epchiral
