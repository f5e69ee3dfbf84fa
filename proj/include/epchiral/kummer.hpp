#pragma once

// Confluent hypergeometric functions of the first kind F(a, b, z) = 1F1 and
// second kind U(a, b, z) (Tricomi), at arbitrary precision.
//
// F is summed directly; cancellation is detected from the ratio of the
// largest partial sum to the result and repaired by recomputing with the
// lost digits added to the working precision. U is built from two F's via
// the connection formula on the principal sheet of z and moved to other
// sheets with the monodromy relation
//   U(a,b,z e^{2 pi i n}) = e^{-2 pi i b n} U(a,b,z)
//       + 2 pi i e^{-pi i b n} sin(pi b n) / (sin(pi b) Gamma(b) Gamma(1+a-b)) F(a,b,z).
// For b within 10^{-w/2} of an integer (w = working digits) U is replaced by
// the average of its values at b +- 10^{-w/2}, an O(10^{-w}) surrogate for
// the logarithmic case.

#include <algorithm>
#include <climits>
#include <cmath>

#include "epchiral/gamma.hpp"

namespace epchiral {

struct KummerParams {
  Complex a;
  Complex b;
  Complex eta;
  /// n such that the continuous argument of eta is Arg(eta) + 2 pi n.
  long eta_winding = 0;
};

namespace detail {

inline long exponent2(const Real& x) {
  return is_zero(x) ? LONG_MIN / 2 : static_cast<long>(mpfr_get_exp(x.raw()));
}
inline long exponent2(const Complex& z) { return std::max(exponent2(z.re), exponent2(z.im)); }

struct SeriesResult {
  Complex value;
  double loss_digits = 0;  // log10(max |partial sum| / |result|)
};

/// Taylor series of 1F1 at the current precision.
inline SeriesResult kummer_series(const Complex& a, const Complex& b, const Complex& z) {
  const long bits = static_cast<long>(current_bits());
  Complex sum(1);
  Complex term(1);
  long max_exp = exponent2(sum);
  int small = 0;
  Complex ar = a;
  Complex br = b;
  for (long r = 0;; ++r) {
    if (r > 50'000'000) throw PrecisionExhausted("kummer_F: series did not terminate");
    term = term * ar * z / (br * Real(r + 1));
    ar.re += Real(1);
    br.re += Real(1);
    sum += term;
    max_exp = std::max(max_exp, exponent2(sum));
    // Terms are compared with the largest partial sum, not the current sum,
    // so the loop runs past the point where cancellation shrinks the sum.
    if (is_zero(term) || exponent2(term) < max_exp - bits) {
      if (++small >= 10) break;
    } else {
      small = 0;
    }
  }
  SeriesResult out;
  if (is_zero(sum)) {
    out.loss_digits = static_cast<double>(bits) * 0.30103;
  } else {
    out.loss_digits = std::max(0.0, static_cast<double>(max_exp - exponent2(sum)) * 0.30103);
  }
  out.value = std::move(sum);
  return out;
}

inline bool near_integer(const Complex& b, int digits, Real* nearest = nullptr) {
  const Real m = round(b.re);
  if (nearest) *nearest = m;
  return abs(b - Complex(m)) < tolerance(digits);
}

inline int ceil_digits(double x) { return static_cast<int>(std::ceil(x)); }

/// F(a,b,z) with at least ctx.digits correct digits relative to |F|.
inline Complex kummer_F_checked(const Complex& a, const Complex& b, const Complex& z,
                                const PrecisionContext& ctx) {
  int w = ctx.working_digits();
  const int cap = ctx.max_digits + ctx.guard_digits;
  while (true) {
    ScopedPrecision scope(w);
    SeriesResult s = kummer_series(a, b, z);
    if (s.loss_digits <= static_cast<double>(w - ctx.working_digits() + ctx.guard_digits))
      return std::move(s.value);
    const int next = ctx.working_digits() + ceil_digits(s.loss_digits) + 2;
    if (next > cap)
      throw PrecisionExhausted("kummer_F: cancellation of " + std::to_string(ceil_digits(s.loss_digits)) +
                               " digits exceeds max_digits");
    w = std::max(next, w + 1);
  }
}

/// Internal context for nested evaluations carried at working precision `w`.
inline PrecisionContext nested(const PrecisionContext& ctx, int w) {
  PrecisionContext c;
  c.digits = w;
  c.guard_digits = ctx.guard_digits;
  c.max_digits = std::max(ctx.max_digits + (w - ctx.digits), w);
  return c;
}

struct UResult {
  Complex value;
  double loss_digits = 0;
};

/// U on sheet n at the current precision via connection formula + monodromy.
inline UResult kummer_U_sheet(const Complex& a, const Complex& b, const Complex& z, long n,
                              const PrecisionContext& inner) {
  const Complex one(1);
  const Complex f1 = kummer_F_checked(a, b, z, inner);
  const Complex f2 = kummer_F_checked(a - b + one, Complex(2) - b, z, inner);
  const Complex t1 = gamma_complex(one - b, inner) * rgamma_complex(a - b + one, inner) * f1;
  const Complex t2 =
      gamma_complex(b - one, inner) * rgamma_complex(a, inner) * pow(z, one - b) * f2;
  Complex u = t1 + t2;
  long top = std::max(exponent2(t1), exponent2(t2));
  if (n != 0) {
    const Real pi_v = pi();
    const Complex i = Complex::i();
    const Complex pib = b * pi_v;
    const Complex e2 = exp(Complex(0, -2) * pib * Real(n));
    const Complex e1 = exp(-(i * pib) * Real(n));
    const Complex ratio = sin(pib * Real(n)) / sin(pib);
    const Complex coef = Complex(Real(0), 2 * pi_v) * e1 * ratio * rgamma_complex(b, inner) *
                         rgamma_complex(one + a - b, inner);
    const Complex m1 = e2 * u;
    const Complex m2 = coef * f1;
    top = std::max({top, exponent2(m1), exponent2(m2)});
    u = m1 + m2;
  }
  UResult out;
  const long e = exponent2(u);
  out.loss_digits = is_zero(u) ? 1e9 : std::max(0.0, static_cast<double>(top - e) * 0.30103);
  out.value = std::move(u);
  return out;
}

}  // namespace detail

/// Kummer's function F(a, b, eta) = 1F1(a; b; eta). Entire in eta, so the
/// winding is ignored.
inline Complex kummer_F(const KummerParams& p, const PrecisionContext& ctx) {
  if (detail::near_integer(p.b, ctx.digits) && round(p.b.re) <= 0.0)
    throw DegenerateParameter("kummer_F: b at a non-positive integer");
  return detail::kummer_F_checked(p.a, p.b, p.eta, ctx);
}

/// Tricomi's U(a, b, eta) on the sheet selected by p.eta_winding.
inline Complex kummer_U(const KummerParams& p, const PrecisionContext& ctx) {
  if (is_zero(p.eta)) throw PoleError("kummer_U: eta = 0 is a branch point");
  const int w0 = ctx.working_digits();
  const int cap = ctx.max_digits + ctx.guard_digits;
  const int half = (w0 + 1) / 2;
  Real m;
  const bool surrogate = detail::near_integer(p.b, half, &m);

  int w = w0;
  while (true) {
    ScopedPrecision scope(w);
    const PrecisionContext inner = detail::nested(ctx, w);
    detail::UResult r;
    try {
      if (!surrogate) {
        r = detail::kummer_U_sheet(p.a, p.b, p.eta, p.eta_winding, inner);
      } else {
        const Real delta = tolerance(half);
        Complex bp(m + delta, Real(0));
        Complex bm(m - delta, Real(0));
        detail::UResult up = detail::kummer_U_sheet(p.a, bp, p.eta, p.eta_winding, inner);
        detail::UResult dn = detail::kummer_U_sheet(p.a, bm, p.eta, p.eta_winding, inner);
        r.value = (up.value + dn.value) / Real(2);
        const long top = std::max(detail::exponent2(up.value), detail::exponent2(dn.value));
        const double avg_loss = is_zero(r.value)
                                    ? 1e9
                                    : std::max(0.0, (top - detail::exponent2(r.value)) * 0.30103);
        r.loss_digits = std::max({up.loss_digits, dn.loss_digits}) + avg_loss;
      }
    } catch (const PoleError& e) {
      throw DegenerateParameter(std::string("kummer_U: connection formula hit a pole: ") + e.what());
    }
    const double budget = static_cast<double>(w - w0 + ctx.guard_digits);
    if (r.loss_digits <= budget) return std::move(r.value);
    const int next = w0 + detail::ceil_digits(r.loss_digits) + 2;
    if (next > cap)
      throw PrecisionExhausted("kummer_U: cancellation of " +
                               std::to_string(detail::ceil_digits(r.loss_digits)) +
                               " digits exceeds max_digits");
    w = std::max(next, w + 1);
  }
}

}  // namespace epchiral
