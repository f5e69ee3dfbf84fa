#pragma once

// Arbitrary-precision real arithmetic on top of MPFR.
//
// Every new value (constructors, arithmetic results, function results) is
// created at the calling thread's current working precision, which is set by
// a ScopedPrecision guard. Copies keep the precision of their source, so a
// value computed inside a high-precision scope survives being returned to a
// lower-precision caller unchanged. The working precision is thread-local,
// so workers in a parallel sweep never interfere with each other.

#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "epchiral/errors.hpp"

namespace epchiral {

/// Decimal-digit precision policy passed by value through every operation.
struct PrecisionContext {
  int digits = 32;
  int guard_digits = 20;
  int max_digits = 2000;
  /// Let solvers raise the digit count beyond `digits` when their own
  /// residual checks fail.
  bool auto_escalate = true;

  int working_digits() const noexcept { return digits + guard_digits; }

  PrecisionContext with_digits(int d) const {
    PrecisionContext c = *this;
    c.digits = d;
    if (c.max_digits < d) c.max_digits = d;
    return c;
  }

  void validate() const {
    if (digits < 16) throw ConfigError("digits", "must be >= 16");
    if (guard_digits < 5) throw ConfigError("guard_digits", "must be >= 5");
    if (max_digits < digits) throw ConfigError("max_digits", "must be >= digits");
  }

  friend bool operator==(const PrecisionContext&, const PrecisionContext&) = default;
};

inline mpfr_prec_t digits_to_bits(int digits) {
  return static_cast<mpfr_prec_t>(std::ceil(digits * 3.321928094887362)) + 4;
}

inline int bits_to_digits(mpfr_prec_t bits) {
  return static_cast<int>(std::floor(static_cast<double>(bits - 4) / 3.321928094887362));
}

namespace detail {
inline thread_local mpfr_prec_t thread_bits = digits_to_bits(52);
}

inline mpfr_prec_t current_bits() noexcept { return detail::thread_bits; }
inline int current_digits() noexcept { return bits_to_digits(detail::thread_bits); }

/// RAII switch of the thread's working precision.
class ScopedPrecision {
 public:
  explicit ScopedPrecision(int digits) : saved_(detail::thread_bits) {
    detail::thread_bits = digits_to_bits(digits);
  }
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;
  ~ScopedPrecision() { detail::thread_bits = saved_; }

 private:
  mpfr_prec_t saved_;
};

class Real {
 public:
  Real() {
    mpfr_init2(v_, detail::thread_bits);
    mpfr_set_zero(v_, 1);
  }
  Real(double x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_bits);
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  Real(int x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_bits);
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  Real(long x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_bits);
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  Real(long long x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_bits);
    mpfr_set_si(v_, static_cast<long>(x), MPFR_RNDN);
  }
  Real(unsigned long x) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, detail::thread_bits);
    mpfr_set_ui(v_, x, MPFR_RNDN);
  }

  /// Parses a decimal string ("1.25", "-3e-40", "inf" rejected).
  static Real from_string(std::string_view s) {
    Real r;
    std::string buf(s);
    char* end = nullptr;
    mpfr_strtofr(r.v_, buf.c_str(), &end, 10, MPFR_RNDN);
    if (end == buf.c_str() || *end != '\0') throw ConfigError(buf, "not a decimal number");
    if (!mpfr_number_p(r.v_)) throw ConfigError(buf, "not a finite number");
    return r;
  }

  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    v_[0] = o.v_[0];
    o.v_[0]._mpfr_d = nullptr;
  }
  Real& operator=(const Real& o) {
    if (this == &o) return *this;
    if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_)) mpfr_set_prec(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    std::swap(v_[0], o.v_[0]);
    return *this;
  }
  ~Real() {
    if (v_[0]._mpfr_d != nullptr) mpfr_clear(v_);
  }

  mpfr_ptr raw() noexcept { return v_; }
  mpfr_srcptr raw() const noexcept { return v_; }
  mpfr_prec_t precision_bits() const noexcept { return mpfr_get_prec(v_); }

  /// Re-rounds the value to `bits` of precision.
  void round_to(mpfr_prec_t bits) { mpfr_prec_round(v_, bits, MPFR_RNDN); }

  Real& operator+=(const Real& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator-=(const Real& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator*=(const Real& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator/=(const Real& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }

  Real operator-() const {
    Real r;
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  explicit operator double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

inline Real operator+(const Real& a, const Real& b) { Real r; mpfr_add(r.raw(), a.raw(), b.raw(), MPFR_RNDN); return r; }
inline Real operator-(const Real& a, const Real& b) { Real r; mpfr_sub(r.raw(), a.raw(), b.raw(), MPFR_RNDN); return r; }
inline Real operator*(const Real& a, const Real& b) { Real r; mpfr_mul(r.raw(), a.raw(), b.raw(), MPFR_RNDN); return r; }
inline Real operator/(const Real& a, const Real& b) { Real r; mpfr_div(r.raw(), a.raw(), b.raw(), MPFR_RNDN); return r; }

inline Real operator+(const Real& a, double b) { Real r; mpfr_add_d(r.raw(), a.raw(), b, MPFR_RNDN); return r; }
inline Real operator+(double a, const Real& b) { return b + a; }
inline Real operator-(const Real& a, double b) { Real r; mpfr_sub_d(r.raw(), a.raw(), b, MPFR_RNDN); return r; }
inline Real operator-(double a, const Real& b) { Real r; mpfr_d_sub(r.raw(), a, b.raw(), MPFR_RNDN); return r; }
inline Real operator*(const Real& a, double b) { Real r; mpfr_mul_d(r.raw(), a.raw(), b, MPFR_RNDN); return r; }
inline Real operator*(double a, const Real& b) { return b * a; }
inline Real operator/(const Real& a, double b) { Real r; mpfr_div_d(r.raw(), a.raw(), b, MPFR_RNDN); return r; }
inline Real operator/(double a, const Real& b) { Real r; mpfr_d_div(r.raw(), a, b.raw(), MPFR_RNDN); return r; }

inline Real operator+(const Real& a, int b) { Real r; mpfr_add_si(r.raw(), a.raw(), b, MPFR_RNDN); return r; }
inline Real operator+(int a, const Real& b) { return b + a; }
inline Real operator-(const Real& a, int b) { Real r; mpfr_sub_si(r.raw(), a.raw(), b, MPFR_RNDN); return r; }
inline Real operator-(int a, const Real& b) { Real r; mpfr_si_sub(r.raw(), a, b.raw(), MPFR_RNDN); return r; }
inline Real operator*(const Real& a, int b) { Real r; mpfr_mul_si(r.raw(), a.raw(), b, MPFR_RNDN); return r; }
inline Real operator*(int a, const Real& b) { return b * a; }
inline Real operator/(const Real& a, int b) { Real r; mpfr_div_si(r.raw(), a.raw(), b, MPFR_RNDN); return r; }
inline Real operator/(int a, const Real& b) { Real r; mpfr_si_div(r.raw(), a, b.raw(), MPFR_RNDN); return r; }

inline bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.raw(), b.raw()) != 0; }
inline bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.raw(), b.raw()) != 0; }
inline bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.raw(), b.raw()) != 0; }
inline bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.raw(), b.raw()) != 0; }
inline bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.raw(), b.raw()) != 0; }
inline bool operator<(const Real& a, double b) { return mpfr_cmp_d(a.raw(), b) < 0; }
inline bool operator>(const Real& a, double b) { return mpfr_cmp_d(a.raw(), b) > 0; }
inline bool operator<=(const Real& a, double b) { return mpfr_cmp_d(a.raw(), b) <= 0; }
inline bool operator>=(const Real& a, double b) { return mpfr_cmp_d(a.raw(), b) >= 0; }

#define EPCHIRAL_REAL_UNARY(name, fn)          \
  inline Real name(const Real& x) {            \
    Real r;                                    \
    fn(r.raw(), x.raw(), MPFR_RNDN);           \
    return r;                                  \
  }
EPCHIRAL_REAL_UNARY(sqrt, mpfr_sqrt)
EPCHIRAL_REAL_UNARY(exp, mpfr_exp)
EPCHIRAL_REAL_UNARY(log, mpfr_log)
EPCHIRAL_REAL_UNARY(log10, mpfr_log10)
EPCHIRAL_REAL_UNARY(log1p, mpfr_log1p)
EPCHIRAL_REAL_UNARY(sin, mpfr_sin)
EPCHIRAL_REAL_UNARY(cos, mpfr_cos)
EPCHIRAL_REAL_UNARY(sinh, mpfr_sinh)
EPCHIRAL_REAL_UNARY(cosh, mpfr_cosh)
EPCHIRAL_REAL_UNARY(abs, mpfr_abs)
EPCHIRAL_REAL_UNARY(atan, mpfr_atan)
EPCHIRAL_REAL_UNARY(lgamma_real, mpfr_lngamma)
#undef EPCHIRAL_REAL_UNARY

inline Real floor(const Real& x) { Real r; mpfr_floor(r.raw(), x.raw()); return r; }
inline Real round(const Real& x) { Real r; mpfr_round(r.raw(), x.raw()); return r; }
inline Real atan2(const Real& y, const Real& x) { Real r; mpfr_atan2(r.raw(), y.raw(), x.raw(), MPFR_RNDN); return r; }
inline Real hypot(const Real& x, const Real& y) { Real r; mpfr_hypot(r.raw(), x.raw(), y.raw(), MPFR_RNDN); return r; }
inline Real pow(const Real& x, const Real& y) { Real r; mpfr_pow(r.raw(), x.raw(), y.raw(), MPFR_RNDN); return r; }
inline Real pow10(long n) {
  Real r;
  mpfr_ui_pow_ui(r.raw(), 10, static_cast<unsigned long>(n < 0 ? -n : n), MPFR_RNDN);
  if (n < 0) mpfr_ui_div(r.raw(), 1, r.raw(), MPFR_RNDN);
  return r;
}
inline void sin_cos(const Real& x, Real& s, Real& c) { mpfr_sin_cos(s.raw(), c.raw(), x.raw(), MPFR_RNDN); }

inline Real pi() { Real r; mpfr_const_pi(r.raw(), MPFR_RNDN); return r; }
inline Real euler_gamma() { Real r; mpfr_const_euler(r.raw(), MPFR_RNDN); return r; }

inline const Real& max(const Real& a, const Real& b) { return a < b ? b : a; }
inline const Real& min(const Real& a, const Real& b) { return b < a ? b : a; }

inline bool is_zero(const Real& x) { return mpfr_zero_p(x.raw()) != 0; }
inline bool isfinite(const Real& x) { return mpfr_number_p(x.raw()) != 0; }
inline int sign(const Real& x) { return mpfr_sgn(x.raw()); }
inline double to_double(const Real& x) { return mpfr_get_d(x.raw(), MPFR_RNDN); }

/// log10|x| as a double, valid far outside double's exponent range.
inline double log10_abs(const Real& x) {
  if (is_zero(x)) return -std::numeric_limits<double>::infinity();
  if (!isfinite(x)) return std::numeric_limits<double>::infinity();
  long e = 0;
  const double m = mpfr_get_d_2exp(&e, x.raw(), MPFR_RNDN);
  return std::log10(std::fabs(m)) + static_cast<double>(e) * 0.30102999566398120;
}

/// Decimal string with `digits` significant digits in scientific notation.
inline std::string to_string(const Real& x, int digits = 20) {
  if (is_zero(x)) return "0";
  if (!isfinite(x)) return mpfr_nan_p(x.raw()) ? "nan" : (sign(x) > 0 ? "inf" : "-inf");
  std::string fmt = "%." + std::to_string(digits > 1 ? digits - 1 : 0) + "Re";
  int n = mpfr_snprintf(nullptr, 0, fmt.c_str(), x.raw());
  std::string out(static_cast<size_t>(n) + 1, '\0');
  mpfr_snprintf(out.data(), out.size(), fmt.c_str(), x.raw());
  out.resize(static_cast<size_t>(n));
  return out;
}

/// Full-precision decimal rendering: enough digits to round-trip.
inline std::string to_string_full(const Real& x) {
  return to_string(x, bits_to_digits(x.precision_bits()) + 2);
}

inline std::ostream& operator<<(std::ostream& os, const Real& x) {
  const auto p = os.precision();
  return os << to_string(x, p > 0 ? static_cast<int>(p) : 6);
}

/// 10^-n at the current precision; the usual tolerance constructor.
inline Real tolerance(int n) { return pow10(-n); }

}  // namespace epchiral
