#pragma once

// Exact loop parameters: numbers of the form q0 + q1*pi with rational q0, q1.
//
// Loop parameters such as omega = 0.1 or theta_i = 0.75pi must be known to
// any precision the solver escalates to, and identities like kappa/omega = 5
// must hold exactly. Storing them as doubles would fix them at 53 bits, so
// they are kept exact and evaluated at the caller's working precision.

#include <gmpxx.h>

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "epchiral/precision.hpp"

namespace epchiral {

class ExactReal {
 public:
  ExactReal() = default;
  ExactReal(int v) : q_(v), p_(0) {}  // NOLINT(google-explicit-constructor)
  /// The shortest decimal that round-trips to `v`, so 0.1 means 1/10.
  ExactReal(double v) {  // NOLINT(google-explicit-constructor)
    if (!std::isfinite(v)) throw ConfigError("value", "not finite");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    *this = parse(std::string_view(buf, static_cast<size_t>(res.ptr - buf)));
  }
  ExactReal(mpq_class rational, mpq_class pi_coeff) : q_(std::move(rational)), p_(std::move(pi_coeff)) {
    q_.canonicalize();
    p_.canonicalize();
  }

  static ExactReal pi_times(const mpq_class& c) { return {mpq_class(0), c}; }

  /// Accepts decimals ("0.1", "-2.5e-3"), fractions ("1/3"), multiples of pi
  /// ("pi", "-pi", "0.75pi", "3pi/4", "3*pi/4", "pi/2") and sums of a
  /// rational and a pi term ("1/2+pi").
  static ExactReal parse(std::string_view text);

  const mpq_class& rational() const { return q_; }
  const mpq_class& pi_coeff() const { return p_; }
  bool has_pi() const { return sgn(p_) != 0; }

  /// Value at the current working precision.
  Real value() const {
    Real r;
    mpfr_set_q(r.raw(), q_.get_mpq_t(), MPFR_RNDN);
    if (has_pi()) {
      Real c;
      mpfr_set_q(c.raw(), p_.get_mpq_t(), MPFR_RNDN);
      r += c * pi();
    }
    return r;
  }
  double approx() const {
    ScopedPrecision s(30);
    return to_double(value());
  }

  std::string to_string() const;

  ExactReal operator-() const { return {-q_, -p_}; }
  friend ExactReal operator+(const ExactReal& a, const ExactReal& b) { return {a.q_ + b.q_, a.p_ + b.p_}; }
  friend ExactReal operator-(const ExactReal& a, const ExactReal& b) { return {a.q_ - b.q_, a.p_ - b.p_}; }
  /// Scaling by a rational.
  friend ExactReal operator*(const ExactReal& a, const mpq_class& s) { return {a.q_ * s, a.p_ * s}; }
  friend ExactReal operator*(const mpq_class& s, const ExactReal& a) { return a * s; }
  friend bool operator==(const ExactReal& a, const ExactReal& b) { return a.q_ == b.q_ && a.p_ == b.p_; }

  /// Sign of the value; exact comparison is not available for mixed terms,
  /// so those are resolved at 60 digits.
  int sign() const {
    if (!has_pi()) return sgn(q_);
    if (sgn(q_) == 0) return sgn(p_);
    ScopedPrecision s(60);
    return epchiral::sign(value());
  }
  bool is_zero() const { return sgn(q_) == 0 && sgn(p_) == 0; }

 private:
  mpq_class q_{0};
  mpq_class p_{0};
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\t') out.push_back(c);
  return out;
}

/// Exact rational from "12", "-0.125", "2.5e-3", "1/3" or "1.5/4".
inline mpq_class parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    mpq_class num = parse_rational(s.substr(0, slash));
    mpq_class den = parse_rational(s.substr(slash + 1));
    if (sgn(den) == 0) throw ConfigError("value", "zero denominator in '" + s + "'");
    mpq_class r = num / den;
    r.canonicalize();
    return r;
  }
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  std::string digits;
  long scale = 0;
  bool seen_dot = false;
  bool any = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any = true;
      if (seen_dot) ++scale;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!any) throw ConfigError("value", "cannot parse number '" + s + "'");
  long exp10 = 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    const std::string e = s.substr(i + 1);
    auto res = std::from_chars(e.data(), e.data() + e.size(), exp10);
    if (res.ec != std::errc() || res.ptr != e.data() + e.size())
      throw ConfigError("value", "bad exponent in '" + s + "'");
    i = s.size();
  }
  if (i != s.size()) throw ConfigError("value", "trailing characters in '" + s + "'");
  mpz_class num(digits, 10);
  if (neg) num = -num;
  const long net = exp10 - scale;
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(net < 0 ? -net : net));
  mpq_class r = net >= 0 ? mpq_class(num * p) : mpq_class(num, p);
  r.canonicalize();
  return r;
}

/// Coefficient of a pi term: "pi", "-pi", "0.75pi", "3pi/4", "3*pi/4", "pi/2".
inline mpq_class parse_pi_term(const std::string& s) {
  const auto at = s.find("pi");
  std::string before = s.substr(0, at);
  std::string after = s.substr(at + 2);
  if (!before.empty() && before.back() == '*') before.pop_back();
  mpq_class c(1);
  if (before == "-") c = -1;
  else if (!before.empty() && before != "+") c = parse_rational(before);
  if (!after.empty()) {
    if (after[0] != '/') throw ConfigError("value", "cannot parse '" + s + "'");
    const mpq_class den = parse_rational(after.substr(1));
    if (sgn(den) == 0) throw ConfigError("value", "zero denominator in '" + s + "'");
    c /= den;
  }
  return c;
}

/// Decimal text for a rational with a terminating expansion, else "p/q".
inline std::string rational_to_string(const mpq_class& q) {
  mpz_class den = q.get_den();
  int twos = 0, fives = 0;
  while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) { den /= 2; ++twos; }
  while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) { den /= 5; ++fives; }
  if (den != 1 || std::max(twos, fives) > 60) return q.get_str();
  const int scale = std::max(twos, fives);
  mpz_class p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(scale));
  mpz_class scaled = q.get_num() * (p10 / q.get_den());
  const bool neg = sgn(scaled) < 0;
  if (neg) scaled = -scaled;
  std::string d = scaled.get_str();
  if (scale > 0) {
    if (static_cast<int>(d.size()) <= scale) d.insert(0, static_cast<size_t>(scale - d.size() + 1), '0');
    d.insert(d.size() - static_cast<size_t>(scale), ".");
  }
  return neg ? "-" + d : d;
}

}  // namespace detail

inline ExactReal ExactReal::parse(std::string_view text) {
  const std::string s = detail::trim(text);
  if (s.empty()) throw ConfigError("value", "empty number");
  if (s.find("pi") == std::string::npos) return {detail::parse_rational(s), mpq_class(0)};
  // Split "a+bpi" / "a-bpi" at the sign preceding the pi term.
  const auto at = s.find("pi");
  size_t split = std::string::npos;
  for (size_t k = at; k-- > 0;) {
    if ((s[k] == '+' || s[k] == '-') && k > 0 && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) return {mpq_class(0), detail::parse_pi_term(s)};
  return {detail::parse_rational(s.substr(0, split)), detail::parse_pi_term(s.substr(split))};
}

inline std::string ExactReal::to_string() const {
  if (!has_pi()) return detail::rational_to_string(q_);
  std::string pi_part;
  if (p_ == 1) pi_part = "pi";
  else if (p_ == -1) pi_part = "-pi";
  else if (p_.get_den() == 1 || detail::rational_to_string(p_).find('/') == std::string::npos)
    pi_part = detail::rational_to_string(p_) + "pi";
  else
    pi_part = p_.get_num().get_str() + "pi/" + p_.get_den().get_str();
  if (sgn(q_) == 0) return pi_part;
  return detail::rational_to_string(q_) + (pi_part[0] == '-' ? "" : "+") + pi_part;
}

}  // namespace epchiral
