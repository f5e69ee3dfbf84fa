#pragma once

// High-precision complex numbers and the 2x2 linear algebra used throughout.

#include <complex>
#include <ostream>
#include <string>

#include "epchiral/precision.hpp"

namespace epchiral {

struct Complex {
  Real re;
  Real im;

  Complex() = default;
  Complex(Real r) : re(std::move(r)), im(0) {}  // NOLINT(google-explicit-constructor)
  Complex(double r) : re(r), im(0) {}           // NOLINT(google-explicit-constructor)
  Complex(int r) : re(r), im(0) {}              // NOLINT(google-explicit-constructor)
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  Complex(double r, double i) : re(r), im(i) {}
  explicit Complex(std::complex<double> z) : re(z.real()), im(z.imag()) {}

  static Complex i() { return Complex(Real(0), Real(1)); }

  Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
  Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
  Complex& operator*=(const Complex& o) {
    Real r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  Complex& operator*=(const Real& s) { re *= s; im *= s; return *this; }
  Complex& operator/=(const Complex& o);

  Complex operator-() const { return {-re, -im}; }

  void round_to(mpfr_prec_t bits) { re.round_to(bits); im.round_to(bits); }
};

inline Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
inline Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
inline Complex operator*(const Complex& a, const Complex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Complex operator*(const Complex& a, const Real& s) { return {a.re * s, a.im * s}; }
inline Complex operator*(const Real& s, const Complex& a) { return a * s; }
inline Complex operator*(const Complex& a, double s) { return {a.re * s, a.im * s}; }
inline Complex operator*(double s, const Complex& a) { return a * s; }
inline Complex operator/(const Complex& a, const Real& s) { return {a.re / s, a.im / s}; }
inline Complex operator/(const Complex& a, double s) { return {a.re / s, a.im / s}; }

inline Real norm(const Complex& z) { return z.re * z.re + z.im * z.im; }

inline Complex operator/(const Complex& a, const Complex& b) {
  const Real d = norm(b);
  if (is_zero(d)) throw SingularMatrix("complex division by zero");
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline Complex operator/(const Real& a, const Complex& b) { return Complex(a) / b; }
inline Complex operator/(double a, const Complex& b) { return Complex(a) / b; }
inline Complex& Complex::operator/=(const Complex& o) { return *this = *this / o; }

inline Complex conj(const Complex& z) { return {z.re, -z.im}; }
inline Real abs(const Complex& z) { return hypot(z.re, z.im); }
inline Real arg(const Complex& z) { return atan2(z.im, z.re); }
inline bool is_zero(const Complex& z) { return is_zero(z.re) && is_zero(z.im); }
inline bool isfinite(const Complex& z) { return isfinite(z.re) && isfinite(z.im); }
inline std::complex<double> to_std(const Complex& z) { return {to_double(z.re), to_double(z.im)}; }
inline double log10_abs(const Complex& z) { return log10_abs(abs(z)); }

/// e^{i theta}
inline Complex expi(const Real& theta) {
  Complex r;
  sin_cos(theta, r.im, r.re);
  return r;
}

inline Complex exp(const Complex& z) {
  Complex r = expi(z.im);
  const Real m = exp(z.re);
  r.re *= m;
  r.im *= m;
  return r;
}

/// Logarithm on sheet `winding`: log|z| + i(Arg z + 2 pi winding).
inline Complex log(const Complex& z, long winding = 0) {
  if (is_zero(z)) throw PoleError("log of zero");
  Complex r{log(abs(z)), arg(z)};
  if (winding != 0) r.im += 2 * pi() * Real(winding);
  return r;
}

/// z^w with log z taken on sheet `winding`.
inline Complex pow(const Complex& z, const Complex& w, long winding = 0) {
  if (is_zero(z)) {
    if (is_zero(w)) return Complex(1);
    return Complex(0);
  }
  return exp(w * log(z, winding));
}

/// Principal square root (Re >= 0; Im >= 0 when Re = 0).
inline Complex sqrt(const Complex& z) {
  if (is_zero(z)) return Complex(0);
  const Real t = sqrt((abs(z) + abs(z.re)) / 2);
  if (z.re >= 0.0) return {t, z.im / (2 * t)};
  Real re = abs(z.im) / (2 * t);
  return {std::move(re), sign(z.im) < 0 ? -t : t};
}

inline Complex sin(const Complex& z) {
  Real s, c;
  sin_cos(z.re, s, c);
  return {s * cosh(z.im), c * sinh(z.im)};
}

inline Complex cos(const Complex& z) {
  Real s, c;
  sin_cos(z.re, s, c);
  return {c * cosh(z.im), -(s * sinh(z.im))};
}

inline std::string to_string(const Complex& z, int digits = 20) {
  std::string s = to_string(z.re, digits);
  s += sign(z.im) < 0 ? " - " : " + ";
  s += to_string(abs(z.im), digits);
  s += "i";
  return s;
}

inline std::ostream& operator<<(std::ostream& os, const Complex& z) {
  const auto p = os.precision();
  return os << to_string(z, p > 0 ? static_cast<int>(p) : 6);
}

struct Vec2 {
  Complex x;
  Complex y;
};

/// 2x2 complex matrix [[a11, a12], [a21, a22]].
struct Mat2 {
  Complex a11, a12, a21, a22;

  static Mat2 identity() { return {Complex(1), Complex(0), Complex(0), Complex(1)}; }
  static Mat2 zero() { return {Complex(0), Complex(0), Complex(0), Complex(0)}; }
  static Mat2 sigma_x() { return {Complex(0), Complex(1), Complex(1), Complex(0)}; }
  static Mat2 sigma_z() { return {Complex(1), Complex(0), Complex(0), Complex(-1)}; }

  void round_to(mpfr_prec_t bits) {
    a11.round_to(bits);
    a12.round_to(bits);
    a21.round_to(bits);
    a22.round_to(bits);
  }
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
inline Vec2 operator*(const Mat2& a, const Vec2& v) {
  return {a.a11 * v.x + a.a12 * v.y, a.a21 * v.x + a.a22 * v.y};
}
inline Mat2 operator*(const Complex& s, const Mat2& a) {
  return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
}
inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}

inline Complex det(const Mat2& m) { return m.a11 * m.a22 - m.a12 * m.a21; }
inline Complex trace(const Mat2& m) { return m.a11 + m.a22; }
inline Mat2 transpose(const Mat2& m) { return {m.a11, m.a21, m.a12, m.a22}; }
inline Mat2 conj(const Mat2& m) { return {conj(m.a11), conj(m.a12), conj(m.a21), conj(m.a22)}; }
inline Mat2 dagger(const Mat2& m) { return {conj(m.a11), conj(m.a21), conj(m.a12), conj(m.a22)}; }
/// Adjugate: inverse times determinant.
inline Mat2 adjugate(const Mat2& m) { return {m.a22, -m.a12, -m.a21, m.a11}; }
inline Mat2 inverse(const Mat2& m) {
  const Complex d = det(m);
  if (is_zero(d)) throw SingularMatrix("inverse of singular 2x2 matrix");
  const Complex inv = Complex(1) / d;
  return inv * adjugate(m);
}
/// sigma_z M sigma_z flips the sign of the off-diagonal entries.
inline Mat2 sigma_z_sandwich(const Mat2& m) { return {m.a11, -m.a12, -m.a21, m.a22}; }

inline Real frobenius_norm(const Mat2& m) {
  return sqrt(norm(m.a11) + norm(m.a12) + norm(m.a21) + norm(m.a22));
}

/// ||a - b||_F / ||a||_F (absolute when a = 0).
inline Real relative_deviation(const Mat2& a, const Mat2& b) {
  const Real n = frobenius_norm(a);
  const Real d = frobenius_norm(a - b);
  return is_zero(n) ? d : d / n;
}

/// Largest |a_ij - b_ij| / |b_ij| over the entries of the reference `b`
/// (absolute where b_ij = 0).
inline Real max_relative_element_error(const Mat2& a, const Mat2& ref) {
  const Complex* pa[4] = {&a.a11, &a.a12, &a.a21, &a.a22};
  const Complex* pr[4] = {&ref.a11, &ref.a12, &ref.a21, &ref.a22};
  Real worst(0);
  for (int k = 0; k < 4; ++k) {
    const Real r = abs(*pr[k]);
    Real e = abs(*pa[k] - *pr[k]);
    if (!is_zero(r)) e /= r;
    if (e > worst) worst = e;
  }
  return worst;
}

inline Real max_abs_entry(const Mat2& m) {
  Real r = abs(m.a11);
  for (const Complex* z : {&m.a12, &m.a21, &m.a22}) {
    Real a = abs(*z);
    if (a > r) r = std::move(a);
  }
  return r;
}

}  // namespace epchiral
