#include <gmpxx.h>

#include "support.hpp"

namespace epchiral {
namespace {

using test::rel_err;
using test::uniform;

TEST(ExactReal, ParsesDecimalsFractionsAndPiTerms) {
  EXPECT_EQ(ExactReal::parse("0.1"), ExactReal(mpq_class(1, 10), mpq_class(0)));
  EXPECT_EQ(ExactReal::parse("-2.5e-3"), ExactReal(mpq_class(-1, 400), mpq_class(0)));
  EXPECT_EQ(ExactReal::parse("1/3"), ExactReal(mpq_class(1, 3), mpq_class(0)));
  EXPECT_EQ(ExactReal::parse("pi"), ExactReal::pi_times(1));
  EXPECT_EQ(ExactReal::parse("-pi"), ExactReal::pi_times(-1));
  EXPECT_EQ(ExactReal::parse("3pi/4"), ExactReal::pi_times(mpq_class(3, 4)));
  EXPECT_EQ(ExactReal::parse("3*pi/4"), ExactReal::pi_times(mpq_class(3, 4)));
  EXPECT_EQ(ExactReal::parse("0.75pi"), ExactReal::pi_times(mpq_class(3, 4)));
  EXPECT_EQ(ExactReal::parse("1/2+pi"), ExactReal(mpq_class(1, 2), mpq_class(1)));
  EXPECT_EQ(ExactReal(0.1), ExactReal::parse("0.1"));
}

TEST(ExactReal, RejectsGarbage) {
  for (const char* s : {"", "abc", "1/0", "pi/", "1..2", "nan"}) EXPECT_THROW(ExactReal::parse(s), ConfigError) << s;
}

TEST(ExactReal, ToStringRoundTrips) {
  for (const char* s : {"0.1", "-7/3", "3pi/4", "1/2+pi", "-1/5-2pi/7", "0"}) {
    const ExactReal x = ExactReal::parse(s);
    EXPECT_EQ(ExactReal::parse(x.to_string()), x) << s;
  }
}

TEST(ExactReal, ValueAtPrecision) {
  ScopedPrecision p(60);
  const Real v = ExactReal::parse("1/2+pi").value();
  EXPECT_LT(abs(v - (pi() + Real(0.5))), tolerance(58));
  EXPECT_EQ(ExactReal::parse("2pi").sign(), 1);
  EXPECT_EQ(ExactReal::parse("3-pi").sign(), -1);
}

TEST(Precision, ScopedPrecisionRestores) {
  const int before = current_digits();
  {
    ScopedPrecision p(300);
    EXPECT_GE(current_digits(), 300);
  }
  EXPECT_EQ(current_digits(), before);
}

TEST(Precision, ContextValidation) {
  EXPECT_THROW(test::digits(15).validate(), ConfigError);
  PrecisionContext c;
  c.guard_digits = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = PrecisionContext{};
  c.max_digits = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(PrecisionContext{}.validate());
}

TEST(Complex, SqrtIsPrincipal) {
  ScopedPrecision p(40);
  for (int k = 0; k < 200; ++k) {
    const Complex z = test::random_complex(-5, 5, -5, 5);
    const Complex r = sqrt(z);
    EXPECT_GE(r.re, 0.0);
    EXPECT_LT(rel_err(r * r, z), tolerance(38));
  }
  const Complex r = sqrt(Complex(-4));
  EXPECT_LT(abs(r - Complex(0, 2)), tolerance(38));
}

TEST(Complex, LogWindingShiftsImaginaryPart) {
  ScopedPrecision p(40);
  const Complex z(-1.5, 0.3);
  for (long n : {-3L, -1L, 0L, 2L}) {
    const Complex l = log(z, n);
    EXPECT_LT(rel_err(exp(l), z), tolerance(38));
    EXPECT_LT(abs(l.im - arg(z) - 2 * pi() * Real(n)), tolerance(38));
  }
  EXPECT_THROW(log(Complex(0)), PoleError);
}

TEST(Complex, PowOnSheetsDiffersByMonodromy) {
  ScopedPrecision p(40);
  const Complex z(0.7, -2.1), w(0.3, 1.2);
  const Complex ratio = pow(z, w, 1) / pow(z, w, 0);
  const Complex expected = exp(w * Complex(Real(0), 2 * pi()));
  EXPECT_LT(rel_err(ratio, expected), tolerance(36));
}

TEST(Mat2, InverseAdjugateDeterminant) {
  ScopedPrecision p(40);
  for (int k = 0; k < 50; ++k) {
    Mat2 m{test::random_complex(-2, 2, -2, 2), test::random_complex(-2, 2, -2, 2), test::random_complex(-2, 2, -2, 2),
           test::random_complex(-2, 2, -2, 2)};
    EXPECT_LT(relative_deviation(m * inverse(m), Mat2::identity()), tolerance(34));
    EXPECT_LT(rel_err(det(m * m), det(m) * det(m)), tolerance(36));
    EXPECT_LT(relative_deviation(transpose(transpose(m)), m), tolerance(38));
    EXPECT_LT(relative_deviation(dagger(m), conj(transpose(m))), tolerance(38));
  }
}

// ---------------------------------------------------------------- Gamma

TEST(Gamma, HalfIsSqrtPi) {
  const PrecisionContext ctx = test::digits(100);
  ScopedPrecision p(120);
  EXPECT_LT(rel_err(gamma_complex(Complex(0.5), ctx), Complex(sqrt(pi()))), tolerance(99));
}

TEST(Gamma, IntegersAreFactorials) {
  const PrecisionContext ctx = test::digits(60);
  ScopedPrecision p(80);
  mpz_class f = 1;
  for (int n = 1; n <= 40; ++n) {
    Real exact;
    mpfr_set_z(exact.raw(), f.get_mpz_t(), MPFR_RNDN);
    EXPECT_LT(rel_err(gamma_complex(Complex(n), ctx), Complex(exact)), tolerance(59)) << n;
    f *= n;
  }
}

TEST(Gamma, ReflectionFormula) {
  const PrecisionContext ctx = test::digits(50);
  ScopedPrecision p(70);
  for (int k = 0; k < 60; ++k) {
    const Complex z = test::random_complex(-8, 8, -8, 8);
    const Complex lhs = gamma_complex(z, ctx) * gamma_complex(Complex(1) - z, ctx);
    const Complex rhs = Complex(pi()) / sin(z * pi());
    EXPECT_LT(rel_err(lhs, rhs), tolerance(47)) << z;
  }
}

TEST(Gamma, Recurrence) {
  const PrecisionContext ctx = test::digits(50);
  ScopedPrecision p(70);
  for (int k = 0; k < 60; ++k) {
    const Complex z = test::random_complex(-20, 30, -40, 40);
    EXPECT_LT(rel_err(gamma_complex(z + Complex(1), ctx), z * gamma_complex(z, ctx)), tolerance(47)) << z;
  }
}

TEST(Gamma, ModulusOnImaginaryAxis) {
  // |Gamma(iy)|^2 = pi / (y sinh(pi y))
  const PrecisionContext ctx = test::digits(50);
  ScopedPrecision p(70);
  for (double y : {0.1, 1.0, 3.7, 12.5, 40.0}) {
    const Real yy(y);
    const Real lhs = norm(gamma_complex(Complex(Real(0), yy), ctx));
    const Real rhs = pi() / (yy * sinh(pi() * yy));
    EXPECT_LT(abs(lhs - rhs) / rhs, tolerance(47)) << y;
  }
}

TEST(Gamma, PolesAndReciprocal) {
  const PrecisionContext ctx = test::digits(30);
  EXPECT_THROW(gamma_complex(Complex(-3), ctx), PoleError);
  EXPECT_THROW(gamma_complex(Complex(0), ctx), PoleError);
  ScopedPrecision p(50);
  EXPECT_TRUE(is_zero(rgamma_complex(Complex(-3), ctx)));
  const Complex z(2.3, -1.1);
  EXPECT_LT(rel_err(rgamma_complex(z, ctx) * gamma_complex(z, ctx), Complex(1)), tolerance(28));
}

TEST(Gamma, PochhammerMatchesGammaRatio) {
  const PrecisionContext ctx = test::digits(40);
  ScopedPrecision p(60);
  for (int k = 0; k < 20; ++k) {
    const Complex z = test::random_complex(0.5, 6, -4, 4);
    const long n = static_cast<long>(uniform(0, 25));
    const Complex expected = gamma_complex(z + Complex(static_cast<int>(n)), ctx) / gamma_complex(z, ctx);
    EXPECT_LT(rel_err(pochhammer(z, n, ctx), expected), tolerance(37));
  }
}

// ---------------------------------------------------------------- Kummer

/// Direct 1F1 series at `work` digits, no cancellation control beyond the
/// raw precision.
Complex direct_series(const Complex& a, const Complex& b, const Complex& z, int work) {
  ScopedPrecision p(work);
  Complex term(1), sum(1);
  const Real stop = tolerance(work);
  for (int k = 0;; ++k) {
    term = term * (a + Complex(k)) / (b + Complex(k)) * z / Real(k + 1);
    sum += term;
    if (k > 10 && abs(term) < stop * abs(sum) && Real(k) > abs(z)) break;
  }
  return sum;
}

Complex random_b() {
  while (true) {
    Complex b = test::random_complex(-6, 6, -4, 4);
    if (b.re > 0.5 || abs(b.im) > 0.5) return b;
  }
}

TEST(Kummer, MatchesQuadruplePrecisionSeries) {
  const int d = 50;
  const PrecisionContext ctx = test::digits(d);
  for (int k = 0; k < 100; ++k) {
    ScopedPrecision p(4 * d);
    const Complex a = test::random_complex(-6, 6, -6, 6);
    const Complex b = random_b();
    const Complex z = test::random_complex(-25, 25, -25, 25);
    const Complex oracle = direct_series(a, b, z, 4 * d);
    const Complex got = kummer_F({a, b, z, 0}, ctx);
    EXPECT_LT(rel_err(got, oracle), tolerance(d - 1)) << "a=" << a << " b=" << b << " z=" << z;
  }
}

TEST(Kummer, KummerTransformation) {
  // F(a, b, z) = e^z F(b - a, b, -z)
  const PrecisionContext ctx = test::digits(40);
  for (int k = 0; k < 40; ++k) {
    ScopedPrecision p(60);
    const Complex a = test::random_complex(-5, 5, -5, 5);
    const Complex b = random_b();
    const Complex z = test::random_complex(-30, 30, -30, 30);
    const Complex lhs = kummer_F({a, b, z, 0}, ctx);
    const Complex rhs = exp(z) * kummer_F({b - a, b, -z, 0}, ctx);
    EXPECT_LT(rel_err(lhs, rhs), tolerance(37)) << "a=" << a << " b=" << b << " z=" << z;
  }
}

TEST(Kummer, ElementaryCases) {
  const PrecisionContext ctx = test::digits(40);
  ScopedPrecision p(60);
  const Complex z(1.3, -2.2);
  // F(a, a, z) = e^z
  EXPECT_LT(rel_err(kummer_F({Complex(0.7, 0.4), Complex(0.7, 0.4), z, 0}, ctx), exp(z)), tolerance(38));
  // F(1, 2, z) = (e^z - 1)/z
  EXPECT_LT(rel_err(kummer_F({Complex(1), Complex(2), z, 0}, ctx), (exp(z) - Complex(1)) / z), tolerance(38));
  EXPECT_THROW(kummer_F({Complex(1), Complex(-2), z, 0}, ctx), DegenerateParameter);
}

/// U(a, b, z) = 1/Gamma(a) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt,
/// Re a > 0 and Re z > 0, by exp-sinh quadrature.
Complex u_by_quadrature(const Complex& a, const Complex& b, const Complex& z, int work) {
  ScopedPrecision p(work);
  const Real h = Real(1) / 128;
  const Real half_pi = pi() / 2;
  const Complex one(1);
  Complex sum(0);
  for (int k = -7 * 128; k <= 5 * 128; ++k) {
    const Real u = h * Real(k);
    const Real s = half_pi * sinh(u);
    if (s > 60.0) break;
    const Real t = exp(s);
    const Real jac = t * half_pi * cosh(u);
    const Complex logt(log(t));
    const Complex f = exp(-(z * t) + (a - one) * logt + (b - a - one) * Complex(log(t + 1)));
    sum += f * jac;
  }
  return sum * h * rgamma_complex(a, test::digits(work));
}

TEST(Kummer, TricomiUMatchesIntegralRepresentation) {
  const PrecisionContext ctx = test::digits(30);
  for (int k = 0; k < 20; ++k) {
    ScopedPrecision p(60);
    const Complex a = test::random_complex(0.6, 3, -2, 2);
    const Complex b = test::random_complex(-2, 3, -2, 2);
    const Complex z = test::random_complex(1, 6, -4, 4);
    const Complex oracle = u_by_quadrature(a, b, z, 60);
    const Complex got = kummer_U({a, b, z, 0}, ctx);
    EXPECT_LT(rel_err(got, oracle), tolerance(27)) << "a=" << a << " b=" << b << " z=" << z;
  }
}

TEST(Kummer, WronskianHoldsOnEverySheet) {
  // F U' - F' U = -Gamma(b)/Gamma(a) z^{-b} e^z with z^{-b} on the sheet of U.
  const PrecisionContext ctx = test::digits(40);
  for (int k = 0; k < 10; ++k) {
    ScopedPrecision p(70);
    const Complex a = test::random_complex(-3, 3, -3, 3);
    const Complex b = test::random_complex(0.2, 3, -3, 3);
    const Complex z = test::random_complex(-8, 8, -8, 8);
    const Complex one(1);
    for (long n = -2; n <= 2; ++n) {
      const Complex F = kummer_F({a, b, z, n}, ctx);
      const Complex dF = a / b * kummer_F({a + one, b + one, z, n}, ctx);
      const Complex U = kummer_U({a, b, z, n}, ctx);
      const Complex dU = -a * kummer_U({a + one, b + one, z, n}, ctx);
      const Complex w = F * dU - dF * U;
      const Complex expected = -(gamma_complex(b, ctx) * rgamma_complex(a, ctx)) * pow(z, -b, n) * exp(z);
      EXPECT_LT(rel_err(w, expected), tolerance(34)) << "sheet " << n << " a=" << a << " b=" << b << " z=" << z;
    }
  }
}

TEST(Kummer, UHasBranchPointAtZero) {
  EXPECT_THROW(kummer_U({Complex(1), Complex(0.5), Complex(0), 0}, test::digits(30)), PoleError);
}

}  // namespace
}  // namespace epchiral
