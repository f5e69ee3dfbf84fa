#include "support.hpp"

namespace epchiral {
namespace {

using test::loop;

TEST(GaussianStream, SameKeySameSequence) {
  GaussianStream a = gaussian_stream(42, {Direction::CW, 3, 17});
  GaussianStream b = gaussian_stream(42, {Direction::CW, 3, 17});
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(a.next(), b.next());
}

TEST(GaussianStream, MomentsOfStandardNormal) {
  GaussianStream s = gaussian_stream(7, {});
  const int n = 100000;
  double sum = 0, sum2 = 0;
  for (int k = 0; k < n; ++k) {
    const double x = s.next();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_LT(std::abs(mean), 4 / std::sqrt(double(n)));
  EXPECT_NEAR(var, 1.0, 0.05);
}

double correlation(GaussianStream a, GaussianStream b, int n) {
  double sab = 0, sa = 0, sb = 0, saa = 0, sbb = 0;
  for (int k = 0; k < n; ++k) {
    const double x = a.next(), y = b.next();
    sab += x * y;
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  return cov / std::sqrt((saa / n - (sa / n) * (sa / n)) * (sbb / n - (sb / n) * (sb / n)));
}

TEST(GaussianStream, SubstreamsAreIndependent) {
  EXPECT_LT(std::abs(correlation(gaussian_stream(1, {Direction::CCW, 0, 5}), gaussian_stream(1, {Direction::CW, 0, 5}),
                                 10000)),
            0.05);
  EXPECT_LT(std::abs(correlation(gaussian_stream(1, {Direction::CCW, 0, 5}), gaussian_stream(1, {Direction::CCW, 1, 5}),
                                 10000)),
            0.05);
  EXPECT_LT(std::abs(correlation(gaussian_stream(1, {Direction::CCW, 0, 5}), gaussian_stream(2, {Direction::CCW, 0, 5}),
                                 10000)),
            0.05);
  EXPECT_NE(gaussian_stream(1, {Direction::CCW, 0, 5}).next(), gaussian_stream(1, {Direction::CCW, 0, 6}).next());
}

bool bit_identical(const Mat2& a, const Mat2& b) {
  for (auto [x, y] : {std::pair{&a.a11, &b.a11}, {&a.a12, &b.a12}, {&a.a21, &b.a21}, {&a.a22, &b.a22}})
    if (!(x->re == y->re) || !(x->im == y->im)) return false;
  return true;
}

TEST(Rk4, NoiseFreeRunIgnoresSeed) {
  const LoopSpec l = loop("1", "1", "1", "pi", "0.5");
  const IntegrationSpec is{400, test::digits(30)};
  NoiseSpec a, b;
  a.seed = 1;
  b.seed = 99;
  EXPECT_TRUE(bit_identical(rk4_transfer(l, is, a, 0).m, rk4_transfer(l, is, b, 0).m));
}

TEST(Rk4, NoisyRunIsDeterministicPerSeed) {
  const LoopSpec l = loop("1", "1", "1", "pi", "0.5");
  const IntegrationSpec is{400, test::digits(30)};
  NoiseSpec n;
  n.epsilon = ExactReal::parse("1e-3");
  n.seed = 5;
  n.realizations = 2;
  const TransferMatrix a = rk4_transfer(l, is, n, 1, 3);
  EXPECT_TRUE(bit_identical(a.m, rk4_transfer(l, is, n, 1, 3).m));
  EXPECT_FALSE(bit_identical(a.m, rk4_transfer(l, is, n, 0, 3).m));
  EXPECT_FALSE(bit_identical(a.m, rk4_transfer(l, is, n, 1, 4).m));
  n.seed = 6;
  EXPECT_FALSE(bit_identical(a.m, rk4_transfer(l, is, n, 1, 3).m));
  EXPECT_THROW(rk4_transfer(l, is, n, 2), ConfigError);
}

TEST(Rk4, ConstantHamiltonianFourthOrder) {
  // omega = 0.3 keeps every entry of exp(-i T sigma_x) away from zero.
  const LoopSpec l = loop("1", "0", "0", "0", "0.3");
  const ConvergenceLadder ladder = convergence_ladder(l, test::digits(40), {50, 100, 200, 400});
  ASSERT_EQ(ladder.ratios.size(), 3u);
  for (double r : ladder.ratios) EXPECT_NEAR(r, 16.0, 4.0);
  EXPECT_FALSE(ladder.non_decreasing);
}

TEST(Rk4, FourthOrderOnEncirclingLoop) {
  const LoopSpec l = loop("1", "1", "1", "pi", "0.5");
  const ConvergenceLadder ladder = convergence_ladder(l, test::digits(40), {200, 400, 800});
  for (double r : ladder.ratios) EXPECT_NEAR(r, 16.0, 4.0);
}

TEST(Rk4, NoiseFreeResidualsAreSmallAtFineSteps) {
  const LoopSpec l = loop("1", "0.5", "1.5", "0.7", "0.5");
  const IntegrationSpec is{2000, test::digits(30)};
  const SymmetryResiduals r = integrated_symmetry_residuals(l, is);
  ASSERT_TRUE(r.trace_residual && r.conj_pair_residual && r.transpose_pair_residual && r.dagger_residual);
  ScopedPrecision p(40);
  EXPECT_LT(r.worst(), tolerance(8)) << to_string(r.worst(), 3);
}

TEST(Rk4, NoiseResponseIsLinear) {
  // || S(eps) - S(0) || doubles with eps for small eps at a fixed seed.
  const LoopSpec l = loop("1", "1", "1", "0", "0.5");
  const IntegrationSpec is{400, test::digits(40)};
  const TransferMatrix clean = rk4_transfer(l, is, NoiseSpec{}, 0);
  auto response = [&](const char* eps) {
    NoiseSpec n;
    n.epsilon = ExactReal::parse(eps);
    n.seed = 11;
    const TransferMatrix t = rk4_transfer(l, is, n, 0);
    ScopedPrecision p(60);
    return to_double(frobenius_norm(t.m - clean.m));
  };
  EXPECT_NEAR(response("2e-10") / response("1e-10"), 2.0, 0.2);
}

TEST(Rk4, DoublePrecisionRoundoffBlowsUp) {
  const LoopSpec l = loop("1", "1", "6", "pi", "0.1");
  PrecisionContext ctx = test::digits(16);
  const TransferMatrix t = rk4_transfer(l, {2000, ctx}, NoiseSpec{}, 0);
  EXPECT_GT(log10_abs(max_abs_entry(t.m)), 60);
  ASSERT_TRUE(t.residuals.trace_residual);
  EXPECT_GT(log10_abs(t.residuals.det_residual), 10);
  EXPECT_GT(log10_abs(*t.residuals.trace_residual), 10);
}

TEST(Rk4, DoublePrecisionRungIsFlagged) {
  const LoopSpec l = loop("1", "1", "6", "pi", "0.1");
  const ConvergenceLadder ladder = convergence_ladder(l, test::digits(16), {1000, 2000});
  EXPECT_TRUE(ladder.non_decreasing);
  EXPECT_GT(ladder.rungs.back().relative_error, 1e60);
}

TEST(Rk4, OverflowWhenNormExceedsBudget) {
  PrecisionContext ctx = test::digits(20);
  ctx.max_digits = 20;
  EXPECT_THROW(rk4_transfer(loop("1", "1", "6", "pi", "0.1"), {2000, ctx}, NoiseSpec{}, 0), Overflow);
}

TEST(Rk4, RejectsBadSpecs) {
  const LoopSpec l = loop("1", "1", "1", "pi", "0.5");
  EXPECT_THROW(rk4_transfer(l, {3, test::digits(30)}, NoiseSpec{}, 0), ConfigError);
  NoiseSpec n;
  n.epsilon = ExactReal::parse("-1e-3");
  EXPECT_THROW(rk4_transfer(l, {100, test::digits(30)}, n, 0), ConfigError);
  EXPECT_TRUE((IntegrationSpec{50, {}}.coarse()));
}

}  // namespace
}  // namespace epchiral
