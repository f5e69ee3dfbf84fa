#include "support.hpp"

#include <cstdlib>
#include <cstring>
#include <sstream>

#include "epchiral/sweep.hpp"

namespace epchiral {
namespace {

using test::loop;

SweepPlan plan(Quantity q, std::vector<AxisSpec> axes) {
  SweepPlan p;
  p.loop = loop("1", "1", "1", "pi", "0.2");
  p.integration.ctx = test::digits(32);
  p.integration.steps = 200;
  p.quantity = q;
  p.axes = std::move(axes);
  return p;
}

AxisSpec axis(const char* text) { return AxisSpec::parse(text, "sweep.axis1"); }

bool same_bits(const SweepResult& a, const SweepResult& b) {
  if (a.values.size() != b.values.size()) return false;
  for (size_t k = 0; k < a.values.size(); ++k) {
    if (std::memcmp(&a.values[k], &b.values[k], sizeof(double)) != 0) return false;
    if (a.status[k] != b.status[k]) return false;
  }
  return true;
}

TEST(Axis, ExactNodesAndParsing) {
  const AxisSpec a = axis("theta_i 0 2pi 5");
  EXPECT_EQ(a.at(0), ExactReal::parse("0"));
  EXPECT_EQ(a.at(2), ExactReal::parse("pi"));
  EXPECT_EQ(a.at(4), ExactReal::parse("2pi"));
  EXPECT_EQ(axis("theta_i 0 2pi 5").to_string(), a.to_string());
  EXPECT_THROW(axis("theta_i 0 2pi"), ConfigError);
  EXPECT_THROW(axis("theta_i 0 2pi 5 7"), ConfigError);
  EXPECT_THROW(axis("phase 0 1 5"), ConfigError);
}

TEST(Plan, Validation) {
  EXPECT_THROW(plan(Quantity::ChiMean, {}).validate(), ConfigError);
  EXPECT_THROW(plan(Quantity::ChiMean, {axis("rho 1 1 2")}).validate(), ConfigError);
  EXPECT_THROW(plan(Quantity::ChiMean, {axis("rho 1 2 1")}).validate(), ConfigError);
  EXPECT_THROW(plan(Quantity::ChiMean, {axis("rho 1 2 2"), axis("rho 1 2 2")}).validate(), ConfigError);
  EXPECT_THROW(plan(Quantity::ChiMean, {axis("inv_omega 0 2 2")}).validate(), ConfigError);
  EXPECT_NO_THROW(plan(Quantity::ChiMean, {axis("rho 1 1 1")}).validate());
}

TEST(Sweep, SingleCellEqualsDirectEvaluation) {
  const SweepPlan p = plan(Quantity::ChiMean, {axis("inv_omega 5 5 1"), axis("theta_i 0 0 1")});
  const SweepResult r = run_sweep(p, 1);
  ASSERT_EQ(r.values.size(), 1u);
  const double direct = chirality(loop("1", "1", "1", "0", "0.2"), p.integration, NoiseSpec{}).mean;
  EXPECT_EQ(r.value(0, 0), direct);
  EXPECT_EQ(r.cell_status(0, 0), CellStatus::Ok);
}

TEST(Sweep, LogConditionCellMatchesTransferMatrix) {
  const SweepPlan p = plan(Quantity::LogCondition, {axis("rho 6 6 1")});
  const SweepResult r = run_sweep(p, 1);
  LoopSpec l = p.loop;
  l.rho = ExactReal::parse("6");
  const TransferMatrix t = transfer_one_cycle(l, p.integration.ctx);
  ScopedPrecision s(t.digits_used + 20);
  EXPECT_NEAR(r.value(0, 0), log10_abs(condition_number_2x2(t.m, detail::kernel_context(p.integration.ctx, t.digits_used))),
              1e-12);
  EXPECT_GT(r.value(0, 0), 0);
}

TEST(Sweep, FailedCellIsNaNWithStatus) {
  // rho = 2 at theta_i = 0 starts on the EP.
  SweepPlan p = plan(Quantity::ChiMean, {axis("rho 1 3 3")});
  p.loop.theta_i = ExactReal::parse("0");
  const SweepResult r = run_sweep(p, 1);
  EXPECT_EQ(r.cell_status(1, 0), CellStatus::EPDegeneracy);
  EXPECT_TRUE(std::isnan(r.value(1, 0)));
  EXPECT_EQ(r.cell_status(0, 0), CellStatus::Ok);
  EXPECT_EQ(r.failed_cells(), 1u);
}

TEST(Sweep, WorkerCountDoesNotChangeResults) {
  SweepPlan p = plan(Quantity::ChiMean, {axis("inv_omega 2 4 3"), axis("log10_inv_epsilon 2 4 2")});
  p.noise.seed = 0;
  p.noise.realizations = 2;
  p.master_seed = 77;
  const SweepResult one = run_sweep(p, 1);
  const SweepResult four = run_sweep(p, 4);
  EXPECT_TRUE(same_bits(one, four));
  EXPECT_EQ(one.failed_cells(), 0u);
}

TEST(Sweep, MasterSeedSelectsNoise) {
  SweepPlan p = plan(Quantity::ChiMean, {axis("log10_inv_epsilon 2 2 1")});
  p.noise.realizations = 1;
  p.master_seed = 1;
  const SweepResult a = run_sweep(p, 1);
  EXPECT_TRUE(same_bits(a, run_sweep(p, 1)));
  p.master_seed = 2;
  EXPECT_FALSE(same_bits(a, run_sweep(p, 1)));
}

TEST(Sweep, EnvironmentOverridesWorkerBudget) {
  ::setenv("EPCHIRAL_WORKERS", "3", 1);
  EXPECT_EQ(resolve_workers(1), 3);
  ::setenv("EPCHIRAL_WORKERS", "zero", 1);
  EXPECT_THROW(resolve_workers(1), ConfigError);
  ::unsetenv("EPCHIRAL_WORKERS");
  EXPECT_EQ(resolve_workers(2), 2);
  EXPECT_GE(resolve_workers(0), 1);
}

TEST(Csv, RoundTripKeepsPlanValuesAndStatus) {
  SweepPlan p = plan(Quantity::ChiMean, {axis("rho 1 3 3"), axis("inv_omega 2 3 2")});
  p.loop.theta_i = ExactReal::parse("0");
  const SweepResult r = run_sweep(p, 1);
  std::stringstream ss;
  emit_csv(r, ss);
  const std::string text = ss.str();
  EXPECT_NE(text.find("# [sweep]"), std::string::npos);
  EXPECT_NE(text.find("rho,inv_omega,value,status"), std::string::npos);
  EXPECT_NE(text.find(",,ep_degeneracy"), std::string::npos);
  const SweepResult back = read_csv(ss);
  EXPECT_TRUE(same_bits(r, back));
  EXPECT_EQ(back.axis1, r.axis1);
  EXPECT_EQ(back.axis2, r.axis2);
  EXPECT_EQ(back.engine_version, r.engine_version);
  EXPECT_EQ(back.plan.axes[1].to_string(), p.axes[1].to_string());
  EXPECT_EQ(back.plan.loop.theta_i, p.loop.theta_i);
}

TEST(Csv, RejectsTruncatedRows) {
  const SweepResult r = run_sweep(plan(Quantity::ChiMean, {axis("inv_omega 2 3 2")}), 1);
  std::stringstream ss;
  emit_csv(r, ss);
  std::string text = ss.str();
  text.erase(text.rfind('\n', text.size() - 2) + 1);
  std::istringstream in(text);
  EXPECT_THROW(read_csv(in), Error);
}

TEST(PlanText, ParsesAndRejectsUnknownKeys) {
  const SweepPlan p = parse_plan("[loop]\nrho = 1\n[sweep]\nquantity = Asymmetry\naxis1 = inv_omega 1 10 4\n");
  EXPECT_EQ(p.quantity, Quantity::Asymmetry);
  EXPECT_EQ(p.n1(), 4);
  EXPECT_EQ(p.n2(), 1);
  EXPECT_THROW(parse_plan("[loop]\nrho = 1\nspeed = 3\n[sweep]\naxis1 = inv_omega 1 10 4\n"), ConfigError);
}

TEST(Colormap, LuminanceIncreasesMonotonically) {
  for (Colormap m : {Colormap::Viridis, Colormap::Cividis}) {
    double prev = -1;
    for (int k = 0; k <= 100; ++k) {
      const Rgb c = colormap(m, k / 100.0);
      const double y = 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b;
      EXPECT_GE(y, prev - 1e-9) << k;
      prev = y;
    }
    const Rgb lo = colormap(m, -3), hi = colormap(m, 7), nan = colormap(m, std::nan(""));
    EXPECT_EQ(lo.r, colormap(m, 0).r);
    EXPECT_EQ(hi.g, colormap(m, 1).g);
    EXPECT_EQ(nan.b, lo.b);
  }
}

TEST(Heatmap, OneRectPerCellAndHatchedFailures) {
  SweepPlan p = plan(Quantity::ChiMean, {axis("rho 1 3 3"), axis("inv_omega 2 3 2")});
  p.loop.theta_i = ExactReal::parse("0");
  const SweepResult r = run_sweep(p, 1);
  std::stringstream ss;
  emit_heatmap_svg(r, ss, Colormap::Cividis, {"chi", {{1, 2}, {3, 3}}});
  const std::string svg = ss.str();
  const size_t cells = svg.find("<g id=\"cells\""), end = svg.find("</g>", cells);
  int rects = 0, hatched = 0;
  for (size_t k = svg.find("<rect", cells); k < end; k = svg.find("<rect", k + 1)) ++rects;
  for (size_t k = svg.find("url(#hatch)", cells); k < end; k = svg.find("url(#hatch)", k + 1)) ++hatched;
  EXPECT_EQ(rects, 6);
  EXPECT_EQ(hatched, 2);
  EXPECT_NE(svg.find("id=\"overlay\""), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Heatmap, SingleCell) {
  const SweepResult r = run_sweep(plan(Quantity::Asymmetry, {axis("inv_omega 5 5 1")}), 1);
  std::stringstream ss;
  emit_heatmap_svg(r, ss);
  EXPECT_NE(ss.str().find("width=\"480\""), std::string::npos);
}

}  // namespace
}  // namespace epchiral
