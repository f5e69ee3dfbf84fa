#pragma once

// Fixed-step classical RK4 for i d psi/dt = (H(t) + epsilon xi(t) sigma_z) psi,
// advancing the full 2x2 propagator at the context's working precision.
// xi is held at w/sqrt(dt) over each step, w standard normal.

#include <array>
#include <complex>
#include <vector>

#include "epchiral/exact_solver.hpp"
#include "epchiral/gaussian_stream.hpp"

namespace epchiral {

/// Requests at or below this many digits run in IEEE double arithmetic.
inline constexpr int kBinary64Digits = 16;

struct NoiseSpec {
  ExactReal epsilon{0};
  std::uint64_t seed = 0;
  long realizations = 1;

  void validate() const {
    if (epsilon.sign() < 0) throw ConfigError("epsilon", "must be >= 0");
    if (realizations < 1) throw ConfigError("realizations", "must be >= 1");
  }
};

struct IntegrationSpec {
  long steps = 2000;
  PrecisionContext ctx;

  void validate() const {
    if (steps < 4) throw ConfigError("steps", "must be >= 4");
    ctx.validate();
  }
  /// Below the recommended 100 steps per cycle.
  bool coarse() const { return steps < 100; }
};

namespace detail {

/// K = -i H U with H = [[h, k], [k, -h]].
inline Mat2 rhs(const Complex& h, const Real& k, const Mat2& u) {
  const Mat2 hu{h * u.a11 + k * u.a21, h * u.a12 + k * u.a22, k * u.a11 - h * u.a21, k * u.a12 - h * u.a22};
  // multiply by -i: (x + iy)(-i) = y - ix
  return {{hu.a11.im, -hu.a11.re}, {hu.a12.im, -hu.a12.re}, {hu.a21.im, -hu.a21.re}, {hu.a22.im, -hu.a22.re}};
}

inline Mat2 axpy(const Mat2& u, const Real& s, const Mat2& k) {
  return {u.a11 + k.a11 * s, u.a12 + k.a12 * s, u.a21 + k.a21 * s, u.a22 + k.a22 * s};
}

/// The same scheme in IEEE binary64 arithmetic.
inline std::array<std::complex<double>, 4> rk4_binary64(const LoopSpec& loop, long steps, double eps,
                                                        GaussianStream& stream) {
  using C = std::complex<double>;
  using M = std::array<C, 4>;
  const double kappa = loop.kappa.approx();
  const double g0 = loop.g0.approx();
  const double rho = loop.rho.approx();
  const double w = loop.signed_omega().approx();
  const double th0 = loop.theta_i.approx();
  const double dt = loop.period().approx() / static_cast<double>(steps);
  const double scale = eps / std::sqrt(dt);
  auto h_at = [&](double t) { return C(rho * std::sin(th0 + w * t), g0 - rho * std::cos(th0 + w * t)); };
  auto f = [&](C h, const M& u) {
    const C mi(0, -1);
    return M{mi * (h * u[0] + kappa * u[2]), mi * (h * u[1] + kappa * u[3]), mi * (kappa * u[0] - h * u[2]),
             mi * (kappa * u[1] - h * u[3])};
  };
  auto ax = [](const M& u, double s, const M& k) {
    return M{u[0] + s * k[0], u[1] + s * k[1], u[2] + s * k[2], u[3] + s * k[3]};
  };
  M u{C(1), C(0), C(0), C(1)};
  for (long n = 0; n < steps; ++n) {
    const double t = dt * static_cast<double>(n);
    const double kick = eps != 0 ? scale * stream.next() : 0.0;
    const C hs = h_at(t) + kick, hm = h_at(t + dt / 2) + kick, he = h_at(dt * static_cast<double>(n + 1)) + kick;
    const M k1 = f(hs, u);
    const M k2 = f(hm, ax(u, dt / 2, k1));
    const M k3 = f(hm, ax(u, dt / 2, k2));
    const M k4 = f(he, ax(u, dt, k3));
    for (int j = 0; j < 4; ++j) u[j] += dt / 6 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
    for (const C& z : u)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Overflow("rk4_transfer: binary64 propagator overflowed at step " + std::to_string(n + 1));
  }
  return u;
}

}  // namespace detail

/// One-cycle propagator by RK4. `cell` selects the grid-cell substream.
inline TransferMatrix rk4_transfer(const LoopSpec& loop, const IntegrationSpec& ispec, const NoiseSpec& noise,
                                   long realization_index, std::uint64_t cell = 0) {
  loop.validate();
  ispec.validate();
  noise.validate();
  if (realization_index < 0 || realization_index >= noise.realizations)
    throw ConfigError("realization_index", "must be < realizations");
  const PrecisionContext& ctx = ispec.ctx;
  ScopedPrecision scope(ctx.working_digits());
  TransferMatrix out;
  out.theta_i = loop.theta_i;
  out.theta_f = loop.theta_after_turns(1);
  out.direction = loop.direction;
  out.provenance = Provenance::Integrated;
  out.integration = {ispec.steps, noise.epsilon.approx(), noise.seed, realization_index};
  out.digits_used = ctx.digits;
  GaussianStream stream(noise.seed, {loop.direction, static_cast<std::uint64_t>(realization_index), cell});
  const bool noisy = !noise.epsilon.is_zero();

  if (ctx.digits <= kBinary64Digits) {
    // digits = 16 means plain double arithmetic, guard digits unused.
    const auto u = detail::rk4_binary64(loop, ispec.steps, noise.epsilon.approx(), stream);
    out.m = {Complex(u[0]), Complex(u[1]), Complex(u[2]), Complex(u[3])};
    if (!noisy) detail::fill_det_trace(out, loop);
    return out;
  }

  const Real kappa = loop.kappa.value();
  const Real g0 = loop.g0.value();
  const Real rho = loop.rho.value();
  const Real w = loop.signed_omega().value();
  const Real th0 = loop.theta_i.value();
  const Real T = loop.period().value();
  const Real dt = T / Real(ispec.steps);
  const Real half = dt / 2;
  const Real sixth = dt / 6;
  const Real eps_over_sqrt_dt = noisy ? noise.epsilon.value() / sqrt(dt) : Real(0);
  const Real limit = pow10(ctx.max_digits / 2);

  auto h_at = [&](const Real& t) {
    Real s, c;
    sin_cos(th0 + w * t, s, c);
    return Complex(rho * s, g0 - rho * c);
  };

  Mat2 u = Mat2::identity();
  Complex h_start = h_at(Real(0));
  for (long n = 0; n < ispec.steps; ++n) {
    const Real t = dt * Real(n);
    Complex h_mid = h_at(t + half);
    Complex h_end = h_at(dt * Real(n + 1));
    Complex hs = h_start, hm = h_mid, he = h_end;
    if (noisy) {
      const Real kick = eps_over_sqrt_dt * stream.next();
      hs.re += kick;
      hm.re += kick;
      he.re += kick;
    }
    const Mat2 k1 = detail::rhs(hs, kappa, u);
    const Mat2 k2 = detail::rhs(hm, kappa, detail::axpy(u, half, k1));
    const Mat2 k3 = detail::rhs(hm, kappa, detail::axpy(u, half, k2));
    const Mat2 k4 = detail::rhs(he, kappa, detail::axpy(u, dt, k3));
    const Mat2 sum{k1.a11 + (k2.a11 + k3.a11) * 2.0 + k4.a11, k1.a12 + (k2.a12 + k3.a12) * 2.0 + k4.a12,
                   k1.a21 + (k2.a21 + k3.a21) * 2.0 + k4.a21, k1.a22 + (k2.a22 + k3.a22) * 2.0 + k4.a22};
    u = detail::axpy(u, sixth, sum);
    if (!isfinite(u.a11) || !isfinite(u.a12) || !isfinite(u.a21) || !isfinite(u.a22) ||
        max_abs_entry(u) > limit)
      throw Overflow("rk4_transfer: propagator norm exceeds 10^(max_digits/2) at step " + std::to_string(n + 1));
    h_start = std::move(h_end);
  }

  out.m = std::move(u);
  if (!noisy) detail::fill_det_trace(out, loop);
  return out;
}

/// Noise-free RK4 residuals for properties (i)-(v), the partners obtained by
/// integrating the reflected and reversed loops.
inline SymmetryResiduals integrated_symmetry_residuals(const LoopSpec& loop, const IntegrationSpec& ispec) {
  const NoiseSpec clean;
  const TransferMatrix t = rk4_transfer(loop, ispec, clean, 0);
  ScopedPrecision scope(ispec.ctx.working_digits());
  SymmetryResiduals r = t.residuals;
  const Direction o = opposite(loop.direction);
  // (i): partner starts at -theta_i in the opposite direction.
  const LoopSpec reflected = loop.with_direction(o).with_theta_i(-loop.theta_i);
  const TransferMatrix ti = rk4_transfer(reflected, ispec, clean, 0);
  r.conj_pair_residual = relative_deviation(t.m, sigma_z_sandwich(conj(ti.m)));
  // (ii): partner runs back from theta_f.
  const LoopSpec reversed = loop.with_direction(o).with_theta_i(t.theta_f);
  const TransferMatrix tii = rk4_transfer(reversed, ispec, clean, 0);
  r.transpose_pair_residual = relative_deviation(t.m, transpose(tii.m));
  // (iii): same direction from -theta_f.
  const LoopSpec mirrored = loop.with_theta_i(-t.theta_f);
  const TransferMatrix tiii = rk4_transfer(mirrored, ispec, clean, 0);
  r.dagger_residual = relative_deviation(t.m, sigma_z_sandwich(dagger(tiii.m)));
  return r;
}

struct LadderRung {
  long steps = 0;
  double relative_error = 0;  // max relative element error vs the exact matrix
};

struct ConvergenceLadder {
  std::vector<LadderRung> rungs;
  /// error(steps) / error(2 steps) for consecutive doublings.
  std::vector<double> ratios;
  /// Some rung failed to reduce the error, or the finest one was off by 100% or more.
  bool non_decreasing = false;
};

inline ConvergenceLadder convergence_ladder(const LoopSpec& loop, const PrecisionContext& ctx,
                                            const std::vector<long>& steps_list) {
  PrecisionContext exact_ctx = ctx;
  exact_ctx.digits = std::max(ctx.digits, 32);
  const TransferMatrix ref = transfer_one_cycle(loop, exact_ctx);
  ConvergenceLadder out;
  for (long steps : steps_list) {
    IntegrationSpec is{steps, ctx};
    LadderRung r;
    r.steps = steps;
    try {
      const TransferMatrix t = rk4_transfer(loop, is, NoiseSpec{}, 0);
      ScopedPrecision scope(ctx.working_digits() + 10);
      r.relative_error = to_double(max_relative_element_error(t.m, ref.m));
    } catch (const Overflow&) {
      r.relative_error = std::numeric_limits<double>::infinity();
    }
    out.rungs.push_back(r);
  }
  for (size_t k = 1; k < out.rungs.size(); ++k) {
    const double prev = out.rungs[k - 1].relative_error;
    const double cur = out.rungs[k].relative_error;
    out.ratios.push_back(prev / cur);
    if (!(cur < prev)) out.non_decreasing = true;
  }
  if (!out.rungs.empty() && !(out.rungs.back().relative_error < 1)) out.non_decreasing = true;
  return out;
}

}  // namespace epchiral
