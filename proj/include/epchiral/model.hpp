#pragma once

// The driven two-level model H(t) = kappa sigma_x + h_z(theta) sigma_z with
// h_z(theta) = i (g0 - rho e^{i theta}), theta = theta_i +- omega t.

#include <algorithm>
#include <cmath>
#include <string>

#include "epchiral/complex.hpp"
#include "epchiral/exact_real.hpp"

namespace epchiral {

enum class Direction { CCW, CW };

inline const char* to_string(Direction d) { return d == Direction::CCW ? "CCW" : "CW"; }
inline Direction opposite(Direction d) { return d == Direction::CCW ? Direction::CW : Direction::CCW; }

struct LoopSpec {
  ExactReal kappa{1};
  ExactReal g0{1};
  ExactReal rho{1};
  ExactReal theta_i{0};
  ExactReal omega{ExactReal::parse("0.1")};
  Direction direction = Direction::CCW;

  void validate() const {
    if (kappa.sign() <= 0) throw ConfigError("kappa", "must be > 0");
    if (rho.sign() < 0) throw ConfigError("rho", "must be >= 0");
    if (omega.sign() <= 0) throw ConfigError("omega", "must be > 0");
    if (omega.has_pi()) throw ConfigError("omega", "must be rational");
  }

  /// +omega for CCW, -omega for CW.
  ExactReal signed_omega() const { return direction == Direction::CCW ? omega : -omega; }
  /// T = 2 pi / omega.
  ExactReal period() const {
    return ExactReal::pi_times(mpq_class(2) / omega.rational());
  }
  /// theta_i +- 2 pi turns.
  ExactReal theta_after_turns(long turns) const {
    const long s = direction == Direction::CCW ? turns : -turns;
    return theta_i + ExactReal::pi_times(mpq_class(2 * s));
  }
  /// theta at time t (current precision).
  Real theta_at(const Real& t) const {
    const Real w = omega.value();
    return direction == Direction::CCW ? theta_i.value() + w * t : theta_i.value() - w * t;
  }

  LoopSpec with_direction(Direction d) const {
    LoopSpec l = *this;
    l.direction = d;
    return l;
  }
  LoopSpec with_theta_i(ExactReal th) const {
    LoopSpec l = *this;
    l.theta_i = std::move(th);
    return l;
  }
};

/// h_z(theta) = i (g0 - rho e^{i theta}) at the current precision.
inline Complex h_z(const LoopSpec& loop, const Real& theta) {
  Real s, c;
  sin_cos(theta, s, c);
  const Real rho = loop.rho.value();
  return {rho * s, loop.g0.value() - rho * c};
}

inline Mat2 hamiltonian_at_theta(const LoopSpec& loop, const Real& theta) {
  const Complex h = h_z(loop, theta);
  const Complex k(loop.kappa.value());
  return {h, k, k, -h};
}

/// H(t) = kappa sigma_x + h_z(theta(t)) sigma_z; traceless by construction.
inline Mat2 hamiltonian(const LoopSpec& loop, const Real& t, const PrecisionContext& ctx) {
  ScopedPrecision scope(ctx.working_digits());
  return hamiltonian_at_theta(loop, loop.theta_at(t));
}

struct StateVector {
  Complex a;
  Complex b;
};

/// Biorthogonal eigensystem of H(theta). Right eigenvectors have unit
/// Euclidean norm; left eigenvectors are row-vector coefficients with
/// <L_a|R_b> = delta_ab (plain bilinear product, no conjugation).
struct EigenFrame {
  Complex lambda_plus;
  Complex lambda_minus;
  StateVector R_plus, R_minus;
  StateVector L_plus, L_minus;
  Real theta;

  EigenFrame swapped() const {
    return {lambda_minus, lambda_plus, R_minus, R_plus, L_minus, L_plus, theta};
  }
};

/// <L|psi> without conjugation.
inline Complex bracket(const StateVector& L, const StateVector& psi) { return L.a * psi.a + L.b * psi.b; }
inline StateVector apply(const Mat2& m, const StateVector& v) {
  return {m.a11 * v.a + m.a12 * v.b, m.a21 * v.a + m.a22 * v.b};
}

namespace detail {

inline StateVector right_vector(const Complex& kappa, const Complex& h, const Complex& lambda) {
  // (H - lambda) R = 0: both rows give a candidate; keep the better conditioned one.
  StateVector r1{kappa, lambda - h};
  StateVector r2{lambda + h, kappa};
  const Real n1 = norm(r1.a) + norm(r1.b);
  const Real n2 = norm(r2.a) + norm(r2.b);
  StateVector r = n1 >= n2 ? r1 : r2;
  const Real n = sqrt(n1 >= n2 ? n1 : n2);
  r.a = r.a / n;
  r.b = r.b / n;
  return r;
}

inline StateVector left_from_right(const StateVector& R) {
  // H is complex symmetric, so L = R^T / (R^T R).
  const Complex rr = R.a * R.a + R.b * R.b;
  return {R.a / rr, R.b / rr};
}

}  // namespace detail

/// Frame with lambda_+ the principal square root of kappa^2 + h_z^2.
inline EigenFrame eigenframe(const LoopSpec& loop, const Real& theta, const PrecisionContext& ctx) {
  ScopedPrecision scope(ctx.working_digits());
  const Complex h = h_z(loop, theta);
  const Real kappa = loop.kappa.value();
  const Complex disc = Complex(kappa * kappa) + h * h;
  if (abs(disc) < tolerance(ctx.digits / 2) * kappa * kappa)
    throw EPDegeneracy("eigenframe: kappa^2 + h_z^2 vanishes at theta = " + to_string(theta, 17));
  EigenFrame f;
  f.lambda_plus = sqrt(disc);
  f.lambda_minus = -f.lambda_plus;
  f.R_plus = detail::right_vector(Complex(kappa), h, f.lambda_plus);
  f.R_minus = detail::right_vector(Complex(kappa), h, f.lambda_minus);
  f.L_plus = detail::left_from_right(f.R_plus);
  f.L_minus = detail::left_from_right(f.R_minus);
  f.theta = theta;
  return f;
}

/// Frame whose labels follow `prior` by maximal overlap |<L_a(prior)|R_b(new)>|.
inline EigenFrame eigenframe(const LoopSpec& loop, const Real& theta, const PrecisionContext& ctx,
                             const EigenFrame& prior) {
  EigenFrame f = eigenframe(loop, theta, ctx);
  ScopedPrecision scope(ctx.working_digits());
  const Real keep = abs(bracket(prior.L_plus, f.R_plus)) + abs(bracket(prior.L_minus, f.R_minus));
  const Real swap = abs(bracket(prior.L_plus, f.R_minus)) + abs(bracket(prior.L_minus, f.R_plus));
  return swap > keep ? f.swapped() : f;
}

/// Number of EPs (h_z = +-i kappa) strictly inside the loop.
inline int count_encircled_eps(const LoopSpec& loop) {
  const double kappa = loop.kappa.approx();
  const double g0 = loop.g0.approx();
  const double rho = loop.rho.approx();
  int n = 0;
  for (double d : {std::abs(g0 - kappa), std::abs(g0 + kappa)}) {
    const double scale = std::max({d, rho, kappa});
    if (std::abs(d - rho) <= 1e-12 * scale)
      throw OnBoundary("count_encircled_eps: an EP lies on the loop");
    if (d < rho) ++n;
  }
  return n;
}

}  // namespace epchiral
