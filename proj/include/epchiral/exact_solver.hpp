#pragma once

// Closed-form transfer matrix of the circular loop.
//
// With omega_s = +omega (CCW) or -omega (CW), eta = -2i (rho/omega_s) e^{i theta},
// nu = sqrt(kappa^2 - g0^2)/omega, p1 = nu + i g0/omega_s, p2 = 1 + 2 nu:
//
//   M(eta) = [[F0, U0], [-(omega_s/kappa) p1 (F0 + eta F1/p2), -(omega_s/kappa) p1 (U0 - eta U1)]]
//   S(theta_f, theta_i) = (kappa/omega_s) Gamma(p1)/Gamma(p2) eta_i^{p2-1}
//                         e^{i nu (theta_f - theta_i)} e^{-(eta_f + eta_i)/2} M(eta_f) adj M(eta_i)
//
// where Fn = F(n+p1, n+p2, eta) and Un = U(n+p1, n+p2, eta). The multivalued
// pieces (U and eta_i^{p2-1}) are taken on the sheet of the continuous
// argument of eta along the path, which is theta - pi/2 for CCW and
// theta + pi/2 for CW. The same closed form covers both directions, so the
// symmetry relations between CCW and CW matrices are independent checks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "epchiral/kummer.hpp"
#include "epchiral/model.hpp"

namespace epchiral {

enum class Provenance { Exact, Integrated };

struct IntegrationInfo {
  long steps = 0;
  double epsilon = 0;
  std::uint64_t seed = 0;
  long realization = 0;
};

/// det and trace residuals are absolute; the pair residuals are relative
/// Frobenius deviations. Unset entries were not evaluated.
struct SymmetryResiduals {
  Real det_residual{0};
  std::optional<Real> trace_residual;
  std::optional<Real> conj_pair_residual;
  std::optional<Real> transpose_pair_residual;
  std::optional<Real> dagger_residual;

  Real worst() const {
    Real w = det_residual;
    for (const auto* r : {&trace_residual, &conj_pair_residual, &transpose_pair_residual, &dagger_residual})
      if (*r && **r > w) w = **r;
    return w;
  }
  bool all_below(const Real& tol) const { return worst() < tol; }
};

struct TransferMatrix {
  Mat2 m;
  ExactReal theta_i;
  ExactReal theta_f;
  Direction direction = Direction::CCW;
  Provenance provenance = Provenance::Exact;
  IntegrationInfo integration;
  SymmetryResiduals residuals;
  /// Decimal digits requested from the kernels for the final evaluation.
  int digits_used = 0;

  const Complex& s11() const { return m.a11; }
  const Complex& s12() const { return m.a12; }
  const Complex& s21() const { return m.a21; }
  const Complex& s22() const { return m.a22; }

  static TransferMatrix identity() {
    TransferMatrix t;
    t.m = Mat2::identity();
    return t;
  }
};

/// Raised with the last matrix computed when escalation hits max_digits.
class TransferPrecisionExhausted : public PrecisionExhausted {
 public:
  TransferPrecisionExhausted(const std::string& what, TransferMatrix best)
      : PrecisionExhausted(what), best_(std::move(best)) {}
  const TransferMatrix& best() const noexcept { return best_; }

 private:
  TransferMatrix best_;
};

struct KummerWork {
  Mat2 M_f;
  Mat2 Mtilde_i;  // adjugate of M(eta_i)
  KummerParams params_f;
  KummerParams params_i;
};

namespace detail {

/// Loop constants at the current precision.
struct LoopConstants {
  Real kappa, g0, rho, omega_s;
  Complex nu, p1, p2;
};

inline LoopConstants loop_constants(const LoopSpec& loop) {
  LoopConstants c;
  c.kappa = loop.kappa.value();
  c.g0 = loop.g0.value();
  c.rho = loop.rho.value();
  c.omega_s = loop.signed_omega().value();
  const Real w = loop.omega.value();
  c.nu = sqrt(Complex(c.kappa * c.kappa - c.g0 * c.g0)) / w;
  c.p1 = c.nu + Complex(Real(0), c.g0 / c.omega_s);
  c.p2 = Complex(1) + c.nu * 2.0;
  return c;
}

/// eta and its winding number for angle theta.
inline std::pair<Complex, long> eta_at(const LoopConstants& c, const Real& theta, Direction dir) {
  Complex eta = Complex(Real(0), -2 * c.rho / c.omega_s) * expi(theta);
  const Real half_pi = pi() / 2;
  const Real continuous = dir == Direction::CCW ? theta - half_pi : theta + half_pi;
  if (is_zero(eta)) return {eta, 0};
  const Real turns = round((continuous - arg(eta)) / (2 * pi()));
  return {std::move(eta), static_cast<long>(to_double(turns))};
}

inline Mat2 assemble_M(const LoopConstants& c, const KummerParams& p, const PrecisionContext& ctx) {
  const Complex one(1);
  KummerParams p1 = p;
  p1.a = p.a + one;
  p1.b = p.b + one;
  const Complex F0 = kummer_F(p, ctx);
  const Complex F1 = kummer_F(p1, ctx);
  const Complex U0 = kummer_U(p, ctx);
  const Complex U1 = kummer_U(p1, ctx);
  ScopedPrecision scope(ctx.working_digits());
  const Complex w = c.p1 * (c.omega_s / c.kappa);
  return {F0, U0, -(w * (F0 + p.eta * F1 / c.p2)), -(w * (U0 - p.eta * U1))};
}

/// Propagator of the constant Hamiltonian (rho = 0) over angle theta_f - theta_i.
inline Mat2 constant_loop_propagator(const LoopConstants& c, const Real& dtheta) {
  const Real dt = dtheta / c.omega_s;
  const Complex h(Real(0), c.g0);
  const Mat2 H{h, Complex(c.kappa), Complex(c.kappa), -h};
  const Complex lam = sqrt(Complex(c.kappa * c.kappa - c.g0 * c.g0));
  Complex cs(1), sinc(dt);
  if (!is_zero(lam)) {
    const Complex x = lam * dt;
    cs = cos(x);
    sinc = sin(x) / lam;
  }
  const Complex mi(Real(0), Real(-1));
  return Mat2{cs, Complex(0), Complex(0), cs} + (mi * sinc) * H;
}

/// S(theta_f, theta_i) for `dir` at kernel precision `ctx` (no escalation).
inline Mat2 exact_core(const LoopSpec& loop, Direction dir, const ExactReal& theta_i,
                       const ExactReal& theta_f, const PrecisionContext& ctx, KummerWork* work = nullptr) {
  ScopedPrecision scope(ctx.working_digits());
  const LoopSpec l = loop.with_direction(dir);
  const LoopConstants c = loop_constants(l);
  const Real ti = theta_i.value();
  const Real tf = theta_f.value();
  if (is_zero(c.rho)) return constant_loop_propagator(c, tf - ti);

  auto [eta_i, n_i] = eta_at(c, ti, dir);
  auto [eta_f, n_f] = eta_at(c, tf, dir);
  KummerParams pi_{c.p1, c.p2, eta_i, n_i};
  KummerParams pf_{c.p1, c.p2, eta_f, n_f};
  const Mat2 Mf = assemble_M(c, pf_, ctx);
  const Mat2 Mi_adj = adjugate(assemble_M(c, pi_, ctx));

  const Complex one(1);
  Complex pre = Complex(c.kappa / c.omega_s) * gamma_complex(c.p1, ctx) * rgamma_complex(c.p2, ctx);
  pre *= pow(eta_i, c.p2 - one, n_i);
  pre *= exp(Complex(Real(0), Real(1)) * c.nu * (tf - ti) - (eta_f + eta_i) / 2.0);
  if (work) *work = KummerWork{Mf, Mi_adj, pf_, pi_};
  return pre * (Mf * Mi_adj);
}

inline bool is_full_cycle(const ExactReal& theta_i, const ExactReal& theta_f) {
  const ExactReal d = theta_f - theta_i;
  return sgn(d.rational()) == 0 && (d.pi_coeff() == 2 || d.pi_coeff() == -2);
}

/// 2 cos(2 pi sqrt(kappa^2 - g0^2) / omega) at the current precision.
inline Complex floquet_trace(const LoopSpec& loop) {
  const Real k = loop.kappa.value();
  const Real g = loop.g0.value();
  const Complex nu = sqrt(Complex(k * k - g * g)) / loop.omega.value();
  return cos(nu * (2 * pi())) * 2.0;
}

/// Starting digit estimate from the spread of the dynamical phase:
/// 16 + log10(e) (2 pi / omega) max |Im lambda| on a 256-point mesh.
inline int initial_digits(const LoopSpec& loop) {
  const double k = loop.kappa.approx();
  const double g0 = loop.g0.approx();
  const double rho = loop.rho.approx();
  const double w = loop.omega.approx();
  double worst = 0;
  for (int j = 0; j < 256; ++j) {
    const double th = 2 * M_PI * j / 256.0;
    const std::complex<double> h(rho * std::sin(th), g0 - rho * std::cos(th));
    const std::complex<double> lam = std::sqrt(k * k + h * h);
    worst = std::max(worst, std::abs(lam.imag()));
  }
  return 16 + static_cast<int>(std::ceil(std::log10(std::exp(1.0)) * (2 * M_PI / w) * worst));
}

/// max_digits caps the escalated result precision; kernels may go to twice
/// that internally to absorb cancellation.
inline PrecisionContext kernel_context(const PrecisionContext& ctx, int digits) {
  PrecisionContext k = ctx;
  k.digits = digits;
  k.max_digits = 2 * std::max(ctx.max_digits, digits);
  return k;
}

inline void fill_det_trace(TransferMatrix& t, const LoopSpec& loop) {
  t.residuals.det_residual = abs(det(t.m) - Complex(1));
  if (is_full_cycle(t.theta_i, t.theta_f))
    t.residuals.trace_residual = abs(trace(t.m) - floquet_trace(loop));
  else
    t.residuals.trace_residual.reset();
}

}  // namespace detail

/// Exact S(theta_f, loop.theta_i) in the loop's direction. Starts from the
/// digit estimate of the dynamical-phase spread and doubles the digits until
/// the det (and, for a full cycle, trace) residuals fall below
/// 10^-(digits - guard_digits).
inline TransferMatrix transfer_matrix_exact(const LoopSpec& loop, const ExactReal& theta_f,
                                            const PrecisionContext& ctx) {
  ctx.validate();
  loop.validate();
  const int dir_sign = loop.direction == Direction::CCW ? 1 : -1;
  if ((theta_f - loop.theta_i).sign() * dir_sign < 0)
    throw ConfigError("theta_f", "not reachable in the loop direction");

  int digits = ctx.auto_escalate ? std::min(std::max(ctx.digits, detail::initial_digits(loop)), ctx.max_digits)
                                 : ctx.digits;
  TransferMatrix t;
  t.theta_i = loop.theta_i;
  t.theta_f = theta_f;
  t.direction = loop.direction;
  t.provenance = Provenance::Exact;
  std::optional<TransferMatrix> last;
  while (true) {
    const PrecisionContext k = detail::kernel_context(ctx, digits);
    try {
      t.m = detail::exact_core(loop, loop.direction, loop.theta_i, theta_f, k);
    } catch (const PrecisionExhausted& e) {
      // A kernel ran out of room below max_digits; hand back the last full
      // evaluation, or an empty matrix (digits_used = 0) if there was none.
      throw TransferPrecisionExhausted(std::string("transfer_matrix_exact: ") + e.what(), last ? *last : t);
    }
    t.digits_used = digits;
    {
      ScopedPrecision scope(k.working_digits());
      detail::fill_det_trace(t, loop);
    }
    const Real tol = tolerance(ctx.digits - ctx.guard_digits);
    if (!ctx.auto_escalate || t.residuals.all_below(tol)) return t;
    last = t;
    if (digits >= ctx.max_digits)
      throw TransferPrecisionExhausted("transfer_matrix_exact: residual " + to_string(t.residuals.worst(), 3) +
                                           " above tolerance at max_digits",
                                       t);
    digits = std::min(2 * digits, ctx.max_digits);
  }
}

inline TransferMatrix transfer_one_cycle(const LoopSpec& loop, const PrecisionContext& ctx) {
  return transfer_matrix_exact(loop, loop.theta_after_turns(1), ctx);
}

/// The matrices entering properties (i)-(iii), evaluated at the digits
/// the main matrix needed.
inline SymmetryResiduals symmetry_residuals(const LoopSpec& loop, const TransferMatrix& t,
                                            const PrecisionContext& ctx) {
  const PrecisionContext k = detail::kernel_context(ctx, t.digits_used);
  ScopedPrecision scope(k.working_digits());
  SymmetryResiduals r = t.residuals;
  const Direction d = t.direction;
  const Direction o = opposite(d);
  // (i) S_d(f, i) = sigma_z S_o(-f, -i)^* sigma_z
  const Mat2 conj_partner = detail::exact_core(loop, o, -t.theta_i, -t.theta_f, k);
  r.conj_pair_residual = relative_deviation(t.m, sigma_z_sandwich(conj(conj_partner)));
  // (ii) S_d(f, i) = S_o(i, f)^T
  const Mat2 transpose_partner = detail::exact_core(loop, o, t.theta_f, t.theta_i, k);
  r.transpose_pair_residual = relative_deviation(t.m, transpose(transpose_partner));
  // (iii) S_d(f, i) = sigma_z S_d(-i, -f)^dagger sigma_z
  const Mat2 dagger_partner = detail::exact_core(loop, d, -t.theta_f, -t.theta_i, k);
  Real dag = relative_deviation(t.m, sigma_z_sandwich(dagger(dagger_partner)));
  // Corollary at theta_i in {0, pi}, one cycle: S11, S22 real and S12 = -S21^*.
  const ExactReal& ti = t.theta_i;
  const bool on_axis = sgn(ti.rational()) == 0 && ti.pi_coeff().get_den() == 1;
  if (on_axis && detail::is_full_cycle(t.theta_i, t.theta_f)) {
    const Real n = frobenius_norm(t.m);
    for (Real x : {abs(t.m.a11.im), abs(t.m.a22.im), abs(t.m.a12 + conj(t.m.a21))}) {
      x /= n;
      if (x > dag) dag = x;
    }
  }
  r.dagger_residual = std::move(dag);
  return r;
}

/// All five residuals for S(theta_f, loop.theta_i).
inline SymmetryResiduals symmetry_check(const LoopSpec& loop, const ExactReal& theta_f,
                                        const PrecisionContext& ctx) {
  const TransferMatrix t = transfer_matrix_exact(loop, theta_f, ctx);
  return symmetry_residuals(loop, t, ctx);
}

/// Kummer building blocks of S(theta_f, loop.theta_i) at ctx.digits.
inline KummerWork kummer_work(const LoopSpec& loop, const ExactReal& theta_f, const PrecisionContext& ctx) {
  KummerWork w;
  if (loop.rho.is_zero()) throw DegenerateParameter("kummer_work: rho = 0 has no Kummer representation");
  detail::exact_core(loop, loop.direction, loop.theta_i, theta_f, ctx, &w);
  return w;
}

/// det M(eta) = (omega_s/kappa) Gamma(p2)/Gamma(p1) eta^{1-p2} e^eta for the loop's constants.
inline Complex det_M_closed_form(const LoopSpec& loop, const KummerParams& p, const PrecisionContext& ctx) {
  ScopedPrecision scope(ctx.working_digits());
  const detail::LoopConstants c = detail::loop_constants(loop);
  const Complex one(1);
  return Complex(c.omega_s / c.kappa) * gamma_complex(c.p2, ctx) * rgamma_complex(c.p1, ctx) *
         pow(p.eta, one - c.p2, p.eta_winding) * exp(p.eta);
}

struct AsymptoticReport {
  Complex s12_asym;
  Complex s21_asym;
  Real phi;          // arg(s21_asym / s12_asym)
  Real phi_formula;  // 4 (1 + rho + log rho)/omega - pi in kappa units
  bool small_rho_warning = false;
};

/// Large-rho forms of the off-diagonal entries of the one-cycle matrix for
/// loops centred on an EP (g0 = kappa) starting at theta_i = 0 or pi:
///   S12 -> -(2 pi i kappa/omega) e^{-eta0} ((-eta0)^{-i kappa/omega} / Gamma(1 - i kappa/omega))^2
///   S21 -> -(2 pi i kappa/omega) e^{eta0}  ((eta0)^{i kappa/omega} / Gamma(1 + i kappa/omega))^2
/// with eta0 = -2i rho/omega for theta_i = 0 and +2i rho/omega for theta_i = pi.
inline AsymptoticReport asymptotic_offdiag(const LoopSpec& loop, const PrecisionContext& ctx) {
  ctx.validate();
  loop.validate();
  const ExactReal& ti = loop.theta_i;
  if (sgn(ti.rational()) != 0 || ti.pi_coeff().get_den() != 1)
    throw ConfigError("theta_i", "asymptotic forms need theta_i = 0 or pi");
  if (!(loop.g0 == loop.kappa)) throw ConfigError("g0", "asymptotic forms need g0 = kappa");
  ScopedPrecision scope(ctx.working_digits());
  const Real kappa = loop.kappa.value();
  const Real w = loop.omega.value();
  const Real rho = loop.rho.value();
  const bool at_pi = mpz_odd_p(ti.pi_coeff().get_num_mpz_t()) != 0;
  const Complex eta0(Real(0), (at_pi ? 2 : -2) * rho / w);
  const Complex x(Real(0), kappa / w);  // i kappa / omega
  const Complex one(1);
  const Complex pref(Real(0), -2 * pi() * kappa / w);
  const Complex a = pow(-eta0, -x) * rgamma_complex(one - x, ctx);
  const Complex b = pow(eta0, x) * rgamma_complex(one + x, ctx);
  AsymptoticReport r;
  r.s12_asym = pref * exp(-eta0) * a * a;
  r.s21_asym = pref * exp(eta0) * b * b;
  r.phi = arg(r.s21_asym / r.s12_asym);
  const Real rr = rho / kappa;
  r.phi_formula = 4 * kappa / w * (1 + rr + log(rr)) - pi();
  r.small_rho_warning = rr < 10.0;
  return r;
}

/// Quasienergies +-sqrt(kappa^2 - g0^2) of the time-averaged Hamiltonian.
struct FloquetReport {
  Complex lambda_plus;
  Complex lambda_minus;
  /// Largest |mu - e^{-+ i 2 pi lambda/omega}| over the two eigenvalues mu of
  /// the one-cycle matrix, matched in the better of the two pairings.
  Real eigenvalue_residual;
};

inline FloquetReport floquet_quasienergies(const LoopSpec& loop, const PrecisionContext& ctx) {
  const TransferMatrix t = transfer_one_cycle(loop, ctx);
  ScopedPrecision scope(detail::kernel_context(ctx, t.digits_used).working_digits());
  FloquetReport r;
  const Real k = loop.kappa.value();
  const Real g = loop.g0.value();
  r.lambda_plus = sqrt(Complex(k * k - g * g));
  r.lambda_minus = -r.lambda_plus;
  const Complex tr = trace(t.m);
  const Complex disc = sqrt(tr * tr - det(t.m) * 4.0);
  const Complex mu1 = (tr + disc) / 2.0;
  const Complex mu2 = (tr - disc) / 2.0;
  const Complex phase = r.lambda_plus * (2 * pi() / loop.omega.value());
  const Complex e1 = exp(Complex(Real(0), Real(-1)) * phase);
  const Complex e2 = exp(Complex(Real(0), Real(1)) * phase);
  const Real a = max(abs(mu1 - e1), abs(mu2 - e2));
  const Real b = max(abs(mu1 - e2), abs(mu2 - e1));
  r.eigenvalue_residual = min(a, b);
  return r;
}

}  // namespace epchiral
