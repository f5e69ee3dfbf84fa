#pragma once

// Quantities derived from transfer matrices: relative transition
// probabilities, the non-chirality degree, condition-number profiles and the
// speed-noise boundary.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "epchiral/integrator.hpp"

namespace epchiral {

// ---------------------------------------------------------------- transitions

struct TransitionReport {
  /// P[beta][alpha], index 0 = "+", 1 = "-".
  double P[2][2] = {{0, 0}, {0, 0}};
  /// P_{+-} - P_{-+}
  double asymmetry = 0;
};

inline TransitionReport transition_probabilities(const Mat2& S, const EigenFrame& frame_i,
                                                 const EigenFrame& frame_f, const PrecisionContext& ctx) {
  ScopedPrecision scope(ctx.working_digits());
  const StateVector* R[2] = {&frame_i.R_plus, &frame_i.R_minus};
  const StateVector* L[2] = {&frame_f.L_plus, &frame_f.L_minus};
  TransitionReport out;
  for (int a = 0; a < 2; ++a) {
    const StateVector psi = apply(S, *R[a]);
    const Real w0 = norm(bracket(*L[0], psi));
    const Real w1 = norm(bracket(*L[1], psi));
    const Real total = w0 + w1;
    if (is_zero(total) || !isfinite(total)) throw DegenerateFrame("transition_probabilities: zero column weight");
    out.P[0][a] = to_double(w0 / total);
    out.P[1][a] = to_double(w1 / total);
  }
  out.asymmetry = out.P[0][1] - out.P[1][0];
  return out;
}

inline TransitionReport transition_probabilities(const TransferMatrix& S, const EigenFrame& frame_i,
                                                 const EigenFrame& frame_f, const PrecisionContext& ctx) {
  return transition_probabilities(S.m, frame_i, frame_f, ctx);
}

struct AsymmetrySample {
  double theta = 0;  // omega t
  double asymmetry = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
};

/// P(theta_i + theta, theta_i) along the loop for the given offsets, each a
/// fraction of one turn. Labels at the end point follow the start frame by
/// continuation over the mesh; mesh points too close to an EP are marked.
inline std::vector<AsymmetrySample> transition_asymmetry_trace(const LoopSpec& loop, const PrecisionContext& ctx,
                                                               const std::vector<mpq_class>& turn_fractions) {
  ScopedPrecision scope(ctx.working_digits());
  const int s = loop.direction == Direction::CCW ? 1 : -1;
  const EigenFrame start = eigenframe(loop, loop.theta_i.value(), ctx);
  EigenFrame prior = start;
  std::vector<AsymmetrySample> out;
  for (const mpq_class& f : turn_fractions) {
    const ExactReal offset = ExactReal::pi_times(mpq_class(2 * s) * f);
    const ExactReal th = loop.theta_i + offset;
    AsymmetrySample smp;
    smp.theta = offset.approx() * s;
    try {
      const EigenFrame ff = eigenframe(loop, th.value(), ctx, prior);
      prior = ff;
      const TransferMatrix S = f == 0 ? TransferMatrix::identity() : transfer_matrix_exact(loop, th, ctx);
      smp.asymmetry = transition_probabilities(S.m, start, ff, ctx).asymmetry;
      smp.ok = true;
    } catch (const EPDegeneracy&) {
    } catch (const DegenerateFrame&) {
    }
    out.push_back(smp);
  }
  return out;
}

// ------------------------------------------------------------------ chirality

struct Decomposition {
  Complex p;  // coefficient on R_+(0)
  Complex q;  // coefficient on R_-(0)
};

struct ChiralityReport {
  double chi_plus = 0;
  double chi_minus = 0;
  double chi_mean = 0;
  /// [alpha][L]: alpha 0 = "+", 1 = "-"; L 0 = CCW, 1 = CW.
  Decomposition decompositions[2][2];
};

namespace detail {
inline double chi_from(const Decomposition& ccw, const Decomposition& cw) {
  const Complex overlap = conj(ccw.p) * cw.p + conj(ccw.q) * cw.q;
  const Real n1 = norm(ccw.p) + norm(ccw.q);
  const Real n2 = norm(cw.p) + norm(cw.q);
  if (is_zero(n1) || is_zero(n2)) throw ZeroState("nonchirality: end state vanishes");
  const double chi = to_double(norm(overlap) / (n1 * n2));
  return std::clamp(chi, 0.0, 1.0);
}
}  // namespace detail

inline ChiralityReport nonchirality(const Mat2& S_ccw, const Mat2& S_cw, const EigenFrame& frame_i,
                                    const PrecisionContext& ctx) {
  ScopedPrecision scope(ctx.working_digits());
  ChiralityReport r;
  const StateVector* R[2] = {&frame_i.R_plus, &frame_i.R_minus};
  const Mat2* S[2] = {&S_ccw, &S_cw};
  for (int a = 0; a < 2; ++a)
    for (int l = 0; l < 2; ++l) {
      const StateVector psi = apply(*S[l], *R[a]);
      r.decompositions[a][l] = {bracket(frame_i.L_plus, psi), bracket(frame_i.L_minus, psi)};
    }
  r.chi_plus = detail::chi_from(r.decompositions[0][0], r.decompositions[0][1]);
  r.chi_minus = detail::chi_from(r.decompositions[1][0], r.decompositions[1][1]);
  r.chi_mean = (r.chi_plus + r.chi_minus) / 2;
  return r;
}

inline ChiralityReport nonchirality(const TransferMatrix& S_ccw, const TransferMatrix& S_cw,
                                    const EigenFrame& frame_i, const PrecisionContext& ctx) {
  return nonchirality(S_ccw.m, S_cw.m, frame_i, ctx);
}

struct ChiralityEnsemble {
  ChiralityReport first;  // realization 0
  double mean = 0;        // mean chi_mean over realizations
  double stddev = 0;
  long realizations = 0;
};

/// chi for one loop: exact matrices when epsilon = 0, otherwise RK4 with
/// independent CCW/CW substreams for each realization of grid cell `cell`.
inline ChiralityEnsemble chirality(const LoopSpec& loop, const IntegrationSpec& ispec, const NoiseSpec& noise,
                                   std::uint64_t cell = 0) {
  const PrecisionContext& ctx = ispec.ctx;
  const LoopSpec ccw = loop.with_direction(Direction::CCW);
  const LoopSpec cw = loop.with_direction(Direction::CW);
  ChiralityEnsemble out;
  if (noise.epsilon.is_zero()) {
    const TransferMatrix a = transfer_one_cycle(ccw, ctx);
    const TransferMatrix b = transfer_one_cycle(cw, ctx);
    const int w = std::max(a.digits_used, b.digits_used);
    const PrecisionContext k = detail::kernel_context(ctx, w);
    ScopedPrecision scope(k.working_digits());
    const EigenFrame f = eigenframe(loop, loop.theta_i.value(), k);
    out.first = nonchirality(a, b, f, k);
    out.mean = out.first.chi_mean;
    out.realizations = 1;
    return out;
  }
  ScopedPrecision scope(ctx.working_digits());
  const EigenFrame f = eigenframe(loop, loop.theta_i.value(), ctx);
  double sum = 0, sum2 = 0;
  for (long r = 0; r < noise.realizations; ++r) {
    const TransferMatrix a = rk4_transfer(ccw, ispec, noise, r, cell);
    const TransferMatrix b = rk4_transfer(cw, ispec, noise, r, cell);
    const ChiralityReport c = nonchirality(a, b, f, ctx);
    if (r == 0) out.first = c;
    sum += c.chi_mean;
    sum2 += c.chi_mean * c.chi_mean;
  }
  const double n = static_cast<double>(noise.realizations);
  out.mean = sum / n;
  out.stddev = n > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1))) : 0.0;
  out.realizations = noise.realizations;
  return out;
}

// ------------------------------------------------------------ condition numbers

/// sigma_max / sigma_min = lambda_max(A^dag A) / |det A|.
inline Real condition_number_2x2(const Mat2& A, const PrecisionContext& ctx) {
  ScopedPrecision scope(ctx.working_digits());
  const Real a = norm(A.a11) + norm(A.a21);
  const Real d = norm(A.a12) + norm(A.a22);
  const Complex b = conj(A.a11) * A.a12 + conj(A.a21) * A.a22;
  const Real half = (a - d) / 2;
  const Real lmax = (a + d) / 2 + sqrt(half * half + norm(b));
  if (is_zero(lmax)) throw SingularMatrix("condition_number_2x2: zero matrix");
  const Real dm = abs(det(A));
  // lambda_min = |det A|^2 / lambda_max
  if (dm * dm < tolerance(2 * ctx.digits) * lmax * lmax) throw SingularMatrix("condition_number_2x2: singular");
  return lmax / dm;
}

struct LocalMax {
  double t = 0;
  Real C;
  double log10_C = 0;
};

struct ConditionProfile {
  std::vector<double> times;
  std::vector<Real> values;
  std::vector<double> log10_values;
  std::vector<LocalMax> local_maxima;  // ascending in t, refined
  std::optional<LocalMax> t_c;         // selected critical maximum
  double slope_estimate = 0;           // |int Im lambda d theta| over [T - t_c, T]
  double period = 0;
  Direction direction = Direction::CCW;
};

struct CriticalPoint {
  double t_c = 0;
  Real C;
  double epsilon_c = 0;
  double log10_inv_epsilon_c = 0;
};

namespace detail {

/// C(t) = Cond S(theta_end, theta_end -+ omega t), t given as a fraction of T.
inline Real condition_at(const LoopSpec& loop, const mpq_class& frac, const PrecisionContext& ctx) {
  if (sgn(frac) == 0) return Real(1);
  const int s = loop.direction == Direction::CCW ? 1 : -1;
  const ExactReal end = loop.theta_after_turns(1);
  const ExactReal start = end - ExactReal::pi_times(mpq_class(2 * s) * frac);
  const TransferMatrix t = transfer_matrix_exact(loop.with_theta_i(start), end, ctx);
  const PrecisionContext k = kernel_context(ctx, t.digits_used);
  return condition_number_2x2(t.m, k);
}

inline mpq_class dyadic(double x) {
  const double scale = 1099511627776.0;  // 2^40
  return mpq_class(static_cast<long>(std::llround(x * scale)), 1UL << 40);
}

/// The sole candidate of a profile without an accepted interior maximum.
inline LocalMax profile_maximum(const ConditionProfile& p) {
  size_t best = 0;
  for (size_t k = 1; k < p.log10_values.size(); ++k)
    if (p.log10_values[k] > p.log10_values[best]) best = k;
  return {p.times[best], p.values[best], p.log10_values[best]};
}

}  // namespace detail

/// |int Im lambda_+ d theta| over the last `t` of the loop; adaptive Simpson
/// on 512 panels of the principal eigenvalue.
inline double slope_integral(const LoopSpec& loop, double t) {
  const double w = loop.omega.approx();
  const double k = loop.kappa.approx();
  const double g0 = loop.g0.approx();
  const double rho = loop.rho.approx();
  const double s = loop.direction == Direction::CCW ? 1.0 : -1.0;
  const double end = loop.theta_i.approx() + s * 2 * M_PI;
  const double span = w * t;
  auto f = [&](double u) {
    const double th = end - s * u;
    const std::complex<double> h(rho * std::sin(th), g0 - rho * std::cos(th));
    return std::abs(std::sqrt(k * k + h * h).imag());
  };
  const int n = 512;
  const double hstep = span / n;
  double acc = f(0) + f(span);
  for (int j = 1; j < n; ++j) acc += f(j * hstep) * (j % 2 ? 4 : 2);
  return acc * hstep / 3;
}

/// C within 1e-3 of 1 counts as a return.
inline const double kReturnLog10Tolerance = std::log10(1 + 1e-3);

inline std::vector<CriticalPoint> find_critical_epsilons(const ConditionProfile& profile,
                                                         double return_log10_tolerance = kReturnLog10Tolerance);

/// Samples C(t) on n_samples + 1 uniform points of [0, T], locates interior
/// maxima, refines each by golden-section search and selects t_c.
inline ConditionProfile condition_profile(const LoopSpec& loop, const PrecisionContext& ctx, int n_samples,
                                          int refine_iterations = 12) {
  if (n_samples < 64) throw ConfigError("n_samples", "must be >= 64");
  ConditionProfile p;
  p.period = loop.period().approx();
  p.direction = loop.direction;
  for (int k = 0; k <= n_samples; ++k) {
    const mpq_class frac(k, n_samples);
    Real c = detail::condition_at(loop, frac, ctx);
    p.times.push_back(p.period * k / n_samples);
    p.log10_values.push_back(log10_abs(c));
    p.values.push_back(std::move(c));
  }
  const double invphi = (std::sqrt(5.0) - 1) / 2;
  for (int k = 1; k < n_samples; ++k) {
    if (!(p.log10_values[k] > p.log10_values[k - 1] && p.log10_values[k] >= p.log10_values[k + 1])) continue;
    double a = static_cast<double>(k - 1) / n_samples;
    double b = static_cast<double>(k + 1) / n_samples;
    LocalMax best{p.times[k], p.values[k], p.log10_values[k]};
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    auto eval = [&](double x) {
      Real c = detail::condition_at(loop, detail::dyadic(x), ctx);
      const double l = log10_abs(c);
      if (l > best.log10_C) best = {x * p.period, c, l};
      return l;
    };
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < refine_iterations; ++it) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = eval(x2);
      }
    }
    p.local_maxima.push_back(std::move(best));
  }
  const std::vector<CriticalPoint> crit = find_critical_epsilons(p);
  if (!crit.empty()) {
    const CriticalPoint& c = crit.front();
    p.t_c = LocalMax{c.t_c, c.C, log10_abs(c.C)};
    p.slope_estimate = slope_integral(loop, c.t_c);
  }
  return p;
}

/// Critical noise strengths from a profile: starting from the largest
/// interior maximum and moving to earlier times, a maximum at t_k is
/// accepted when log10 C drops to `return_log10_tolerance` or below somewhere
/// between t_k and the previously accepted maximum (or T). Returns 1/C(t_k)
/// for each accepted maximum, largest first; a profile with no accepted
/// maximum yields the single value 1/max C.
inline std::vector<CriticalPoint> find_critical_epsilons(const ConditionProfile& profile,
                                                         double return_log10_tolerance) {
  if (profile.times.empty()) throw EmptyProfile("find_critical_epsilons: empty profile");
  const double tol = return_log10_tolerance;
  std::vector<CriticalPoint> out;
  auto emit = [&](const LocalMax& m) {
    CriticalPoint c;
    c.t_c = m.t;
    c.C = m.C;
    c.log10_inv_epsilon_c = m.log10_C;
    c.epsilon_c = std::pow(10.0, -m.log10_C);
    out.push_back(c);
  };
  double bound = profile.period;  // previous accepted maximum, or T
  double window = profile.period + 1;  // search (0, window)
  while (true) {
    const LocalMax* pick = nullptr;
    for (const LocalMax& m : profile.local_maxima)
      if (m.t < window && (!pick || m.log10_C > pick->log10_C)) pick = &m;
    if (!pick) break;
    bool returns = false;
    for (size_t k = 0; k < profile.times.size(); ++k)
      if (profile.times[k] > pick->t && profile.times[k] < bound && profile.log10_values[k] <= tol) returns = true;
    if (returns) {
      emit(*pick);
      bound = pick->t;
    }
    window = pick->t;
  }
  if (out.empty()) emit(detail::profile_maximum(profile));
  std::sort(out.begin(), out.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.epsilon_c > b.epsilon_c; });
  return out;
}

// ------------------------------------------------------------------ sensitivity

struct KernelSample {
  double t1 = 0;
  Real kernel_norm;
};

/// K(t1) = || S(theta_f, theta_1) sigma_z S(theta_1, theta_i) ||_F, t1 given
/// as fractions of the period.
inline std::vector<KernelSample> sensitivity_kernel(const LoopSpec& loop, const PrecisionContext& ctx,
                                                    const std::vector<mpq_class>& t1_fractions) {
  const int s = loop.direction == Direction::CCW ? 1 : -1;
  const ExactReal end = loop.theta_after_turns(1);
  const double T = loop.period().approx();
  std::vector<KernelSample> out;
  for (const mpq_class& f : t1_fractions) {
    const ExactReal th1 = loop.theta_i + ExactReal::pi_times(mpq_class(2 * s) * f);
    const TransferMatrix first = sgn(f) == 0 ? TransferMatrix::identity()
                                             : transfer_matrix_exact(loop, th1, ctx);
    const TransferMatrix second = f == 1 ? TransferMatrix::identity()
                                         : transfer_matrix_exact(loop.with_theta_i(th1), end, ctx);
    const int w = std::max({first.digits_used, second.digits_used, ctx.digits});
    ScopedPrecision scope(detail::kernel_context(ctx, w).working_digits());
    out.push_back({f.get_d() * T, frobenius_norm(second.m * (Mat2::sigma_z() * first.m))});
  }
  return out;
}

// --------------------------------------------------------------- boundary scan

enum class BoundaryMethod { ChiCrossing, ConditionPrediction };

struct BoundaryPoint {
  double omega = 0;
  double epsilon_c = 0;
  double chi_spread = 0;  // realization stddev at the crossing
};

struct BoundaryFailure {
  double omega = 0;
  std::string reason;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int n = 0;
};

struct CriticalBoundary {
  std::vector<BoundaryPoint> points;
  std::vector<BoundaryFailure> failures;
  BoundaryMethod method = BoundaryMethod::ChiCrossing;
  double threshold = 0.5;
  /// log10(1/epsilon_c) against 1/omega.
  LinearFit fit;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.n = static_cast<int>(x.size());
  if (x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

inline LinearFit fit_boundary(const std::vector<BoundaryPoint>& pts) {
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(1.0 / p.omega);
    y.push_back(-std::log10(p.epsilon_c));
  }
  return fit_line(x, y);
}

struct BoundaryScanOptions {
  double threshold = 0.5;
  int bisection_steps = 6;
  /// Worker-independent cell index base for noise substreams.
  std::uint64_t cell_base = 0;
};

/// For each omega, mean chi over realizations is scanned on the epsilon grid
/// from the largest epsilon down; the first drop below the threshold brackets
/// the crossing, which is then bisected in log epsilon with the same seeds.
inline CriticalBoundary chi_boundary_scan(const LoopSpec& family, const std::vector<ExactReal>& omega_list,
                                          const std::vector<double>& epsilon_grid, const IntegrationSpec& ispec,
                                          const NoiseSpec& noise_base, const BoundaryScanOptions& opt = {}) {
  CriticalBoundary out;
  out.method = BoundaryMethod::ChiCrossing;
  out.threshold = opt.threshold;
  std::vector<double> eps = epsilon_grid;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  for (size_t wi = 0; wi < omega_list.size(); ++wi) {
    LoopSpec loop = family;
    loop.omega = omega_list[wi];
    const double w = loop.omega.approx();
    const std::uint64_t cell = opt.cell_base + wi;
    auto chi_at = [&](double e) {
      NoiseSpec n = noise_base;
      n.epsilon = ExactReal(e);
      return chirality(loop, ispec, n, cell);
    };
    try {
      double hi = eps.front();
      ChiralityEnsemble chi_hi = chi_at(hi);
      std::optional<double> lo;
      ChiralityEnsemble chi_lo;
      const bool high_above = chi_hi.mean >= opt.threshold;
      for (size_t k = 1; k < eps.size(); ++k) {
        ChiralityEnsemble c = chi_at(eps[k]);
        if ((c.mean >= opt.threshold) != high_above) {
          lo = eps[k];
          chi_lo = c;
          break;
        }
        hi = eps[k];
        chi_hi = c;
      }
      if (!lo) {
        out.failures.push_back({w, "no chi crossing of the threshold on the epsilon grid"});
        continue;
      }
      double a = std::log10(*lo), b = std::log10(hi);
      ChiralityEnsemble ca = chi_lo, cb = chi_hi;
      for (int it = 0; it < opt.bisection_steps; ++it) {
        const double m = (a + b) / 2;
        ChiralityEnsemble c = chi_at(std::pow(10.0, m));
        if ((c.mean >= opt.threshold) == high_above) {
          b = m;
          cb = c;
        } else {
          a = m;
          ca = c;
        }
      }
      // Linear interpolation of chi in log epsilon inside the final bracket.
      double x = (a + b) / 2;
      if (cb.mean != ca.mean) x = a + (opt.threshold - ca.mean) * (b - a) / (cb.mean - ca.mean);
      x = std::clamp(x, a, b);
      out.points.push_back({w, std::pow(10.0, x), std::max(ca.stddev, cb.stddev)});
    } catch (const Error& e) {
      out.failures.push_back({w, e.what()});
    }
  }
  out.fit = fit_boundary(out.points);
  return out;
}

/// epsilon_c = 1 / C(t_c) with C(t_c) the larger of the CCW and CW profiles.
inline CriticalBoundary condition_boundary(const LoopSpec& family, const std::vector<ExactReal>& omega_list,
                                           const PrecisionContext& ctx, int n_samples) {
  CriticalBoundary out;
  out.method = BoundaryMethod::ConditionPrediction;
  for (const ExactReal& om : omega_list) {
    LoopSpec loop = family;
    loop.omega = om;
    try {
      double best = -1;
      for (Direction d : {Direction::CCW, Direction::CW}) {
        const ConditionProfile p = condition_profile(loop.with_direction(d), ctx, n_samples);
        if (p.t_c) best = std::max(best, p.t_c->log10_C);
      }
      out.points.push_back({om.approx(), std::pow(10.0, -best), 0});
    } catch (const Error& e) {
      out.failures.push_back({om.approx(), e.what()});
    }
  }
  out.fit = fit_boundary(out.points);
  return out;
}

}  // namespace epchiral
