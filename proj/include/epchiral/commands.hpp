#pragma once

// Subcommand bodies shared by the command-line tool and the acceptance
// runner. Each prints text or JSON and returns an exit code.

#include <functional>
#include <nlohmann/json.hpp>

#include "epchiral/config.hpp"

namespace epchiral {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

namespace detail {

using Json = nlohmann::ordered_json;

inline Json json_complex(const Complex& z, int digits) {
  return {{"re", to_string(z.re, digits)}, {"im", to_string(z.im, digits)}};
}

inline Json json_matrix(const Mat2& m, int digits) {
  return {{"S11", json_complex(m.a11, digits)},
          {"S12", json_complex(m.a12, digits)},
          {"S21", json_complex(m.a21, digits)},
          {"S22", json_complex(m.a22, digits)}};
}

inline std::string text_complex(const Json& z) {
  const std::string im = z["im"].get<std::string>();
  return z["re"].get<std::string>() + (im[0] == '-' ? " - " + im.substr(1) : " + " + im) + "i";
}

inline Json json_loop(const LoopSpec& l) {
  return {{"kappa", l.kappa.to_string()}, {"g0", l.g0.to_string()},       {"rho", l.rho.to_string()},
          {"theta_i", l.theta_i.to_string()}, {"omega", l.omega.to_string()}, {"direction", to_string(l.direction)}};
}

inline Json json_residuals(const SymmetryResiduals& r) {
  Json j;
  j["det_residual"] = to_string(r.det_residual, 6);
  auto put = [&](const char* k, const std::optional<Real>& v) {
    if (v) j[k] = to_string(*v, 6);
  };
  put("trace_residual", r.trace_residual);
  put("conj_pair_residual", r.conj_pair_residual);
  put("transpose_pair_residual", r.transpose_pair_residual);
  put("dagger_residual", r.dagger_residual);
  return j;
}

/// Flat text rendering: scalars as "key: value", nested objects by path.
inline void print_text(std::ostream& os, const Json& j, const std::string& prefix = "") {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    const Json& v = it.value();
    if (v.is_object() && v.size() == 2 && v.contains("re") && v.contains("im")) {
      os << key << ": " << text_complex(v) << "\n";
    } else if (v.is_object()) {
      print_text(os, v, key);
    } else if (v.is_array()) {
      for (size_t k = 0; k < v.size(); ++k) {
        if (v[k].is_object()) print_text(os, v[k], key + "[" + std::to_string(k) + "]");
        else os << key << "[" << k << "]: " << (v[k].is_string() ? v[k].get<std::string>() : v[k].dump()) << "\n";
      }
    } else {
      os << key << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    }
  }
}

inline void emit(std::ostream& os, const Json& j, bool json) {
  if (json) os << j.dump(2) << "\n";
  else print_text(os, j);
}

}  // namespace detail

/// Runs a command body, mapping configuration errors to exit code 2 and
/// other failures to 1, with a diagnostic on `err`.
inline int run_command(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

inline int cmd_exact(const RunConfig& c, std::ostream& out) {
  c.validate();
  const PrecisionContext& ctx = c.precision();
  const int d = ctx.digits;
  detail::Json j;
  j["loop"] = detail::json_loop(c.loop);
  TransferMatrix t;
  try {
    t = transfer_one_cycle(c.loop, ctx);
  } catch (const TransferPrecisionExhausted& e) {
    t = e.best();
    j["warning"] = e.what();
  }
  const SymmetryResiduals r = symmetry_residuals(c.loop, t, ctx);
  const PrecisionContext k = detail::kernel_context(ctx, t.digits_used);
  ScopedPrecision scope(k.working_digits());
  const Real tol = tolerance(ctx.digits - ctx.guard_digits);
  const bool pass = r.all_below(tol) && !j.contains("warning");
  j["digits_used"] = t.digits_used;
  j["matrix"] = detail::json_matrix(t.m, d);
  j["residuals"] = detail::json_residuals(r);
  j["tolerance"] = to_string(tol, 3);
  j["status"] = pass ? "PASS" : "FAIL";
  detail::emit(out, j, c.output.json);
  return pass ? kExitOk : kExitFailure;
}

inline int cmd_evolve(const RunConfig& c, std::ostream& out) {
  c.validate();
  const PrecisionContext& ctx = c.precision();
  detail::Json j;
  j["loop"] = detail::json_loop(c.loop);
  j["steps"] = c.integration.steps;
  j["epsilon"] = c.noise.epsilon.to_string();
  j["seed"] = std::to_string(c.noise.seed);
  std::optional<TransferMatrix> exact;
  if (c.noise.epsilon.is_zero()) exact = transfer_one_cycle(c.loop, ctx.with_digits(std::max(ctx.digits, 32)));
  detail::Json runs = detail::Json::array();
  for (long r = 0; r < c.noise.realizations; ++r) {
    const TransferMatrix t = rk4_transfer(c.loop, c.integration, c.noise, r);
    ScopedPrecision scope(ctx.working_digits() + 10);
    detail::Json one;
    one["realization"] = r;
    one["matrix"] = detail::json_matrix(t.m, ctx.digits);
    if (exact) {
      one["residuals"] = detail::json_residuals(t.residuals);
      one["relative_error_vs_exact"] = to_string(max_relative_element_error(t.m, exact->m), 6);
    }
    runs.push_back(one);
  }
  j["runs"] = runs;
  detail::emit(out, j, c.output.json);
  return kExitOk;
}

/// With `self_test`, the CCW matrix stands in for both directions.
inline int cmd_chirality(const RunConfig& c, std::ostream& out, bool self_test = false) {
  c.validate();
  const PrecisionContext& ctx = c.precision();
  detail::Json j;
  j["loop"] = detail::json_loop(c.loop);
  j["epsilon"] = c.noise.epsilon.to_string();
  j["realizations"] = c.noise.realizations;
  ChiralityEnsemble e;
  int digits = ctx.digits;
  if (self_test) {
    const TransferMatrix a = transfer_one_cycle(c.loop.with_direction(Direction::CCW), ctx);
    const PrecisionContext k = detail::kernel_context(ctx, a.digits_used);
    ScopedPrecision scope(k.working_digits());
    e.first = nonchirality(a, a, eigenframe(c.loop, c.loop.theta_i.value(), k), k);
    e.mean = e.first.chi_mean;
    e.realizations = 1;
    j["self_test"] = true;
  } else {
    e = chirality(c.loop, c.integration, c.noise);
  }
  ScopedPrecision scope(ctx.working_digits());
  j["chi_plus"] = detail::format17(e.first.chi_plus);
  j["chi_minus"] = detail::format17(e.first.chi_minus);
  j["chi_mean"] = detail::format17(e.first.chi_mean);
  j["chi_mean_over_realizations"] = detail::format17(e.mean);
  j["chi_stddev"] = detail::format17(e.stddev);
  const char* a_name[2] = {"plus", "minus"};
  const char* l_name[2] = {"ccw", "cw"};
  for (int a = 0; a < 2; ++a)
    for (int l = 0; l < 2; ++l) {
      const Decomposition& dc = e.first.decompositions[a][l];
      j["decompositions"][a_name[a]][l_name[l]] = {{"p", detail::json_complex(dc.p, std::min(digits, 20))},
                                                   {"q", detail::json_complex(dc.q, std::min(digits, 20))}};
    }
  detail::emit(out, j, c.output.json);
  return kExitOk;
}

inline int cmd_profile(const RunConfig& c, std::ostream& out) {
  c.validate();
  const ConditionProfile p =
      condition_profile(c.loop, c.precision(), c.profile.n_samples, c.profile.refine_iterations);
  detail::Json j;
  j["loop"] = detail::json_loop(c.loop);
  j["period"] = detail::format17(p.period);
  detail::Json maxima = detail::Json::array();
  for (const LocalMax& m : p.local_maxima)
    maxima.push_back({{"t", detail::format17(m.t)}, {"log10_C", detail::format17(m.log10_C)}});
  j["local_maxima"] = maxima;
  if (p.t_c) j["t_c"] = {{"t", detail::format17(p.t_c->t)}, {"log10_C", detail::format17(p.t_c->log10_C)}};
  j["slope_estimate"] = detail::format17(p.slope_estimate);
  detail::Json crit = detail::Json::array();
  for (const CriticalPoint& cp : find_critical_epsilons(p))
    crit.push_back({{"t_c", detail::format17(cp.t_c)},
                    {"epsilon_c", detail::format17(cp.epsilon_c)},
                    {"log10_inv_epsilon_c", detail::format17(cp.log10_inv_epsilon_c)}});
  j["critical_epsilons"] = crit;
  if (!c.output.out.empty()) {
    std::ofstream f(c.output.out);
    if (!f) throw Error("cmd_profile: cannot open " + c.output.out);
    f << "t,log10_C\n";
    for (size_t k = 0; k < p.times.size(); ++k)
      f << detail::format17(p.times[k]) << "," << detail::format17(p.log10_values[k]) << "\n";
    j["written"] = c.output.out;
  }
  detail::emit(out, j, c.output.json);
  return kExitOk;
}

inline int cmd_boundary(const RunConfig& c, std::ostream& out) {
  c.validate();
  const BoundaryOptions& b = c.boundary;
  if (b.inv_omegas.empty()) throw ConfigError("boundary.inv_omegas", "required");
  std::vector<ExactReal> omegas;
  for (const ExactReal& v : b.inv_omegas) omegas.emplace_back(mpq_class(1) / v.rational(), mpq_class(0));
  CriticalBoundary cb;
  if (b.method == BoundaryMethod::ChiCrossing) {
    if (b.log10_inv_epsilons.size() < 2) throw ConfigError("boundary.log10_inv_epsilons", "need >= 2 grid values");
    std::vector<double> grid;
    for (const ExactReal& v : b.log10_inv_epsilons) grid.push_back(std::pow(10.0, -v.approx()));
    BoundaryScanOptions opt;
    opt.threshold = b.threshold;
    opt.bisection_steps = b.bisection_steps;
    cb = chi_boundary_scan(c.loop, omegas, grid, c.integration, c.noise, opt);
  } else {
    cb = condition_boundary(c.loop, omegas, c.precision(), b.n_samples);
  }
  detail::Json j;
  j["loop"] = detail::json_loop(c.loop);
  j["method"] = b.method == BoundaryMethod::ChiCrossing ? "chi" : "condition";
  detail::Json pts = detail::Json::array();
  for (const BoundaryPoint& p : cb.points)
    pts.push_back({{"omega", detail::format17(p.omega)},
                   {"inv_omega", detail::format17(1 / p.omega)},
                   {"epsilon_c", detail::format17(p.epsilon_c)},
                   {"log10_inv_epsilon_c", detail::format17(-std::log10(p.epsilon_c))},
                   {"chi_spread", detail::format17(p.chi_spread)}});
  j["points"] = pts;
  detail::Json fails = detail::Json::array();
  for (const BoundaryFailure& f : cb.failures)
    fails.push_back({{"omega", detail::format17(f.omega)}, {"reason", f.reason}});
  j["failures"] = fails;
  j["fit"] = {{"slope", detail::format17(cb.fit.slope)},
              {"intercept", detail::format17(cb.fit.intercept)},
              {"r2", detail::format17(cb.fit.r2)},
              {"n", cb.fit.n}};
  detail::emit(out, j, c.output.json);
  return cb.failures.empty() || !c.output.strict ? kExitOk : kExitFailure;
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  c.validate();
  if (!c.sweep) throw ConfigError("sweep", "section missing");
  const int workers = resolve_workers(c.output.workers);
  const SweepResult r = run_sweep(*c.sweep, workers, true);
  const size_t failed = r.failed_cells();
  if (failed) err << "warning: " << failed << " of " << r.values.size() << " cells failed\n";
  if (c.output.out.empty()) {
    emit_csv(r, out);
  } else {
    std::string base = c.output.out;
    if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") base.resize(base.size() - 4);
    emit_csv(r, base + ".csv");
    emit_heatmap_svg(r, base + ".svg");
    out << "wrote " << base << ".csv and " << base << ".svg (" << r.wall_seconds << " s, " << workers
        << " workers)\n";
  }
  return failed && c.output.strict ? kExitFailure : kExitOk;
}

/// Exact symmetry suite, Floquet spectrum, integrator fidelity and the step
/// ladder for the configured loop. Any violation exits 1.
inline int cmd_validate(const RunConfig& c, std::ostream& out) {
  c.validate();
  const PrecisionContext& ctx = c.precision();
  detail::Json j;
  j["loop"] = detail::json_loop(c.loop);
  j["digits"] = ctx.digits;
  j["auto_escalate"] = ctx.auto_escalate;
  std::vector<std::string> violations;
  const Real tol = [&] {
    ScopedPrecision s(ctx.working_digits());
    return tolerance(ctx.digits - ctx.guard_digits);
  }();

  std::optional<TransferMatrix> exact;
  try {
    exact = transfer_one_cycle(c.loop, ctx);
  } catch (const TransferPrecisionExhausted& e) {
    exact = e.best();
    violations.push_back(std::string("exact: ") + e.what());
  }
  {
    const SymmetryResiduals r = symmetry_residuals(c.loop, *exact, ctx);
    ScopedPrecision s(ctx.working_digits());
    j["exact"]["digits_used"] = exact->digits_used;
    j["exact"]["residuals"] = detail::json_residuals(r);
    j["exact"]["tolerance"] = to_string(tol, 3);
    if (!r.all_below(tol)) violations.push_back("exact: symmetry residual " + to_string(r.worst(), 3));
    const FloquetReport f = floquet_quasienergies(c.loop, ctx);
    j["floquet"]["eigenvalue_residual"] = to_string(f.eigenvalue_residual, 3);
    if (!(f.eigenvalue_residual < tol)) violations.push_back("floquet: eigenvalue residual above tolerance");
  }

  // RK4 at the configured digits and steps against the exact matrix.
  {
    const double rk_tol = 1e-2;
    const TransferMatrix t = rk4_transfer(c.loop, c.integration, NoiseSpec{}, 0);
    ScopedPrecision s(ctx.working_digits() + 10);
    const Real err = max_relative_element_error(t.m, exact->m);
    const Real tr_scale = max(Real(1), abs(detail::floquet_trace(c.loop)));
    const Real det_res = t.residuals.det_residual;
    const Real tr_res = *t.residuals.trace_residual / tr_scale;
    j["integrated"]["steps"] = c.integration.steps;
    j["integrated"]["max_abs_entry"] = to_string(max_abs_entry(t.m), 3);
    j["integrated"]["relative_error_vs_exact"] = to_string(err, 3);
    j["integrated"]["det_residual"] = to_string(det_res, 3);
    j["integrated"]["trace_residual"] = to_string(*t.residuals.trace_residual, 3);
    if (!(err < rk_tol)) violations.push_back("integrated: relative error " + to_string(err, 3));
    if (!(det_res < rk_tol)) violations.push_back("integrated: det residual " + to_string(det_res, 3));
    if (!(tr_res < rk_tol)) violations.push_back("integrated: trace residual " + to_string(tr_res, 3));
  }

  std::vector<long> ladder = c.validate_opts.ladder;
  if (ladder.empty()) ladder = {std::max(4L, c.integration.steps / 2), c.integration.steps};
  const ConvergenceLadder lad = convergence_ladder(c.loop, ctx, ladder);
  detail::Json rungs = detail::Json::array();
  for (const LadderRung& r : lad.rungs)
    rungs.push_back({{"steps", r.steps}, {"relative_error", detail::format17(r.relative_error)}});
  j["ladder"]["rungs"] = rungs;
  detail::Json ratios = detail::Json::array();
  for (double q : lad.ratios) ratios.push_back(detail::format17(q));
  j["ladder"]["ratios"] = ratios;
  const double floor_err = std::pow(10.0, -std::min(ctx.digits / 2, 300));
  if (lad.non_decreasing && lad.rungs.back().relative_error > floor_err)
    violations.push_back("ladder: error did not decrease with steps");

  detail::Json v = detail::Json::array();
  for (const auto& s : violations) v.push_back(s);
  j["violations"] = v;
  j["status"] = violations.empty() ? "PASS" : "FAIL";
  detail::emit(out, j, c.output.json);
  return violations.empty() ? kExitOk : kExitFailure;
}

}  // namespace epchiral
