#pragma once

// Run configuration: one INI file closed over every input of a command.

#include <optional>

#include "epchiral/sweep.hpp"

namespace epchiral {

struct OutputOptions {
  bool json = false;
  bool strict = false;
  std::string out;  // empty: stdout only
  int workers = 0;  // 0: hardware concurrency
};

struct ProfileOptions {
  int n_samples = 128;
  int refine_iterations = 12;
};

struct BoundaryOptions {
  BoundaryMethod method = BoundaryMethod::ChiCrossing;
  std::vector<ExactReal> inv_omegas;
  std::vector<ExactReal> log10_inv_epsilons;
  double threshold = 0.5;
  int bisection_steps = 6;
  int n_samples = 128;
};

struct ValidateOptions {
  std::vector<long> ladder;  // empty: steps/2 and steps
};

struct RunConfig {
  LoopSpec loop;
  IntegrationSpec integration;
  NoiseSpec noise;
  OutputOptions output;
  ProfileOptions profile;
  BoundaryOptions boundary;
  ValidateOptions validate_opts;
  std::optional<SweepPlan> sweep;

  const PrecisionContext& precision() const { return integration.ctx; }

  void validate() const {
    loop.validate();
    integration.validate();
    noise.validate();
    if (output.workers < 0) throw ConfigError("output.workers", "must be >= 0");
    if (profile.n_samples < 64) throw ConfigError("profile.n_samples", "must be >= 64");
    if (profile.refine_iterations < 0) throw ConfigError("profile.refine_iterations", "must be >= 0");
    if (!(boundary.threshold > 0 && boundary.threshold < 1)) throw ConfigError("boundary.threshold", "must be in (0,1)");
    if (boundary.bisection_steps < 0) throw ConfigError("boundary.bisection_steps", "must be >= 0");
    for (const ExactReal& v : boundary.inv_omegas)
      if (v.has_pi() || v.sign() <= 0) throw ConfigError("boundary.inv_omegas", "entries must be positive rationals");
    for (long s : validate_opts.ladder)
      if (s < 4) throw ConfigError("validate.ladder", "entries must be >= 4");
    if (sweep) sweep->validate();
  }
};

inline const ini::Schema& run_schema() {
  static const ini::Schema s = [] {
    ini::Schema x = sweep_schema();
    x["output"] = {"json", "strict", "out", "workers"};
    x["profile"] = {"n_samples", "refine_iterations"};
    x["boundary"] = {"method", "inv_omegas", "log10_inv_epsilons", "threshold", "bisection_steps", "n_samples"};
    x["validate"] = {"ladder"};
    return x;
  }();
  return s;
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::vector<ExactReal> exact_list(const ini::Tree& t, const std::string& key) {
  std::vector<ExactReal> out;
  for (const std::string& w : split_ws(ini::get_string(t, key, ""))) {
    try {
      out.push_back(ExactReal::parse(w));
    } catch (const ConfigError& e) {
      throw ConfigError(key, e.what());
    }
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError(key, "not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline RunConfig read_config(const ini::Tree& t) {
  ini::check_keys(t, run_schema());
  RunConfig c;
  c.loop = ini::read_loop(t);
  c.integration.ctx = ini::read_precision(t);
  c.integration.steps = ini::read_steps(t, c.integration.steps);
  c.noise = ini::read_noise(t);
  c.output.json = ini::get_bool(t, "output.json", false);
  c.output.strict = ini::get_bool(t, "output.strict", false);
  c.output.out = ini::get_string(t, "output.out", "");
  c.output.workers = ini::get_integer(t, "output.workers", 0);
  c.profile.n_samples = ini::get_integer(t, "profile.n_samples", c.profile.n_samples);
  c.profile.refine_iterations = ini::get_integer(t, "profile.refine_iterations", c.profile.refine_iterations);
  const std::string method = ini::get_string(t, "boundary.method", "chi");
  if (method == "chi") c.boundary.method = BoundaryMethod::ChiCrossing;
  else if (method == "condition") c.boundary.method = BoundaryMethod::ConditionPrediction;
  else throw ConfigError("boundary.method", "expected chi or condition");
  c.boundary.inv_omegas = detail::exact_list(t, "boundary.inv_omegas");
  c.boundary.log10_inv_epsilons = detail::exact_list(t, "boundary.log10_inv_epsilons");
  if (auto v = t.get_optional<std::string>("boundary.threshold"))
    c.boundary.threshold = detail::parse_double(*v, "boundary.threshold");
  c.boundary.bisection_steps = ini::get_integer(t, "boundary.bisection_steps", c.boundary.bisection_steps);
  c.boundary.n_samples = ini::get_integer(t, "boundary.n_samples", c.boundary.n_samples);
  for (const std::string& w : detail::split_ws(ini::get_string(t, "validate.ladder", ""))) {
    ini::Tree one;
    one.put("x", w);
    c.validate_opts.ladder.push_back(ini::get_integer<long>(one, "x", 0));
  }
  if (t.get_child_optional("sweep")) c.sweep = read_plan(t);
  return c;
}

inline RunConfig load_config(const std::string& path) { return read_config(ini::parse_file(path)); }
inline RunConfig parse_config(const std::string& text) { return read_config(ini::parse_string(text)); }

/// The configuration as INI text, reloadable with parse_config.
inline std::string to_ini(const RunConfig& c) {
  ini::Tree t;
  ini::write_loop(t, c.loop);
  ini::write_precision(t, c.integration.ctx);
  t.put("integration.steps", std::to_string(c.integration.steps));
  ini::write_noise(t, c.noise);
  t.put("output.json", c.output.json ? "true" : "false");
  t.put("output.strict", c.output.strict ? "true" : "false");
  t.put("output.out", c.output.out);
  t.put("output.workers", std::to_string(c.output.workers));
  t.put("profile.n_samples", std::to_string(c.profile.n_samples));
  t.put("profile.refine_iterations", std::to_string(c.profile.refine_iterations));
  t.put("boundary.method", c.boundary.method == BoundaryMethod::ChiCrossing ? "chi" : "condition");
  auto join = [](const auto& v, auto f) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : " ") + f(x);
    return s;
  };
  auto ex = [](const ExactReal& x) { return x.to_string(); };
  t.put("boundary.inv_omegas", join(c.boundary.inv_omegas, ex));
  t.put("boundary.log10_inv_epsilons", join(c.boundary.log10_inv_epsilons, ex));
  t.put("boundary.threshold", detail::format17(c.boundary.threshold));
  t.put("boundary.bisection_steps", std::to_string(c.boundary.bisection_steps));
  t.put("boundary.n_samples", std::to_string(c.boundary.n_samples));
  t.put("validate.ladder", join(c.validate_opts.ladder, [](long s) { return std::to_string(s); }));
  if (c.sweep) {
    t.put("sweep.quantity", to_string(c.sweep->quantity));
    for (size_t k = 0; k < c.sweep->axes.size(); ++k)
      t.put("sweep.axis" + std::to_string(k + 1), c.sweep->axes[k].to_string());
    t.put("sweep.master_seed", std::to_string(c.sweep->master_seed));
  }
  return ini::to_string(t);
}

/// Command-line overrides; unset fields leave the file values alone.
struct Overrides {
  std::optional<int> digits;
  std::optional<long> steps;
  std::optional<std::string> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool json = false;
  bool strict = false;
  std::optional<std::string> out;
};

inline void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.digits) {
    c.integration.ctx.digits = *o.digits;
    c.integration.ctx.max_digits = std::max(c.integration.ctx.max_digits, *o.digits);
  }
  if (o.steps) c.integration.steps = *o.steps;
  if (o.epsilon) {
    try {
      c.noise.epsilon = ExactReal::parse(*o.epsilon);
    } catch (const ConfigError& e) {
      throw ConfigError("epsilon", e.what());
    }
  }
  if (o.seed) c.noise.seed = *o.seed;
  if (o.workers) c.output.workers = *o.workers;
  if (o.json) c.output.json = true;
  if (o.strict) c.output.strict = true;
  if (o.out) c.output.out = *o.out;
  // the sweep plan shares the loop, precision, integration and noise sections
  if (c.sweep) {
    c.sweep->loop = c.loop;
    c.sweep->integration = c.integration;
    c.sweep->noise = c.noise;
  }
}

}  // namespace epchiral
