#pragma once

// Parameter grids over one or two axes, evaluated cell by cell on a pool of
// threads, with long-format CSV and SVG heatmap output.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "epchiral/ini.hpp"
#include "epchiral/observables.hpp"

namespace epchiral {

inline constexpr const char* kEngineVersion = "epchiral 0.1.0";

enum class SweepAxis { InvOmega, ThetaI, Rho, Log10InvEpsilon, G0 };
enum class Quantity { ChiMean, Asymmetry, LogCondition };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::InvOmega: return "inv_omega";
    case SweepAxis::ThetaI: return "theta_i";
    case SweepAxis::Rho: return "rho";
    case SweepAxis::Log10InvEpsilon: return "log10_inv_epsilon";
    case SweepAxis::G0: return "g0";
  }
  return "?";
}

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::ChiMean: return "ChiMean";
    case Quantity::Asymmetry: return "Asymmetry";
    case Quantity::LogCondition: return "LogCondition";
  }
  return "?";
}

inline SweepAxis parse_axis(const std::string& s) {
  for (SweepAxis a : {SweepAxis::InvOmega, SweepAxis::ThetaI, SweepAxis::Rho, SweepAxis::Log10InvEpsilon,
                      SweepAxis::G0})
    if (s == to_string(a)) return a;
  throw ConfigError("sweep.axis", "unknown axis '" + s + "'");
}

inline Quantity parse_quantity(const std::string& s) {
  for (Quantity q : {Quantity::ChiMean, Quantity::Asymmetry, Quantity::LogCondition})
    if (s == to_string(q)) return q;
  throw ConfigError("sweep.quantity", "unknown quantity '" + s + "'");
}

struct AxisSpec {
  SweepAxis axis = SweepAxis::InvOmega;
  ExactReal lo{1};
  ExactReal hi{10};
  int resolution = 2;

  /// Node k of the uniform mesh, computed exactly.
  ExactReal at(int k) const {
    if (resolution == 1) return lo;
    return lo + (hi - lo) * mpq_class(k, resolution - 1);
  }

  std::string to_string() const {
    return std::string(epchiral::to_string(axis)) + " " + lo.to_string() + " " + hi.to_string() + " " +
           std::to_string(resolution);
  }

  static AxisSpec parse(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string name, lo, hi, extra;
    int n = 0;
    if (!(in >> name >> lo >> hi >> n) || (in >> extra))
      throw ConfigError(key, "expected '<axis> <lo> <hi> <resolution>'");
    AxisSpec a;
    a.axis = parse_axis(name);
    a.lo = ExactReal::parse(lo);
    a.hi = ExactReal::parse(hi);
    a.resolution = n;
    return a;
  }
};

struct SweepPlan {
  std::vector<AxisSpec> axes;
  LoopSpec loop;
  NoiseSpec noise;
  IntegrationSpec integration;
  Quantity quantity = Quantity::ChiMean;
  std::uint64_t master_seed = 0;

  int n1() const { return axes.empty() ? 1 : axes[0].resolution; }
  int n2() const { return axes.size() < 2 ? 1 : axes[1].resolution; }

  void validate() const;
};

namespace detail {

inline ExactReal epsilon_from_log10(const ExactReal& v) {
  if (v.has_pi()) throw ConfigError("sweep.axis", "log10_inv_epsilon must be rational");
  const mpq_class& q = v.rational();
  if (q.get_den() == 1 && q.get_num().fits_slong_p()) {
    const long n = q.get_num().get_si();
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(n)));
    return {n >= 0 ? mpq_class(1, p) : mpq_class(p), mpq_class(0)};
  }
  return ExactReal(std::pow(10.0, -v.approx()));
}

inline void apply_axis(SweepAxis a, const ExactReal& v, LoopSpec& loop, NoiseSpec& noise) {
  switch (a) {
    case SweepAxis::InvOmega:
      if (v.has_pi()) throw ConfigError("sweep.axis", "inv_omega must be rational");
      if (v.sign() <= 0) throw ConfigError("sweep.axis", "inv_omega must be > 0");
      loop.omega = ExactReal(mpq_class(1) / v.rational(), mpq_class(0));
      break;
    case SweepAxis::ThetaI: loop.theta_i = v; break;
    case SweepAxis::Rho: loop.rho = v; break;
    case SweepAxis::G0: loop.g0 = v; break;
    case SweepAxis::Log10InvEpsilon: noise.epsilon = epsilon_from_log10(v); break;
  }
}

}  // namespace detail

inline void SweepPlan::validate() const {
  if (axes.empty() || axes.size() > 2) throw ConfigError("sweep.axes", "need 1 or 2 axes");
  if (axes.size() == 2 && axes[0].axis == axes[1].axis) throw ConfigError("sweep.axes", "axes must differ");
  for (const AxisSpec& a : axes) {
    if (a.resolution < 1) throw ConfigError("sweep.axis", "resolution must be >= 1");
    if (a.resolution == 1 && !(a.lo == a.hi)) throw ConfigError("sweep.axis", "single node needs lo == hi");
    if (a.resolution >= 2 && (a.hi - a.lo).sign() <= 0) throw ConfigError("sweep.axis", "range must have lo < hi");
    LoopSpec l = loop;
    NoiseSpec n = noise;
    detail::apply_axis(a.axis, a.lo, l, n);
    l.validate();
    n.validate();
    detail::apply_axis(a.axis, a.hi, l, n);
    l.validate();
    n.validate();
  }
  loop.validate();
  noise.validate();
  integration.validate();
}

enum class CellStatus { Ok, PrecisionExhausted, Overflow, EPDegeneracy, OnBoundary, Singular, Failed };

inline const char* to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Ok: return "ok";
    case CellStatus::PrecisionExhausted: return "precision_exhausted";
    case CellStatus::Overflow: return "overflow";
    case CellStatus::EPDegeneracy: return "ep_degeneracy";
    case CellStatus::OnBoundary: return "on_boundary";
    case CellStatus::Singular: return "singular";
    case CellStatus::Failed: return "failed";
  }
  return "failed";
}

inline CellStatus parse_status(const std::string& s) {
  for (CellStatus c : {CellStatus::Ok, CellStatus::PrecisionExhausted, CellStatus::Overflow,
                       CellStatus::EPDegeneracy, CellStatus::OnBoundary, CellStatus::Singular, CellStatus::Failed})
    if (s == to_string(c)) return c;
  throw ConfigError("status", "unknown cell status '" + s + "'");
}

struct SweepResult {
  SweepPlan plan;
  int n1 = 1, n2 = 1;
  std::vector<double> axis1, axis2;  // node coordinates
  std::vector<double> values;        // row-major [i * n2 + j], NaN when failed
  std::vector<CellStatus> status;
  std::string engine_version = kEngineVersion;
  double wall_seconds = 0;

  double value(int i, int j) const { return values[static_cast<size_t>(i) * n2 + j]; }
  CellStatus cell_status(int i, int j) const { return status[static_cast<size_t>(i) * n2 + j]; }
  size_t failed_cells() const {
    return static_cast<size_t>(std::count_if(status.begin(), status.end(), [](CellStatus s) {
      return s != CellStatus::Ok;
    }));
  }
};

/// Loop and noise of cell (i, j).
inline std::pair<LoopSpec, NoiseSpec> cell_parameters(const SweepPlan& plan, int i, int j) {
  LoopSpec loop = plan.loop;
  NoiseSpec noise = plan.noise;
  noise.seed = plan.master_seed;
  if (!plan.axes.empty()) detail::apply_axis(plan.axes[0].axis, plan.axes[0].at(i), loop, noise);
  if (plan.axes.size() > 1) detail::apply_axis(plan.axes[1].axis, plan.axes[1].at(j), loop, noise);
  return {loop, noise};
}

inline std::uint64_t cell_key(int i, int j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint32_t>(j);
}

/// The plan's quantity at one cell. Throws on failure.
inline double evaluate_cell(const SweepPlan& plan, int i, int j) {
  const auto [loop, noise] = cell_parameters(plan, i, j);
  const IntegrationSpec& is = plan.integration;
  const std::uint64_t cell = cell_key(i, j);
  switch (plan.quantity) {
    case Quantity::ChiMean: return chirality(loop, is, noise, cell).mean;
    case Quantity::Asymmetry: {
      if (noise.epsilon.is_zero()) {
        const TransferMatrix t = transfer_one_cycle(loop, is.ctx);
        const PrecisionContext k = detail::kernel_context(is.ctx, t.digits_used);
        ScopedPrecision scope(k.working_digits());
        const EigenFrame f = eigenframe(loop, loop.theta_i.value(), k);
        return transition_probabilities(t, f, f, k).asymmetry;
      }
      ScopedPrecision scope(is.ctx.working_digits());
      const EigenFrame f = eigenframe(loop, loop.theta_i.value(), is.ctx);
      double sum = 0;
      for (long r = 0; r < noise.realizations; ++r)
        sum += transition_probabilities(rk4_transfer(loop, is, noise, r, cell), f, f, is.ctx).asymmetry;
      return sum / static_cast<double>(noise.realizations);
    }
    case Quantity::LogCondition: {
      const TransferMatrix t = transfer_one_cycle(loop, is.ctx);
      const PrecisionContext k = detail::kernel_context(is.ctx, t.digits_used);
      ScopedPrecision scope(k.working_digits());
      return log10_abs(condition_number_2x2(t.m, k));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

inline CellStatus classify(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const PrecisionExhausted&) {
    return CellStatus::PrecisionExhausted;
  } catch (const Overflow&) {
    return CellStatus::Overflow;
  } catch (const EPDegeneracy&) {
    return CellStatus::EPDegeneracy;
  } catch (const OnBoundary&) {
    return CellStatus::OnBoundary;
  } catch (const SingularMatrix&) {
    return CellStatus::Singular;
  } catch (...) {
    return CellStatus::Failed;
  }
}

}  // namespace detail

/// Worker count: EPCHIRAL_WORKERS when set, else `requested`, else the
/// hardware concurrency.
inline int resolve_workers(int requested) {
  if (const char* env = std::getenv("EPCHIRAL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("EPCHIRAL_WORKERS", "must be a positive integer");
    return static_cast<int>(v);
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline SweepResult run_sweep(const SweepPlan& plan, int worker_budget, bool progress = false) {
  plan.validate();
  if (worker_budget < 1) throw ConfigError("workers", "must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult out;
  out.plan = plan;
  out.n1 = plan.n1();
  out.n2 = plan.n2();
  for (int i = 0; i < out.n1; ++i) out.axis1.push_back(plan.axes[0].at(i).approx());
  for (int j = 0; j < out.n2; ++j) out.axis2.push_back(plan.axes.size() > 1 ? plan.axes[1].at(j).approx() : 0.0);
  const size_t total = static_cast<size_t>(out.n1) * static_cast<size_t>(out.n2);
  out.values.assign(total, std::numeric_limits<double>::quiet_NaN());
  out.status.assign(total, CellStatus::Failed);

  std::atomic<size_t> next{0};
  std::atomic<size_t> done{0};
  std::mutex io;
  auto work = [&] {
    for (size_t c = next++; c < total; c = next++) {
      const int i = static_cast<int>(c / static_cast<size_t>(out.n2));
      const int j = static_cast<int>(c % static_cast<size_t>(out.n2));
      try {
        out.values[c] = evaluate_cell(plan, i, j);
        out.status[c] = CellStatus::Ok;
      } catch (...) {
        out.values[c] = std::numeric_limits<double>::quiet_NaN();
        out.status[c] = detail::classify(std::current_exception());
      }
      const size_t d = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(io);
        std::cerr << "\rsweep: " << d << "/" << total << std::flush;
        if (d == total) std::cerr << "\n";
      }
    }
  };
  const int n = static_cast<int>(std::min<size_t>(static_cast<size_t>(worker_budget), total));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(work);
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ------------------------------------------------------------- serialization

inline void write_plan(ini::Tree& t, const SweepPlan& plan) {
  ini::write_loop(t, plan.loop);
  ini::write_precision(t, plan.integration.ctx);
  t.put("integration.steps", std::to_string(plan.integration.steps));
  ini::write_noise(t, plan.noise);
  t.put("sweep.quantity", to_string(plan.quantity));
  for (size_t k = 0; k < plan.axes.size(); ++k) t.put("sweep.axis" + std::to_string(k + 1), plan.axes[k].to_string());
  t.put("sweep.master_seed", std::to_string(plan.master_seed));
}

inline const ini::Schema& sweep_schema() {
  static const ini::Schema s = [] {
    ini::Schema x = ini::core_schema();
    x["sweep"] = {"quantity", "axis1", "axis2", "master_seed"};
    return x;
  }();
  return s;
}

/// Plan from a tree already checked against the caller's schema.
inline SweepPlan read_plan(const ini::Tree& t) {
  SweepPlan p;
  p.loop = ini::read_loop(t);
  p.integration.ctx = ini::read_precision(t);
  p.integration.steps = ini::read_steps(t, p.integration.steps);
  p.noise = ini::read_noise(t);
  p.quantity = parse_quantity(ini::get_string(t, "sweep.quantity", "ChiMean"));
  for (const char* key : {"sweep.axis1", "sweep.axis2"})
    if (auto v = t.get_optional<std::string>(key)) p.axes.push_back(AxisSpec::parse(*v, key));
  p.master_seed = ini::get_integer<std::uint64_t>(t, "sweep.master_seed", 0);
  return p;
}

inline SweepPlan parse_plan(const std::string& text) {
  const ini::Tree t = ini::parse_string(text);
  ini::check_keys(t, sweep_schema());
  SweepPlan p = read_plan(t);
  p.validate();
  return p;
}

namespace detail {
inline std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// Long-format rows `axis1,axis2,value,status` after a `#` block holding the
/// plan and provenance as INI text.
inline void emit_csv(const SweepResult& r, std::ostream& os) {
  ini::Tree t;
  write_plan(t, r.plan);
  t.put("provenance.engine", r.engine_version);
  t.put("provenance.wall_seconds", detail::format17(r.wall_seconds));
  std::istringstream lines(ini::to_string(t));
  for (std::string line; std::getline(lines, line);)
    if (!line.empty()) os << "# " << line << "\n";
  const std::string a1 = to_string(r.plan.axes[0].axis);
  const std::string a2 = r.plan.axes.size() > 1 ? to_string(r.plan.axes[1].axis) : "";
  os << a1 << "," << a2 << ",value,status\n";
  for (int i = 0; i < r.n1; ++i)
    for (int j = 0; j < r.n2; ++j) {
      const double v = r.value(i, j);
      os << detail::format17(r.axis1[i]) << "," << (r.plan.axes.size() > 1 ? detail::format17(r.axis2[j]) : "")
         << "," << (std::isnan(v) ? "" : detail::format17(v)) << "," << to_string(r.cell_status(i, j)) << "\n";
    }
}

inline void emit_csv(const SweepResult& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("emit_csv: cannot open " + path);
  emit_csv(r, f);
  if (!f) throw Error("emit_csv: write failed for " + path);
}

inline SweepResult read_csv(std::istream& in) {
  std::string header_ini, line;
  std::vector<std::string> rows;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      header_ini += line.substr(2) + "\n";
    } else if (!have_columns) {
      have_columns = true;
    } else if (!line.empty()) {
      rows.push_back(line);
    }
  }
  ini::Tree t = ini::parse_string(header_ini);
  SweepResult r;
  if (auto prov = t.get_child_optional("provenance")) {
    r.engine_version = prov->get<std::string>("engine", "");
    r.wall_seconds = std::strtod(prov->get<std::string>("wall_seconds", "0").c_str(), nullptr);
    t.erase("provenance");
  }
  ini::check_keys(t, sweep_schema());
  r.plan = read_plan(t);
  r.n1 = r.plan.n1();
  r.n2 = r.plan.n2();
  const size_t total = static_cast<size_t>(r.n1) * static_cast<size_t>(r.n2);
  if (rows.size() != total) throw Error("read_csv: expected " + std::to_string(total) + " rows");
  r.axis1.assign(static_cast<size_t>(r.n1), 0.0);
  r.axis2.assign(static_cast<size_t>(r.n2), 0.0);
  r.values.assign(total, std::numeric_limits<double>::quiet_NaN());
  r.status.assign(total, CellStatus::Failed);
  for (size_t c = 0; c < total; ++c) {
    std::vector<std::string> f;
    std::stringstream ss(rows[c]);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    if (f.size() != 4) throw Error("read_csv: malformed row '" + rows[c] + "'");
    const size_t i = c / static_cast<size_t>(r.n2), j = c % static_cast<size_t>(r.n2);
    r.axis1[i] = std::strtod(f[0].c_str(), nullptr);
    if (!f[1].empty()) r.axis2[j] = std::strtod(f[1].c_str(), nullptr);
    if (!f[2].empty()) r.values[c] = std::strtod(f[2].c_str(), nullptr);
    r.status[c] = parse_status(f[3]);
  }
  return r;
}

inline SweepResult read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("read_csv: cannot open " + path);
  return read_csv(f);
}

// --------------------------------------------------------------------- SVG

enum class Colormap { Viridis, Cividis };

struct Rgb {
  int r = 0, g = 0, b = 0;
};

/// Perceptually uniform maps, linear between tabulated anchors.
inline Rgb colormap(Colormap m, double x) {
  static const Rgb viridis[] = {{68, 1, 84},    {71, 44, 122},  {59, 81, 139},  {44, 113, 142}, {33, 144, 141},
                                {39, 173, 129}, {92, 200, 99},  {170, 220, 50}, {253, 231, 37}};
  static const Rgb cividis[] = {{0, 34, 78},     {18, 53, 112},   {59, 73, 108},   {87, 92, 109},  {112, 113, 115},
                                {138, 134, 120}, {166, 157, 117}, {197, 181, 105}, {229, 208, 83}, {254, 232, 56}};
  const Rgb* t = m == Colormap::Viridis ? viridis : cividis;
  const int n = m == Colormap::Viridis ? 9 : 10;
  if (!(x >= 0)) x = 0;
  if (x > 1) x = 1;
  const double s = x * (n - 1);
  const int k = std::min(static_cast<int>(s), n - 2);
  const double f = s - k;
  auto mix = [&](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * f)); };
  return {mix(t[k].r, t[k + 1].r), mix(t[k].g, t[k + 1].g), mix(t[k].b, t[k + 1].b)};
}

struct HeatmapOptions {
  std::string title;
  /// Polyline in axis coordinates drawn over the cells.
  std::vector<std::pair<double, double>> overlay;
};

inline void emit_heatmap_svg(const SweepResult& r, std::ostream& os, Colormap cmap = Colormap::Viridis,
                             const HeatmapOptions& opt = {}) {
  const double W = 480, H = 400, left = 80, top = 40, bar_gap = 30, bar_w = 20;
  const double cw = W / r.n1, ch = H / r.n2;
  double vmin = 0, vmax = 1;
  if (r.plan.quantity == Quantity::Asymmetry) vmin = -1;
  if (r.plan.quantity == Quantity::LogCondition) {
    vmin = std::numeric_limits<double>::infinity();
    vmax = -vmin;
    for (double v : r.values)
      if (std::isfinite(v)) vmin = std::min(vmin, v), vmax = std::max(vmax, v);
    if (!std::isfinite(vmin)) vmin = 0, vmax = 1;
    if (vmax <= vmin) vmax = vmin + 1;
  }
  auto color = [&](double v) {
    const Rgb c = colormap(cmap, (v - vmin) / (vmax - vmin));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return std::string(buf);
  };
  const double width = left + W + bar_gap + bar_w + 70, height = top + H + 60;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
     << "\">\n"
     << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\">"
     << "<rect width=\"6\" height=\"6\" fill=\"#ffffff\"/><path d=\"M0,6 L6,0\" stroke=\"#888888\"/>"
     << "</pattern></defs>\n";
  if (!opt.title.empty())
    os << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\" font-family=\"sans-serif\">" << opt.title
       << "</text>\n";
  os << "<g id=\"cells\" shape-rendering=\"crispEdges\">\n";
  for (int i = 0; i < r.n1; ++i)
    for (int j = 0; j < r.n2; ++j) {
      const double v = r.value(i, j);
      const double x = left + i * cw, y = top + H - (j + 1) * ch;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\""
         << (std::isnan(v) ? std::string("url(#hatch)") : color(v)) << "\"/>\n";
    }
  os << "</g>\n";

  auto axis_lo = [&](const std::vector<double>& a) { return a.front(); };
  auto axis_hi = [&](const std::vector<double>& a) { return a.back(); };
  if (!opt.overlay.empty() && r.n1 > 1) {
    const double x0 = axis_lo(r.axis1), x1 = axis_hi(r.axis1);
    const double y0 = r.n2 > 1 ? axis_lo(r.axis2) : 0, y1 = r.n2 > 1 ? axis_hi(r.axis2) : 1;
    os << "<polyline id=\"overlay\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\" stroke-dasharray=\"6,4\" "
          "points=\"";
    for (const auto& [px, py] : opt.overlay) {
      const double sx = left + cw / 2 + (px - x0) / (x1 - x0) * (W - cw);
      const double sy = top + H - ch / 2 - (py - y0) / (y1 - y0) * (H - ch);
      os << sx << "," << sy << " ";
    }
    os << "\"/>\n";
  }

  // axes and labels
  const std::string font = "font-size=\"12\" font-family=\"sans-serif\"";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"none\" stroke=\"#000000\"/>\n";
  os << "<text " << font << " x=\"" << left << "\" y=\"" << top + H + 18 << "\">"
     << detail::format17(axis_lo(r.axis1)) << "</text>\n";
  os << "<text " << font << " text-anchor=\"end\" x=\"" << left + W << "\" y=\"" << top + H + 18 << "\">"
     << detail::format17(axis_hi(r.axis1)) << "</text>\n";
  os << "<text " << font << " text-anchor=\"middle\" x=\"" << left + W / 2 << "\" y=\"" << top + H + 40 << "\">"
     << to_string(r.plan.axes[0].axis) << "</text>\n";
  if (r.plan.axes.size() > 1) {
    os << "<text " << font << " text-anchor=\"end\" x=\"" << left - 6 << "\" y=\"" << top + H << "\">"
       << detail::format17(axis_lo(r.axis2)) << "</text>\n";
    os << "<text " << font << " text-anchor=\"end\" x=\"" << left - 6 << "\" y=\"" << top + 12 << "\">"
       << detail::format17(axis_hi(r.axis2)) << "</text>\n";
    os << "<text " << font << " text-anchor=\"middle\" transform=\"translate(" << left - 50 << "," << top + H / 2
       << ") rotate(-90)\">" << to_string(r.plan.axes[1].axis) << "</text>\n";
  }

  // colorbar, bottom = vmin
  const int bands = 64;
  const double bx = left + W + bar_gap;
  os << "<g id=\"colorbar\" shape-rendering=\"crispEdges\">\n";
  for (int k = 0; k < bands; ++k) {
    const double v = vmin + (vmax - vmin) * (k + 0.5) / bands;
    os << "<rect x=\"" << bx << "\" y=\"" << top + H - (k + 1) * H / bands << "\" width=\"" << bar_w
       << "\" height=\"" << H / bands << "\" fill=\"" << color(v) << "\"/>\n";
  }
  os << "</g>\n";
  os << "<text " << font << " x=\"" << bx + bar_w + 4 << "\" y=\"" << top + H << "\">" << detail::format17(vmin)
     << "</text>\n";
  os << "<text " << font << " x=\"" << bx + bar_w + 4 << "\" y=\"" << top + 12 << "\">" << detail::format17(vmax)
     << "</text>\n";
  os << "<text " << font << " x=\"" << bx << "\" y=\"" << top - 8 << "\">" << to_string(r.plan.quantity)
     << "</text>\n";
  os << "</svg>\n";
}

inline void emit_heatmap_svg(const SweepResult& r, const std::string& path, Colormap cmap = Colormap::Viridis,
                             const HeatmapOptions& opt = {}) {
  std::ofstream f(path);
  if (!f) throw Error("emit_heatmap_svg: cannot open " + path);
  emit_heatmap_svg(r, f, cmap, opt);
  if (!f) throw Error("emit_heatmap_svg: write failed for " + path);
}

}  // namespace epchiral
