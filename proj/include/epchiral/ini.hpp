#pragma once

// INI reading and writing for loop, precision, integration and noise
// sections. Numbers that feed high-precision work are kept as strings and
// parsed exactly.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "epchiral/integrator.hpp"

namespace epchiral::ini {

using Tree = boost::property_tree::ptree;
using Schema = std::map<std::string, std::set<std::string>>;

inline Tree parse_string(const std::string& text) {
  std::istringstream in(text);
  Tree t;
  try {
    boost::property_tree::read_ini(in, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return t;
}

inline Tree parse_file(const std::string& path) {
  Tree t;
  try {
    boost::property_tree::read_ini(path, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", path + ": " + e.message());
  }
  return t;
}

inline std::string to_string(const Tree& t) {
  std::ostringstream out;
  boost::property_tree::write_ini(out, t);
  return out.str();
}

/// Rejects sections and keys outside `schema`, and keys at top level.
inline void check_keys(const Tree& t, const Schema& schema) {
  for (const auto& [section, body] : t) {
    auto it = schema.find(section);
    if (body.empty()) throw ConfigError(section, "key outside any section");
    if (it == schema.end()) throw ConfigError(section, "unknown section");
    for (const auto& kv : body)
      if (!it->second.count(kv.first)) throw ConfigError(section + "." + kv.first, "unknown key");
  }
}

inline std::string get_string(const Tree& t, const std::string& key, const std::string& fallback) {
  return t.get<std::string>(key, fallback);
}

inline ExactReal get_exact(const Tree& t, const std::string& key, const ExactReal& fallback) {
  auto v = t.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    return ExactReal::parse(*v);
  } catch (const ConfigError& e) {
    throw ConfigError(key, e.what());
  }
}

template <class Int>
Int get_integer(const Tree& t, const std::string& key, Int fallback) {
  auto v = t.get_optional<std::string>(key);
  if (!v) return fallback;
  Int out{};
  const char* b = v->data();
  const char* e = b + v->size();
  auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e) throw ConfigError(key, "not an integer: '" + *v + "'");
  return out;
}

inline bool get_bool(const Tree& t, const std::string& key, bool fallback) {
  auto v = t.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(key, "not a boolean: '" + *v + "'");
}

inline Direction parse_direction(const std::string& s, const std::string& key) {
  if (s == "CCW" || s == "ccw") return Direction::CCW;
  if (s == "CW" || s == "cw") return Direction::CW;
  throw ConfigError(key, "expected CCW or CW, got '" + s + "'");
}

inline const Schema& core_schema() {
  static const Schema s{
      {"loop", {"kappa", "g0", "rho", "theta_i", "omega", "direction"}},
      {"precision", {"digits", "guard_digits", "max_digits", "auto_escalate"}},
      {"integration", {"steps"}},
      {"noise", {"epsilon", "seed", "realizations"}},
  };
  return s;
}

inline LoopSpec read_loop(const Tree& t, LoopSpec l = {}) {
  l.kappa = get_exact(t, "loop.kappa", l.kappa);
  l.g0 = get_exact(t, "loop.g0", l.g0);
  l.rho = get_exact(t, "loop.rho", l.rho);
  l.theta_i = get_exact(t, "loop.theta_i", l.theta_i);
  l.omega = get_exact(t, "loop.omega", l.omega);
  l.direction = parse_direction(get_string(t, "loop.direction", to_string(l.direction)), "loop.direction");
  return l;
}

inline PrecisionContext read_precision(const Tree& t, PrecisionContext c = {}) {
  c.digits = get_integer(t, "precision.digits", c.digits);
  c.guard_digits = get_integer(t, "precision.guard_digits", c.guard_digits);
  c.max_digits = get_integer(t, "precision.max_digits", std::max(c.max_digits, c.digits));
  c.auto_escalate = get_bool(t, "precision.auto_escalate", c.auto_escalate);
  return c;
}

inline NoiseSpec read_noise(const Tree& t, NoiseSpec n = {}) {
  n.epsilon = get_exact(t, "noise.epsilon", n.epsilon);
  n.seed = get_integer<std::uint64_t>(t, "noise.seed", n.seed);
  n.realizations = get_integer(t, "noise.realizations", n.realizations);
  return n;
}

inline long read_steps(const Tree& t, long fallback) { return get_integer(t, "integration.steps", fallback); }

inline void write_loop(Tree& t, const LoopSpec& l) {
  t.put("loop.kappa", l.kappa.to_string());
  t.put("loop.g0", l.g0.to_string());
  t.put("loop.rho", l.rho.to_string());
  t.put("loop.theta_i", l.theta_i.to_string());
  t.put("loop.omega", l.omega.to_string());
  t.put("loop.direction", to_string(l.direction));
}

inline void write_precision(Tree& t, const PrecisionContext& c) {
  t.put("precision.digits", std::to_string(c.digits));
  t.put("precision.guard_digits", std::to_string(c.guard_digits));
  t.put("precision.max_digits", std::to_string(c.max_digits));
  t.put("precision.auto_escalate", c.auto_escalate ? "true" : "false");
}

inline void write_noise(Tree& t, const NoiseSpec& n) {
  t.put("noise.epsilon", n.epsilon.to_string());
  t.put("noise.seed", std::to_string(n.seed));
  t.put("noise.realizations", std::to_string(n.realizations));
}

}  // namespace epchiral::ini
