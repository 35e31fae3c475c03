#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "edlab/catalog.hpp"
#include "edlab/errors.hpp"
#include "edlab/format.hpp"

namespace edlab {

/// One experiment, fully declared. Parsed from the TOML-style config
/// described in the README; every field has a sensible default so a
/// config names only what it cares about.
struct ExperimentConfig {
  // [system]
  SystemSpec system = CircleFlowSpec{0.5};

  // [experiment]
  std::string experiment_kind = "k-slope";
  double p = 2.0;            // bp-invariance exponent
  std::string f = "identity";  // ratio-invariance observable: identity | log
  double epsilon = 0.5;      // amplitude for the perturbed density families
  std::string density;       // uniform | cosine-bump | stationary-perturbed; empty = per-kind default

  // [measure]
  std::string measure_kind = "closed-form";  // closed-form | empirical
  std::uint64_t burn_in = 1000;
  std::uint64_t samples = 100000;

  // [numerics]
  double h = 1e-3;
  std::uint64_t quad_nodes = 4096;
  int dyadic_depth = 12;
  std::vector<double> times;  // key absent in the config = 0..10
  std::uint64_t seed = 1;

  // [output]
  std::string output_dir = ".";

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view v) {
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
  return v;
}

inline double parse_number(std::string_view v, int line) {
  const std::string s(v);
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ConfigParseError(line, "expected a number, got '" + s + "'");
  }
}

inline std::uint64_t parse_uint(std::string_view v, int line) {
  const std::string s(v);
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(s, &used);
    if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ConfigParseError(line, "expected a nonnegative integer, got '" + s + "'");
  }
}

inline std::string parse_quoted(std::string_view v, int line) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"')
    throw ConfigParseError(line, "expected a double-quoted string, got '" + std::string(v) + "'");
  const std::string_view body = v.substr(1, v.size() - 2);
  if (body.find('"') != std::string_view::npos)
    throw ConfigParseError(line, "escapes and embedded quotes are not supported");
  return std::string(body);
}

inline std::vector<double> parse_number_array(std::string_view v, int line) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw ConfigParseError(line, "expected an array like [0, 1, 2]");
  std::vector<double> out;
  std::string_view body = v.substr(1, v.size() - 2);
  if (trim(body).empty()) return out;
  while (true) {
    const std::size_t comma = body.find(',');
    const std::string_view item = trim(body.substr(0, comma));
    if (item.empty()) throw ConfigParseError(line, "empty array element");
    out.push_back(parse_number(item, line));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return out;
}

// strip a trailing comment, respecting quoted strings
inline std::string_view strip_comment(std::string_view v) {
  bool quoted = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '"') quoted = !quoted;
    if (v[i] == '#' && !quoted) return v.substr(0, i);
  }
  return v;
}

}  // namespace detail

/// Semantic checks beyond syntax: ranges, known names, usable times.
inline void validate_config(const ExperimentConfig& cfg) {
  static const std::set<std::string> kinds = {"k-slope",          "bp-invariance",
                                              "entropy-rate",     "ratio-invariance",
                                              "reversibility",    "weak-convergence-probe"};
  if (!kinds.count(cfg.experiment_kind))
    throw ConfigValueError("unknown experiment kind '" + cfg.experiment_kind + "'");
  if (!cfg.density.empty() && cfg.density != "uniform" && cfg.density != "cosine-bump" &&
      cfg.density != "stationary-perturbed")
    throw ConfigValueError("unknown density family '" + cfg.density + "'");
  if (cfg.measure_kind != "closed-form" && cfg.measure_kind != "empirical")
    throw ConfigValueError("unknown measure kind '" + cfg.measure_kind + "'");
  if (cfg.f != "identity" && cfg.f != "log")
    throw ConfigValueError("unknown ratio observable '" + cfg.f + "'");
  if (!(cfg.epsilon > -1.0 && cfg.epsilon < 1.0))
    throw ConfigValueError("epsilon must lie in (-1, 1) to keep densities positive, got " +
                           format_double(cfg.epsilon));
  if (!(cfg.p >= 1.0)) throw ConfigValueError("p must be >= 1, got " + format_double(cfg.p));
  if (!(cfg.h > 0.0)) throw ConfigValueError("h must be positive");
  if (cfg.quad_nodes < 1) throw ConfigValueError("quad_nodes must be >= 1");
  if (cfg.dyadic_depth < 0 || cfg.dyadic_depth > 14)
    throw ConfigValueError("dyadic_depth must lie in [0, 14]");
  if (cfg.samples < 1) throw ConfigValueError("samples must be >= 1");
  if (cfg.times.empty()) throw ConfigValueError("times must be nonempty");
  if (cfg.times.front() < 0.0) throw ConfigValueError("times must be nonnegative");
  for (std::size_t i = 1; i < cfg.times.size(); ++i)
    if (!(cfg.times[i] > cfg.times[i - 1]))
      throw ConfigValueError("times must be strictly increasing");
  // the system spec itself is validated by its constructor (baker range)
  if (const auto* b = std::get_if<BakerSpec>(&cfg.system)) {
    if (!(b->contraction > 0.0) || b->contraction > 0.5)
      throw ConfigValueError("baker contraction must lie in (0, 1/2]");
  }
}

/// Parse the config text. Syntax errors carry 1-based line numbers;
/// semantic problems surface as ConfigValueError after parsing.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool system_is_baker = false;
  double omega = 0.5, contraction = 0.5;
  bool saw_omega = false, saw_a = false, saw_times = false;

  std::string section;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view v = detail::trim(detail::strip_comment(raw));
    if (v.empty()) continue;
    if (v.front() == '[') {
      if (v.back() != ']') throw ConfigParseError(line, "unterminated section header");
      section = std::string(detail::trim(v.substr(1, v.size() - 2)));
      if (section != "system" && section != "experiment" && section != "measure" &&
          section != "numerics" && section != "output")
        throw ConfigParseError(line, "unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = v.find('=');
    if (eq == std::string_view::npos)
      throw ConfigParseError(line, "expected 'key = value' or a [section] header");
    if (section.empty()) throw ConfigParseError(line, "key outside of any [section]");
    const std::string key(detail::trim(v.substr(0, eq)));
    const std::string_view value = detail::trim(v.substr(eq + 1));
    if (key.empty()) throw ConfigParseError(line, "empty key");
    if (value.empty()) throw ConfigParseError(line, "missing value for '" + key + "'");
    if (!seen.insert(section + "." + key).second)
      throw ConfigParseError(line, "duplicate key '" + key + "' in [" + section + "]");

    if (section == "system") {
      if (key == "kind") {
        const std::string kind = detail::parse_quoted(value, line);
        if (kind == "circle")
          system_is_baker = false;
        else if (kind == "baker")
          system_is_baker = true;
        else
          throw ConfigParseError(line, "unknown system kind '" + kind + "'");
      } else if (key == "omega") {
        omega = detail::parse_number(value, line);
        saw_omega = true;
      } else if (key == "a") {
        contraction = detail::parse_number(value, line);
        saw_a = true;
      } else {
        throw ConfigParseError(line, "unknown key '" + key + "' in [system]");
      }
    } else if (section == "experiment") {
      if (key == "kind")
        cfg.experiment_kind = detail::parse_quoted(value, line);
      else if (key == "p")
        cfg.p = detail::parse_number(value, line);
      else if (key == "f")
        cfg.f = detail::parse_quoted(value, line);
      else if (key == "epsilon")
        cfg.epsilon = detail::parse_number(value, line);
      else if (key == "density")
        cfg.density = detail::parse_quoted(value, line);
      else
        throw ConfigParseError(line, "unknown key '" + key + "' in [experiment]");
    } else if (section == "measure") {
      if (key == "kind")
        cfg.measure_kind = detail::parse_quoted(value, line);
      else if (key == "burn_in")
        cfg.burn_in = detail::parse_uint(value, line);
      else if (key == "samples")
        cfg.samples = detail::parse_uint(value, line);
      else
        throw ConfigParseError(line, "unknown key '" + key + "' in [measure]");
    } else if (section == "numerics") {
      if (key == "h")
        cfg.h = detail::parse_number(value, line);
      else if (key == "quad_nodes")
        cfg.quad_nodes = detail::parse_uint(value, line);
      else if (key == "dyadic_depth")
        cfg.dyadic_depth = static_cast<int>(detail::parse_uint(value, line));
      else if (key == "times") {
        cfg.times = detail::parse_number_array(value, line);
        saw_times = true;
      } else if (key == "seed")
        cfg.seed = detail::parse_uint(value, line);
      else
        throw ConfigParseError(line, "unknown key '" + key + "' in [numerics]");
    } else {  // output
      if (key == "dir")
        cfg.output_dir = detail::parse_quoted(value, line);
      else
        throw ConfigParseError(line, "unknown key '" + key + "' in [output]");
    }
  }

  if (system_is_baker) {
    if (saw_omega) throw ConfigValueError("omega is a circle parameter; baker takes 'a'");
    cfg.system = BakerSpec{contraction};
  } else {
    if (saw_a) throw ConfigValueError("'a' is a baker parameter; circle takes 'omega'");
    cfg.system = CircleFlowSpec{omega};
  }
  // A missing times key means the default ladder; an explicit empty
  // array is a mistake and falls through to validation.
  if (!saw_times)
    for (int t = 0; t <= 10; ++t) cfg.times.push_back(static_cast<double>(t));
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError(0, "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// Canonical text form: fixed section and key order, shortest
/// round-trip floats. parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[system]\n";
  if (const auto* c = std::get_if<CircleFlowSpec>(&cfg.system)) {
    out << "kind = \"circle\"\n";
    out << "omega = " << format_double(c->omega) << "\n";
  } else {
    out << "kind = \"baker\"\n";
    out << "a = " << format_double(std::get<BakerSpec>(cfg.system).contraction) << "\n";
  }
  out << "\n[experiment]\n";
  out << "kind = \"" << cfg.experiment_kind << "\"\n";
  out << "p = " << format_double(cfg.p) << "\n";
  out << "f = \"" << cfg.f << "\"\n";
  out << "epsilon = " << format_double(cfg.epsilon) << "\n";
  if (!cfg.density.empty()) out << "density = \"" << cfg.density << "\"\n";
  out << "\n[measure]\n";
  out << "kind = \"" << cfg.measure_kind << "\"\n";
  out << "burn_in = " << cfg.burn_in << "\n";
  out << "samples = " << cfg.samples << "\n";
  out << "\n[numerics]\n";
  out << "h = " << format_double(cfg.h) << "\n";
  out << "quad_nodes = " << cfg.quad_nodes << "\n";
  out << "dyadic_depth = " << cfg.dyadic_depth << "\n";
  out << "times = [";
  for (std::size_t i = 0; i < cfg.times.size(); ++i) {
    if (i) out << ", ";
    out << format_double(cfg.times[i]);
  }
  out << "]\n";
  out << "seed = " << cfg.seed << "\n";
  out << "\n[output]\n";
  out << "dir = \"" << cfg.output_dir << "\"\n";
  return out.str();
}

}  // namespace edlab
