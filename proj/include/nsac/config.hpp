#pragma once
// Run configuration: a small sectioned key=value format plus command-line
// overrides.  Unknown sections or keys are errors (typos should not silently
// become defaults); within a file, later assignments win.  An override can
// name its key as "section.key" or, when the bare key is unambiguous across
// sections, just "key".

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <nsac/errors.hpp>
#include <nsac/ioutil.hpp>
#include <nsac/model.hpp>
#include <nsac/spectral.hpp>
#include <nsac/stepper.hpp>

namespace nsac {

enum class InitialKind { ground_state, constant, random, taylor_green, snapshot };

struct InitialSpec {
  InitialKind kind = InitialKind::random;
  double u_norm = 1.0;
  double phi_norm = 0.5;  // fluctuation L2 norm on top of phi_mean
  double phi_mean = 0.0;
  double pi_norm = 0.5;
  int kmax = 0;           // 0: use n / 8
  double phi0 = 1.0;      // for kind = constant
  double pi0 = 0.0;
  std::string path;       // for kind = snapshot
};

struct SweepSpec {
  std::vector<double> scales = {1.0, 4.0, 16.0};
  double window = 0.25;  // trailing fraction of the run used as "late time"
};

struct ContractSpec {
  double perturbation = 1e-6;
};

enum class ConvergeMode { temporal, spatial, truncation };

struct ConvergeSpec {
  ConvergeMode mode = ConvergeMode::temporal;
};

struct Config {
  int dim = 2;
  int n = 32;
  ModelParams model;
  StepperConfig stepper;
  double t_final = 1.0;
  long output_every = 10;    // steps between diagnostic rows
  long snapshot_every = 0;   // steps between snapshots; 0 disables
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  InitialSpec initial;
  SweepSpec sweep;
  ContractSpec contract;
  ConvergeSpec converge;
};

namespace detail {

inline double parse_double(const std::string& s, const std::string& where) {
  const std::string t = ioutil::trim(s);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError(where + ": expected a number, got '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, const std::string& where) {
  const std::string t = ioutil::trim(s);
  char* end = nullptr;
  long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError(where + ": expected an integer, got '" + s + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& where) {
  const std::string t = ioutil::trim(s);
  char* end = nullptr;
  unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || t[0] == '-')
    throw ConfigError(where + ": expected a non-negative integer, got '" + s + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& where) {
  std::vector<double> out;
  for (const std::string& part : ioutil::split(s, ',')) {
    if (ioutil::trim(part).empty()) continue;
    out.push_back(parse_double(part, where));
  }
  if (out.empty()) throw ConfigError(where + ": expected a comma-separated list of numbers");
  return out;
}

// Applies one assignment.  Central dispatch shared by the file parser and the
// command-line override path, so both accept exactly the same keys.
inline void set_entry(Config& c, const std::string& sec, const std::string& key,
                      const std::string& value, const std::string& where) {
  const std::string v = ioutil::trim(value);
  auto unknown = [&]() -> ConfigError {
    return ConfigError(where + ": unknown key '" + key + "' in [" + sec + "]");
  };
  if (sec == "grid") {
    if (key == "dim") c.dim = static_cast<int>(parse_long(v, where));
    else if (key == "n") c.n = static_cast<int>(parse_long(v, where));
    else throw unknown();
  } else if (sec == "model") {
    if (key == "kappa") c.model.kappa = parse_double(v, where);
    else if (key == "delta") c.model.delta = parse_double(v, where);
    else if (key == "sigma") c.model.sigma = parse_double(v, where);
    else if (key == "epsilon") c.model.epsilon = parse_double(v, where);
    else if (key == "truncation_n") c.model.truncation_n = static_cast<int>(parse_long(v, where));
    else if (key == "reg_mode") {
      if (v == "linear") c.model.reg_mode = RegMode::linear;
      else if (v == "variational") c.model.reg_mode = RegMode::variational;
      else throw ConfigError(where + ": reg_mode must be 'linear' or 'variational'");
    } else throw unknown();
  } else if (sec == "potential") {
    if (key == "kind") {
      if (v == "double_well") c.model.potential = Potential::double_well();
      else if (v == "polynomial") { /* coeffs assignment builds it */ }
      else throw ConfigError(where + ": potential kind must be 'double_well' or 'polynomial'");
    } else if (key == "coeffs") {
      try {
        c.model.potential = Potential::polynomial(parse_list(v, where));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
      }
    } else throw unknown();
  } else if (sec == "stepper") {
    if (key == "dt") c.stepper.dt = parse_double(v, where);
    else if (key == "cfl_safety") c.stepper.cfl_safety = parse_double(v, where);
    else if (key == "dt_max") c.stepper.dt_max = parse_double(v, where);
    else if (key == "scheme") {
      if (v == "cnab2") c.stepper.scheme = Scheme::cnab2;
      else if (v == "rk4") c.stepper.scheme = Scheme::rk4;
      else throw ConfigError(where + ": scheme must be 'cnab2' or 'rk4'");
    } else throw unknown();
  } else if (sec == "run") {
    if (key == "t_final") c.t_final = parse_double(v, where);
    else if (key == "output_every") c.output_every = parse_long(v, where);
    else if (key == "snapshot_every") c.snapshot_every = parse_long(v, where);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "seed") c.seed = parse_u64(v, where);
    else throw unknown();
  } else if (sec == "initial") {
    if (key == "kind") {
      if (v == "ground_state") c.initial.kind = InitialKind::ground_state;
      else if (v == "constant") c.initial.kind = InitialKind::constant;
      else if (v == "random") c.initial.kind = InitialKind::random;
      else if (v == "taylor_green") c.initial.kind = InitialKind::taylor_green;
      else if (v == "snapshot") c.initial.kind = InitialKind::snapshot;
      else throw ConfigError(where + ": unknown initial kind '" + v + "'");
    } else if (key == "u_norm") c.initial.u_norm = parse_double(v, where);
    else if (key == "phi_norm") c.initial.phi_norm = parse_double(v, where);
    else if (key == "phi_mean") c.initial.phi_mean = parse_double(v, where);
    else if (key == "pi_norm") c.initial.pi_norm = parse_double(v, where);
    else if (key == "kmax") c.initial.kmax = static_cast<int>(parse_long(v, where));
    else if (key == "phi0") c.initial.phi0 = parse_double(v, where);
    else if (key == "pi0") c.initial.pi0 = parse_double(v, where);
    else if (key == "path") c.initial.path = v;
    else throw unknown();
  } else if (sec == "sweep") {
    if (key == "scales") c.sweep.scales = parse_list(v, where);
    else if (key == "window") c.sweep.window = parse_double(v, where);
    else throw unknown();
  } else if (sec == "contract") {
    if (key == "perturbation") c.contract.perturbation = parse_double(v, where);
    else throw unknown();
  } else if (sec == "converge") {
    if (key == "mode") {
      if (v == "temporal") c.converge.mode = ConvergeMode::temporal;
      else if (v == "spatial") c.converge.mode = ConvergeMode::spatial;
      else if (v == "truncation") c.converge.mode = ConvergeMode::truncation;
      else throw ConfigError(where + ": mode must be temporal, spatial, or truncation");
    } else throw unknown();
  } else {
    throw ConfigError(where + ": unknown section [" + sec + "]");
  }
}

inline const std::vector<std::pair<std::string, std::string>>& key_table() {
  static const std::vector<std::pair<std::string, std::string>> t = {
      {"grid", "dim"}, {"grid", "n"},
      {"model", "kappa"}, {"model", "delta"}, {"model", "sigma"}, {"model", "epsilon"},
      {"model", "reg_mode"}, {"model", "truncation_n"},
      {"potential", "kind"}, {"potential", "coeffs"},
      {"stepper", "scheme"}, {"stepper", "dt"}, {"stepper", "cfl_safety"}, {"stepper", "dt_max"},
      {"run", "t_final"}, {"run", "output_every"}, {"run", "snapshot_every"},
      {"run", "output_dir"}, {"run", "seed"},
      {"initial", "kind"}, {"initial", "u_norm"}, {"initial", "phi_norm"}, {"initial", "phi_mean"},
      {"initial", "pi_norm"}, {"initial", "kmax"}, {"initial", "phi0"}, {"initial", "pi0"},
      {"initial", "path"},
      {"sweep", "scales"}, {"sweep", "window"},
      {"contract", "perturbation"},
      {"converge", "mode"},
  };
  return t;
}

}  // namespace detail

inline Config parse_config(const std::string& text) {
  Config c;
  std::string section;
  int lineno = 0;
  for (const std::string& raw : ioutil::split(text, '\n')) {
    ++lineno;
    std::string line = raw;
    std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = ioutil::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = ioutil::trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    std::string key = ioutil::trim(line.substr(0, eq));
    std::string value = line.substr(eq + 1);
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": assignment before any [section]");
    detail::set_entry(c, section, key, value, where);
  }
  return c;
}

inline Config parse_config_file(const std::string& path) {
  try {
    return parse_config(ioutil::read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// "section.key=value", or "key=value" when the bare key is unique.
inline void apply_override(Config& c, const std::string& spec) {
  std::size_t eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + spec + "': expected key=value");
  std::string key = ioutil::trim(spec.substr(0, eq));
  std::string value = spec.substr(eq + 1);
  std::string where = "override '" + spec + "'";
  std::size_t dot = key.find('.');
  if (dot != std::string::npos) {
    detail::set_entry(c, key.substr(0, dot), key.substr(dot + 1), value, where);
    return;
  }
  const auto& table = detail::key_table();
  std::string section;
  int hits = 0;
  for (const auto& [sec, k] : table)
    if (k == key) {
      section = sec;
      ++hits;
    }
  if (hits == 0) throw ConfigError(where + ": unknown key '" + key + "'");
  if (hits > 1)
    throw ConfigError(where + ": key '" + key + "' is ambiguous; qualify it as section.key");
  detail::set_entry(c, section, key, value, where);
}

// Full validation.  Throws on errors; returns advisory warnings.
inline std::vector<std::string> validate_config(const Config& c) {
  std::vector<std::string> warnings;
  try {
    Grid probe(c.dim, c.n);
    (void)probe;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  validate(c.model);
  validate(c.stepper);
  if (!(c.t_final > 0.0)) throw ConfigError("t_final > 0 required");
  if (c.output_every < 1) throw ConfigError("output_every >= 1 required");
  if (c.snapshot_every < 0) throw ConfigError("snapshot_every >= 0 required");
  if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (c.initial.kind == InitialKind::snapshot && c.initial.path.empty())
    throw ConfigError("initial kind 'snapshot' requires initial.path");
  if (c.initial.kmax < 0) throw ConfigError("initial.kmax >= 0 required");
  if (c.initial.kmax > c.n / 2 - 1) throw ConfigError("initial.kmax must stay below the grid band");
  if (c.initial.u_norm < 0.0 || c.initial.phi_norm < 0.0 || c.initial.pi_norm < 0.0)
    throw ConfigError("initial norms must be non-negative");
  if (c.sweep.scales.empty()) throw ConfigError("sweep.scales must not be empty");
  for (double s : c.sweep.scales)
    if (!(s > 0.0)) throw ConfigError("sweep.scales must be positive");
  if (!(c.sweep.window > 0.0 && c.sweep.window <= 1.0))
    throw ConfigError("sweep.window must lie in (0, 1]");
  if (!(c.contract.perturbation > 0.0)) throw ConfigError("contract.perturbation > 0 required");
  const double steps = c.t_final / c.stepper.dt;
  if (std::abs(steps - std::llround(steps)) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("t_final must be an integer multiple of dt");
  if (c.model.epsilon == 0.0)
    warnings.push_back("epsilon = 0: running without phase regularization (exploratory)");
  return warnings;
}

// Canonical echo: every key, fixed order, exact doubles.  Parsing the echo
// reproduces the configuration.
inline std::string serialize_config(const Config& c) {
  using ioutil::g17;
  std::string s;
  auto line = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  s += "[grid]\n";
  line("dim", std::to_string(c.dim));
  line("n", std::to_string(c.n));
  s += "\n[model]\n";
  line("kappa", g17(c.model.kappa));
  line("delta", g17(c.model.delta));
  line("sigma", g17(c.model.sigma));
  line("epsilon", g17(c.model.epsilon));
  line("reg_mode", c.model.reg_mode == RegMode::linear ? "linear" : "variational");
  line("truncation_n", std::to_string(c.model.truncation_n));
  s += "\n[potential]\n";
  if (c.model.potential.kind() == PotentialKind::double_well) {
    line("kind", "double_well");  // coefficients are implied
  } else {
    line("kind", "polynomial");
    std::string cs;
    for (std::size_t i = 0; i < c.model.potential.coeffs().size(); ++i) {
      if (i) cs += ", ";
      cs += g17(c.model.potential.coeffs()[i]);
    }
    line("coeffs", cs);
  }
  s += "\n[stepper]\n";
  line("scheme", c.stepper.scheme == Scheme::cnab2 ? "cnab2" : "rk4");
  line("dt", g17(c.stepper.dt));
  line("cfl_safety", g17(c.stepper.cfl_safety));
  line("dt_max", g17(c.stepper.dt_max));
  s += "\n[run]\n";
  line("t_final", g17(c.t_final));
  line("output_every", std::to_string(c.output_every));
  line("snapshot_every", std::to_string(c.snapshot_every));
  line("output_dir", c.output_dir);
  line("seed", std::to_string(c.seed));
  s += "\n[initial]\n";
  const char* ik = nullptr;
  switch (c.initial.kind) {
    case InitialKind::ground_state: ik = "ground_state"; break;
    case InitialKind::constant: ik = "constant"; break;
    case InitialKind::random: ik = "random"; break;
    case InitialKind::taylor_green: ik = "taylor_green"; break;
    case InitialKind::snapshot: ik = "snapshot"; break;
  }
  line("kind", ik);
  line("u_norm", g17(c.initial.u_norm));
  line("phi_norm", g17(c.initial.phi_norm));
  line("phi_mean", g17(c.initial.phi_mean));
  line("pi_norm", g17(c.initial.pi_norm));
  line("kmax", std::to_string(c.initial.kmax));
  line("phi0", g17(c.initial.phi0));
  line("pi0", g17(c.initial.pi0));
  if (!c.initial.path.empty()) line("path", c.initial.path);
  s += "\n[sweep]\n";
  {
    std::string sc;
    for (std::size_t i = 0; i < c.sweep.scales.size(); ++i) {
      if (i) sc += ", ";
      sc += g17(c.sweep.scales[i]);
    }
    line("scales", sc);
  }
  line("window", g17(c.sweep.window));
  s += "\n[contract]\n";
  line("perturbation", g17(c.contract.perturbation));
  s += "\n[converge]\n";
  line("mode", c.converge.mode == ConvergeMode::temporal
                   ? "temporal"
                   : (c.converge.mode == ConvergeMode::spatial ? "spatial" : "truncation"));
  return s;
}

}  // namespace nsac
