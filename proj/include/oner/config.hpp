// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oner/analysis.hpp"
#include "oner/atom.hpp"
#include "oner/core.hpp"
#include "oner/drive.hpp"
#include "oner/dynamics.hpp"
#include "oner/floquet.hpp"

namespace oner {

using Json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Quantities with units

enum class Dimension { Field, Frequency, Time, Angle, Intensity };

struct UnitEntry {
  const char* name;
  double factor;  // to internal units
};

// Internal units: G, rad/us, us, rad, W/cm^2. Cyclic frequencies are
// converted to angular ones.
inline const std::vector<UnitEntry>& unit_table(Dimension d) {
  static const std::vector<UnitEntry> field{{"G", 1.0}, {"mG", 1e-3}, {"kG", 1e3}, {"T", 1e4}};
  static const std::vector<UnitEntry> freq{{"Hz", kTwoPi * 1e-6}, {"kHz", kTwoPi * 1e-3}, {"MHz", kTwoPi}, {"GHz", kTwoPi * 1e3},
                                           {"rad/us", 1.0}, {"rad/s", 1e-6}, {"1/s", 1e-6}};
  static const std::vector<UnitEntry> time{{"s", 1e6}, {"ms", 1e3}, {"us", 1.0}, {"µs", 1.0}, {"ns", 1e-3}, {"ps", 1e-6}};
  static const std::vector<UnitEntry> angle{{"deg", kPi / 180.0}, {"rad", 1.0}, {"mrad", 1e-3}};
  static const std::vector<UnitEntry> intensity{{"W/cm2", 1.0}, {"W/cm^2", 1.0}, {"mW/cm2", 1e-3}, {"mW/cm^2", 1e-3}, {"W/m2", 1e-4}, {"W/m^2", 1e-4}};
  switch (d) {
    case Dimension::Field: return field;
    case Dimension::Frequency: return freq;
    case Dimension::Time: return time;
    case Dimension::Angle: return angle;
    case Dimension::Intensity: return intensity;
  }
  return field;
}

inline std::string dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Field: return "magnetic field";
    case Dimension::Frequency: return "frequency";
    case Dimension::Time: return "time";
    case Dimension::Angle: return "angle";
    case Dimension::Intensity: return "intensity";
  }
  return "?";
}

struct Quantity {
  double value = 0.0;  // internal units
  Dimension dimension = Dimension::Field;
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::pair<double, std::string> split_number(const std::string& text, const std::string& path) {
  const std::string s = trim(text);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr == first) throw ConfigError(path + ": cannot read a number from '" + text + "'");
  return {v, trim(std::string(ptr, s.data() + s.size()))};
}
}  // namespace detail

// "500 G", "20 MHz", "1.86 us", "90 deg", "1 W/cm2". The unit is mandatory.
inline Quantity parse_quantity(const std::string& text, const std::string& path = "value") {
  const auto [v, unit] = detail::split_number(text, path);
  if (unit.empty()) throw ConfigError(path + ": missing unit in '" + text + "'");
  for (auto d : {Dimension::Field, Dimension::Frequency, Dimension::Time, Dimension::Angle, Dimension::Intensity})
    for (const auto& u : unit_table(d))
      if (unit == u.name) return {v * u.factor, d};
  throw ConfigError(path + ": unknown unit '" + unit + "'");
}

inline double parse_quantity(const std::string& text, Dimension expected, const std::string& path = "value") {
  const auto q = parse_quantity(text, path);
  if (q.dimension != expected)
    throw ConfigError(path + ": expected a " + dimension_name(expected) + ", got '" + text + "'");
  return q.value;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Inverse of parse_quantity for a named unit.
inline std::string format_quantity(double internal, Dimension d, const std::string& unit) {
  for (const auto& u : unit_table(d))
    if (unit == u.name) return format_number(internal / u.factor) + " " + unit;
  throw std::invalid_argument("format_quantity: unknown unit " + unit);
}

// ---------------------------------------------------------------------------
// Strict reader over a JSON object

class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing required key '" + key_path(key) + "'");
    return j_.at(key);
  }

  double quantity(const std::string& key, Dimension d) {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string with a unit, e.g. \"" + example(d) + "\"");
    return parse_quantity(v.get<std::string>(), d, key_path(key));
  }
  std::optional<double> quantity_opt(const std::string& key, Dimension d) {
    if (!has(key)) return std::nullopt;
    return quantity(key, d);
  }
  double quantity_or(const std::string& key, Dimension d, double fallback) { return quantity_opt(key, d).value_or(fallback); }

  std::vector<double> quantity_list(const std::string& key, Dimension d) {
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(key_path(key) + ": expected a list");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
      const std::string p = key_path(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_string()) throw ConfigError(p + ": expected a string with a unit");
      out.push_back(parse_quantity(v[i].get<std::string>(), d, p));
    }
    return out;
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
    return v.get<double>();
  }
  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  int integer_or(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
    return v.get<int>();
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string string_or(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }

  // Child object; an absent key yields an empty section.
  Section child(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) return Section(empty(), key_path(key));
    return Section(j_.at(key), key_path(key));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ConfigError("unknown key '" + key_path(k) + "'");
  }

  // Marks a key as known without reading it.
  void accept(const std::string& key) { used_.insert(key); }

 private:
  static const Json& empty() {
    static const Json e = Json::object();
    return e;
  }
  static std::string example(Dimension d) {
    switch (d) {
      case Dimension::Field: return "500 G";
      case Dimension::Frequency: return "20 MHz";
      case Dimension::Time: return "1.86 us";
      case Dimension::Angle: return "90 deg";
      case Dimension::Intensity: return "1 W/cm2";
    }
    return "";
  }
  std::string where() const { return path_.empty() ? "config" : path_; }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Run configuration

struct SolverSettings {
  IntegratorOptions integrator;
  IntegratorOptions floquet{.rtol = 1e-12, .atol = 1e-14};
  int nodes = 64;
  double adiabaticity_cut = 1e-3;
  std::string method = "auto";  // auto | direct | period-map

  FlipOptions flip(double horizon) const {
    FlipOptions f;
    f.horizon = horizon;
    f.map.integrator = integrator;
    f.map.nodes = nodes;
    f.map.adiabaticity_cut = adiabaticity_cut;
    return f;
  }
};

struct NoiseEntry {
  std::string parameter;
  double omega_N = 0.0;  // s^-1
  std::optional<double> slope_sq;
  std::optional<double> delta;
  std::optional<double> P_delta;
  std::optional<double> psd;          // S_x(Omega_N) in s^-1
  std::optional<double> phase_noise;  // Hz^-1; S_x = Omega_N^2 * phase_noise
};

struct RunConfig {
  Json document = Json::object();
  AtomSpec atom;
  DriveConfig drive;
  bool has_T = false;
  SolverSettings solver;
  double horizon = 50.0;

  // simulate
  bool closed_system = false;
  double sample_dt = 0.0;  // 0: the period map nodes, T / nodes
  double simulate_horizon = 0.0;  // 0: horizon

  ScanPlan scan;
  std::vector<double> grid_B = default_grid_fields();
  std::vector<double> grid_omega_E = default_grid_rabi();

  double levels_B_min = 0.0, levels_B_max = 1000.0, levels_B_step = 1.0;

  double floquet_T_min = 0.0, floquet_T_max = 0.0, floquet_T_step = 0.005;
  bool floquet_window = false;
  int floquet_periods = 0;  // > 0: compare Floquet strobe points with closed-system evolution

  std::vector<StabilityAxis> stability_axes;
  bool stability_planes = true;
  int stability_peak = 0;  // > 0: locate the n-th peak with a windowed scan first

  std::vector<NoiseEntry> noise;
};

inline std::vector<StabilityAxis> default_stability_axes() {
  return {{Parameter::T, symmetric_offsets(0.003, 5)},
          {Parameter::B, symmetric_offsets(0.3, 5)},
          {Parameter::OmegaE, symmetric_offsets(units::mhz(0.2), 5)},
          {Parameter::Theta, symmetric_offsets(kPi / 180.0, 5)},
          {Parameter::Detuning, symmetric_offsets(units::mhz(4.0), 5)}};
}

inline Dimension parameter_dimension(Parameter p) {
  switch (p) {
    case Parameter::T: return Dimension::Time;
    case Parameter::B: return Dimension::Field;
    case Parameter::OmegaE: return Dimension::Frequency;
    case Parameter::Theta: return Dimension::Angle;
    case Parameter::Detuning: return Dimension::Frequency;
  }
  return Dimension::Field;
}

// Unit used when a parameter value is written out.
inline std::string parameter_unit(Parameter p) {
  switch (p) {
    case Parameter::T: return "ns";
    case Parameter::B: return "mG";
    case Parameter::OmegaE: return "MHz";
    case Parameter::Theta: return "deg";
    case Parameter::Detuning: return "MHz";
  }
  return "";
}

inline RunConfig parse_config(const Json& doc) {
  RunConfig c;
  c.document = doc;
  c.stability_axes = default_stability_axes();
  Section root(doc, "");

  {
    auto s = root.child("atom");
    if (s.has("nuclear_spin")) c.atom.nuclear_spin = HalfInt::from_double(s.number("nuclear_spin"));
    c.atom.g_I = s.number_or("g_I", c.atom.g_I);
    if (s.has("g_J")) c.atom.g_J = s.number("g_J");
    c.atom.hyperfine_A = s.quantity_or("hyperfine_A", Dimension::Frequency, c.atom.hyperfine_A);
    c.atom.quadrupole_Q = s.quantity_or("quadrupole_Q", Dimension::Frequency, c.atom.quadrupole_Q);
    c.atom.gamma = s.quantity_or("gamma", Dimension::Frequency, c.atom.gamma);
    s.finish();
    try {
      c.atom.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("atom: ") + e.what());
    }
  }
  {
    auto s = root.child("drive");
    c.drive.B = s.quantity_or("B", Dimension::Field, c.drive.B);
    c.drive.omega_E = s.quantity_or("omega_E", Dimension::Frequency, c.drive.omega_E);
    if (s.has("T")) {
      c.drive.T = s.quantity("T", Dimension::Time);
      c.has_T = true;
    }
    c.drive.theta = s.quantity_or("theta", Dimension::Angle, c.drive.theta);
    if (s.has("detuning")) {
      const auto& v = s.raw("detuning");
      if (!(v.is_string() && v.get<std::string>() == "auto")) {
        if (!v.is_string()) throw ConfigError("drive.detuning: expected \"auto\" or a frequency");
        c.drive.detuning = parse_quantity(v.get<std::string>(), Dimension::Frequency, "drive.detuning");
      }
    }
    c.drive.envelope_phase = s.quantity_or("envelope_phase", Dimension::Angle, 0.0);
    s.finish();
    try {
      c.drive.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("drive: ") + e.what());
    }
  }
  {
    auto s = root.child("solver");
    c.solver.integrator.rtol = s.number_or("rtol", c.solver.integrator.rtol);
    c.solver.integrator.atol = s.number_or("atol", c.solver.integrator.atol);
    c.solver.floquet.rtol = s.number_or("floquet_rtol", c.solver.floquet.rtol);
    c.solver.floquet.atol = s.number_or("floquet_atol", c.solver.floquet.atol);
    c.solver.nodes = s.integer_or("nodes", c.solver.nodes);
    c.solver.adiabaticity_cut = s.number_or("adiabaticity_cut", c.solver.adiabaticity_cut);
    c.solver.method = s.string_or("method", c.solver.method);
    if (c.solver.method != "auto" && c.solver.method != "direct" && c.solver.method != "period-map")
      throw ConfigError("solver.method: expected auto, direct or period-map");
    if (c.solver.nodes < 2 || c.solver.nodes % 2) throw ConfigError("solver.nodes: expected an even number >= 2");
    c.horizon = s.quantity_or("horizon", Dimension::Time, c.horizon);
    s.finish();
  }
  {
    auto s = root.child("simulate");
    c.closed_system = s.boolean_or("closed_system", false);
    c.sample_dt = s.quantity_or("sample_dt", Dimension::Time, 0.0);
    c.simulate_horizon = s.quantity_or("horizon", Dimension::Time, 0.0);
    s.finish();
  }
  {
    auto s = root.child("scan");
    auto& p = c.scan;
    p.T_min = s.quantity_or("T_min", Dimension::Time, p.T_min);
    p.T_max = s.quantity_or("T_max", Dimension::Time, p.T_max);
    p.coarse_step = s.quantity_or("coarse_step", Dimension::Time, p.coarse_step);
    p.refine_halfwidth = s.quantity_or("refine_halfwidth", Dimension::Time, p.refine_halfwidth);
    p.refine_step = s.quantity_or("refine_step", Dimension::Time, p.refine_step);
    p.full_step = s.quantity_or("full_step", Dimension::Time, p.full_step);
    p.polish_tolerance = s.quantity_or("polish_tolerance", Dimension::Time, p.polish_tolerance);
    p.candidate_min = s.number_or("candidate_min", p.candidate_min);
    p.rule.min_value = s.number_or("peak_min", p.rule.min_value);
    p.rule.min_prominence = s.number_or("peak_prominence", p.rule.min_prominence);
    s.finish();
    if (!(p.T_min > 0.0 && p.T_max > p.T_min)) throw ConfigError("scan: need 0 < T_min < T_max");
  }
  {
    auto s = root.child("grid");
    if (s.has("B")) c.grid_B = s.quantity_list("B", Dimension::Field);
    if (s.has("omega_E")) c.grid_omega_E = s.quantity_list("omega_E", Dimension::Frequency);
    s.finish();
  }
  {
    auto s = root.child("levels");
    c.levels_B_min = s.quantity_or("B_min", Dimension::Field, c.levels_B_min);
    c.levels_B_max = s.quantity_or("B_max", Dimension::Field, c.levels_B_max);
    c.levels_B_step = s.quantity_or("B_step", Dimension::Field, c.levels_B_step);
    s.finish();
  }
  {
    auto s = root.child("floquet");
    if (s.has("T_min") || s.has("T_max")) {
      c.floquet_T_min = s.quantity("T_min", Dimension::Time);
      c.floquet_T_max = s.quantity("T_max", Dimension::Time);
      c.floquet_window = true;
    }
    c.floquet_T_step = s.quantity_or("T_step", Dimension::Time, c.floquet_T_step);
    c.floquet_periods = s.integer_or("strobe_periods", 0);
    s.finish();
  }
  {
    auto s = root.child("stability");
    c.stability_planes = s.boolean_or("planes", true);
    c.stability_peak = s.integer_or("peak", 0);
    if (s.has("axes")) {
      c.stability_axes.clear();
      const auto& axes = s.raw("axes");
      if (!axes.is_object()) throw ConfigError("stability.axes: expected an object keyed by parameter");
      for (const auto& [name, spec] : axes.items()) {
        const std::string path = "stability.axes." + name;
        Parameter p;
        try {
          p = parse_parameter(name);
        } catch (const std::invalid_argument&) {
          throw ConfigError("unknown key '" + path + "'");
        }
        Section a(spec, path);
        const double max = a.quantity("max", parameter_dimension(p));
        const int points = a.integer_or("points", 5);
        a.finish();
        if (points < 1 || points % 2 == 0) throw ConfigError(path + ".points: expected an odd count");
        c.stability_axes.push_back({p, symmetric_offsets(max, points)});
      }
      // Keep a fixed parameter order regardless of the document order.
      std::stable_sort(c.stability_axes.begin(), c.stability_axes.end(),
                       [](const StabilityAxis& x, const StabilityAxis& y) { return x.parameter < y.parameter; });
    }
    s.finish();
  }
  {
    if (root.has("noise")) {
      const auto& list = root.raw("noise");
      if (!list.is_array()) throw ConfigError("noise: expected a list of entries");
      for (size_t i = 0; i < list.size(); ++i) {
        Section s(list[i], "noise[" + std::to_string(i) + "]");
        NoiseEntry e;
        e.parameter = s.string("parameter");
        e.omega_N = s.quantity("omega_N", Dimension::Frequency) * 1e6;
        if (s.has("slope_sq")) e.slope_sq = s.number("slope_sq");
        if (s.has("delta")) e.delta = s.number("delta");
        if (s.has("P_delta")) e.P_delta = s.number("P_delta");
        if (s.has("psd")) e.psd = s.number("psd");
        if (s.has("phase_noise")) e.phase_noise = s.number("phase_noise");
        s.finish();
        const std::string p = "noise[" + std::to_string(i) + "]";
        if (!e.slope_sq && !(e.delta && e.P_delta)) throw ConfigError("missing required key '" + p + ".slope_sq' (or delta with P_delta)");
        if (!e.psd && !e.phase_noise) throw ConfigError("missing required key '" + p + ".psd' (or phase_noise)");
        c.noise.push_back(e);
      }
    }
  }
  root.finish();
  return c;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Provenance

inline constexpr const char* kVersion = "0.1.0";

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

// Hash of the command and the canonical (key-sorted) config document.
inline std::string config_hash(const std::string& command, const Json& doc) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(command + "\n" + doc.dump())));
  return buf;
}

inline std::string half_int_text(HalfInt h) {
  return h.twice() % 2 ? std::to_string(h.twice()) + "/2" : std::to_string(h.twice() / 2);
}

inline std::string atom_header(const AtomSpec& a) {
  return "atom: nuclear_spin=" + half_int_text(a.nuclear_spin) + " g_J=" + format_number(a.g_J) + " g_I=" + format_number(a.g_I) +
         " hyperfine_A=" + format_quantity(a.hyperfine_A, Dimension::Frequency, "MHz") +
         " quadrupole_Q=" + format_quantity(a.quadrupole_Q, Dimension::Frequency, "MHz") +
         " gamma=" + format_quantity(a.gamma, Dimension::Frequency, "kHz");
}

inline std::string drive_header(const AtomSpec& spec, const DriveConfig& d, bool with_T) {
  std::string s = "drive: B=" + format_quantity(d.B, Dimension::Field, "G") +
                  " omega_E=" + format_quantity(d.omega_E, Dimension::Frequency, "MHz");
  if (with_T) s += " T=" + format_quantity(d.T, Dimension::Time, "us");
  s += " theta=" + format_quantity(d.theta, Dimension::Angle, "deg");
  s += " detuning=" + (d.detuning ? format_quantity(*d.detuning, Dimension::Frequency, "MHz")
                                  : "auto(" + format_quantity(resolve_detuning(spec, d), Dimension::Frequency, "MHz") + ")");
  return s;
}

}  // namespace oner
