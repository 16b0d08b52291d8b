// Copyright 2026 The spincavity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spincavity/engine.hpp"
#include "spincavity/errors.hpp"
#include "spincavity/exact.hpp"
#include "spincavity/linalg.hpp"
#include "spincavity/model.hpp"

namespace spincavity::config {

inline constexpr const char* kCodeVersion = "0.1.0";

// Flat key = value configuration with [sections]. Frequencies take a unit
// token: "MHz" style units are ordinary frequencies (value * 2*pi * 1e6 rad/s,
// the way quoted experiment parameters read), "Mrad/s" style units are angular
// rates taken literally. Times take s/ms/us/ns. '#' starts a comment.

struct ConfigMap {
  // section -> ordered key/value pairs; first-wins lookup, set() replaces.
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;

  std::optional<std::string> get(const std::string& sec, const std::string& key) const {
    for (const auto& s : sections)
      if (s.first == sec)
        for (const auto& kv : s.second)
          if (kv.first == key) return kv.second;
    return std::nullopt;
  }

  void set(const std::string& sec, const std::string& key, const std::string& value) {
    for (auto& s : sections)
      if (s.first == sec) {
        for (auto& kv : s.second)
          if (kv.first == key) {
            kv.second = value;
            return;
          }
        s.second.emplace_back(key, value);
        return;
      }
    sections.push_back({sec, {{key, value}}});
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace detail

inline ConfigMap parse_config(const std::string& text) {
  ConfigMap m;
  std::istringstream in(text);
  std::string line, section = "run";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = detail::trim(line.substr(1, line.size() - 2));
      m.set(section, "", "");  // ensure the section exists, even if empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    m.set(section, key, value);
  }
  // drop the empty-section markers
  for (auto& s : m.sections)
    std::erase_if(s.second, [](const auto& kv) { return kv.first.empty(); });
  return m;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize(const ConfigMap& m) {
  std::ostringstream out;
  bool first = true;
  for (const auto& s : m.sections) {
    if (s.second.empty()) continue;
    if (!first) out << "\n";
    first = false;
    out << "[" << s.first << "]\n";
    for (const auto& kv : s.second) out << kv.first << " = " << kv.second << "\n";
  }
  return out.str();
}

// ---- value parsing -----------------------------------------------------------

namespace detail {

inline std::pair<double, std::string> number_and_unit(const std::string& raw,
                                                      const std::string& what) {
  std::istringstream ss(detail::trim(raw));
  double v = 0.0;
  if (!(ss >> v)) throw ConfigError("cannot parse number in '" + raw + "' for " + what);
  std::string unit;
  ss >> unit;
  std::string rest;
  if (ss >> rest) throw ConfigError("trailing tokens in '" + raw + "' for " + what);
  return {v, unit};
}

}  // namespace detail

/// Angular rate in rad/s from a value with a frequency unit.
inline double parse_frequency(const std::string& raw, const std::string& what) {
  auto [v, unit] = detail::number_and_unit(raw, what);
  const double twopi = 2.0 * std::numbers::pi;
  if (unit == "GHz") return v * twopi * 1e9;
  if (unit == "MHz") return v * twopi * 1e6;
  if (unit == "kHz") return v * twopi * 1e3;
  if (unit == "Hz") return v * twopi;
  if (unit == "Grad/s") return v * 1e9;
  if (unit == "Mrad/s") return v * 1e6;
  if (unit == "krad/s") return v * 1e3;
  if (unit == "rad/s") return v;
  if (unit.empty() && v == 0.0) return 0.0;
  throw ConfigError("frequency '" + raw + "' for " + what +
                    " needs a unit (GHz/MHz/kHz/Hz or Grad/s/Mrad/s/krad/s/rad/s)");
}

inline double parse_time(const std::string& raw, const std::string& what) {
  auto [v, unit] = detail::number_and_unit(raw, what);
  if (unit == "s") return v;
  if (unit == "ms") return v * 1e-3;
  if (unit == "us") return v * 1e-6;
  if (unit == "ns") return v * 1e-9;
  if (unit.empty() && (v == 0.0 || std::isinf(v))) return v;
  throw ConfigError("time '" + raw + "' for " + what + " needs a unit (s/ms/us/ns)");
}

inline double parse_number(const std::string& raw, const std::string& what) {
  auto [v, unit] = detail::number_and_unit(raw, what);
  if (!unit.empty()) throw ConfigError("unexpected unit in '" + raw + "' for " + what);
  return v;
}

inline long parse_integer(const std::string& raw, const std::string& what) {
  const double v = parse_number(raw, what);
  if (v != std::floor(v)) throw ConfigError("expected integer in '" + raw + "' for " + what);
  return static_cast<long>(v);
}

inline bool parse_bool(const std::string& raw, const std::string& what) {
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError("expected true/false in '" + raw + "' for " + what);
}

inline std::vector<std::string> split_list(const std::string& raw, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(raw);
  while (std::getline(ss, cur, sep)) {
    cur = detail::trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// ---- typed run configuration ---------------------------------------------------

enum class Backend { autodetect, engine, exact };

struct RunConfig {
  std::string name = "run";
  Backend backend = Backend::autodetect;
  double dt = 0.0;
  double t_end = 0.0;

  bool has_comb = false;
  model::CombSpec comb;
  double comb_spin_decay = 0.0;

  long spin_count = 0;  // explicit [spins] ensembles
  std::vector<double> spin_frequencies;
  std::vector<double> spin_couplings;
  std::vector<double> spin_decays;
  double gaussian_broadening = 0.0;

  model::CavitySpec cavity;
  model::DriveSchedule drive;
  bool spins_excited = false;

  engine::EngineOptions engine_opts;
  double fock_ceiling = 1e-9;

  long record_every = 1;
  long checkpoint_every = 0;
  std::string out_dir = "runs";

  exact::Mode oracle_mode = exact::Mode::rk4;
  long oracle_dt_factor = 1;
  long max_superket_dim = 1 << 21;

  double tol_photon = 1e-4, tol_jz = 1e-4, tol_j = 1e-2, tol_spin = 1e-4;

  double gn_floor = 1e-10;
  double revival_threshold = 0.5;
  double revival_window_frac = 0.25;
  double revival_t_min_factor = 2.0;

  std::string scan_parameter;
  std::vector<std::string> scan_values;
  int workers = 1;

  ConfigMap raw;  // canonical source for hashing and serialization
};

namespace detail {

inline std::vector<double> parse_broadcast_list(const std::string& raw, long n,
                                                const std::string& what,
                                                double (*one)(const std::string&,
                                                              const std::string&)) {
  const auto toks = split_list(raw, ',');
  std::vector<double> out;
  if (toks.size() == 1) {
    out.assign(n, one(toks[0], what));
  } else {
    if (static_cast<long>(toks.size()) != n)
      throw ConfigError(what + ": expected 1 or " + std::to_string(n) + " values");
    for (const auto& t : toks) out.push_back(one(t, what));
  }
  return out;
}

}  // namespace detail

inline RunConfig from_map(const ConfigMap& m) {
  RunConfig c;
  c.raw = m;
  auto str = [&](const char* sec, const char* key, const std::string& dflt) {
    auto v = m.get(sec, key);
    return v ? *v : dflt;
  };
  auto freq = [&](const char* sec, const char* key, double dflt) {
    auto v = m.get(sec, key);
    return v ? parse_frequency(*v, std::string(sec) + "." + key) : dflt;
  };
  auto time = [&](const char* sec, const char* key, double dflt) {
    auto v = m.get(sec, key);
    return v ? parse_time(*v, std::string(sec) + "." + key) : dflt;
  };
  auto num = [&](const char* sec, const char* key, double dflt) {
    auto v = m.get(sec, key);
    return v ? parse_number(*v, std::string(sec) + "." + key) : dflt;
  };
  auto integer = [&](const char* sec, const char* key, long dflt) {
    auto v = m.get(sec, key);
    return v ? parse_integer(*v, std::string(sec) + "." + key) : dflt;
  };

  c.name = str("run", "name", "run");
  const std::string backend = str("run", "backend", "auto");
  if (backend == "auto") c.backend = Backend::autodetect;
  else if (backend == "engine") c.backend = Backend::engine;
  else if (backend == "exact") c.backend = Backend::exact;
  else throw ConfigError("run.backend must be auto, engine or exact");
  c.dt = time("run", "dt", 0.0);
  c.t_end = time("run", "t_end", 0.0);
  if (c.dt <= 0) throw ConfigError("run.dt must be positive");
  if (c.t_end <= 0) throw ConfigError("run.t_end must be positive");

  c.cavity.frequency = freq("cavity", "frequency", 0.0);
  c.cavity.decay = freq("cavity", "decay", 0.0);
  c.cavity.fock_dim = integer("cavity", "fock_dim", 16);

  c.drive.amplitude = freq("drive", "amplitude", 0.0);
  c.drive.drive_frequency = freq("drive", "frequency", c.cavity.frequency);
  {
    auto v = m.get("drive", "pulse_end");
    c.drive.pulse_end = v ? parse_time(*v, "drive.pulse_end") : 0.0;
    if (std::isinf(c.drive.pulse_end)) c.drive.pulse_end = 2.0 * c.t_end;  // always on
  }

  const bool has_comb_section = m.get("comb", "teeth").has_value();
  const bool has_spins_section = m.get("spins", "count").has_value();
  if (has_comb_section && has_spins_section)
    throw ConfigError("specify either [comb] or [spins], not both");
  if (!has_comb_section && !has_spins_section)
    throw ConfigError("one of [comb] or [spins] is required");
  if (has_comb_section) {
    c.has_comb = true;
    c.comb.teeth = static_cast<int>(integer("comb", "teeth", 1));
    c.comb.spacing = freq("comb", "spacing", 0.0);
    c.comb.central_coupling = freq("comb", "central_coupling", 0.0);
    c.comb.envelope_width = freq("comb", "envelope_width", 0.0);
    c.comb.spins_per_tooth = static_cast<int>(integer("comb", "spins_per_tooth", 1));
    c.comb_spin_decay = freq("comb", "spin_decay", 0.0);
  } else {
    c.spin_count = integer("spins", "count", 0);
    if (c.spin_count < 0) throw ConfigError("spins.count must be >= 0");
    if (c.spin_count > 0) {
      c.spin_frequencies = detail::parse_broadcast_list(
          str("spins", "frequency", "0"), c.spin_count, "spins.frequency", parse_frequency);
      c.spin_couplings = detail::parse_broadcast_list(
          str("spins", "coupling", "0"), c.spin_count, "spins.coupling", parse_frequency);
      c.spin_decays = detail::parse_broadcast_list(str("spins", "decay", "0"), c.spin_count,
                                                   "spins.decay", parse_frequency);
      c.gaussian_broadening = freq("spins", "gaussian_broadening", 0.0);
    }
  }

  const std::string init = str("initial", "spins", "ground");
  if (init == "ground") c.spins_excited = false;
  else if (init == "excited") c.spins_excited = true;
  else throw ConfigError("initial.spins must be ground or excited");

  c.engine_opts.d_prime = integer("engine", "d_prime", 200);
  c.engine_opts.rel_floor = num("engine", "rel_floor", 1e-14);
  c.engine_opts.abort_weight = num("engine", "abort_weight", 1e-6);
  c.engine_opts.normalize_each_truncation =
      m.get("engine", "normalize_each_truncation")
          ? parse_bool(*m.get("engine", "normalize_each_truncation"),
                       "engine.normalize_each_truncation")
          : false;
  c.fock_ceiling = num("engine", "fock_ceiling", 1e-9);
  if (c.engine_opts.d_prime < 1) throw ConfigError("engine.d_prime must be >= 1");

  c.record_every = integer("output", "record_every", 1);
  c.checkpoint_every = integer("output", "checkpoint_every", 0);
  c.out_dir = str("output", "out_dir", "runs");
  if (c.record_every < 1) throw ConfigError("output.record_every must be >= 1");

  const std::string mode = str("oracle", "mode", "rk4");
  if (mode == "rk4") c.oracle_mode = exact::Mode::rk4;
  else if (mode == "expm") c.oracle_mode = exact::Mode::expm;
  else throw ConfigError("oracle.mode must be rk4 or expm");
  c.oracle_dt_factor = integer("oracle", "dt_factor", 1);
  c.max_superket_dim = integer("oracle", "max_superket_dim", 1 << 21);
  if (c.oracle_dt_factor < 1) throw ConfigError("oracle.dt_factor must be >= 1");

  c.tol_photon = num("validate", "tol_photon", 1e-4);
  c.tol_jz = num("validate", "tol_jz", 1e-4);
  c.tol_j = num("validate", "tol_j", 1e-2);
  c.tol_spin = num("validate", "tol_spin", 1e-4);

  c.gn_floor = num("observables", "gn_floor", 1e-10);
  c.revival_threshold = num("observables", "revival_threshold", 0.5);
  c.revival_window_frac = num("observables", "revival_window_frac", 0.25);
  c.revival_t_min_factor = num("observables", "revival_t_min_factor", 2.0);

  c.scan_parameter = str("scan", "parameter", "");
  if (auto v = m.get("scan", "values")) c.scan_values = split_list(*v, ';');
  c.workers = static_cast<int>(integer("scan", "workers", 1));

  return c;
}

/// The physical ensemble in the rotating frame of the drive.
inline model::EnsembleSpec build_spec(const RunConfig& c) {
  model::EnsembleSpec spec;
  if (c.has_comb) {
    spec = model::build_comb(c.comb, c.cavity, c.drive, c.comb_spin_decay);
  } else {
    spec.cavity = c.cavity;
    spec.drive = c.drive;
    for (long i = 0; i < c.spin_count; ++i)
      spec.spins.push_back(
          {c.spin_frequencies[i], c.spin_couplings[i], c.spin_decays[i]});
    if (c.gaussian_broadening > 0) {
      const auto offs =
          gaussian_quantile_offsets(static_cast<int>(c.spin_count), c.gaussian_broadening);
      for (long i = 0; i < c.spin_count; ++i) spec.spins[i].frequency += offs[i];
    }
  }
  model::validate(spec);
  return model::to_rotating_frame(spec);
}

inline std::uint64_t hash_of(const ConfigMap& m) { return fnv1a64(serialize(m)); }

// ---- presets -------------------------------------------------------------------

/// Comb pulse-train experiment at desk scale: seven teeth, one spin per tooth.
/// The stated rates are the angular values the revival timing is quoted for
/// (spacing 40e6 rad/s makes the revival interval come out at about 173 ns).
inline const char* kPresetCombN7 = R"(
[run]
name = comb-n7
backend = engine
dt = 1.570796 ns
t_end = 1500 ns

[comb]
teeth = 7
spacing = 40 Mrad/s
central_coupling = 30 Mrad/s
envelope_width = 150 Mrad/s
spins_per_tooth = 1
spin_decay = 0.01 Mrad/s

[cavity]
frequency = 0 MHz
decay = 0.4 Mrad/s
fock_dim = 16

[drive]
amplitude = 16 Mrad/s
frequency = 0 MHz
pulse_end = 31.41593 ns

[engine]
d_prime = 200

[output]
record_every = 1
)";

/// Coherently driven empty cavity; the long-time state is coherent with
/// photon number (2 eta / kappa)^2 and g2 = 1.
inline const char* kPresetEmptyCavity = R"(
[run]
name = empty-cavity
backend = exact
dt = 20 ns
t_end = 40000 ns

[spins]
count = 0

[cavity]
frequency = 0 MHz
decay = 0.4 Mrad/s
fock_dim = 14

[drive]
amplitude = 0.16 Mrad/s
frequency = 0 MHz
pulse_end = inf
)";

/// Single resonant lossless spin: vacuum Rabi oscillation of one excitation.
inline const char* kPresetJcRabi = R"(
[run]
name = jc-rabi
backend = exact
dt = 2 ns
t_end = 2000 ns

[spins]
count = 1
frequency = 0 MHz
coupling = 1 MHz
decay = 0 MHz

[cavity]
frequency = 0 MHz
decay = 0 MHz
fock_dim = 3

[initial]
spins = excited
)";

/// Weakly driven inhomogeneous eight-spin ensemble in the good-cavity regime;
/// benchmark configuration for engine-versus-oracle comparison at d_prime 16.
inline const char* kPresetBenchmarkN8 = R"(
[run]
name = benchmark-n8
backend = engine
dt = 7.07 ns
t_end = 1414 ns

[spins]
count = 8
frequency = 0 MHz
gaussian_broadening = 0.3 MHz
coupling = 0.5 MHz
decay = 0.01 MHz

[cavity]
frequency = 0 MHz
decay = 0.05 MHz
fock_dim = 3

[drive]
amplitude = 0.01 MHz
frequency = 0 MHz
pulse_end = inf

[engine]
d_prime = 16

[oracle]
mode = rk4
dt_factor = 1
)";

/// Six initially excited spins in a bad cavity with Gaussian-broadened
/// frequencies; collective emission benchmark.
inline const char* kPresetSuperradianceN6 = R"(
[run]
name = superradiance-n6
backend = engine
dt = 10 ns
t_end = 1500 ns

[spins]
count = 6
frequency = 0 MHz
gaussian_broadening = 0.5 MHz
coupling = 1 MHz
decay = 0.02 MHz

[cavity]
frequency = 0 MHz
decay = 20 MHz
fock_dim = 4

[initial]
spins = excited

[engine]
d_prime = 64

[oracle]
mode = rk4
dt_factor = 10
)";

inline ConfigMap preset(const std::string& name) {
  if (name == "comb-n7") return parse_config(kPresetCombN7);
  if (name == "empty-cavity") return parse_config(kPresetEmptyCavity);
  if (name == "jc-rabi") return parse_config(kPresetJcRabi);
  if (name == "benchmark-n8") return parse_config(kPresetBenchmarkN8);
  if (name == "superradiance-n6") return parse_config(kPresetSuperradianceN6);
  throw ConfigError("unknown preset: " + name +
                    " (available: comb-n7, empty-cavity, jc-rabi, benchmark-n8, superradiance-n6)");
}

}  // namespace spincavity::config
