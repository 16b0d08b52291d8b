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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spincavity/errors.hpp"
#include "spincavity/observables.hpp"

namespace spincavity::timeseries {

inline constexpr const char* kFormatTag = "spincavity-timeseries v1";
inline constexpr const char* kHeader =
    "time_ns,n_photon,g2,g3,g4,spin_exc_res,jz,J,trace_drift,trunc_err";

struct TimeSeries {
  std::vector<observables::ObservableRecord> rows;
  std::string config_text;  // canonical config, reproduces the run
  std::uint64_t config_hash = 0;
  std::string code_version;
  std::string created_utc;  // metadata only, excluded from determinism
  double wall_seconds = 0.0;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Payload below the metadata block is deterministic for identical configs.
inline void write_csv(const std::string& path, const TimeSeries& ts) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << "# " << kFormatTag << "\n";
  char hex[32];
  std::snprintf(hex, sizeof(hex), "0x%016llx", static_cast<unsigned long long>(ts.config_hash));
  f << "# config-hash: " << hex << "\n";
  f << "# code-version: " << ts.code_version << "\n";
  if (!ts.created_utc.empty()) f << "# created-utc: " << ts.created_utc << "\n";
  f << "# wall-seconds: " << format_double(ts.wall_seconds) << "\n";
  f << "# config-begin\n";
  std::istringstream cfg(ts.config_text);
  std::string line;
  while (std::getline(cfg, line)) f << "# " << line << "\n";
  f << "# config-end\n";
  f << kHeader << "\n";
  for (const auto& r : ts.rows) {
    f << format_double(r.time * 1e9) << ',' << format_double(r.n_photon) << ','
      << format_double(r.g2) << ',' << format_double(r.g3) << ',' << format_double(r.g4) << ','
      << format_double(r.spin_exc_res) << ',' << format_double(r.jz) << ','
      << format_double(r.collective_j) << ',' << format_double(r.trace_drift) << ','
      << format_double(r.trunc_err) << "\n";
  }
}

inline TimeSeries read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open time-series file: " + path);
  TimeSeries ts;
  std::string line;
  bool in_config = false;
  while (std::getline(f, line)) {
    if (line.rfind("# ", 0) == 0 || line == "#") {
      std::string body = line.size() > 2 ? line.substr(2) : "";
      if (body == "config-begin") {
        in_config = true;
      } else if (body == "config-end") {
        in_config = false;
      } else if (in_config) {
        ts.config_text += body;
        ts.config_text += '\n';
      } else if (body.rfind("config-hash: ", 0) == 0) {
        ts.config_hash = std::stoull(body.substr(13), nullptr, 16);
      } else if (body.rfind("code-version: ", 0) == 0) {
        ts.code_version = body.substr(14);
      } else if (body.rfind("wall-seconds: ", 0) == 0) {
        ts.wall_seconds = std::stod(body.substr(14));
      }
      continue;
    }
    if (line.empty() || line == kHeader) continue;
    observables::ObservableRecord r;
    std::istringstream ss(line);
    std::string tok;
    double* fields[10] = {&r.time, &r.n_photon,       &r.g2, &r.g3,
                          &r.g4,   &r.spin_exc_res,   &r.jz, &r.collective_j,
                          &r.trace_drift, &r.trunc_err};
    for (int i = 0; i < 10 && std::getline(ss, tok, ','); ++i) *fields[i] = std::stod(tok);
    r.time *= 1e-9;
    ts.rows.push_back(r);
  }
  return ts;
}

/// Extracts the payload (header plus data rows) for determinism comparisons.
inline std::string payload_of(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open file: " + path);
  std::string out, line;
  while (std::getline(f, line))
    if (line.rfind('#', 0) != 0) {
      out += line;
      out += '\n';
    }
  return out;
}

struct RevivalAnalysis {
  std::vector<double> peak_times;    // seconds
  std::vector<double> peak_heights;  // photon number at the peak
  double delta_tau = 0.0;            // mean spacing of consecutive peaks
};

/// Revival peaks: local maxima of the photon number at t >= t_min rising
/// above threshold times the maximum over the detection window; the spacing
/// estimate is the mean gap.
inline RevivalAnalysis detect_revivals(const std::vector<observables::ObservableRecord>& rows,
                                       double t_min, double threshold = 0.5) {
  RevivalAnalysis out;
  double gmax = 0.0;
  for (const auto& r : rows)
    if (r.time >= t_min) gmax = std::max(gmax, r.n_photon);
  if (gmax <= 0.0) return out;
  const double floor = threshold * gmax;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    if (rows[i].time < t_min) continue;
    const double h = rows[i].n_photon;
    if (h > floor && h > rows[i - 1].n_photon && h >= rows[i + 1].n_photon)
      out.peak_times.push_back(rows[i].time), out.peak_heights.push_back(h);
  }
  if (out.peak_times.size() >= 2) {
    double acc = 0.0;
    for (std::size_t i = 1; i < out.peak_times.size(); ++i)
      acc += out.peak_times[i] - out.peak_times[i - 1];
    out.delta_tau = acc / static_cast<double>(out.peak_times.size() - 1);
  }
  return out;
}

}  // namespace spincavity::timeseries
