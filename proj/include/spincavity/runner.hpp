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

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "spincavity/checkpoint.hpp"
#include "spincavity/config.hpp"
#include "spincavity/engine.hpp"
#include "spincavity/errors.hpp"
#include "spincavity/exact.hpp"
#include "spincavity/model.hpp"
#include "spincavity/observables.hpp"
#include "spincavity/timeseries.hpp"
#include "spincavity/trotter.hpp"

namespace spincavity::runner {

inline std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunResult {
  timeseries::TimeSeries series;
  double max_fock_seen = 0.0;
  long steps = 0;
  std::string csv_path;
};

namespace detail {

/// Advances one grid step [t0, t1]; a step straddling the pulse end is split
/// into two full second-order sub-steps meeting exactly at the boundary.
inline engine::TruncationReport advance_step(engine::SweepState& st,
                                             trotter::PropagatorCache& cache, double t0,
                                             double t1, double pulse_end, bool has_pulse,
                                             const engine::EngineOptions& opts) {
  const double eps = 1e-9 * (t1 - t0);
  if (has_pulse && t0 < pulse_end - eps && t1 > pulse_end + eps) {
    engine::TruncationReport a = engine::step(st, cache, pulse_end - t0, true, opts);
    engine::TruncationReport b = engine::step(st, cache, t1 - pulse_end, false, opts);
    a.events.insert(a.events.end(), b.events.begin(), b.events.end());
    a.step_discarded_weight += b.step_discarded_weight;
    a.max_event_weight = std::max(a.max_event_weight, b.max_event_weight);
    a.trace_error = b.trace_error;
    a.normalization *= b.normalization;
    a.max_rank = std::max(a.max_rank, b.max_rank);
    st.time = t1;
    return a;
  }
  const bool on = has_pulse && t0 < pulse_end - eps;
  engine::TruncationReport rep = engine::step(st, cache, t1 - t0, on, opts);
  st.time = t1;  // keep the grid exact against accumulated rounding
  return rep;
}

inline observables::ObservableRecord from_exact(const exact::ExactRecord& e) {
  observables::ObservableRecord r;
  r.time = e.time;
  r.n_photon = e.n_photon;
  r.g2 = e.g2;
  r.g3 = e.g3;
  r.g4 = e.g4;
  r.spin_exc_res = e.spin_exc_res;
  r.jz = e.jz;
  r.collective_j = e.collective_j;
  r.trace_drift = 1.0 - e.trace;
  r.trunc_err = 0.0;
  return r;
}

inline engine::SweepState initial_engine_state(const config::RunConfig& c,
                                               const model::EnsembleSpec& spec) {
  if (!c.spins_excited) return engine::init_state(spec, c.engine_opts);
  MatC e = MatC::Zero(2, 2);
  e(1, 1) = 1.0;
  MatC vac = MatC::Zero(spec.cavity.fock_dim, spec.cavity.fock_dim);
  vac(0, 0) = 1.0;
  return engine::init_product_state(spec, std::vector<MatC>(spec.size(), e), vac, c.engine_opts);
}

inline exact::ExactState initial_exact_state(const config::RunConfig& c,
                                             const model::EnsembleSpec& spec) {
  MatC rho = MatC::Zero(2, 2);
  rho(c.spins_excited ? 1 : 0, c.spins_excited ? 1 : 0) = 1.0;
  MatC vac = MatC::Zero(spec.cavity.fock_dim, spec.cavity.fock_dim);
  vac(0, 0) = 1.0;
  return exact::product_state(spec, std::vector<MatC>(spec.size(), rho), vac);
}

}  // namespace detail

/// Engine time evolution from an existing state (supports resume); records one
/// row per record_every steps plus the initial and final points.
inline RunResult evolve_engine(const config::RunConfig& c, const model::EnsembleSpec& spec,
                               engine::SweepState st, std::uint64_t start_step,
                               double max_fock_seen, const std::string& checkpoint_prefix) {
  const auto t_start = std::chrono::steady_clock::now();
  RunResult out;
  trotter::PropagatorCache cache(spec);
  const bool has_pulse = spec.drive.amplitude != 0.0 && spec.drive.pulse_end > 0.0;
  const long steps = std::lround(c.t_end / c.dt);
  if (has_pulse && spec.drive.pulse_end < c.t_end) cache.prebuild(c.dt, false);
  if (has_pulse) cache.prebuild(c.dt, true);
  if (!has_pulse) cache.prebuild(c.dt, false);

  auto record = [&](const engine::TruncationReport* rep) {
    out.series.rows.push_back(observables::measure(st, spec, rep, c.gn_floor));
  };
  auto fock_guard = [&]() {
    const double top = engine::fock_occupation_check(st);
    max_fock_seen = std::max(max_fock_seen, top);
    if (top > c.fock_ceiling)
      throw FockCheckFailure("top Fock occupation " + std::to_string(top) + " above ceiling " +
                             std::to_string(c.fock_ceiling) + " at t = " +
                             std::to_string(st.time * 1e9) + " ns (raise cavity.fock_dim)");
  };

  if (start_step == 0) {
    fock_guard();
    record(nullptr);
  }
  for (long s = static_cast<long>(start_step) + 1; s <= steps; ++s) {
    const double t0 = (s - 1) * c.dt, t1 = s * c.dt;
    engine::TruncationReport rep =
        detail::advance_step(st, cache, t0, t1, spec.drive.pulse_end, has_pulse, c.engine_opts);
    fock_guard();
    if (s % c.record_every == 0 || s == steps) record(&rep);
    if (c.checkpoint_every > 0 && !checkpoint_prefix.empty() &&
        (s % c.checkpoint_every == 0 || s == steps)) {
      checkpoint::Checkpoint ck;
      ck.config_text = config::serialize(c.raw);
      ck.config_hash = config::hash_of(c.raw);
      ck.step_index = static_cast<std::uint64_t>(s);
      ck.max_fock_seen = max_fock_seen;
      ck.state = st;
      char suffix[32];
      std::snprintf(suffix, sizeof(suffix), ".step%06ld.ckpt", s);
      checkpoint::save(checkpoint_prefix + suffix, ck);
    }
  }
  out.max_fock_seen = max_fock_seen;
  out.steps = steps;
  out.series.config_text = config::serialize(c.raw);
  out.series.config_hash = config::hash_of(c.raw);
  out.series.code_version = config::kCodeVersion;
  out.series.created_utc = timestamp_utc();
  out.series.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

/// Exact-oracle time evolution used for small systems and the N < 2 backends.
inline RunResult evolve_oracle(const config::RunConfig& c, const model::EnsembleSpec& spec,
                               double dt, long record_every) {
  const auto t_start = std::chrono::steady_clock::now();
  exact::ExactOptions opts;
  opts.mode = c.oracle_mode;
  opts.record_every = record_every;
  opts.assemble.max_superket_dim = c.max_superket_dim;
  exact::ExactTrace trace =
      exact::evolve_exact(spec, detail::initial_exact_state(c, spec), c.t_end, dt, opts);
  RunResult out;
  for (const auto& rec : trace.records) out.series.rows.push_back(detail::from_exact(rec));
  out.steps = std::lround(c.t_end / dt);
  out.series.config_text = config::serialize(c.raw);
  out.series.config_hash = config::hash_of(c.raw);
  out.series.code_version = config::kCodeVersion;
  out.series.created_utc = timestamp_utc();
  out.series.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

inline bool use_engine_backend(const config::RunConfig& c, const model::EnsembleSpec& spec) {
  switch (c.backend) {
    case config::Backend::engine:
      if (spec.size() < 2) throw ConfigError("engine backend requires at least 2 spins");
      return true;
    case config::Backend::exact:
      return false;
    default:
      return spec.size() >= 2;
  }
}

/// Executes a run and writes <out_dir>/<name>.csv. Returns the result; errors
/// are reported through the typed exceptions mapped to exit codes by the CLI.
inline RunResult run(const config::RunConfig& c, const std::string& out_dir) {
  const model::EnsembleSpec spec = config::build_spec(c);
  std::filesystem::create_directories(out_dir);
  const std::string base = out_dir + "/" + c.name;
  RunResult res;
  if (use_engine_backend(c, spec)) {
    res = evolve_engine(c, spec, detail::initial_engine_state(c, spec), 0, 0.0, base);
  } else {
    res = evolve_oracle(c, spec, c.dt, c.record_every);
  }
  res.csv_path = base + ".csv";
  timeseries::write_csv(res.csv_path, res.series);
  return res;
}

/// Continues a checkpointed run to its configured end and writes the rows from
/// the resume point on.
inline RunResult resume(const std::string& checkpoint_path, const std::string& out_dir) {
  checkpoint::Checkpoint ck = checkpoint::load(checkpoint_path);
  const config::RunConfig c = config::from_map(config::parse_config(ck.config_text));
  if (config::hash_of(c.raw) != ck.config_hash)
    throw ConfigError("checkpoint config hash mismatch");
  const model::EnsembleSpec spec = config::build_spec(c);
  std::filesystem::create_directories(out_dir);
  const std::string base = out_dir + "/" + c.name;
  RunResult res =
      evolve_engine(c, spec, std::move(ck.state), ck.step_index, ck.max_fock_seen, base);
  res.csv_path = base + ".csv";
  timeseries::write_csv(res.csv_path, res.series);
  return res;
}

// ---- validate -------------------------------------------------------------------

struct ObservableDeviation {
  std::string name;
  double max_dev = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_dev <= tolerance; }
};

struct ValidationReport {
  std::vector<ObservableDeviation> deviations;
  long rows_compared = 0;
  bool pass = true;
  std::string engine_csv, oracle_csv;
};

/// Runs engine and oracle on the identical physical configuration and reports
/// the per-observable maximum deviation against the configured tolerances.
inline ValidationReport validate(const config::RunConfig& c, const std::string& out_dir) {
  const model::EnsembleSpec spec = config::build_spec(c);
  if (spec.size() < 2) throw ConfigError("validate requires at least 2 spins");
  std::filesystem::create_directories(out_dir);

  RunResult eng = evolve_engine(c, spec, detail::initial_engine_state(c, spec), 0, 0.0, "");
  RunResult ora = evolve_oracle(c, spec, c.dt / static_cast<double>(c.oracle_dt_factor),
                                c.record_every * c.oracle_dt_factor);

  ValidationReport rep;
  rep.engine_csv = out_dir + "/" + c.name + ".engine.csv";
  rep.oracle_csv = out_dir + "/" + c.name + ".oracle.csv";
  timeseries::write_csv(rep.engine_csv, eng.series);
  timeseries::write_csv(rep.oracle_csv, ora.series);

  const auto& a = eng.series.rows;
  const auto& b = ora.series.rows;
  rep.rows_compared = static_cast<long>(std::min(a.size(), b.size()));
  ObservableDeviation photon{"n_photon", 0, c.tol_photon}, jz{"jz", 0, c.tol_jz},
      cj{"J", 0, c.tol_j}, spin{"spin_exc_res", 0, c.tol_spin};
  for (long i = 0; i < rep.rows_compared; ++i) {
    if (std::abs(a[i].time - b[i].time) > 1e-9 * std::max(1.0, std::abs(a[i].time)))
      throw ConfigError("validate: engine and oracle grids are misaligned");
    photon.max_dev = std::max(photon.max_dev, std::abs(a[i].n_photon - b[i].n_photon));
    jz.max_dev = std::max(jz.max_dev, std::abs(a[i].jz - b[i].jz));
    cj.max_dev = std::max(cj.max_dev, std::abs(a[i].collective_j - b[i].collective_j));
    spin.max_dev = std::max(spin.max_dev, std::abs(a[i].spin_exc_res - b[i].spin_exc_res));
  }
  rep.deviations = {photon, jz, cj, spin};
  for (const auto& d : rep.deviations) rep.pass = rep.pass && d.pass();

  std::ofstream f(out_dir + "/" + c.name + ".validate.txt");
  f << "validate " << c.name << ": rows=" << rep.rows_compared << "\n";
  for (const auto& d : rep.deviations)
    f << "  " << d.name << ": max|dev| = " << timeseries::format_double(d.max_dev)
      << "  tol = " << timeseries::format_double(d.tolerance) << "  "
      << (d.pass() ? "pass" : "FAIL") << "\n";
  f << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep;
}

// ---- scan -----------------------------------------------------------------------

struct ScanPointSummary {
  std::string value;
  std::string status = "ok";
  std::string csv_path;
  double delta_tau = 0.0;
  long revivals = 0;
  double g2_min = std::numeric_limits<double>::quiet_NaN();
  double final_trace_drift = 0.0;
};

struct ScanResult {
  std::vector<ScanPointSummary> points;
  std::string summary_path;
};

/// Independent runs over a one-parameter grid; per-point failures are isolated
/// and reported while the scan continues.
inline ScanResult scan(const config::RunConfig& c, const std::string& out_dir, int workers) {
  if (c.scan_parameter.empty() || c.scan_values.empty())
    throw ConfigError("scan requires scan.parameter and scan.values");
  const std::size_t dot = c.scan_parameter.find('.');
  if (dot == std::string::npos)
    throw ConfigError("scan.parameter must be section.key");
  const std::string sec = c.scan_parameter.substr(0, dot);
  const std::string key = c.scan_parameter.substr(dot + 1);
  std::filesystem::create_directories(out_dir);

  ScanResult out;
  out.points.resize(c.scan_values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= c.scan_values.size()) return;
      ScanPointSummary& p = out.points[i];
      p.value = c.scan_values[i];
      try {
        config::ConfigMap m = c.raw;
        m.set(sec, key, p.value);
        m.set("run", "name", c.name + "-p" + std::to_string(i));
        m.set("scan", "parameter", "");
        m.set("scan", "values", "");
        config::RunConfig pc = config::from_map(m);
        RunResult r = run(pc, out_dir);
        p.csv_path = r.csv_path;
        const auto rev = timeseries::detect_revivals(
            r.series.rows, pc.revival_t_min_factor * pc.drive.pulse_end, pc.revival_threshold);
        p.delta_tau = rev.delta_tau;
        p.revivals = static_cast<long>(rev.peak_times.size());
        double g2min = std::numeric_limits<double>::infinity();
        for (const auto& row : r.series.rows)
          if (std::isfinite(row.g2)) g2min = std::min(g2min, row.g2);
        p.g2_min = std::isfinite(g2min) ? g2min : std::numeric_limits<double>::quiet_NaN();
        if (!r.series.rows.empty()) p.final_trace_drift = r.series.rows.back().trace_drift;
      } catch (const std::exception& e) {
        p.status = std::string("error: ") + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::max(1, workers);
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  out.summary_path = out_dir + "/" + c.name + ".scan.csv";
  std::ofstream f(out.summary_path);
  f << "index,value,status,delta_tau_ns,revivals,g2_min,final_trace_drift,csv\n";
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const auto& p = out.points[i];
    f << i << ",\"" << p.value << "\",\"" << p.status << "\","
      << timeseries::format_double(p.delta_tau * 1e9) << ',' << p.revivals << ','
      << timeseries::format_double(p.g2_min) << ','
      << timeseries::format_double(p.final_trace_drift) << ',' << p.csv_path << "\n";
  }
  return out;
}

}  // namespace spincavity::runner
