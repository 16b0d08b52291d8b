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

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spincavity/config.hpp"
#include "spincavity/errors.hpp"
#include "spincavity/runner.hpp"
#include "spincavity/timeseries.hpp"

namespace {

using namespace spincavity;

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

config::RunConfig load_config(const std::string& config_path, const std::string& preset,
                              long checkpoint_every) {
  if (!config_path.empty() && !preset.empty())
    throw ConfigError("give either --config or --preset, not both");
  if (config_path.empty() && preset.empty())
    throw ConfigError("one of --config or --preset is required");
  config::ConfigMap m =
      preset.empty() ? config::parse_config_file(config_path) : config::preset(preset);
  if (checkpoint_every > 0)
    m.set("output", "checkpoint_every", std::to_string(checkpoint_every));
  return config::from_map(m);
}

int dispatch(const std::string& cmd, const std::string& config_path, const std::string& preset,
             std::string out_dir, int workers, long checkpoint_every,
             const std::string& checkpoint_path) {
  if (cmd == "resume") {
    if (checkpoint_path.empty()) throw ConfigError("resume requires --checkpoint PATH");
    if (out_dir.empty()) out_dir = env_or("SPINCAVITY_OUT", "runs");
    runner::RunResult r = runner::resume(checkpoint_path, out_dir);
    std::cout << "resumed -> " << r.csv_path << " (" << r.series.rows.size() << " rows, "
              << timeseries::format_double(r.series.wall_seconds) << " s)\n";
    return kExitOk;
  }
  config::RunConfig c = load_config(config_path, preset, checkpoint_every);
  if (out_dir.empty()) out_dir = env_or("SPINCAVITY_OUT", c.out_dir);
  if (workers <= 0) workers = std::atoi(env_or("SPINCAVITY_WORKERS", "0").c_str());
  if (workers <= 0) workers = c.workers;

  if (cmd == "run") {
    runner::RunResult r = runner::run(c, out_dir);
    std::cout << "run " << c.name << " -> " << r.csv_path << " (" << r.series.rows.size()
              << " rows, " << r.steps << " steps, max top-Fock "
              << timeseries::format_double(r.max_fock_seen) << ", "
              << timeseries::format_double(r.series.wall_seconds) << " s)\n";
    return kExitOk;
  }
  if (cmd == "validate") {
    runner::ValidationReport rep = runner::validate(c, out_dir);
    std::cout << "validate " << c.name << ": rows=" << rep.rows_compared << "\n";
    for (const auto& d : rep.deviations)
      std::cout << "  " << d.name << ": max|dev| = " << timeseries::format_double(d.max_dev)
                << "  tol = " << timeseries::format_double(d.tolerance) << "  "
                << (d.pass() ? "pass" : "FAIL") << "\n";
    std::cout << (rep.pass ? "PASS" : "FAIL") << "\n";
    return rep.pass ? kExitOk : kExitFailure;
  }
  if (cmd == "scan") {
    runner::ScanResult res = runner::scan(c, out_dir, workers);
    std::cout << "scan " << c.name << " -> " << res.summary_path << "\n";
    bool all_ok = true;
    for (const auto& p : res.points) {
      std::cout << "  " << p.value << ": " << p.status;
      if (p.status == "ok")
        std::cout << "  delta_tau = " << timeseries::format_double(p.delta_tau * 1e9)
                  << " ns, revivals = " << p.revivals
                  << ", g2_min = " << timeseries::format_double(p.g2_min);
      std::cout << "\n";
      all_ok = all_ok && p.status == "ok";
    }
    return all_ok ? kExitOk : kExitFailure;
  }
  throw ConfigError("unknown command: " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spincavity: renormalized Lindblad dynamics of spin ensembles in a driven cavity"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir, checkpoint_path;
  int workers = 0;
  long checkpoint_every = 0;

  auto add_common = [&](CLI::App* sub, bool with_inputs) {
    if (with_inputs) {
      sub->add_option("--config", config_path, "configuration file (key = value sections)");
      sub->add_option("--preset", preset, "built-in experiment preset name");
    }
    sub->add_option("--out", out_dir, "output directory (env SPINCAVITY_OUT)");
    sub->add_option("--workers", workers, "parallel workers for scan (env SPINCAVITY_WORKERS)");
    sub->add_option("--checkpoint-every", checkpoint_every, "write a checkpoint every K steps");
  };

  add_common(app.add_subcommand("run", "evolve one configuration and write the time series"),
             true);
  add_common(app.add_subcommand("validate",
                                "run engine and exact oracle on one configuration and compare"),
             true);
  add_common(app.add_subcommand("scan", "independent runs over a parameter grid"), true);
  auto* resume_cmd = app.add_subcommand("resume", "continue a checkpointed run");
  resume_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  add_common(resume_cmd, false);

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    return dispatch(cmd, config_path, preset, out_dir, workers, checkpoint_every,
                    checkpoint_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return spincavity::kExitConfigError;
  } catch (const spincavity::SpecError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return spincavity::kExitConfigError;
  } catch (const spincavity::TruncationAbort& e) {
    std::cerr << "truncation abort: " << e.what() << "\n";
    return spincavity::kExitTruncationAbort;
  } catch (const spincavity::FockCheckFailure& e) {
    std::cerr << "fock check failure: " << e.what() << "\n";
    return spincavity::kExitFockCheckFailure;
  } catch (const spincavity::OracleCapExceeded& e) {
    std::cerr << "oracle cap exceeded: " << e.what() << "\n";
    return spincavity::kExitOracleCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return spincavity::kExitFailure;
  }
}
