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

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "spincavity/exact.hpp"

using namespace spincavity;
using namespace spincavity::exact;

namespace {

model::EnsembleSpec jaynes_cummings(double g, long nc) {
  model::EnsembleSpec spec;
  spec.spins.push_back({0.0, g, 0.0});
  spec.cavity = {0.0, 0.0, nc};
  spec.drive = {0.0, 0.0, 0.0};
  return spec;
}

ExactState excited_spin_vacuum(const model::EnsembleSpec& spec) {
  MatC e = MatC::Zero(2, 2);
  e(1, 1) = 1.0;
  MatC vac = MatC::Zero(spec.cavity.fock_dim, spec.cavity.fock_dim);
  vac(0, 0) = 1.0;
  return product_state(spec, {e}, vac);
}

}  // namespace

TEST_CASE("vacuum Rabi oscillation matches sin^2(gt)") {
  const double g = 2.0e6;
  auto spec = jaynes_cummings(g, 2);
  const double period = M_PI / g;  // <n> period of sin^2(gt)
  ExactOptions opts;
  opts.record_every = 1;
  for (auto mode : {Mode::rk4, Mode::expm}) {
    opts.mode = mode;
    auto trace = evolve_exact(spec, excited_spin_vacuum(spec), 2 * period, period / 500, opts);
    double worst = 0.0;
    for (const auto& r : trace.records) {
      const double want = std::pow(std::sin(g * r.time), 2);
      worst = std::max(worst, std::abs(r.n_photon - want));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("driven damped cavity reaches the coherent steady state") {
  model::EnsembleSpec spec;
  spec.cavity = {0.0, 0.5e6, 14};
  spec.drive = {0.1e6, 0.0, 1.0};  // always on over the run
  const double nbar_want = std::pow(2 * spec.drive.amplitude / spec.cavity.decay, 2);

  ExactOptions opts;
  opts.record_every = 200;
  const double t_end = 40.0 / spec.cavity.decay;
  auto trace = evolve_exact(spec, ground_state(spec), t_end, 2e-8, opts);
  const auto& last = trace.records.back();
  CHECK(last.n_photon == Catch::Approx(nbar_want).epsilon(1e-5));
  CHECK(last.g2 == Catch::Approx(1.0).margin(1e-4));

  SECTION("steady_state solver agrees with the long-time limit") {
    auto ss = steady_state(spec);
    CHECK(ss.residual <= 1e-10);
    ObservableOps ops(spec);
    auto rec = measure(ops, ss.state.superket, 0.0);
    CHECK(rec.n_photon == Catch::Approx(last.n_photon).margin(1e-8));
    CHECK(rec.g2 == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("undriven lossy system decays to the joint ground state") {
  model::EnsembleSpec spec;
  spec.spins.push_back({0.6e6, 1.0e6, 0.4e6});
  spec.cavity = {0.0, 0.8e6, 3};
  spec.drive = {0.0, 0.0, 0.0};
  auto ss = steady_state(spec);
  MatC rho = superop::devectorize(ss.state.superket);
  CHECK(rho(0, 0).real() == Catch::Approx(1.0).margin(1e-9));
  CHECK(ss.residual <= 1e-10);
}

TEST_CASE("two excited spins emit faster than independent spins (superradiance)") {
  const double g = 1.0e6, kappa = 20e6, gamma = 0.05e6;
  model::EnsembleSpec spec;
  spec.spins.push_back({0.0, g, gamma});
  spec.spins.push_back({0.0, g, gamma});
  spec.cavity = {0.0, kappa, 3};
  spec.drive = {0.0, 0.0, 0.0};
  MatC e = MatC::Zero(2, 2);
  e(1, 1) = 1.0;
  MatC vac = MatC::Zero(3, 3);
  vac(0, 0) = 1.0;
  auto rho0 = product_state(spec, {e, e}, vac);

  // analytic oracle: one spin alone decays as the 2x2 non-Hermitian sector
  const double t_probe = 5.0e-6;
  const double single = testing::single_spin_excitation(g, kappa, gamma, t_probe);

  ExactOptions opts;
  opts.record_every = 100;
  auto trace = evolve_exact(spec, rho0, t_probe, 1e-9, opts);
  double total_exc = 0.0;
  {
    ObservableOps ops(spec);
    const auto& v = trace.final_state.superket;
    for (const auto& op : ops.spin_excitation) total_exc += expectation(op, v).real();
  }
  // collective decay outpaces two independent emitters
  CHECK(total_exc < 2 * single * 0.97);
}

TEST_CASE("trace, hermiticity and positivity hold along a driven run") {
  model::EnsembleSpec spec;
  spec.spins.push_back({-0.8e6, 1.2e6, 0.15e6});
  spec.spins.push_back({0.5e6, 0.9e6, 0.1e6});
  spec.cavity = {0.2e6, 0.4e6, 3};
  spec.drive = {0.3e6, 0.0, 2e-6};  // pulse ends mid-run
  ExactOptions opts;
  opts.record_every = 50;
  opts.store_states = true;
  auto trace = evolve_exact(spec, ground_state(spec), 4e-6, 2.5e-9, opts);
  for (const auto& s : trace.states) {
    CHECK(std::abs(1.0 - trace_of(s.superket)) <= 1e-8);
    MatC rho = superop::devectorize(s.superket);
    CHECK((rho - rho.adjoint().eval()).cwiseAbs().maxCoeff() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<MatC> es(MatC(0.5 * (rho + rho.adjoint())));
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("rk4 order: halving dt shrinks the terminal error fourth-order") {
  auto spec = jaynes_cummings(2.0e6, 2);
  spec.spins[0].decay = 0.2e6;
  spec.cavity.decay = 0.3e6;
  const double t_end = 1.0e-6;
  ExactOptions ref_opts;
  ref_opts.mode = Mode::expm;
  ref_opts.record_every = 1 << 20;
  auto ref = evolve_exact(spec, excited_spin_vacuum(spec), t_end, t_end, ref_opts);

  auto terminal_err = [&](double dt) {
    ExactOptions o;
    o.record_every = 1 << 20;
    auto tr = evolve_exact(spec, excited_spin_vacuum(spec), t_end, dt, o);
    return (tr.final_state.superket - ref.final_state.superket).norm();
  };
  const double e1 = terminal_err(t_end / 40);
  const double e2 = terminal_err(t_end / 80);
  const double ratio = e1 / e2;
  // fourth order: factor 16 within x1.5
  CHECK(ratio >= 16.0 / 1.5);
  CHECK(ratio <= 16.0 * 1.5);
}

TEST_CASE("pulse boundary off the step grid is split exactly") {
  model::EnsembleSpec spec;
  spec.spins.push_back({0.3e6, 1.0e6, 0.1e6});
  spec.cavity = {0.0, 0.4e6, 3};
  spec.drive = {0.5e6, 0.0, 0.45e-6};  // not a multiple of dt below
  ExactOptions coarse;
  coarse.record_every = 1 << 20;
  auto a = evolve_exact(spec, ground_state(spec), 1.2e-6, 1.0e-7, coarse);
  ExactOptions fine;
  fine.record_every = 1 << 20;
  auto b = evolve_exact(spec, ground_state(spec), 1.2e-6, 2.5e-9, fine);
  CHECK((a.final_state.superket - b.final_state.superket).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("oracle dimension cap raises the typed error") {
  model::EnsembleSpec spec;
  for (int i = 0; i < 12; ++i) spec.spins.push_back({0.0, 1e6, 0.0});
  spec.cavity = {0.0, 0.0, 4};
  CHECK_THROWS_AS(superop::assemble_full(spec, false), OracleCapExceeded);
  CHECK_THROWS_AS(evolve_exact(spec, ExactState{VecC::Zero(16), 0.0}, 1e-6, 1e-9),
                  OracleCapExceeded);
}

TEST_CASE("degenerate null space is reported with all basis vectors") {
  // lossless resonant JC: every H-commuting state is stationary
  auto spec = jaynes_cummings(1.5e6, 2);
  auto ss = steady_state(spec);
  CHECK(ss.degenerate);
  CHECK(ss.null_basis.size() >= 2);
  CHECK(ss.residual <= 1e-10);
}
