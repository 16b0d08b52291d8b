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
#include <functional>
#include <limits>
#include <vector>

#include "spincavity/errors.hpp"
#include "spincavity/linalg.hpp"
#include "spincavity/model.hpp"
#include "spincavity/superop.hpp"

namespace spincavity::exact {

/// Full-space vectorized state of the joint spin-ensemble (x) cavity system.
struct ExactState {
  VecC superket;
  double time = 0.0;
};

/// Product superket |rho_1> (x) ... (x) |rho_N> (x) |rho_c> in the joint basis.
/// Note the joint superket of a product state is a basis permutation of the
/// per-factor product, built here directly by index arithmetic.
inline ExactState product_state(const model::EnsembleSpec& spec,
                                const std::vector<MatC>& spin_rhos, const MatC& cavity_rho) {
  const int n = spec.size();
  if (static_cast<int>(spin_rhos.size()) != n)
    throw SpecError("product_state: need one 2x2 density matrix per spin");
  const long nc = spec.cavity.fock_dim;
  const long d = superop::full_hilbert_dim(spec);
  VecC v(d * d);
  for (long I = 0; I < d; ++I) {
    const long ic = I % nc;
    const long si = I / nc;
    for (long J = 0; J < d; ++J) {
      const long jc = J % nc;
      const long sj = J / nc;
      cd amp = cavity_rho(ic, jc);
      for (int k = 0; k < n && amp != cd{0.0, 0.0}; ++k) {
        const long bi = (si >> (n - 1 - k)) & 1;
        const long bj = (sj >> (n - 1 - k)) & 1;
        amp *= spin_rhos[k](bi, bj);
      }
      v[I * d + J] = amp;
    }
  }
  return {v, 0.0};
}

inline ExactState ground_state(const model::EnsembleSpec& spec) {
  MatC g = MatC::Zero(2, 2);
  g(0, 0) = 1.0;
  MatC vac = MatC::Zero(spec.cavity.fock_dim, spec.cavity.fock_dim);
  vac(0, 0) = 1.0;
  return product_state(spec, std::vector<MatC>(spec.size(), g), vac);
}

inline double trace_of(const VecC& superket) {
  const long d = std::lround(std::sqrt(static_cast<double>(superket.size())));
  cd tr = 0.0;
  for (long i = 0; i < d; ++i) tr += superket[i * d + i];
  return tr.real();
}

/// <O> = Tr[O rho] evaluated as sum over the nonzeros of O against the
/// devectorized superket, without forming any dense matrix.
inline cd expectation(const SpMatC& op_hilbert, const VecC& superket) {
  const long d = op_hilbert.rows();
  cd acc = 0.0;
  for (long c = 0; c < op_hilbert.outerSize(); ++c)
    for (SpMatC::InnerIterator it(op_hilbert, c); it; ++it)
      acc += it.value() * superket[it.col() * d + it.row()];
  return acc;
}

/// Reduced cavity density matrix by partial trace over all spins.
inline MatC reduced_cavity(const model::EnsembleSpec& spec, const VecC& superket) {
  const long nc = spec.cavity.fock_dim;
  const long d = superop::full_hilbert_dim(spec);
  const long ns = d / nc;
  MatC rc = MatC::Zero(nc, nc);
  for (long s = 0; s < ns; ++s)
    for (long p = 0; p < nc; ++p)
      for (long q = 0; q < nc; ++q) rc(p, q) += superket[(s * nc + p) * d + (s * nc + q)];
  return rc;
}

/// Prebuilt Hilbert-space observables for one spec.
struct ObservableOps {
  SpMatC photon_number;
  std::vector<SpMatC> photon_moments;  // a^dag^n a^n for n = 2..4
  std::vector<SpMatC> spin_excitation; // sigma+ sigma- per spin
  SpMatC jz;                           // sum sigma_z / 2
  SpMatC collective_j;                 // (sum sigma+)(sum sigma-)
  std::vector<int> resonant;

  explicit ObservableOps(const model::EnsembleSpec& spec) {
    using namespace superop;
    const MatC a = destroy(spec.cavity.fock_dim);
    photon_number = op_on_cavity(spec, MatC(a.adjoint() * a));
    for (int n = 2; n <= 4; ++n) {
      MatC an = a;
      for (int i = 1; i < n; ++i) an = MatC(an * a);
      photon_moments.push_back(op_on_cavity(spec, MatC(an.adjoint() * an)));
    }
    const long d = full_hilbert_dim(spec);
    SpMatC sp(d, d), sm(d, d);
    jz = SpMatC(d, d);
    for (int k = 1; k <= spec.size(); ++k) {
      SpMatC spk = op_on_spin(spec, k, sigma_plus());
      sp += spk;
      sm += SpMatC(spk.adjoint());
      jz += SpMatC(0.5 * op_on_spin(spec, k, sigma_z()));
      spin_excitation.push_back(SpMatC(spk * SpMatC(spk.adjoint())));
    }
    collective_j = SpMatC(sp * sm);
    resonant = model::resonant_spin_indices(spec);
  }
};

struct ExactRecord {
  double time = 0.0;
  double n_photon = 0.0;
  double g2 = std::numeric_limits<double>::quiet_NaN();
  double g3 = std::numeric_limits<double>::quiet_NaN();
  double g4 = std::numeric_limits<double>::quiet_NaN();
  double spin_exc_res = 0.0;
  double jz = 0.0;
  double collective_j = 0.0;
  double trace = 1.0;
};

inline ExactRecord measure(const ObservableOps& ops, const VecC& v, double time,
                           double gn_floor = 1e-10) {
  ExactRecord r;
  r.time = time;
  r.trace = trace_of(v);
  const double tr = r.trace != 0.0 ? r.trace : 1.0;
  r.n_photon = expectation(ops.photon_number, v).real() / tr;
  if (r.n_photon > gn_floor) {
    double m = r.n_photon;
    double pw = m * m;
    r.g2 = expectation(ops.photon_moments[0], v).real() / tr / pw;
    pw *= m;
    r.g3 = expectation(ops.photon_moments[1], v).real() / tr / pw;
    pw *= m;
    r.g4 = expectation(ops.photon_moments[2], v).real() / tr / pw;
  }
  r.jz = expectation(ops.jz, v).real() / tr;
  r.collective_j = expectation(ops.collective_j, v).real() / tr;
  if (!ops.resonant.empty()) {
    double acc = 0.0;
    for (int i : ops.resonant) acc += expectation(ops.spin_excitation[i], v).real() / tr;
    r.spin_exc_res = acc / static_cast<double>(ops.resonant.size());
  }
  return r;
}

enum class Mode { rk4, expm };

struct ExactOptions {
  Mode mode = Mode::rk4;
  long record_every = 1;
  bool store_states = false;
  bool observables = true;
  superop::AssembleOptions assemble;
};

struct ExactTrace {
  std::vector<ExactRecord> records;
  std::vector<ExactState> states;  // populated when store_states
  ExactState final_state;
};

namespace detail {

inline void rk4_step(const SpMatC& lind, VecC& y, double h, VecC& k1, VecC& k2, VecC& k3,
                     VecC& k4) {
  k1 = lind * y;
  k2 = lind * VecC(y + 0.5 * h * k1);
  k3 = lind * VecC(y + 0.5 * h * k2);
  k4 = lind * VecC(y + h * k3);
  y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Integrates d|rho>/dt = L|rho> on the full space. The generator switches
/// exactly at the pulse end; a step that straddles it is split in two.
/// rk4: classic fixed-step fourth order. expm: dense exp(L dt) stepping
/// (zero time-discretization; only for small dimensions).
inline ExactTrace evolve_exact(const model::EnsembleSpec& spec, const ExactState& rho0,
                               double t_end, double dt, const ExactOptions& opts = {}) {
  if (dt <= 0) throw SpecError("evolve_exact: dt must be positive");
  const SpMatC l_off = superop::assemble_full(spec, false, opts.assemble);
  const bool has_pulse = spec.drive.amplitude != 0.0 && spec.drive.pulse_end > 0.0;
  SpMatC l_on;
  if (has_pulse) l_on = superop::assemble_full(spec, true, opts.assemble);
  const double tp = has_pulse ? spec.drive.pulse_end : 0.0;

  MatC e_on, e_off;  // expm mode caches for the plain step
  const long dim = l_off.rows();
  if (opts.mode == Mode::expm) {
    if (dim > 4096) throw OracleCapExceeded("expm stepping limited to superket dim 4096");
    e_off = expm(MatC(MatC(l_off) * dt));
    if (has_pulse) e_on = expm(MatC(MatC(l_on) * dt));
  }

  ExactTrace out;
  VecC y = rho0.superket;
  double t = rho0.time;
  const long steps = std::lround((t_end - rho0.time) / dt);
  out.records.reserve(steps / opts.record_every + 2);
  ObservableOps ops(spec);
  VecC k1, k2, k3, k4;

  auto record = [&](long idx) {
    if (opts.observables) out.records.push_back(measure(ops, y, t));
    if (opts.store_states) out.states.push_back({y, t});
    (void)idx;
  };
  record(0);

  const double eps = 1e-9 * dt;
  for (long s = 1; s <= steps; ++s) {
    const double t0 = t, t1 = rho0.time + s * dt;
    if (has_pulse && t0 < tp - eps && t1 > tp + eps) {
      // split at the pulse boundary
      if (opts.mode == Mode::rk4) {
        detail::rk4_step(l_on, y, tp - t0, k1, k2, k3, k4);
        detail::rk4_step(l_off, y, t1 - tp, k1, k2, k3, k4);
      } else {
        y = expm(MatC(MatC(l_on) * (tp - t0))) * y;
        y = expm(MatC(MatC(l_off) * (t1 - tp))) * y;
      }
    } else {
      const bool on = has_pulse && t0 < tp - eps;
      if (opts.mode == Mode::rk4) {
        detail::rk4_step(on ? l_on : l_off, y, t1 - t0, k1, k2, k3, k4);
      } else {
        y = (on ? e_on : e_off) * y;
      }
    }
    t = t1;
    if (s % opts.record_every == 0 || s == steps) record(s);
  }
  out.final_state = {y, t};
  return out;
}

struct SteadyStateResult {
  ExactState state;
  std::vector<VecC> null_basis;  // all null directions when degenerate
  double residual = 0.0;         // ||L v|| / (||L||_F ||v||)
  bool degenerate = false;
};

/// Steady state via the Liouvillian null space (dense SVD; drive treated as
/// always on). The smallest-singular-value direction is trace-normalized; a
/// degenerate null space is reported with all basis vectors.
inline SteadyStateResult steady_state(const model::EnsembleSpec& spec,
                                      const superop::AssembleOptions& aopts = {}) {
  SpMatC lsp = superop::assemble_full(spec, true, aopts);
  const long dim = lsp.rows();
  if (dim > 4096) throw OracleCapExceeded("steady_state: dense null-space solve limited to dim 4096");
  MatC l(lsp);
  MatC u, vh;
  VecD s;
  spincavity::detail::svd_economy(l, u, s, vh);
  const double smax = s[0] > 0 ? s[0] : 1.0;
  SteadyStateResult out;
  for (long i = s.size() - 1; i >= 0 && s[i] <= 1e-12 * smax; --i)
    out.null_basis.push_back(vh.row(i).adjoint());
  if (out.null_basis.empty()) out.null_basis.push_back(vh.row(s.size() - 1).adjoint());
  out.degenerate = out.null_basis.size() > 1;
  // pick the direction with the largest trace component
  long best = 0;
  double best_tr = -1.0;
  for (std::size_t i = 0; i < out.null_basis.size(); ++i) {
    const double tr = std::abs(trace_of(out.null_basis[i]));
    if (tr > best_tr) {
      best_tr = tr;
      best = static_cast<long>(i);
    }
  }
  VecC v = out.null_basis[best];
  const double tr = trace_of(v);
  if (std::abs(tr) < 1e-14) throw SpecError("steady_state: null vector has vanishing trace");
  v /= tr;
  const double lnorm = MatC(lsp).norm();
  out.residual = (lsp * v).norm() / (lnorm * v.norm());
  out.state = {v, 0.0};
  return out;
}

}  // namespace spincavity::exact
