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
#include <limits>
#include <vector>

#include "spincavity/engine.hpp"
#include "spincavity/linalg.hpp"
#include "spincavity/model.hpp"
#include "spincavity/superop.hpp"

namespace spincavity::observables {

// Expectation values are functionals <t| O |rho>. In the product superket
// basis the functional for Tr[O .] on one factor is the ket vec(O^dag), so a
// block observable is carried through the isometry stack as a ket, updated by
// U^dag at each absorption, exactly like the renormalized trace superket. The
// state itself is never touched: the observable sweep applies the stored
// transformation superoperators to the functionals instead of releasing spins
// from the state, which is the same arithmetic with zero mutation.

inline const double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Functional ket for Tr[O .] on a single factor: vec(O^dag).
inline VecC functional_ket(const MatC& op) { return superop::vectorize(op.adjoint()); }

struct SpinObservables {
  std::vector<double> excitation;  // <sigma+_j sigma-_j> per spin
  double jz = 0.0;                 // <sum sigma_z / 2>
  double collective_j = 0.0;       // sum_{i,j} <sigma+_i sigma-_j>
  double max_imag = 0.0;           // largest imaginary residue seen (diagnostic)
};

/// Cavity observable <O_c> = <t_blocks (x) vec(O^dag)|rho> / <t|rho>.
inline cd cavity_expectation(const engine::SweepState& st, const MatC& op) {
  if (op.rows() != st.fock_dim || op.cols() != st.fock_dim)
    throw SpecError("cavity_expectation: operator does not match fock_dim");
  const cd tau = engine::trace_value(st);
  const cd val = engine::contract(st, engine::left_trace_ket(st), engine::right_trace_ket(st),
                                  engine::site_trace_ket(st), functional_ket(op));
  return val / tau;
}

/// Normalized reduced cavity density matrix.
inline MatC reduced_cavity(const engine::SweepState& st) {
  VecC sigma = engine::reduced_cavity_superket(st);
  MatC rho = superop::devectorize(sigma);
  const cd tr = rho.trace();
  if (std::abs(tr) > 0) rho /= tr;
  return rho;
}

/// Equal-time photon correlation g_n = <a^dag^n a^n> / <a^dag a>^n for
/// n = 2..4, from normally ordered moments. Below the photon-number floor the
/// statistics are undefined and NaN is returned.
inline double gn(const engine::SweepState& st, int n, double floor = 1e-10) {
  if (n < 2 || n > 4) throw SpecError("gn: order must be 2..4");
  const MatC a = superop::destroy(st.fock_dim);
  const MatC rc = reduced_cavity(st);
  const double nbar = (a.adjoint() * a * rc).trace().real();
  if (!(nbar > floor)) return kNaN;
  MatC an = a;
  for (int i = 1; i < n; ++i) an = MatC(an * a);
  const double mom = (an.adjoint() * an * rc).trace().real();
  return mom / std::pow(nbar, n);
}

/// Photon moments through the devectorized reduced cavity matrix, using the
/// number-basis falling factorial; independent route used by tests.
inline double gn_from_moments(const engine::SweepState& st, int n, double floor = 1e-10) {
  const MatC rc = reduced_cavity(st);
  double nbar = 0.0, mom = 0.0;
  for (long m = 0; m < rc.rows(); ++m) {
    const double p = rc(m, m).real();
    nbar += p * m;
    double ff = 1.0;
    for (int i = 0; i < n; ++i) ff *= static_cast<double>(m - i);
    if (m >= n) mom += p * ff;
  }
  if (!(nbar > floor)) return kNaN;
  return mom / std::pow(nbar, n);
}

namespace detail {

struct CarriedKets {
  VecC identity;   // renormalized trace ket
  VecC sum_plus;   // functional for sum sigma+
  VecC sum_minus;  // functional for sum sigma-
  VecC sum_z;      // functional for sum sigma_z / 2
  VecC sum_pp;     // functional for sum_{i,j within block} sigma+_i sigma-_j
  std::vector<VecC> per_spin;  // functional for sigma+_j sigma-_j, one per absorbed spin
};

}  // namespace detail

/// Dedicated no-evolution observable sweep: walks the stored isometry stack
/// (no propagators, no truncation) carrying per-spin and accumulated
/// collective functionals. The state is read-only and returned untouched.
inline SpinObservables spin_sweep(const engine::SweepState& st) {
  using superop::sigma_minus;
  using superop::sigma_plus;
  using superop::sigma_z;
  const int n = st.n_spins;
  if (st.free_site != n || st.ds != 4 || !st.right_stack.empty())
    throw SpecError("spin_sweep: state is not at a step boundary (free spin N)");

  const VecC k_id = engine::spin_trace_ket();
  const VecC k_n = functional_ket(MatC(sigma_plus() * sigma_minus()));
  const VecC k_z2 = functional_ket(MatC(0.5 * sigma_z()));
  const VecC k_sp = functional_ket(sigma_plus());
  const VecC k_sm = functional_ket(sigma_minus());

  detail::CarriedKets c;
  c.identity = VecC::Ones(1);
  c.sum_plus = VecC::Zero(1);
  c.sum_minus = VecC::Zero(1);
  c.sum_z = VecC::Zero(1);
  c.sum_pp = VecC::Zero(1);
  for (const auto& iso : st.left_stack) {
    const MatC ut = iso.map.adjoint();
    for (auto& ps : c.per_spin) ps = ut * kron_vec(ps, k_id);
    c.per_spin.push_back(ut * kron_vec(c.identity, k_n));
    c.sum_pp = ut * (kron_vec(c.sum_pp, k_id) + kron_vec(c.sum_plus, k_sm) +
                     kron_vec(c.sum_minus, k_sp) + kron_vec(c.identity, k_n));
    c.sum_plus = ut * (kron_vec(c.sum_plus, k_id) + kron_vec(c.identity, k_sp));
    c.sum_minus = ut * (kron_vec(c.sum_minus, k_id) + kron_vec(c.identity, k_sm));
    c.sum_z = ut * (kron_vec(c.sum_z, k_id) + kron_vec(c.identity, k_z2));
    c.identity = iso.trace_vec;
  }

  const VecC k_cav = superop::trace_superket(st.fock_dim);
  const VecC k_r = engine::right_trace_ket(st);
  auto val = [&](const VecC& kl, const VecC& ks) {
    return engine::contract(st, kl, k_r, ks, k_cav);
  };
  const cd tau = val(c.identity, k_id);

  SpinObservables out;
  double max_im = 0.0;
  auto real_of = [&](cd v) {
    max_im = std::max(max_im, std::abs(v.imag()));
    return v.real();
  };
  out.excitation.resize(n);
  for (int j = 0; j < n - 1; ++j) out.excitation[j] = real_of(val(c.per_spin[j], k_id) / tau);
  out.excitation[n - 1] = real_of(val(c.identity, k_n) / tau);
  out.jz = real_of((val(c.sum_z, k_id) + val(c.identity, k_z2)) / tau);
  out.collective_j = real_of((val(c.sum_pp, k_id) + val(c.sum_plus, k_sm) +
                              val(c.sum_minus, k_sp) + val(c.identity, k_n)) /
                             tau);
  out.max_imag = max_im;
  return out;
}

struct ObservableRecord {
  double time = 0.0;  // seconds
  double n_photon = 0.0;
  double g2 = kNaN, g3 = kNaN, g4 = kNaN;
  double spin_exc_res = 0.0;
  double jz = 0.0;
  double collective_j = 0.0;
  double trace_drift = 0.0;
  double trunc_err = 0.0;
};

/// One full measurement row at the current time.
inline ObservableRecord measure(const engine::SweepState& st, const model::EnsembleSpec& spec,
                                const engine::TruncationReport* rep = nullptr,
                                double gn_floor = 1e-10) {
  ObservableRecord r;
  r.time = st.time;
  const MatC a = superop::destroy(st.fock_dim);
  const MatC rc = reduced_cavity(st);
  r.n_photon = (a.adjoint() * a * rc).trace().real();
  if (r.n_photon > gn_floor) {
    MatC an = a;
    double pw = r.n_photon;
    for (int n = 2; n <= 4; ++n) {
      an = MatC(an * a);
      pw *= r.n_photon;
      const double mom = (an.adjoint() * an * rc).trace().real();
      (n == 2 ? r.g2 : n == 3 ? r.g3 : r.g4) = mom / pw;
    }
  }
  const SpinObservables so = spin_sweep(st);
  r.jz = so.jz;
  r.collective_j = so.collective_j;
  const auto res = model::resonant_spin_indices(spec);
  if (!res.empty()) {
    double acc = 0.0;
    for (int i : res) acc += so.excitation[i];
    r.spin_exc_res = acc / static_cast<double>(res.size());
  }
  if (rep) {
    r.trace_drift = rep->trace_error;
    r.trunc_err = rep->step_discarded_weight;
  }
  return r;
}

}  // namespace spincavity::observables
