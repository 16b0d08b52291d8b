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

#include <array>
#include <cassert>
#include <string>
#include <utility>
#include <vector>

#include "spincavity/errors.hpp"
#include "spincavity/linalg.hpp"
#include "spincavity/model.hpp"
#include "spincavity/superop.hpp"
#include "spincavity/trotter.hpp"

namespace spincavity::engine {

// Renormalized representation of the vectorized state. The coefficient tensor
// is stored flat, row-major over the axes (L-block, R-block, free site, cavity);
// the free-site axis has dimension 4 while a spin is free and 1 otherwise, and
// the cavity superket axis (n_c^2) is never truncated. Spin blocks are grown
// and shrunk through stacks of transformation isometries, one per absorbed
// spin, each carrying the renormalized block trace ket alongside.

/// Orthonormal-column map (d_prev * 4) -> kept dimension, produced by the SVD
/// of a bipartite coefficient matrix. The grouped input index is
/// (block_prev major, spin minor) for the L side and (spin major, block_prev
/// minor) for the R side, matching the spin ordering inside each block.
struct Isometry {
  enum class Dir { into_left, into_right };
  MatC map;
  VecC trace_vec;  // renormalized block trace ket after this absorption
  int spin = 0;
  Dir dir = Dir::into_left;
};

struct TruncationEvent {
  int spin = 0;
  char side = 'L';
  long kept = 0;
  double discarded_weight = 0.0;
  double trace_error = 0.0;  // 1 - <t|rho> right after this truncation
};

struct TruncationReport {
  std::vector<TruncationEvent> events;
  double step_discarded_weight = 0.0;
  double max_event_weight = 0.0;
  double trace_error = 0.0;   // 1 - <t|rho> at step completion, before renormalization
  double normalization = 1.0; // trace factor divided out at step completion
  long max_rank = 0;
};

struct EngineOptions {
  long d_prime = 200;              // retained Schmidt directions per block
  double rel_floor = 1e-14;        // singular values below floor*s_max are numerical zeros
  double abort_weight = 1e-6;      // hard ceiling on per-event discarded weight
  bool normalize_each_truncation = false;  // default: renormalize once per full step
};

struct SweepState {
  VecC data;  // row-major over (dl, dr, ds, dc)
  long dl = 1, dr = 1, ds = 4, dc = 1;
  std::vector<Isometry> left_stack, right_stack;
  int free_site = 0;  // 1-based spin index, 0 while absorbed
  double time = 0.0;
  int n_spins = 0;
  long fock_dim = 2;

  long size() const { return dl * dr * ds * dc; }
};

inline VecC spin_trace_ket() {
  VecC t(4);
  t << 1.0, 0.0, 0.0, 1.0;
  return t;
}

inline VecC left_trace_ket(const SweepState& st) {
  return st.left_stack.empty() ? VecC::Ones(1) : st.left_stack.back().trace_vec;
}

inline VecC right_trace_ket(const SweepState& st) {
  if (!st.right_stack.empty()) return st.right_stack.back().trace_vec;
  return st.dr == 4 ? spin_trace_ket() : VecC::Ones(1);
}

inline VecC site_trace_ket(const SweepState& st) {
  return st.ds == 4 ? spin_trace_ket() : VecC::Ones(1);
}

/// <kL (x) kR (x) kS (x) kC | rho>; the kets are conjugated (bra semantics).
inline cd contract(const SweepState& st, const VecC& kl, const VecC& kr, const VecC& ks,
                   const VecC& kc) {
  Eigen::Map<const MatC> m(st.data.data(), st.ds * st.dc, st.dl * st.dr);
  VecC w = kron_vec(ks, kc).conjugate();
  VecC y = m.transpose() * w;
  return kron_vec(kl, kr).dot(y);
}

inline cd trace_value(const SweepState& st) {
  return contract(st, left_trace_ket(st), right_trace_ket(st), site_trace_ket(st),
                  superop::trace_superket(st.fock_dim));
}

inline double trace_of(const SweepState& st) { return trace_value(st).real(); }

/// Divides out the trace functional; observable ratios are unchanged.
inline double renormalize_trace(SweepState& st) {
  const cd tau = trace_value(st);
  if (std::abs(tau) < 1e-300)
    throw TruncationAbort("renormalize_trace: vanishing trace (catastrophic truncation)");
  st.data /= tau;
  return tau.real();
}

/// Un-normalized reduced cavity superket: sigma[c] = <kL kR kS| rho(.,.,.,c)>.
inline VecC reduced_cavity_superket(const SweepState& st) {
  Eigen::Map<const MatC> m(st.data.data(), st.dc, st.dl * st.dr * st.ds);
  VecC k = kron_vec(kron_vec(left_trace_ket(st), right_trace_ket(st)), site_trace_ket(st));
  return m * k.conjugate();
}

/// Population of the top Fock level of the reduced cavity state.
inline double fock_occupation_check(const SweepState& st) {
  const VecC sigma = reduced_cavity_superket(st);
  const long nc = st.fock_dim;
  cd tr = 0.0;
  for (long i = 0; i < nc; ++i) tr += sigma[i * nc + i];
  const double t = tr.real() != 0.0 ? tr.real() : 1.0;
  return sigma[(nc - 1) * nc + (nc - 1)].real() / t;
}

/// SVD of a bipartite coefficient matrix with rank cap: keeps
/// min(d_prime, numerical rank) leading directions; the isometry is the kept
/// left singular vectors and the renormalized coefficients are diag(s) V^H.
inline SvdTrunc renormalize_reduced(const MatC& bipartite, long d_prime,
                                    double rel_floor = 1e-14) {
  return svd_truncate(bipartite, d_prime, rel_floor);
}

namespace detail {

inline void record_event(const SweepState& st, TruncationReport* rep, int spin, char side,
                         const SvdTrunc& svd, const EngineOptions& opts) {
  if (svd.discarded_weight > opts.abort_weight)
    throw TruncationAbort("truncation weight " + std::to_string(svd.discarded_weight) +
                          " above ceiling " + std::to_string(opts.abort_weight) + " at spin " +
                          std::to_string(spin) + " (correlation blow-up)");
  if (!rep) return;
  TruncationEvent ev;
  ev.spin = spin;
  ev.side = side;
  ev.kept = svd.kept;
  ev.discarded_weight = svd.discarded_weight;
  ev.trace_error = 1.0 - trace_of(st);
  rep->events.push_back(ev);
  rep->step_discarded_weight += svd.discarded_weight;
  rep->max_event_weight = std::max(rep->max_event_weight, svd.discarded_weight);
  rep->max_rank = std::max(rep->max_rank, svd.kept);
}

/// Applies the pair propagator (product superket basis) to the (site, cavity)
/// axes: new(sc, lr) = V(sc, s'c') old(s'c', lr).
inline void apply_propagator(SweepState& st, const trotter::PairPropagator& prop) {
  assert(st.ds == 4);
  Eigen::Map<const MatC> m(st.data.data(), st.ds * st.dc, st.dl * st.dr);
  VecC out(st.size());
  Eigen::Map<MatC> res(out.data(), st.ds * st.dc, st.dl * st.dr);
  res.noalias() = prop.matrix * m;
  st.data.swap(out);
}

/// Pops the top left-stack isometry and expands the L index back to
/// (previous block, spin); the released spin becomes the free site, already
/// swapped next to the cavity axis.
inline void release_from_left(SweepState& st) {
  assert(st.ds == 1 && !st.left_stack.empty());
  Isometry iso = std::move(st.left_stack.back());
  st.left_stack.pop_back();
  const long d_prev = iso.map.rows() / 4;
  Eigen::Map<const MatC> t(st.data.data(), st.dr * st.dc, st.dl);
  VecC out(d_prev * 4 * st.dr * st.dc);
  Eigen::Map<MatC> res(out.data(), st.dr * st.dc, d_prev * 4);
  res.noalias() = t * iso.map.transpose();
  st.data.swap(out);
  // memory now (L', S, R, C); swap the free site next to the cavity
  st.dl = d_prev;
  st.ds = 4;
  std::array<long, 4> dims{st.dl, st.ds, st.dr, st.dc};
  std::array<long, 4> od;
  VecC tmp;
  permute4(st.data, dims, {0, 2, 1, 3}, tmp, od);
  st.data.swap(tmp);
  st.free_site = iso.spin;
}

/// Pops the top right-stack isometry; mirror image of release_from_left.
inline void release_from_right(SweepState& st) {
  assert(st.ds == 1 && !st.right_stack.empty());
  Isometry iso = std::move(st.right_stack.back());
  st.right_stack.pop_back();
  const long d_prev = iso.map.rows() / 4;
  {
    std::array<long, 4> dims{st.dl, st.dr, 1, st.dc};
    std::array<long, 4> od;
    VecC tmp;
    permute4(st.data, dims, {0, 3, 1, 2}, tmp, od);  // -> (L, C, R, 1)
    st.data.swap(tmp);
  }
  Eigen::Map<const MatC> t(st.data.data(), st.dr, st.dl * st.dc);
  VecC out(4 * d_prev * st.dl * st.dc);
  Eigen::Map<MatC> res(out.data(), 4 * d_prev, st.dl * st.dc);
  res.noalias() = iso.map * t;
  st.data.swap(out);
  // memory now (L, C, S, R'); back to canonical (L, R', S, C)
  st.dr = d_prev;
  st.ds = 4;
  std::array<long, 4> dims{st.dl, st.dc, st.ds, st.dr};
  std::array<long, 4> od;
  VecC tmp;
  permute4(st.data, dims, {0, 3, 2, 1}, tmp, od);
  st.data.swap(tmp);
  st.free_site = iso.spin;
}

/// Renormalizes the free site into the R block (SVD over the grouped
/// (spin, R) index against everything else).
inline void absorb_into_right(SweepState& st, const EngineOptions& opts,
                              TruncationReport* rep) {
  assert(st.ds == 4);
  const int spin = st.free_site;
  {
    std::array<long, 4> dims{st.dl, st.dr, st.ds, st.dc};
    std::array<long, 4> od;
    VecC tmp;
    permute4(st.data, dims, {0, 3, 2, 1}, tmp, od);  // -> (L, C, S, R)
    st.data.swap(tmp);
  }
  Eigen::Map<const MatC> a(st.data.data(), 4 * st.dr, st.dl * st.dc);
  SvdTrunc svd = svd_truncate(a, opts.d_prime, opts.rel_floor);
  Isometry iso;
  iso.map = std::move(svd.isometry);
  iso.trace_vec = iso.map.adjoint() * kron_vec(spin_trace_ket(), right_trace_ket(st));
  iso.spin = spin;
  iso.dir = Isometry::Dir::into_right;
  const long d_new = svd.kept;
  st.data = VecC(Eigen::Map<const VecC>(svd.coeff.data(), svd.coeff.size()));
  // coeff is (d_new x (L, C)) column-major == row-major (L, C, R')
  st.dr = d_new;
  st.ds = 1;
  st.right_stack.push_back(std::move(iso));
  std::array<long, 4> dims{st.dl, st.dc, st.dr, 1};
  std::array<long, 4> od;
  VecC tmp;
  permute4(st.data, dims, {0, 2, 3, 1}, tmp, od);  // -> (L, R', 1, C)
  st.data.swap(tmp);
  st.free_site = 0;
  record_event(st, rep, spin, 'R', svd, opts);
  if (opts.normalize_each_truncation) renormalize_trace(st);
}

/// Renormalizes the free site into the L block.
inline void absorb_into_left(SweepState& st, const EngineOptions& opts, TruncationReport* rep) {
  assert(st.ds == 4);
  const int spin = st.free_site;
  {
    std::array<long, 4> dims{st.dl, st.dr, st.ds, st.dc};
    std::array<long, 4> od;
    VecC tmp;
    permute4(st.data, dims, {1, 3, 0, 2}, tmp, od);  // -> (R, C, L, S)
    st.data.swap(tmp);
  }
  Eigen::Map<const MatC> a(st.data.data(), st.dl * 4, st.dr * st.dc);
  SvdTrunc svd = svd_truncate(a, opts.d_prime, opts.rel_floor);
  Isometry iso;
  iso.map = std::move(svd.isometry);
  iso.trace_vec = iso.map.adjoint() * kron_vec(left_trace_ket(st), spin_trace_ket());
  iso.spin = spin;
  iso.dir = Isometry::Dir::into_left;
  const long d_new = svd.kept;
  st.data = VecC(Eigen::Map<const VecC>(svd.coeff.data(), svd.coeff.size()));
  // coeff is (d_new x (R, C)) column-major == row-major (R, C, L')
  st.dl = d_new;
  st.ds = 1;
  st.left_stack.push_back(std::move(iso));
  std::array<long, 4> dims{st.dr, st.dc, st.dl, 1};
  std::array<long, 4> od;
  VecC tmp;
  permute4(st.data, dims, {2, 0, 3, 1}, tmp, od);  // -> (L', R, 1, C)
  st.data.swap(tmp);
  st.free_site = 0;
  record_event(st, rep, spin, 'L', svd, opts);
  if (opts.normalize_each_truncation) renormalize_trace(st);
}

// Relabels between the free-site axis and an empty neighbor axis; the flat
// storage is unchanged (the moved axis keeps its position in memory).
inline void relabel_site_to_right(SweepState& st) {
  assert(st.ds == 4 && st.dr == 1 && st.right_stack.empty());
  st.dr = 4;
  st.ds = 1;
  st.free_site = 0;
}

inline void relabel_right_to_site(SweepState& st, int spin) {
  assert(st.ds == 1 && st.dr == 4 && st.right_stack.empty());
  st.ds = 4;
  st.dr = 1;
  st.free_site = spin;
}

}  // namespace detail

/// Product initial state: every spin given by a 2x2 density matrix, the
/// cavity by an n_c x n_c matrix. Built by sequentially absorbing spins
/// 1..N-1 into the L block; each absorption has Schmidt rank 1, so the map is
/// exact at any d_prime. Spin N stays free next to the explicit cavity.
inline SweepState init_product_state(const model::EnsembleSpec& spec,
                                     const std::vector<MatC>& spin_rhos, const MatC& cavity_rho,
                                     const EngineOptions& opts = {}) {
  const int n = spec.size();
  if (n < 2) throw SpecError("init_product_state: at least two spins required");
  if (static_cast<int>(spin_rhos.size()) != n)
    throw SpecError("init_product_state: need one density matrix per spin");
  if (cavity_rho.rows() != spec.cavity.fock_dim)
    throw SpecError("init_product_state: cavity matrix does not match fock_dim");
  SweepState st;
  st.n_spins = n;
  st.fock_dim = spec.cavity.fock_dim;
  st.dc = st.fock_dim * st.fock_dim;
  st.dl = 1;
  st.dr = 1;
  st.ds = 4;
  st.free_site = 1;
  st.data = kron_vec(superop::vectorize(spin_rhos[0]), superop::vectorize(cavity_rho));
  for (int j = 1; j < n; ++j) {
    detail::absorb_into_left(st, opts, nullptr);
    // introduce spin j+1 as the new free site
    const VecC w = superop::vectorize(spin_rhos[j]);
    VecC out(st.dl * 4 * st.dc);
    for (long l = 0; l < st.dl; ++l)
      for (long s = 0; s < 4; ++s)
        out.segment((l * 4 + s) * st.dc, st.dc) = w[s] * st.data.segment(l * st.dc, st.dc);
    st.data.swap(out);
    st.ds = 4;
    st.free_site = j + 1;
  }
  return st;
}

/// All spins unexcited, cavity vacuum.
inline SweepState init_state(const model::EnsembleSpec& spec, const EngineOptions& opts = {}) {
  MatC g = MatC::Zero(2, 2);
  g(0, 0) = 1.0;
  MatC vac = MatC::Zero(spec.cavity.fock_dim, spec.cavity.fock_dim);
  vac(0, 0) = 1.0;
  return init_product_state(spec, std::vector<MatC>(spec.size(), g), vac, opts);
}

/// First half of the palindrome: V_N(dt/2) ... V_2(dt/2) V_1(dt), with
/// release / swap / evolve / renormalize bookkeeping per spin. Leaves spin 1
/// free (already evolved by the full dt).
inline void left_sweep(SweepState& st, trotter::PropagatorCache& cache, double dt, bool drive_on,
                       const EngineOptions& opts, TruncationReport* rep = nullptr) {
  const int n = st.n_spins;
  if (st.free_site != n || st.ds != 4 || !st.right_stack.empty())
    throw SpecError("left_sweep: state is not at the rest layout (free spin N)");
  detail::apply_propagator(st, cache.get(n, dt / 2, drive_on));
  detail::relabel_site_to_right(st);
  for (int j = n - 1; j >= 2; --j) {
    detail::release_from_left(st);
    detail::apply_propagator(st, cache.get(j, dt / 2, drive_on));
    detail::absorb_into_right(st, opts, rep);
  }
  detail::release_from_left(st);
  detail::apply_propagator(st, cache.get(1, dt, drive_on));
}

/// Second half: V_2(dt/2) ... V_N(dt/2) mirrored, rebuilding the L block.
inline void right_sweep(SweepState& st, trotter::PropagatorCache& cache, double dt, bool drive_on,
                        const EngineOptions& opts, TruncationReport* rep = nullptr) {
  const int n = st.n_spins;
  if (st.free_site != 1 || st.ds != 4 || !st.left_stack.empty())
    throw SpecError("right_sweep: state is not at the turning layout (free spin 1)");
  detail::absorb_into_left(st, opts, rep);
  for (int j = 2; j <= n - 1; ++j) {
    detail::release_from_right(st);
    detail::apply_propagator(st, cache.get(j, dt / 2, drive_on));
    detail::absorb_into_left(st, opts, rep);
  }
  detail::relabel_right_to_site(st, n);
  detail::apply_propagator(st, cache.get(n, dt / 2, drive_on));
}

/// One full second-order step: double sweep, trace renormalization, report.
inline TruncationReport step(SweepState& st, trotter::PropagatorCache& cache, double dt,
                             bool drive_on, const EngineOptions& opts) {
  TruncationReport rep;
  left_sweep(st, cache, dt, drive_on, opts, &rep);
  right_sweep(st, cache, dt, drive_on, opts, &rep);
  st.time += dt;
  rep.trace_error = 1.0 - trace_of(st);
  rep.normalization = renormalize_trace(st);
  for (const auto& iso : st.left_stack) rep.max_rank = std::max(rep.max_rank, iso.map.cols());
  return rep;
}

}  // namespace spincavity::engine
