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

#include <vector>

#include "spincavity/errors.hpp"
#include "spincavity/linalg.hpp"
#include "spincavity/model.hpp"

namespace spincavity::superop {

// Vectorization convention: row-major stacking, vec(rho)[i*d+j] = rho(i,j).
// Under it  A rho B  <->  (A (x) B^T) vec(rho),  so the left/right lifts are
// lift_left(A) = A (x) I and lift_right(B) = I (x) B^T. Every formula in this
// file is locked to that convention by the vec(A rho B) property test.

inline constexpr cd kI{0.0, 1.0};

// ---- elementary operators -------------------------------------------------

inline MatC identityC(long d) { return MatC::Identity(d, d); }

/// Bosonic annihilation operator on a fock_dim-level ladder.
inline MatC destroy(long fock_dim) {
  MatC a = MatC::Zero(fock_dim, fock_dim);
  for (long n = 1; n < fock_dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline MatC number_op(long fock_dim) {
  MatC n = MatC::Zero(fock_dim, fock_dim);
  for (long k = 0; k < fock_dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

// Spin basis: index 0 = ground, 1 = excited; sigma_z = diag(-1, +1).
inline MatC sigma_plus() {
  MatC s = MatC::Zero(2, 2);
  s(1, 0) = 1.0;
  return s;
}

inline MatC sigma_minus() {
  MatC s = MatC::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

inline MatC sigma_z() {
  MatC s = MatC::Zero(2, 2);
  s(0, 0) = -1.0;
  s(1, 1) = 1.0;
  return s;
}

// ---- vectorization --------------------------------------------------------

inline VecC vectorize(const MatC& rho) {
  if (rho.rows() != rho.cols()) throw SpecError("vectorize: square matrix required");
  const long d = rho.rows();
  VecC v(d * d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) v[i * d + j] = rho(i, j);
  return v;
}

inline MatC devectorize(const VecC& v) {
  const long d = std::lround(std::sqrt(static_cast<double>(v.size())));
  if (d * d != v.size()) throw SpecError("devectorize: length is not a perfect square");
  MatC rho(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) rho(i, j) = v[i * d + j];
  return rho;
}

inline MatC lift_left(const MatC& op) {
  if (op.rows() != op.cols()) throw SpecError("lift_left: square operator required");
  return kron(op, identityC(op.rows()));
}

inline MatC lift_right(const MatC& op) {
  if (op.rows() != op.cols()) throw SpecError("lift_right: square operator required");
  return kron(identityC(op.rows()), op.transpose());
}

/// Vectorized identity; <t|rho> = Tr[rho] for any superket.
inline VecC trace_superket(long d) { return vectorize(identityC(d)); }

/// Lindblad dissipator in superoperator form:
/// rate * (x (x) x* - 1/2 x^dag x (x) I - 1/2 I (x) x^T x*).
inline MatC dissipator(const MatC& x, double rate) {
  if (x.rows() != x.cols()) throw SpecError("dissipator: square operator required");
  if (rate < 0) throw SpecError("dissipator: negative rate");
  const long d = x.rows();
  const MatC xdx = x.adjoint() * x;
  return rate * (kron(x, x.conjugate()) - 0.5 * kron(xdx, identityC(d)) -
                 0.5 * kron(identityC(d), xdx.transpose()));
}

inline SpMatC dissipator_sparse(const SpMatC& x, double rate) {
  if (rate < 0) throw SpecError("dissipator: negative rate");
  const long d = x.rows();
  SpMatC id(d, d);
  id.setIdentity();
  SpMatC xc = x.conjugate();
  SpMatC xdx = SpMatC(x.adjoint()) * x;
  SpMatC out = kron_sparse(x, xc);
  out -= SpMatC(0.5 * kron_sparse(xdx, id));
  out -= SpMatC(0.5 * kron_sparse(id, SpMatC(xdx.transpose())));
  return rate * out;
}

// ---- joint <-> product superket bases --------------------------------------

/// Index map from the product superket basis of a (ds (x) dc) bipartite system
/// to the joint superket basis: product (i j)_s (x) (i j)_c  ->  joint |IJ>.
inline std::vector<long> product_to_joint_index(long ds, long dc) {
  const long d = ds * dc;
  std::vector<long> map(d * d);
  for (long is = 0; is < ds; ++is)
    for (long js = 0; js < ds; ++js)
      for (long ic = 0; ic < dc; ++ic)
        for (long jc = 0; jc < dc; ++jc) {
          const long prod = (is * ds + js) * dc * dc + (ic * dc + jc);
          const long joint = (is * dc + ic) * d + (js * dc + jc);
          map[prod] = joint;
        }
  return map;
}

/// Similarity transform of a joint-basis superoperator into the product
/// superket basis (spin superket major, cavity superket minor). Involutive in
/// the sense that applying the inverse permutation recovers the input.
inline MatC reorder_to_product_basis(const MatC& op, long ds, long dc) {
  const long dim = ds * ds * dc * dc;
  if (op.rows() != dim || op.cols() != dim)
    throw SpecError("reorder_to_product_basis: dimension does not factor as (ds*dc)^2");
  const auto map = product_to_joint_index(ds, dc);
  MatC out(dim, dim);
  for (long c = 0; c < dim; ++c)
    for (long r = 0; r < dim; ++r) out(r, c) = op(map[r], map[c]);
  return out;
}

inline MatC reorder_to_joint_basis(const MatC& op, long ds, long dc) {
  const long dim = ds * ds * dc * dc;
  if (op.rows() != dim || op.cols() != dim)
    throw SpecError("reorder_to_joint_basis: dimension does not factor as (ds*dc)^2");
  const auto map = product_to_joint_index(ds, dc);
  MatC out(dim, dim);
  for (long c = 0; c < dim; ++c)
    for (long r = 0; r < dim; ++r) out(map[r], map[c]) = op(r, c);
  return out;
}

// ---- pair Liouvillian -------------------------------------------------------

/// Pair Hamiltonian for spin k and the cavity on the joint (2 * n_c) Hilbert
/// space, in the rotating frame:
///   H_k = 1/2 dk sz (x) I + i g_k (s+ (x) a - s- (x) a^dag) + (1/N) H_c,
///   H_c = dc a^dag a + i(eta a^dag - eta a)            [drive term if drive_on]
inline MatC pair_hamiltonian(const model::EnsembleSpec& spec, int k, bool drive_on) {
  const int n = spec.size();
  if (k < 1 || k > n) throw SpecError("pair_hamiltonian: spin index out of range");
  const auto& sp = spec.spins[k - 1];
  const long nc = spec.cavity.fock_dim;
  const MatC a = destroy(nc);
  const MatC ic = identityC(nc);
  const MatC i2 = identityC(2);
  MatC h = 0.5 * sp.frequency * kron(sigma_z(), ic);
  h += kI * sp.coupling * (kron(sigma_plus(), a) - kron(sigma_minus(), a.adjoint()));
  MatC hc = spec.cavity.frequency * kron(i2, a.adjoint() * a);
  if (drive_on && spec.drive.amplitude != 0.0) {
    const double eta = spec.drive.amplitude;
    hc += kI * eta * kron(i2, a.adjoint()) - kI * eta * kron(i2, a);
  }
  return h + hc / static_cast<double>(n);
}

/// Pair Liouvillian L_k = L_{s,k} + (1/N) L_c on the joint pair superket
/// space (dimension (2 n_c)^2): spin-k free evolution, interaction and decay
/// plus a 1/N share of every cavity term. Summing the embeddings over k
/// recovers the full Liouvillian.
inline MatC assemble_pair(const model::EnsembleSpec& spec, int k, bool drive_on) {
  const int n = spec.size();
  if (k < 1 || k > n) throw SpecError("assemble_pair: spin index out of range");
  const auto& sp = spec.spins[k - 1];
  const long nc = spec.cavity.fock_dim;
  const long d = 2 * nc;
  const MatC h = pair_hamiltonian(spec, k, drive_on);
  MatC lind = -kI * (kron(h, identityC(d)) - kron(identityC(d), h.transpose()));
  if (sp.decay > 0)
    lind += dissipator(kron(sigma_minus(), identityC(nc)), sp.decay);
  if (spec.cavity.decay > 0)
    lind += dissipator(kron(identityC(2), destroy(nc)),
                       spec.cavity.decay / static_cast<double>(n));
  return lind;
}

// ---- full Liouvillian (oracle) ----------------------------------------------

struct AssembleOptions {
  // Cap on the superket dimension (2^N * n_c)^2 of the full space.
  long max_superket_dim = 1 << 21;
};

inline long full_hilbert_dim(const model::EnsembleSpec& spec) {
  const int n = spec.size();
  if (n > 62) throw OracleCapExceeded("full space: too many spins");
  long d = spec.cavity.fock_dim;
  for (int i = 0; i < n; ++i) {
    d *= 2;
    if (d > (1L << 30)) throw OracleCapExceeded("full space: dimension overflow");
  }
  return d;
}

inline SpMatC sparse_identity(long d) {
  SpMatC id(d, d);
  id.setIdentity();
  return id;
}

/// Operator acting on spin k (1-based) of the joint space
/// spin_1 (x) ... (x) spin_N (x) cavity.
inline SpMatC op_on_spin(const model::EnsembleSpec& spec, int k, const MatC& op) {
  const int n = spec.size();
  SpMatC out = kron_sparse(sparse_identity(1L << (k - 1)), op.sparseView());
  out = kron_sparse(out, sparse_identity(1L << (n - k)));
  return kron_sparse(out, sparse_identity(spec.cavity.fock_dim));
}

inline SpMatC op_on_cavity(const model::EnsembleSpec& spec, const MatC& op) {
  return kron_sparse(sparse_identity(1L << spec.size()), op.sparseView());
}

inline SpMatC full_hamiltonian(const model::EnsembleSpec& spec, bool drive_on) {
  const long d = full_hilbert_dim(spec);
  const MatC a = destroy(spec.cavity.fock_dim);
  SpMatC h(d, d);
  for (int k = 1; k <= spec.size(); ++k) {
    const auto& sp = spec.spins[k - 1];
    h += SpMatC(0.5 * sp.frequency * op_on_spin(spec, k, sigma_z()));
    SpMatC sa = SpMatC(op_on_spin(spec, k, sigma_plus())) * op_on_cavity(spec, a);
    h += SpMatC(kI * sp.coupling * sa) - SpMatC(kI * sp.coupling * SpMatC(sa.adjoint()));
  }
  h += SpMatC(spec.cavity.frequency * op_on_cavity(spec, MatC(a.adjoint() * a)));
  if (drive_on && spec.drive.amplitude != 0.0) {
    SpMatC ad = op_on_cavity(spec, MatC(a.adjoint()));
    h += SpMatC(kI * spec.drive.amplitude * ad) -
         SpMatC(kI * spec.drive.amplitude * SpMatC(ad.adjoint()));
  }
  return h;
}

/// Full vectorized Liouvillian on the joint superket space; sparse because the
/// dimension grows as (2^N n_c)^2.
inline SpMatC assemble_full(const model::EnsembleSpec& spec, bool drive_on,
                            const AssembleOptions& opts = {}) {
  const long d = full_hilbert_dim(spec);
  if (d * d > opts.max_superket_dim)
    throw OracleCapExceeded("assemble_full: superket dimension " + std::to_string(d * d) +
                            " above cap " + std::to_string(opts.max_superket_dim));
  const SpMatC h = full_hamiltonian(spec, drive_on);
  const SpMatC id = sparse_identity(d);
  SpMatC lind = SpMatC(-kI * kron_sparse(h, id)) + SpMatC(kI * kron_sparse(id, SpMatC(h.transpose())));
  if (spec.cavity.decay > 0) {
    SpMatC a_full = op_on_cavity(spec, destroy(spec.cavity.fock_dim));
    lind += dissipator_sparse(a_full, spec.cavity.decay);
  }
  for (int k = 1; k <= spec.size(); ++k) {
    if (spec.spins[k - 1].decay > 0)
      lind += dissipator_sparse(op_on_spin(spec, k, sigma_minus()), spec.spins[k - 1].decay);
  }
  return lind;
}

/// Embeds a pair superoperator (joint pair superket basis, spin k + cavity)
/// into the full joint superket space. Test and oracle machinery; the sum of
/// embedded pair terms reproduces assemble_full.
inline SpMatC embed_pair_superop(const MatC& pair_op, const model::EnsembleSpec& spec, int k) {
  const int n = spec.size();
  const long nc = spec.cavity.fock_dim;
  const long d = full_hilbert_dim(spec);
  const long dim = d * d;
  const long pd = 2 * nc;
  // Hilbert index I = (spins bits, cavity): I = s_1 ... s_N * nc + i_c with
  // spin 1 most significant. Extract spin k bit and cavity level.
  const long below = 1L << (n - k);  // weight of spin-k bit within the spin part
  auto split = [&](long I, long& bit, long& ic, long& rest) {
    ic = I % nc;
    long s = I / nc;
    bit = (s / below) % 2;
    const long hi = s / (below * 2);
    const long lo = s % below;
    rest = hi * below + lo;  // remaining spins packed, cavity removed
  };
  auto fuse = [&](long bit, long ic, long rest) {
    const long hi = rest / below;
    const long lo = rest % below;
    return ((hi * 2 + bit) * below + lo) * nc + ic;
  };
  std::vector<Eigen::Triplet<cd>> trips;
  trips.reserve(static_cast<std::size_t>(dim) * pd);
  for (long col = 0; col < dim; ++col) {
    const long I = col / d, J = col % d;
    long bi, ci, ri, bj, cj, rj;
    split(I, bi, ci, ri);
    split(J, bj, cj, rj);
    const long pcol = (bi * nc + ci) * pd + (bj * nc + cj);
    for (long prow = 0; prow < pd * pd; ++prow) {
      const cd v = pair_op(prow, pcol);
      if (v == cd{0.0, 0.0}) continue;
      const long pi = prow / pd, pj = prow % pd;
      const long Inew = fuse(pi / nc, pi % nc, ri);
      const long Jnew = fuse(pj / nc, pj % nc, rj);
      trips.emplace_back(Inew * d + Jnew, col, v);
    }
  }
  SpMatC out(dim, dim);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace spincavity::superop
