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

#include <random>

#include "spincavity/engine.hpp"
#include "spincavity/linalg.hpp"
#include "spincavity/model.hpp"
#include "spincavity/superop.hpp"

namespace spincavity::testing {

inline MatC random_complex(long rows, long cols, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatC m(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) m(i, j) = cd{u(rng), u(rng)};
  return m;
}

/// Random density matrix: Hermitian, positive semidefinite, unit trace.
inline MatC random_density(long d, std::mt19937& rng) {
  MatC g = random_complex(d, d, rng);
  MatC rho = g * g.adjoint();
  rho /= rho.trace();
  return rho;
}

inline VecC random_pure_superket(long d, std::mt19937& rng) {
  MatC psi = random_complex(d, 1, rng);
  psi /= psi.norm();
  return superop::vectorize(MatC(psi * psi.adjoint()));
}

/// Truncated coherent state |alpha><alpha| (normalized after truncation).
inline MatC coherent_density(double alpha, long fock_dim) {
  VecC amp(fock_dim);
  double logfact = 0.0;
  for (long n = 0; n < fock_dim; ++n) {
    if (n > 0) logfact += std::log(static_cast<double>(n));
    amp[n] = std::exp(n * std::log(std::abs(alpha)) - 0.5 * logfact);
  }
  MatC rho = amp * amp.adjoint();
  rho /= rho.trace();
  return rho;
}

/// Truncated thermal state with mean occupation nbar (normalized).
inline MatC thermal_density(double nbar, long fock_dim) {
  MatC rho = MatC::Zero(fock_dim, fock_dim);
  const double q = nbar / (1.0 + nbar);
  double p = 1.0;
  for (long n = 0; n < fock_dim; ++n) {
    rho(n, n) = p;
    p *= q;
  }
  rho /= rho.trace();
  return rho;
}

/// Full product-basis superket index: ((s_1*4 + s_2)*4 + ... s_N)*nc^2 + c,
/// spin superkets major in spin order, cavity superket last.
inline long product_space_dim(int n_spins, long nc) {
  long d = nc * nc;
  for (int i = 0; i < n_spins; ++i) d *= 4;
  return d;
}

/// Embeds a pair operator in the product superket basis (spin k + cavity)
/// into the N-spin product superket space. Dense; test scale only.
inline MatC embed_pair_product(const MatC& op, int n_spins, long nc, int k) {
  const long dc = nc * nc;
  const long dim = product_space_dim(n_spins, nc);
  MatC out = MatC::Zero(dim, dim);
  const long below = 1;  // spins below k contribute 4^(n-k)
  long spins_below = 1;
  for (int i = 0; i < n_spins - k; ++i) spins_below *= 4;
  long spins_above = 1;
  for (int i = 0; i < k - 1; ++i) spins_above *= 4;
  (void)below;
  for (long col = 0; col < dim; ++col) {
    const long c = col % dc;
    const long spins = col / dc;
    const long sk = (spins / spins_below) % 4;
    const long hi = spins / (spins_below * 4);
    const long lo = spins % spins_below;
    const long pcol = sk * dc + c;
    for (long prow = 0; prow < 4 * dc; ++prow) {
      const cd v = op(prow, pcol);
      if (v == cd{0.0, 0.0}) continue;
      const long sk2 = prow / dc, c2 = prow % dc;
      const long row = ((hi * 4 + sk2) * spins_below + lo) * dc + c2;
      out(row, col) += v;
    }
  }
  return out;
}

/// Expands the isometry stacks of a rest-layout SweepState back to the full
/// product superket (s_1, ..., s_N, c). Test scale only.
inline VecC reconstruct_full(const engine::SweepState& st) {
  if (st.free_site != st.n_spins || st.ds != 4 || !st.right_stack.empty())
    throw std::runtime_error("reconstruct_full: expected rest layout");
  // current flat layout: (L, S, C) row-major == col-major (S*C, L)
  long m = st.ds * st.dc;
  MatC cur = Eigen::Map<const MatC>(st.data.data(), m, st.dl);
  for (auto it = st.left_stack.rbegin(); it != st.left_stack.rend(); ++it) {
    // expand L -> (L_prev, s_j); s_j becomes the slowest axis of the tail
    MatC next = cur * it->map.transpose();  // (M, L_prev*4)
    const long d_prev = it->map.rows() / 4;
    // col-major (M, (l', s)) == row-major (l', s, M): fold s into the tail
    MatC folded(4 * m, d_prev);
    for (long l = 0; l < d_prev; ++l)
      for (long s = 0; s < 4; ++s) folded.col(l).segment(s * m, m) = next.col(l * 4 + s);
    cur = folded;
    m *= 4;
  }
  return VecC(Eigen::Map<const VecC>(cur.data(), cur.size()));
}

/// Excited-state population of one resonant spin in a lossy cavity starting
/// from |e, 0>: the single-excitation sector evolves by a 2x2 non-Hermitian
/// generator, and decay jumps exit to the dark ground state, so
/// P_e(t) = |c_e(t)|^2 exactly.
inline double single_spin_excitation(double g, double kappa, double gamma, double t) {
  MatC m(2, 2);
  m << cd{-gamma / 2, 0}, cd{g, 0}, cd{-g, 0}, cd{-kappa / 2, 0};
  VecC c0(2);
  c0 << 1.0, 0.0;
  VecC c = expm(MatC(m * t)) * c0;
  return std::norm(c[0]);
}

}  // namespace spincavity::testing
