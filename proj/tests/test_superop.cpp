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
#include "spincavity/superop.hpp"

using namespace spincavity;
using namespace spincavity::superop;

namespace {

model::EnsembleSpec small_spec(int n, long nc, double kappa = 0.35e6, double gamma = 0.12e6,
                               double eta = 0.2e6) {
  model::EnsembleSpec spec;
  for (int k = 0; k < n; ++k)
    spec.spins.push_back({(k - 1) * 0.8e6, 1.1e6 + 0.3e6 * k, gamma});
  spec.cavity = {0.4e6, kappa, nc};
  spec.drive = {eta, 0.0, 1e-6};
  return spec;
}

double rel_trace_violation(const MatC& lind, long d) {
  const VecC t = trace_superket(d);
  const double scale = lind.cwiseAbs().maxCoeff();
  return (lind.transpose() * t).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
}

}  // namespace

TEST_CASE("vectorize round trip and basic stackings") {
  MatC rho = MatC::Zero(2, 2);
  rho(0, 0) = 1.0;
  VecC v = vectorize(rho);
  REQUIRE(v.size() == 4);
  CHECK(v[0] == cd{1.0, 0.0});
  CHECK(v[1] == cd{0.0, 0.0});
  CHECK(v[2] == cd{0.0, 0.0});
  CHECK(v[3] == cd{0.0, 0.0});

  MatC half = 0.5 * MatC::Identity(2, 2);
  VecC vh = vectorize(half);
  CHECK(vh[0].real() == Catch::Approx(0.5));
  CHECK(vh[3].real() == Catch::Approx(0.5));
  CHECK(std::abs(vh[1]) == 0.0);

  std::mt19937 rng(11);
  MatC r3 = testing::random_complex(3, 3, rng);
  CHECK((devectorize(vectorize(r3)) - r3).cwiseAbs().maxCoeff() == 0.0);

  MatC bad(2, 3);
  CHECK_THROWS_AS(vectorize(bad), SpecError);
}

TEST_CASE("lift_left and lift_right against direct multiplication") {
  CHECK((lift_left(identityC(3)) - MatC::Identity(9, 9)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lift_right(identityC(3)) - MatC::Identity(9, 9)).cwiseAbs().maxCoeff() == 0.0);

  // sigma+ |0><0| sigma- = |1><1|
  MatC ground = MatC::Zero(2, 2);
  ground(0, 0) = 1.0;
  VecC v = lift_left(sigma_plus()) * lift_right(sigma_minus()) * vectorize(ground);
  MatC excited = MatC::Zero(2, 2);
  excited(1, 1) = 1.0;
  CHECK((v - vectorize(excited)).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937 rng(7);
  for (long d : {2L, 3L, 4L, 6L}) {
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
      MatC a = testing::random_complex(d, d, rng);
      MatC b = testing::random_complex(d, d, rng);
      MatC rho = testing::random_complex(d, d, rng);
      VecC lhs = vectorize(MatC(a * rho * b));
      VecC rhs = lift_left(a) * lift_right(b) * vectorize(rho);
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("dissipator forms") {
  SECTION("vacuum is dark to photon loss") {
    const long nc = 4;
    MatC vac = MatC::Zero(nc, nc);
    vac(0, 0) = 1.0;
    VecC v = dissipator(destroy(nc), 0.7e6) * vectorize(vac);
    CHECK(v.cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("spin decay generator gives d<n>/dt = -gamma at t=0") {
    const double gamma = 0.9e6;
    MatC exc = MatC::Zero(2, 2);
    exc(1, 1) = 1.0;
    VecC dv = dissipator(sigma_minus(), gamma) * vectorize(exc);
    // d<sigma+sigma->/dt = t^T lift(n) dv
    MatC n = sigma_plus() * sigma_minus();
    cd rate = trace_superket(2).transpose() * lift_left(n) * dv;
    CHECK(rate.real() == Catch::Approx(-gamma).epsilon(1e-12));
  }
  SECTION("cavity dissipator on one photon, hand-evaluated") {
    const long nc = 3;
    const double kappa = 1.3e6;
    MatC one = MatC::Zero(nc, nc);
    one(1, 1) = 1.0;
    MatC zero = MatC::Zero(nc, nc);
    zero(0, 0) = 1.0;
    VecC got = dissipator(destroy(nc), kappa) * vectorize(one);
    VecC want = kappa * (vectorize(zero) - vectorize(one));
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);
  }
  SECTION("negative rate rejected") {
    CHECK_THROWS_AS(dissipator(sigma_minus(), -1.0), SpecError);
  }
}

TEST_CASE("trace superket annihilated by assembled generators") {
  for (int n = 1; n <= 4; ++n) {
    for (long nc : {2L, 3L, 5L}) {
      auto spec = small_spec(n, nc);
      MatC full(superop::assemble_full(spec, true));
      CHECK(rel_trace_violation(full, superop::full_hilbert_dim(spec)) <= 1e-12);
      for (int k = 1; k <= n; ++k) {
        MatC pair = assemble_pair(spec, k, true);
        CHECK(rel_trace_violation(pair, 2 * nc) <= 1e-12);
      }
    }
  }
}

TEST_CASE("pair decomposition: N=1 pair equals full") {
  auto spec = small_spec(1, 4);
  MatC full(assemble_full(spec, true));
  MatC pair = assemble_pair(spec, 1, true);
  CHECK((full - pair).cwiseAbs().maxCoeff() <= 1e-12 * full.cwiseAbs().maxCoeff());
}

TEST_CASE("pair decomposition: identical spins give identical pairs") {
  model::EnsembleSpec spec;
  for (int k = 0; k < 4; ++k) spec.spins.push_back({0.5e6, 1.0e6, 0.1e6});
  spec.cavity = {0.0, 0.3e6, 3};
  spec.drive = {0.4e6, 0.0, 1e-6};
  MatC first = assemble_pair(spec, 1, true);
  for (int k = 2; k <= 4; ++k)
    CHECK((assemble_pair(spec, k, true) - first).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pair decomposition sums to the full Liouvillian") {
  auto spec = small_spec(3, 4);
  MatC full(assemble_full(spec, true));
  const long dim = full.rows();
  MatC acc = MatC::Zero(dim, dim);
  for (int k = 1; k <= 3; ++k)
    acc += MatC(embed_pair_superop(assemble_pair(spec, k, true), spec, k));
  CHECK((acc - full).cwiseAbs().maxCoeff() <= 1e-12 * full.cwiseAbs().maxCoeff());
}

TEST_CASE("cavity-only Liouvillian annihilates the vacuum") {
  model::EnsembleSpec spec;
  spec.cavity = {0.0, 0.5e6, 4};
  spec.drive = {0.0, 0.0, 0.0};
  SpMatC lind = assemble_full(spec, false);
  MatC vac = MatC::Zero(4, 4);
  vac(0, 0) = 1.0;
  VecC v = lind * vectorize(vac);
  CHECK(v.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("lossless resonant Liouvillian has a purely imaginary spectrum") {
  model::EnsembleSpec spec;
  spec.spins.push_back({0.0, 1.0e6, 0.0});
  spec.cavity = {0.0, 0.0, 2};
  spec.drive = {0.0, 0.0, 0.0};
  MatC lind(assemble_full(spec, false));
  Eigen::ComplexEigenSolver<MatC> es(lind);
  const double scale = lind.cwiseAbs().maxCoeff();
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    CHECK(std::abs(es.eigenvalues()[i].real()) <= 1e-10 * scale);
}

TEST_CASE("two-spin singlet is stationary under the resonant interaction") {
  model::EnsembleSpec spec;
  spec.spins.push_back({0.0, 0.9e6, 0.0});
  spec.spins.push_back({0.0, 0.9e6, 0.0});
  spec.cavity = {0.0, 0.0, 3};
  spec.drive = {0.0, 0.0, 0.0};
  const long d = superop::full_hilbert_dim(spec);
  // |s> = (|eg> - |ge>)/sqrt(2), cavity vacuum; spins are the two leading bits
  VecC psi = VecC::Zero(d);
  const long nc = 3;
  psi[(0b10 * nc) + 0] = 1.0 / std::sqrt(2.0);
  psi[(0b01 * nc) + 0] = -1.0 / std::sqrt(2.0);
  MatC rho = psi * psi.adjoint();
  VecC v = assemble_full(spec, false) * vectorize(rho);
  CHECK(v.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("joint and product basis agree on expectation values") {
  const long ds = 2, dc = 3;
  SECTION("identity superoperator is fixed by the permutation") {
    MatC id = MatC::Identity(ds * ds * dc * dc, ds * ds * dc * dc);
    CHECK((reorder_to_product_basis(id, ds, dc) - id).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("reorder and reorder back") {
    std::mt19937 rng(3);
    MatC op = testing::random_complex(ds * ds * dc * dc, ds * ds * dc * dc, rng);
    MatC back = reorder_to_joint_basis(reorder_to_product_basis(op, ds, dc), ds, dc);
    CHECK((back - op).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("photon number through both routes") {
    std::mt19937 rng(5);
    MatC rho = testing::random_density(ds * dc, rng);
    VecC joint = vectorize(rho);
    // route 1: joint basis
    MatC num = MatC(destroy(dc).adjoint() * destroy(dc));
    MatC n_joint = lift_left(MatC(kron(identityC(ds), num)));
    cd want = trace_superket(ds * dc).transpose() * n_joint * joint;
    // route 2: product basis, per-factor functional kets
    const auto map = product_to_joint_index(ds, dc);
    VecC prod(joint.size());
    for (long p = 0; p < prod.size(); ++p) prod[p] = joint[map[p]];
    VecC bra = kron_vec(trace_superket(ds), vectorize(MatC(num.adjoint())));
    cd got = bra.dot(prod);
    CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("hermiticity preserved through oracle evolution") {
  auto spec = small_spec(2, 3);
  exact::ExactState st = exact::ground_state(spec);
  exact::ExactOptions opts;
  opts.store_states = true;
  opts.record_every = 20;
  auto trace = exact::evolve_exact(spec, st, 2e-6, 5e-9, opts);
  for (const auto& s : trace.states) {
    MatC rho = devectorize(s.superket);
    CHECK((rho - rho.adjoint().eval()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}
