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

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "spincavity/model.hpp"

using namespace spincavity;
using namespace spincavity::model;

namespace {

// Paper-style comb parameters, angular rates.
CombSpec paper_comb() { return {7, 40e6, 30e6, 150e6, 1}; }
CavitySpec cavity_at(double w) { return {w, 0.4e6, 16}; }
DriveSchedule no_drive() { return {0.0, 0.0, 0.0}; }

}  // namespace

TEST_CASE("single-tooth comb is one resonant spin at full coupling") {
  CombSpec comb{1, 12e6, 2.2e6, 9e6, 1};
  auto spec = build_comb(comb, cavity_at(5e6), no_drive(), 0.0);
  REQUIRE(spec.size() == 1);
  CHECK(spec.spins[0].frequency == Catch::Approx(5e6));
  CHECK(spec.spins[0].coupling == Catch::Approx(2.2e6));
}

TEST_CASE("comb Gaussian envelope at the third tooth") {
  auto spec = build_comb(paper_comb(), cavity_at(0.0), no_drive(), 0.0);
  REQUIRE(spec.size() == 7);
  // tooth j = +3 is the last spin; envelope exp(-(3*40)^2 / (2*150^2)) = exp(-0.32)
  const double ratio = spec.spins[6].coupling / spec.spins[3].coupling;
  CHECK(ratio == Catch::Approx(0.7261490370736909).epsilon(1e-12));
  CHECK(spec.spins[3].frequency == Catch::Approx(0.0).margin(1e-9));
  CHECK(spec.spins[6].frequency == Catch::Approx(120e6));
}

TEST_CASE("comb with fifteen spins per tooth reaches 105 spins") {
  CombSpec comb = paper_comb();
  comb.spins_per_tooth = 15;
  auto spec = build_comb(comb, cavity_at(0.0), no_drive(), 0.0);
  CHECK(spec.size() == 105);
  // per-spin coupling shares the tooth coupling: g_j = Omega_j / sqrt(15)
  CHECK(spec.spins[45].coupling == Catch::Approx(30e6 / std::sqrt(15.0)));
}

TEST_CASE("comb invariants and error paths") {
  SECTION("even teeth rejected") {
    CombSpec comb{4, 1e6, 1e6, 1e6, 1};
    CHECK_THROWS_AS(build_comb(comb, cavity_at(0.0), no_drive(), 0.0), SpecError);
  }
  SECTION("zero envelope width rejected") {
    CombSpec comb{3, 1e6, 1e6, 0.0, 1};
    CHECK_THROWS_AS(build_comb(comb, cavity_at(0.0), no_drive(), 0.0), SpecError);
  }
  SECTION("negative spin decay rejected") {
    CHECK_THROWS_AS(build_comb(paper_comb(), cavity_at(0.0), no_drive(), -1.0), SpecError);
  }
  SECTION("mirror teeth have equal couplings and opposite detunings") {
    auto spec = build_comb(paper_comb(), cavity_at(3e6), no_drive(), 0.0);
    for (int j = 0; j < 3; ++j) {
      CHECK(spec.spins[j].coupling == Catch::Approx(spec.spins[6 - j].coupling));
      CHECK(spec.spins[j].frequency - 3e6 ==
            Catch::Approx(-(spec.spins[6 - j].frequency - 3e6)));
    }
  }
}

TEST_CASE("rotating frame reduction") {
  auto spec = build_comb(paper_comb(), cavity_at(2.0e9), no_drive(), 0.0);
  spec.drive = {1e6, 2.0e9, 1e-7};

  SECTION("resonant drive leaves tooth detunings") {
    auto rot = to_rotating_frame(spec);
    CHECK(rot.cavity.frequency == Catch::Approx(0.0).margin(1e-6));
    CHECK(rot.spins[0].frequency == Catch::Approx(-120e6));
    CHECK(rot.drive.drive_frequency == 0.0);
  }
  SECTION("zero drive frequency is the identity") {
    auto same = spec;
    same.drive.drive_frequency = 0.0;
    auto rot = to_rotating_frame(same);
    CHECK(rot.spins[2].frequency == Catch::Approx(spec.spins[2].frequency));
    CHECK(rot.cavity.frequency == Catch::Approx(spec.cavity.frequency));
  }
  SECTION("rotating by omega_p then -omega_p restores detunings") {
    auto rot = to_rotating_frame(spec);
    rot.drive.drive_frequency = -2.0e9;
    auto back = to_rotating_frame(rot);
    for (int k = 0; k < spec.size(); ++k)
      CHECK(back.spins[k].frequency == Catch::Approx(spec.spins[k].frequency));
    CHECK(back.cavity.frequency == Catch::Approx(spec.cavity.frequency));
  }
  SECTION("fully resonant single spin becomes zero-detuning") {
    EnsembleSpec s;
    s.spins.push_back({7e8, 1e6, 0.0});
    s.cavity = {7e8, 0.0, 2};
    s.drive = {0.0, 7e8, 0.0};
    auto rot = to_rotating_frame(s);
    CHECK(rot.spins[0].frequency == Catch::Approx(0.0).margin(1e-6));
    CHECK(rot.cavity.frequency == Catch::Approx(0.0).margin(1e-6));
  }
}

TEST_CASE("collective coupling") {
  SECTION("N identical spins") {
    EnsembleSpec s;
    for (int i = 0; i < 9; ++i) s.spins.push_back({0.0, 2.5e6, 0.0});
    s.cavity = {0.0, 0.0, 2};
    CHECK(collective_coupling(s) == Catch::Approx(2.5e6 * 3.0));
  }
  SECTION("single spin") {
    EnsembleSpec s;
    s.spins.push_back({0.0, 1.7e6, 0.0});
    s.cavity = {0.0, 0.0, 2};
    CHECK(collective_coupling(s) == Catch::Approx(1.7e6));
  }
  SECTION("paper comb sum, against the independently evaluated envelope sum") {
    auto spec = build_comb(paper_comb(), cavity_at(0.0), no_drive(), 0.0);
    // oracle: Omega^2 = Omega_0^2 * sum_j exp(-(j dw)^2 / lambda^2)
    double s = 0.0;
    for (int j = -3; j <= 3; ++j) {
      const double x = j * 40e6 / 150e6;
      s += std::exp(-x * x);
    }
    CHECK(s == Catch::Approx(5.422165964487407).epsilon(1e-12));
    CHECK(collective_coupling(spec) == Catch::Approx(30e6 * std::sqrt(s)).epsilon(1e-12));
  }
  SECTION("invariant under permutations of the spin list") {
    auto spec = build_comb(paper_comb(), cavity_at(0.0), no_drive(), 0.0);
    const double before = collective_coupling(spec);
    std::mt19937 rng(23);
    std::shuffle(spec.spins.begin(), spec.spins.end(), rng);
    CHECK(collective_coupling(spec) == Catch::Approx(before).epsilon(1e-14));
  }
}

TEST_CASE("resonant spin selection picks the central tooth") {
  CombSpec comb = paper_comb();
  comb.spins_per_tooth = 2;
  auto spec = build_comb(comb, cavity_at(0.0), no_drive(), 0.0);
  auto idx = resonant_spin_indices(spec);
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] == 6);
  CHECK(idx[1] == 7);
}

TEST_CASE("spec validation catches bad values") {
  EnsembleSpec s;
  s.spins.push_back({0.0, -1.0, 0.0});
  s.cavity = {0.0, 0.0, 2};
  CHECK_THROWS_AS(validate(s), SpecError);
  s.spins[0].coupling = 1.0;
  s.cavity.fock_dim = 1;
  CHECK_THROWS_AS(validate(s), SpecError);
  s.cavity.fock_dim = 2;
  s.drive.amplitude = -2.0;
  CHECK_THROWS_AS(validate(s), SpecError);
}

TEST_CASE("gaussian quantile offsets are symmetric and ordered") {
  auto offs = gaussian_quantile_offsets(8, 2.5e6);
  REQUIRE(offs.size() == 8);
  for (int i = 0; i < 4; ++i) CHECK(offs[i] == Catch::Approx(-offs[7 - i]).margin(1.0));
  CHECK(std::is_sorted(offs.begin(), offs.end()));
  double mean = 0.0;
  for (double o : offs) mean += o;
  CHECK(std::abs(mean) <= 1e-6 * 2.5e6);
}
