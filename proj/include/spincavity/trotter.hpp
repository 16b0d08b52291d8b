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

#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "spincavity/linalg.hpp"
#include "spincavity/model.hpp"
#include "spincavity/superop.hpp"

namespace spincavity::trotter {

/// Distinct physical parameters of a spin; cache key uses exact bit patterns
/// (comb construction produces identical values per tooth by construction).
struct PairKey {
  double frequency = 0.0;
  double coupling = 0.0;
  double decay = 0.0;
};

/// exp(L_k * step) on one spin (x) cavity pair, stored in the product superket
/// basis (spin superket major, cavity superket minor).
struct PairPropagator {
  MatC matrix;
  double step = 0.0;
  bool drive_on = false;
  PairKey key;
};

inline PairPropagator build_propagator(const model::EnsembleSpec& spec, int k, double step,
                                       bool drive_on) {
  if (step <= 0) throw SpecError("build_propagator: step must be positive");
  const long nc = spec.cavity.fock_dim;
  MatC lk = superop::assemble_pair(spec, k, drive_on);
  PairPropagator out;
  out.matrix = superop::reorder_to_product_basis(expm(MatC(lk * step)), 2, nc);
  out.step = step;
  out.drive_on = drive_on;
  const auto& sp = spec.spins[k - 1];
  out.key = {sp.frequency, sp.coupling, sp.decay};
  return out;
}

/// Cache of pair propagators keyed by (spin parameters, step, drive state).
/// Spins sharing parameters share one matrix; a cache hit returns the
/// identical object. Builds are serialized; references stay valid for the
/// cache lifetime, so reads after a build phase need no locking.
class PropagatorCache {
 public:
  explicit PropagatorCache(model::EnsembleSpec spec) : spec_(std::move(spec)) {}

  const PairPropagator& get(int k, double step, bool drive_on) {
    const auto& sp = spec_.spins.at(k - 1);
    const Key key{std::bit_cast<std::uint64_t>(sp.frequency),
                  std::bit_cast<std::uint64_t>(sp.coupling),
                  std::bit_cast<std::uint64_t>(sp.decay),
                  std::bit_cast<std::uint64_t>(step), drive_on};
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      auto prop = std::make_unique<PairPropagator>(build_propagator(spec_, k, step, drive_on));
      it = cache_.emplace(key, std::move(prop)).first;
    }
    return *it->second;
  }

  /// Builds the half/full-step families used by one evolution step.
  void prebuild(double dt, bool drive_on) {
    for (int k = spec_.size(); k >= 2; --k) get(k, dt / 2, drive_on);
    get(1, dt, drive_on);
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.size();
  }

  const model::EnsembleSpec& spec() const { return spec_; }

 private:
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t, bool>;
  model::EnsembleSpec spec_;
  mutable std::mutex mutex_;
  std::map<Key, std::unique_ptr<PairPropagator>> cache_;
};

/// The palindromic second-order factor sequence for one step dt:
/// spins N..2 at dt/2, spin 1 at dt, spins 2..N at dt/2.
inline std::vector<std::pair<int, const PairPropagator*>> trotter_sequence(
    PropagatorCache& cache, double dt, bool drive_on) {
  const int n = cache.spec().size();
  std::vector<std::pair<int, const PairPropagator*>> seq;
  seq.reserve(2 * n - 1);
  for (int k = n; k >= 2; --k) seq.emplace_back(k, &cache.get(k, dt / 2, drive_on));
  seq.emplace_back(1, &cache.get(1, dt, drive_on));
  for (int k = 2; k <= n; ++k) seq.emplace_back(k, &cache.get(k, dt / 2, drive_on));
  return seq;
}

}  // namespace spincavity::trotter
