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
#include <string>
#include <vector>

#include "spincavity/errors.hpp"
#include "spincavity/linalg.hpp"

namespace spincavity::model {

// All frequencies and rates are angular (rad/s); all times are seconds.
// Value types are immutable after construction by convention and safe to
// share across threads.

struct SpinSpec {
  double frequency = 0.0;  // transition frequency
  double coupling = 0.0;   // single-spin cavity coupling, >= 0
  double decay = 0.0;      // radiative loss rate, >= 0
};

struct CavitySpec {
  double frequency = 0.0;
  double decay = 0.0;
  long fock_dim = 2;  // photon-number truncation, >= 2
};

/// Rectangular coherent drive: amplitude eta for 0 <= t <= pulse_end, 0 after.
struct DriveSchedule {
  double amplitude = 0.0;        // eta, real and >= 0
  double drive_frequency = 0.0;  // omega_p
  double pulse_end = 0.0;        // t'
};

struct CombSpec {
  int teeth = 1;                  // odd
  double spacing = 0.0;           // tooth separation
  double central_coupling = 0.0;  // collective coupling of the resonant tooth
  double envelope_width = 0.0;    // Gaussian std dev of the coupling envelope
  int spins_per_tooth = 1;
};

struct EnsembleSpec {
  std::vector<SpinSpec> spins;  // ordering defines the sweep ordering
  CavitySpec cavity;
  DriveSchedule drive;

  int size() const { return static_cast<int>(spins.size()); }
};

inline void validate(const SpinSpec& s) {
  if (s.coupling < 0) throw SpecError("spin coupling must be >= 0");
  if (s.decay < 0) throw SpecError("spin decay must be >= 0");
}

inline void validate(const CavitySpec& c) {
  if (c.fock_dim < 2) throw SpecError("cavity fock_dim must be >= 2");
  if (c.decay < 0) throw SpecError("cavity decay must be >= 0");
}

inline void validate(const DriveSchedule& d) {
  if (d.amplitude < 0) throw SpecError("drive amplitude must be >= 0");
  if (d.pulse_end < 0) throw SpecError("drive pulse_end must be >= 0");
}

inline void validate(const CombSpec& c) {
  if (c.teeth < 1 || c.teeth % 2 == 0) throw SpecError("comb teeth count must be odd and positive");
  if (c.envelope_width <= 0) throw SpecError("comb envelope_width must be positive");
  if (c.spins_per_tooth < 1) throw SpecError("comb spins_per_tooth must be positive");
  if (c.central_coupling < 0) throw SpecError("comb central_coupling must be >= 0");
}

inline void validate(const EnsembleSpec& e) {
  for (const auto& s : e.spins) validate(s);
  validate(e.cavity);
  validate(e.drive);
}

/// Builds the comb-shaped ensemble: teeth at omega_c + j*spacing for
/// j = -(m-1)/2 .. (m-1)/2, per-tooth collective coupling
/// Omega_j = Omega_0 * exp(-(j*spacing)^2 / (2*width^2)) shared equally over
/// spins_per_tooth spins (g_j = Omega_j / sqrt(N')). Spins are ordered
/// tooth-by-tooth, j ascending, which keeps identical pair propagators
/// adjacent in the sweep.
inline EnsembleSpec build_comb(const CombSpec& comb, const CavitySpec& cavity,
                               const DriveSchedule& drive, double spin_decay) {
  validate(comb);
  validate(cavity);
  validate(drive);
  if (spin_decay < 0) throw SpecError("spin decay must be >= 0");
  EnsembleSpec out;
  out.cavity = cavity;
  out.drive = drive;
  const int half = (comb.teeth - 1) / 2;
  const double rootn = std::sqrt(static_cast<double>(comb.spins_per_tooth));
  for (int j = -half; j <= half; ++j) {
    const double det = j * comb.spacing;
    const double omega_j = comb.central_coupling *
                           std::exp(-det * det / (2.0 * comb.envelope_width * comb.envelope_width));
    SpinSpec spin{cavity.frequency + det, omega_j / rootn, spin_decay};
    for (int k = 0; k < comb.spins_per_tooth; ++k) out.spins.push_back(spin);
  }
  return out;
}

/// Shifts to the frame rotating at the drive frequency: frequencies become
/// detunings and the drive phase factors drop, so the Hamiltonian is
/// piecewise time-independent.
inline EnsembleSpec to_rotating_frame(const EnsembleSpec& spec) {
  EnsembleSpec out = spec;
  const double wp = spec.drive.drive_frequency;
  for (auto& s : out.spins) s.frequency -= wp;
  out.cavity.frequency -= wp;
  out.drive.drive_frequency = 0.0;
  return out;
}

/// Collective coupling Omega = sqrt(sum_k g_k^2).
inline double collective_coupling(const EnsembleSpec& spec) {
  double s2 = 0.0;
  for (const auto& s : spec.spins) s2 += s.coupling * s.coupling;
  return std::sqrt(s2);
}

/// Indices of the spins closest to cavity resonance (used for the
/// excitation-at-resonance observable).
inline std::vector<int> resonant_spin_indices(const EnsembleSpec& spec) {
  std::vector<int> out;
  if (spec.spins.empty()) return out;
  double best = std::abs(spec.spins[0].frequency - spec.cavity.frequency);
  for (const auto& s : spec.spins)
    best = std::min(best, std::abs(s.frequency - spec.cavity.frequency));
  const double tol = 1e-9 * std::max(1.0, std::abs(spec.cavity.frequency)) + 1e-6;
  for (int i = 0; i < spec.size(); ++i)
    if (std::abs(std::abs(spec.spins[i].frequency - spec.cavity.frequency) - best) <= tol)
      out.push_back(i);
  return out;
}

}  // namespace spincavity::model
