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

#include <stdexcept>
#include <string>

namespace spincavity {

// Exit codes used by the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitTruncationAbort = 3,
  kExitFockCheckFailure = 4,
  kExitOracleCap = 5,
};

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-event discarded weight exceeded the hard ceiling; the run is invalid.
struct TruncationAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Top Fock-level occupation exceeded the configured ceiling.
struct FockCheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested full-space dimension above the dense/sparse oracle cap.
struct OracleCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spincavity
