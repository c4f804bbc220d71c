// Copyright 2026 The geoscatter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Numerical invariant suite for the spectral, filterbank and scattering
// modules. Builds its own fixtures (icosphere, tetrahedron, torus).

#pragma once

#include <geoscatter/core.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace geoscatter {

struct VerifyOptions {
  std::uint64_t seed = 1;
  /// Build every filter bank with the shifted telescope; the
  /// Littlewood-Paley check must then fail.
  bool sabotage_telescope = false;
  int threads = 1;
};

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct CheckInfo {
  std::string module;
  std::string name;
};

/// Every check in run order.
const std::vector<CheckInfo>& verify_manifest();

/// Runs one named check; unknown names throw ConfigError.
CheckResult run_check(const std::string& name, const VerifyOptions& options = {});

/// Runs the whole manifest, reporting each result as it completes.
std::vector<CheckResult> run_verify(const VerifyOptions& options = {},
                                    const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace geoscatter
