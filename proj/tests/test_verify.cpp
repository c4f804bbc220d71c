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

#include <geoscatter/verify.hpp>

#include <gtest/gtest.h>

#include <set>

namespace geoscatter {
namespace {

// The invariants the suite is documented to cover, module by module.
const std::vector<std::pair<std::string, std::vector<std::string>>> kDocumented = {
    {"spectral",
     {"mass-total-area", "stiffness-symmetric", "stiffness-row-sums", "stiffness-psd", "lambda0-zero",
      "m-orthonormal", "phi0-constant", "eigen-residual", "parseval", "refinement-monotone",
      "multiplicity-clusters", "sphere-spectrum"}},
    {"filterbank",
     {"window-properties", "lowpass-dc", "wavelet-dc", "telescope", "littlewood-paley", "frame-isometry",
      "analysis-nonexpansive", "wavelet-range", "convolve-linear", "equivariance", "heat-kernel-mass"}},
    {"scattering",
     {"nonexpansive", "layer-energy", "ell2-bound", "permutation-invariance", "zeroth-path", "determinism",
      "cross-mesh-invariance", "isometry-decay", "commutator-symmetry", "commutator-monotone",
      "commutator-linearity", "diffeo-stability"}},
};

TEST(Manifest, MatchesDocumentedInvariants) {
  std::vector<std::pair<std::string, std::string>> expected;
  for (const auto& [module, names] : kDocumented)
    for (const auto& name : names) expected.emplace_back(module, name);
  std::vector<std::pair<std::string, std::string>> actual;
  for (const CheckInfo& c : verify_manifest()) actual.emplace_back(c.module, c.name);
  EXPECT_EQ(actual, expected);
}

TEST(Suite, AllChecksPassAndReportInOrder) {
  std::vector<std::string> seen;
  const auto results = run_verify({}, [&](const CheckResult& r) { seen.push_back(r.module + "/" + r.name); });
  ASSERT_EQ(results.size(), verify_manifest().size());
  for (size_t i = 0; i < results.size(); ++i) {
    EXPECT_TRUE(results[i].passed) << results[i].name << ": " << results[i].detail;
    EXPECT_FALSE(results[i].detail.empty());
    EXPECT_EQ(seen[i], verify_manifest()[i].module + "/" + verify_manifest()[i].name);
  }
}

TEST(Suite, PassesForOtherSeeds) {
  VerifyOptions options;
  options.seed = 12345;
  for (const CheckResult& r : run_verify(options)) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(Suite, SabotageIsDetected) {
  VerifyOptions options;
  options.sabotage_telescope = true;
  std::set<std::string> failed;
  for (const CheckResult& r : run_verify(options))
    if (!r.passed) failed.insert(r.name);
  EXPECT_TRUE(failed.count("littlewood-paley"));
  EXPECT_TRUE(failed.count("telescope"));
  EXPECT_FALSE(run_check("littlewood-paley", options).passed);
  EXPECT_TRUE(run_check("littlewood-paley").passed);
  // Checks that never look at wavelets are unaffected.
  EXPECT_FALSE(failed.count("mass-total-area"));
  EXPECT_FALSE(failed.count("sphere-spectrum"));
}

TEST(Suite, UnknownCheckIsConfigError) { EXPECT_THROW(run_check("no-such-check"), ConfigError); }

}  // namespace
}  // namespace geoscatter
