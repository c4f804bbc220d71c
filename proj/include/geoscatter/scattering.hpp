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

#pragma once

#include <geoscatter/core.hpp>
#include <geoscatter/filterbank.hpp>
#include <geoscatter/mesh.hpp>
#include <geoscatter/spectral.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace geoscatter {

/// Wavelet scales (j_1, ..., j_m) applied in order; empty is the zeroth-order
/// path. std::vector ordering gives the lexicographic path order used for
/// every output.
using Path = std::vector<int>;

/// "-" for the empty path, otherwise scales joined by '|'.
std::string path_label(const Path& path);
Path parse_path_label(const std::string& label);

enum class PathRule {
  kAll,
  /// j_1 <= j_2 <= ...: each layer moves to an equal or coarser scale. Not
  /// part of the standard transform; offered to reduce cost.
  kNonincreasingFrequency,
};

/// Scalar reported for a non-windowed path p.
enum class NonWindowedScale {
  /// vol^{-1/2} ||U[p] f||_1, the L2 norm of the J -> infinity windowed
  /// coefficient. Keeps ||S f||_2 <= ||f||_2 on meshes of any area.
  kVolumeNormalized,
  /// ||U[p] f||_1.
  kL1,
};

std::string to_string(PathRule rule);
PathRule parse_path_rule(const std::string& text);
std::string to_string(NonWindowedScale scale);
NonWindowedScale parse_nonwindowed_scale(const std::string& text);

struct ScatteringConfig {
  int J = 0;
  int L = 2;
  int j_min = -8;
  /// Top wavelet scale; wavelets cover [j_min, min(J, j_max)]. Unset means J.
  std::optional<int> j_max = 0;
  /// Eigenpairs used; 0 means the whole basis.
  Index K = 0;
  SpectralWindow window = SpectralWindow::exponential();
  PathRule path_rule = PathRule::kAll;
  std::size_t path_cap = 1'000'000;
  NonWindowedScale nonwindowed_scale = NonWindowedScale::kVolumeNormalized;
  /// Worker threads for batch transforms (split over signals).
  int threads = 1;
};

/// Restricts the basis to config.K pairs (when set) and builds the bank.
FilterBank make_filterbank(const SpectralBasis& basis, const ScatteringConfig& config);

/// Admissible paths for the bank's scales, depth <= config.L, in
/// lexicographic order. Throws PathCapError when the count exceeds the cap.
std::vector<Path> enumerate_paths(const FilterBank& bank, const ScatteringConfig& config);

/// Number of admissible paths without materialising them (saturates at
/// SIZE_MAX).
std::size_t count_paths(Index num_scales, int depth, PathRule rule);

struct WindowedCoefficients {
  std::map<Path, Vector> values;  // S_J[p] f
  Vector mass;                    // volume weights for distances
};

struct NonWindowedCoefficients {
  std::map<Path, Scalar> values;
};

/// U[j_1, ..., j_m] f = | ... | f * psi_{j_1} | * ... * psi_{j_m} |.
Vector u_path(const SpectralBasis& basis, const FilterBank& bank, const Vector& f, const Path& path);

/// S_J^L f. Every intermediate U value is computed once and reused by all of
/// its extensions.
WindowedCoefficients scatter_windowed(const SpectralBasis& basis, const FilterBank& bank,
                                      const Vector& f, const ScatteringConfig& config);

/// S-bar^L f (see NonWindowedScale for the per-path scalar).
NonWindowedCoefficients scatter_nonwindowed(const SpectralBasis& basis, const FilterBank& bank,
                                            const Vector& f, const ScatteringConfig& config);

/// Batch outputs for many signals (one per column of F): `paths[i]` maps to
/// `values[i]`. Windowed values are |rows| x N (all vertices when `rows` is
/// empty); non-windowed values are 1 x N.
struct BatchCoefficients {
  std::vector<Path> paths;
  std::vector<Matrix> values;
};

BatchCoefficients scatter_windowed_batch(const SpectralBasis& basis, const FilterBank& bank,
                                         const Matrix& signals, const ScatteringConfig& config,
                                         std::span<const Index> rows = {});

BatchCoefficients scatter_nonwindowed_batch(const SpectralBasis& basis, const FilterBank& bank,
                                            const Matrix& signals, const ScatteringConfig& config);

/// (sum_p ||a_p - b_p||_2^2)^{1/2} with volume-weighted norms. Throws
/// ConfigError when the path sets differ.
Scalar scattering_distance(const WindowedCoefficients& a, const WindowedCoefficients& b);
/// Euclidean distance of the scalar vectors.
Scalar scattering_distance(const NonWindowedCoefficients& a, const NonWindowedCoefficients& b);

/// (sum_p ||a_p||^2)^{1/2}.
Scalar scattering_norm(const WindowedCoefficients& a);
Scalar scattering_norm(const NonWindowedCoefficients& a);

/// sum over |p| <= L of ||U[p] f||_2^2.
Scalar path_energy(const SpectralBasis& basis, const FilterBank& bank, const Vector& f,
                   const ScatteringConfig& config);

// ---------------------------------------------------------------------------
// Numerical checks of invariance and stability

/// ||S_J^L f - S_J^L V f||_{2,2} for each J (the bank is rebuilt per J with
/// the config's j_min / j_max).
std::vector<std::pair<int, Scalar>> isometry_invariance_curve(const SpectralBasis& basis,
                                                              const Vector& f,
                                                              const VertexPermutation& permutation,
                                                              std::span<const int> Js,
                                                              const ScatteringConfig& config);

enum class TransformKind { kWindowed, kNonWindowed };

/// Maps an amplitude epsilon to zeta^{-1}(x_i) for every vertex.
using WarpFamily = std::function<Points(Scalar epsilon)>;

/// Distance between the transforms of f and of its barycentric pullback under
/// each warp amplitude.
std::vector<std::pair<Scalar, Scalar>> diffeo_stability_probe(
    const TriangleMesh& mesh, const SpectralBasis& basis, const Vector& f,
    const WarpFamily& warp, std::span<const Scalar> amplitudes, const ScatteringConfig& config,
    TransformKind kind = TransformKind::kWindowed);

struct CommutatorOptions {
  int probes = 4;
  int iterations = 40;
  std::uint64_t seed = 7;
};

/// Estimates ||Psi_j V - V Psi_j|| (operator norm in the volume-weighted L2
/// space) by power iteration on C*C from `probes` random starts. `transport`
/// is the linear map V (pullback_operator() or VertexPermutation::matrix()).
Scalar commutator_norm_estimate(const SpectralBasis& basis, const FilterBank& bank, int j,
                                const SparseMatrix& transport, const CommutatorOptions& options = {});

}  // namespace geoscatter
