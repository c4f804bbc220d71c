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
#include <geoscatter/mesh.hpp>
#include <geoscatter/spectral.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace geoscatter {

// ---------------------------------------------------------------------------
// IDX rasters

using Image = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RasterSet {
  std::vector<Image> images;
  std::vector<int> labels;

  Index size() const { return static_cast<Index>(images.size()); }
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image file (magic 0x803, count x 28 x 28 unsigned bytes).
std::vector<Image> read_idx_images(const std::filesystem::path& path);
/// Reads an IDX label file (magic 0x801), labels in [0, 9].
std::vector<int> read_idx_labels(const std::filesystem::path& path);

/// Both files; throws IoError when the counts differ.
RasterSet load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

void write_idx_images(const std::vector<Image>& images, const std::filesystem::path& path);
void write_idx_labels(const std::vector<int>& labels, const std::filesystem::path& path);

struct DigitSelection {
  /// Images kept per digit; must be positive.
  int per_class = 100;
  /// Digits to keep; empty keeps 0-9.
  std::vector<int> digits;
  /// Drops digit 6, which is indistinguishable from a rotated 9.
  bool remove_six = true;
  std::uint64_t seed = 1;
};

/// Random per-digit subset in ascending (label, original index) order.
/// Throws ConfigError if a requested digit has fewer than per_class images.
RasterSet select_digits(const RasterSet& set, const DigitSelection& selection);

// ---------------------------------------------------------------------------
// Spherical projection

struct ProjectionOptions {
  /// Angular radius of the cap around the north pole holding the image.
  Scalar cap_angle = std::numbers::pi / 4;
  /// Largest tolerated relative deviation of vertex radii from their mean.
  Scalar sphere_tolerance = 1e-6;
};

/// Places the image on the polar cap by azimuthal-equidistant coordinates and
/// returns signal(x) = image(R^T x) sampled bilinearly (clamped at the border)
/// and scaled to [0, 1]. Vertices whose rotated direction leaves the cap get 0.
/// Throws ValidationError if the mesh is not a sphere about its centroid.
Vector project_to_sphere(const Image& image, const TriangleMesh& mesh, const Matrix3& rotation,
                         const ProjectionOptions& options = {});

/// Haar-uniform rotation from a normalised Gaussian quaternion.
Matrix3 random_rotation(std::uint64_t seed);

/// The three coordinate functions, one per column.
Matrix coordinate_signals(const TriangleMesh& mesh);

/// Distance of every vertex to the area centroid, unchanged by rigid motion.
Vector centroid_distance_signal(const TriangleMesh& mesh);

struct LabeledSignalSet {
  std::shared_ptr<const TriangleMesh> mesh;
  Matrix signals;  // n_v x N, one signal per column
  std::vector<int> labels;
  std::string meta;

  Index size() const { return signals.cols(); }
};

/// Projects every image; when `rotated`, image i gets random_rotation(seed + i).
LabeledSignalSet project_digits(const RasterSet& set, std::shared_ptr<const TriangleMesh> mesh,
                                bool rotated, std::uint64_t seed,
                                const ProjectionOptions& options = {}, int threads = 1);

// ---------------------------------------------------------------------------
// Synthetic shape classes

enum class ShapeKind { kSphere, kTorus, kBumpy };

std::string to_string(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& text);

struct ShapeClassSpec {
  ShapeKind kind = ShapeKind::kSphere;
  Scalar radius = 1.0;        // sphere, bumpy
  Scalar major_radius = 1.0;  // torus
  Scalar minor_radius = 0.4;  // torus
  Scalar bump_amplitude = 0.25;
  int bump_count = 6;
  /// Relative size of the per-instance random shape perturbation.
  Scalar perturbation = 0.15;
  /// icosphere subdivisions, or the torus minor ring count (major = 2x).
  int resolution = 3;

  static ShapeClassSpec defaults(ShapeKind kind);
};

struct LabeledMeshSet {
  std::vector<TriangleMesh> meshes;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::string meta;

  Index size() const { return static_cast<Index>(meshes.size()); }
  SpectralBasis basis(Index i, Index k, const EigenOptions& options = {}) const;
};

struct ShapeDatasetSpec {
  std::vector<ShapeClassSpec> classes;
  int per_class = 10;
  std::uint64_t seed = 1;
  bool unit_area = true;
};

/// per_class randomly perturbed, randomly rotated meshes per class, labelled
/// by class position. An instance that fails validation is redrawn up to 10
/// times before ValidationError.
LabeledMeshSet synthetic_shapes(const ShapeDatasetSpec& spec);

/// Dataset manifest as JSON text and back.
std::string shapes_manifest_json(const ShapeDatasetSpec& spec);
ShapeDatasetSpec parse_shapes_manifest(const std::string& json_text);

/// Every OFF file named in a "filename,label" CSV (optional header row),
/// resolved against `directory`. Labels may be integers or class names;
/// class ids follow the sorted distinct labels.
LabeledMeshSet load_mesh_directory(const std::filesystem::path& directory,
                                   const std::filesystem::path& labels_csv, bool unit_area = false);

}  // namespace geoscatter
