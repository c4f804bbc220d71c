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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace geoscatter {

/// Closed, connected, edge-manifold triangle mesh. Meshes returned by the
/// loaders and generators below have passed validate().
struct TriangleMesh {
  Points vertices;
  Faces faces;
  std::string name;

  Index num_vertices() const { return vertices.rows(); }
  Index num_faces() const { return faces.rows(); }
};

/// Line-oriented validation report. `issues` is empty for a valid mesh.
struct ValidationReport {
  std::vector<std::string> issues;
  Index num_vertices = 0;
  Index num_faces = 0;
  Index num_edges = 0;
  Index num_components = 0;
  Scalar total_area = 0;

  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// Faces whose area is below this fraction of the mean face area are
/// rejected as degenerate.
inline constexpr Scalar kDegenerateAreaRatio = 1e-12;

ValidationReport validate(const TriangleMesh& mesh);

/// Throws ValidationError carrying the report text if the mesh is invalid.
void validate_or_throw(const TriangleMesh& mesh);

/// Per-face areas.
Vector face_areas(const TriangleMesh& mesh);
Scalar surface_area(const TriangleMesh& mesh);
Scalar mean_edge_length(const TriangleMesh& mesh);

/// Unique undirected edges as (i, j) with i < j, sorted.
std::vector<std::pair<int, int>> edges(const TriangleMesh& mesh);

// ---------------------------------------------------------------------------
// OFF interchange

TriangleMesh load_off(const std::filesystem::path& path);
TriangleMesh parse_off(std::istream& in, std::string name);
/// Writes ASCII OFF with 17 significant digits so doubles round-trip.
void write_off(const TriangleMesh& mesh, const std::filesystem::path& path);
void write_off(const TriangleMesh& mesh, std::ostream& out);

// ---------------------------------------------------------------------------
// Generators

/// Icosahedron subdivided `subdivisions` times (at most 7) and projected onto
/// the sphere of the given radius. Vertex count is 10 * 4^s + 2.
TriangleMesh icosphere(int subdivisions, Scalar radius = 1.0);

/// Torus of revolution on an n_major x n_minor grid, two triangles per quad.
TriangleMesh torus(int n_major, int n_minor, Scalar major_radius,
                   Scalar minor_radius);

/// Regular tetrahedron centred at the origin.
TriangleMesh tetrahedron(Scalar edge_length = 1.0);

/// Copy of `mesh` with every vertex mapped through x -> R x + t.
TriangleMesh rigid_transform(const TriangleMesh& mesh, const Matrix3& rotation,
                             const Vector3& translation = Vector3::Zero());

/// Translates the area centroid to the origin and rescales to unit area.
TriangleMesh normalize_unit_area(const TriangleMesh& mesh);

// ---------------------------------------------------------------------------
// Discrete isometries and signal transport

/// Vertex bijection induced by a discrete isometry zeta: vertex i is carried
/// to vertex mapping[i], i.e. zeta(x_i) = x_{mapping[i]}.
class VertexPermutation {
 public:
  VertexPermutation() = default;
  explicit VertexPermutation(std::vector<int> mapping);

  static VertexPermutation identity(Index n);

  Index size() const { return static_cast<Index>(mapping_.size()); }
  std::span<const int> mapping() const { return mapping_; }
  int operator[](Index i) const { return mapping_[static_cast<size_t>(i)]; }
  bool is_identity() const;

  VertexPermutation inverse() const;

  /// V_zeta f = f o zeta^{-1}: result[mapping[i]] = f[i]. Works column-wise
  /// on matrices.
  template <typename Derived>
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime>
  apply(const Eigen::MatrixBase<Derived>& f) const {
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> out(
        f.rows(), f.cols());
    for (Index i = 0; i < f.rows(); ++i) out.row(mapping_[static_cast<size_t>(i)]) = f.row(i);
    return out;
  }

  /// Sparse matrix P with (P f) == apply(f).
  SparseMatrix matrix() const;

  friend bool operator==(const VertexPermutation&, const VertexPermutation&) = default;
  friend auto operator<=>(const VertexPermutation&, const VertexPermutation&) = default;

 private:
  std::vector<int> mapping_;
};

struct SymmetrySearchOptions {
  Scalar tolerance = 1e-6;
  bool include_reflections = false;
};

/// All vertex permutations induced by orthogonal maps about the vertex
/// centroid that carry the vertex set onto itself within `tolerance` and map
/// faces onto faces. Candidates come from aligning an anchor vertex and one of
/// its nearest neighbours with every distance-compatible pair. The identity is
/// always first; the rest are sorted.
std::vector<VertexPermutation> symmetry_permutations(
    const TriangleMesh& mesh, const SymmetrySearchOptions& options = {});

/// Closest point on the mesh surface, expressed barycentrically.
struct SurfacePoint {
  int face = -1;
  Vector3 barycentric = Vector3::Zero();
  Scalar distance = 0;
};

/// Nearest surface point to `query`. Ties between equidistant faces go to the
/// lowest face index.
SurfacePoint closest_surface_point(const TriangleMesh& mesh, const Vector3& query);

struct PullbackOptions {
  /// Largest tolerated distance from a warp point to the surface, as a
  /// multiple of the mean edge length.
  Scalar max_distance_edge_ratio = 1.0;
};

/// Linear operator W with (W f)[i] = f interpolated at the surface point
/// closest to warp.row(i). Rows hold at most three barycentric weights.
/// Throws ValidationError listing every warp point beyond the distance limit.
SparseMatrix pullback_operator(const TriangleMesh& mesh, const Points& warp,
                               const PullbackOptions& options = {});

/// Discrete V_zeta f = f o zeta^{-1}, where `warp` holds zeta^{-1}(x_i) for
/// every vertex x_i.
Vector pullback(const TriangleMesh& mesh, const Vector& signal, const Points& warp,
                const PullbackOptions& options = {});

// ---------------------------------------------------------------------------
// Warp families. Each returns zeta^{-1}(x_i) for every vertex, ready for
// pullback().

/// Latitude twist about the z axis through the vertex centroid: a point at
/// height z turns by epsilon * pi * (z - z_c) / h, with h the half height of
/// the bounding box. Not an isometry for epsilon != 0.
Points twist_warp(const TriangleMesh& mesh, Scalar epsilon);

/// Rigid rotation by `angle` radians about `axis` through the vertex centroid.
Points rotation_warp(const TriangleMesh& mesh, const Vector3& axis, Scalar angle);

}  // namespace geoscatter
