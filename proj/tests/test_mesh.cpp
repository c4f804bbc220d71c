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

#include <geoscatter/mesh.hpp>

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "test_util.hpp"

namespace geoscatter {
namespace {

Index euler_characteristic(const TriangleMesh& mesh) {
  return mesh.num_vertices() - static_cast<Index>(edges(mesh).size()) + mesh.num_faces();
}

bool has_issue(const ValidationReport& report, const std::string& needle) {
  for (const auto& issue : report.issues)
    if (issue.find(needle) != std::string::npos) return true;
  return false;
}

TEST(Generators, IcosphereCountsAndRadius) {
  for (int s = 0; s <= 4; ++s) {
    const TriangleMesh mesh = icosphere(s, 2.5);
    const Index expected = 10 * (Index{1} << (2 * s)) + 2;
    EXPECT_EQ(mesh.num_vertices(), expected);
    EXPECT_EQ(mesh.num_faces(), 2 * (expected - 2));
    EXPECT_EQ(euler_characteristic(mesh), 2);
    EXPECT_TRUE(validate(mesh).ok());
    for (Index i = 0; i < mesh.num_vertices(); ++i) EXPECT_NEAR(mesh.vertices.row(i).norm(), 2.5, 1e-12);
  }
  EXPECT_THROW(icosphere(8), ConfigError);
  EXPECT_THROW(icosphere(2, -1.0), ConfigError);
}

TEST(Generators, IcosphereAreaApproachesSphere) {
  Scalar previous = 0;
  for (int s = 1; s <= 5; ++s) {
    const Scalar area = surface_area(icosphere(s));
    EXPECT_GT(area, previous);
    EXPECT_LT(area, 4 * std::numbers::pi);
    previous = area;
  }
  EXPECT_NEAR(previous, 4 * std::numbers::pi, 0.01);
}

TEST(Generators, TorusCountsAndArea) {
  const TriangleMesh mesh = torus(16, 8, 2.0, 0.5);
  EXPECT_EQ(mesh.num_vertices(), 128);
  EXPECT_EQ(mesh.num_faces(), 256);
  EXPECT_EQ(euler_characteristic(mesh), 0);
  EXPECT_TRUE(validate(mesh).ok());
  // A fine grid approaches the smooth area 4 pi^2 R r.
  EXPECT_NEAR(surface_area(torus(256, 128, 2.0, 0.5)), 4 * std::numbers::pi * std::numbers::pi, 0.01);
  EXPECT_THROW(torus(2, 8, 2.0, 0.5), ConfigError);
  EXPECT_THROW(torus(16, 8, 0.5, 2.0), ConfigError);
}

TEST(Generators, TetrahedronIsRegular) {
  const TriangleMesh mesh = tetrahedron(1.5);
  EXPECT_EQ(mesh.num_vertices(), 4);
  for (auto [a, b] : edges(mesh)) {
    EXPECT_NEAR((mesh.vertices.row(a) - mesh.vertices.row(b)).norm(), 1.5, 1e-12);
  }
  EXPECT_NEAR(surface_area(mesh), std::sqrt(3.0) * 1.5 * 1.5, 1e-12);
  EXPECT_NEAR(mesh.vertices.colwise().sum().norm(), 0, 1e-12);
}

TEST(Validation, ReportsBoundaryEdges) {
  TriangleMesh mesh = icosphere(1);
  mesh.faces.conservativeResize(mesh.num_faces() - 1, Eigen::NoChange);
  const ValidationReport report = validate(mesh);
  EXPECT_FALSE(report.ok());
  EXPECT_TRUE(has_issue(report, "boundary edge"));
  EXPECT_THROW(validate_or_throw(mesh), ValidationError);
}

TEST(Validation, ReportsNonManifoldEdges) {
  TriangleMesh mesh = tetrahedron();
  mesh.vertices.conservativeResize(5, Eigen::NoChange);
  mesh.vertices.row(4) << 3, 3, 3;
  mesh.faces.conservativeResize(5, Eigen::NoChange);
  mesh.faces.row(4) << mesh.faces(0, 0), mesh.faces(0, 1), 4;
  EXPECT_TRUE(has_issue(validate(mesh), "non-manifold edge"));
}

TEST(Validation, ReportsDegenerateFaces) {
  TriangleMesh mesh = icosphere(1);
  const int v = mesh.faces(0, 0);
  mesh.vertices.row(mesh.faces(0, 1)) = mesh.vertices.row(v);
  EXPECT_TRUE(has_issue(validate(mesh), "degenerate face"));
}

TEST(Validation, ReportsDisconnectedMeshes) {
  const TriangleMesh a = tetrahedron();
  TriangleMesh mesh = a;
  mesh.vertices.conservativeResize(8, Eigen::NoChange);
  mesh.vertices.bottomRows(4) = a.vertices.rowwise() + Eigen::RowVector3d(5, 0, 0);
  mesh.faces.conservativeResize(8, Eigen::NoChange);
  mesh.faces.bottomRows(4) = a.faces.array() + 4;
  const ValidationReport report = validate(mesh);
  EXPECT_TRUE(has_issue(report, "disconnected"));
  EXPECT_EQ(report.num_components, 2);
}

TEST(Validation, ReportsBadIndicesAndEmptyMeshes) {
  TriangleMesh mesh = tetrahedron();
  mesh.faces(1, 2) = 9;
  EXPECT_TRUE(has_issue(validate(mesh), "out of range"));
  EXPECT_TRUE(has_issue(validate(TriangleMesh{}), "empty mesh"));
}

TEST(Off, RoundTripIsExact) {
  const TriangleMesh mesh = rigid_transform(icosphere(2, 1.3), Eigen::AngleAxisd(0.7, Vector3(1, 2, 3).normalized())
                                                                    .toRotationMatrix());
  std::stringstream buffer;
  write_off(mesh, buffer);
  const TriangleMesh back = parse_off(buffer, "copy");
  EXPECT_EQ(back.vertices, mesh.vertices);
  EXPECT_EQ(back.faces, mesh.faces);

  const auto dir = testing::scratch_dir("off");
  write_off(mesh, dir / "m.off");
  EXPECT_EQ(load_off(dir / "m.off").vertices, mesh.vertices);
}

TEST(Off, ParsesCommentsAndRejectsMalformedInput) {
  std::istringstream ok("OFF\n# comment\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
  EXPECT_EQ(parse_off(ok, "tet").num_faces(), 4);

  std::istringstream header("PLY\n");
  EXPECT_THROW(parse_off(header, "x"), IoError);
  std::istringstream truncated("OFF\n4 4 0\n0 0 0\n");
  EXPECT_THROW(parse_off(truncated, "x"), IoError);
  std::istringstream quad("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
  EXPECT_THROW(parse_off(quad, "x"), ValidationError);
  std::istringstream open("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  EXPECT_THROW(parse_off(open, "x"), ValidationError);
  EXPECT_THROW(load_off("/nonexistent/mesh.off"), IoError);
}

TEST(Transforms, RigidMotionPreservesMetric) {
  const TriangleMesh mesh = torus(12, 6, 1.0, 0.3);
  const Matrix3 r = Eigen::AngleAxisd(1.1, Vector3(0.2, -1, 0.4).normalized()).toRotationMatrix();
  const TriangleMesh moved = rigid_transform(mesh, r, Vector3(1, 2, 3));
  for (auto [a, b] : edges(mesh)) {
    EXPECT_NEAR((moved.vertices.row(a) - moved.vertices.row(b)).norm(),
                (mesh.vertices.row(a) - mesh.vertices.row(b)).norm(), 1e-12);
  }
  EXPECT_NEAR(surface_area(moved), surface_area(mesh), 1e-12);
}

TEST(Transforms, NormalizeUnitArea) {
  const TriangleMesh mesh = normalize_unit_area(
      rigid_transform(icosphere(2, 3.0), Matrix3::Identity(), Vector3(4, -1, 2)));
  EXPECT_NEAR(surface_area(mesh), 1.0, 1e-12);
  // Area-weighted centroid of the faces.
  const Vector areas = face_areas(mesh);
  Vector3 centroid = Vector3::Zero();
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    Vector3 c = Vector3::Zero();
    for (int k = 0; k < 3; ++k) c += mesh.vertices.row(mesh.faces(f, k)).transpose();
    centroid += areas[f] * c / 3;
  }
  EXPECT_LT(centroid.norm(), 1e-12);
}

TEST(Symmetry, IcosahedralGroupOrders) {
  for (int s : {0, 2}) {
    const TriangleMesh mesh = icosphere(s);
    const auto rotations = symmetry_permutations(mesh);
    EXPECT_EQ(rotations.size(), 60u);
    EXPECT_TRUE(rotations.front().is_identity());
    SymmetrySearchOptions options;
    options.include_reflections = true;
    EXPECT_EQ(symmetry_permutations(mesh, options).size(), 120u);
  }
  EXPECT_EQ(symmetry_permutations(tetrahedron()).size(), 12u);
}

TEST(Symmetry, PermutationsPreserveFacesAndDistances) {
  const TriangleMesh mesh = icosphere(2);
  std::set<std::array<int, 3>> faces;
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    std::array<int, 3> t{mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)};
    std::sort(t.begin(), t.end());
    faces.insert(t);
  }
  const auto symmetries = symmetry_permutations(mesh);
  for (size_t s = 0; s < symmetries.size(); s += 7) {
    const auto& p = symmetries[s];
    for (Index f = 0; f < mesh.num_faces(); ++f) {
      std::array<int, 3> t{p[mesh.faces(f, 0)], p[mesh.faces(f, 1)], p[mesh.faces(f, 2)]};
      std::sort(t.begin(), t.end());
      EXPECT_TRUE(faces.count(t));
    }
    for (Index i = 0; i < mesh.num_vertices(); i += 17) {
      for (Index j = 0; j < mesh.num_vertices(); j += 23) {
        EXPECT_NEAR((mesh.vertices.row(p[i]) - mesh.vertices.row(p[j])).norm(),
                    (mesh.vertices.row(i) - mesh.vertices.row(j)).norm(), 1e-9);
      }
    }
  }
}

TEST(Symmetry, PermutationAlgebra) {
  std::mt19937_64 rng(1);
  const auto symmetries = symmetry_permutations(icosphere(1));
  const auto& p = symmetries[5];
  const Vector f = testing::gaussian_vector(rng, p.size());
  EXPECT_EQ(Vector(p.matrix() * f), p.apply(f));
  EXPECT_EQ(p.inverse().apply(p.apply(f)), f);
  const Vector g = p.apply(f);
  for (Index i = 0; i < p.size(); ++i) EXPECT_EQ(g[p[i]], f[i]);
  EXPECT_THROW(VertexPermutation({0, 0, 1}), ConfigError);
}

TEST(Surface, ClosestPointRecoversVertices) {
  const TriangleMesh mesh = icosphere(2);
  for (Index i = 0; i < mesh.num_vertices(); i += 11) {
    const Vector3 x = mesh.vertices.row(i).transpose();
    const SurfacePoint p = closest_surface_point(mesh, 1.1 * x);
    ASSERT_GE(p.face, 0);
    Vector3 y = Vector3::Zero();
    for (int k = 0; k < 3; ++k) y += p.barycentric[k] * mesh.vertices.row(mesh.faces(p.face, k)).transpose();
    EXPECT_NEAR((y - x).norm(), 0, 1e-12);
    EXPECT_NEAR(p.distance, 0.1, 1e-12);
    EXPECT_NEAR(p.barycentric.sum(), 1, 1e-12);
  }
}

TEST(Pullback, IdentityAndRotationBehaveAsTransport) {
  const TriangleMesh mesh = icosphere(2);
  std::mt19937_64 rng(2);
  const Vector f = testing::gaussian_vector(rng, mesh.num_vertices());
  EXPECT_LT((pullback(mesh, f, mesh.vertices) - f).norm(), 1e-12);
  EXPECT_LT((twist_warp(mesh, 0.0) - mesh.vertices).norm(), 1e-14);

  // A symmetry rotation reproduces the matching vertex permutation.
  const auto symmetries = symmetry_permutations(mesh);
  const auto& p = symmetries[3];
  Points warp(mesh.num_vertices(), 3);
  for (Index i = 0; i < mesh.num_vertices(); ++i) warp.row(p[i]) = mesh.vertices.row(i);
  EXPECT_LT((pullback(mesh, f, warp) - p.apply(f)).norm(), 1e-9);
}

TEST(Pullback, RowsAreConvexWeights) {
  const TriangleMesh mesh = icosphere(3);
  const SparseMatrix w = pullback_operator(mesh, twist_warp(mesh, 0.05));
  const Vector ones = Vector::Ones(mesh.num_vertices());
  EXPECT_LT((w * ones - ones).cwiseAbs().maxCoeff(), 1e-12);
  for (Index k = 0; k < w.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(w, k); it; ++it) EXPECT_GE(it.value(), -1e-12);
  EXPECT_LE(w.nonZeros(), 3 * mesh.num_vertices());
}

TEST(Pullback, RejectsFarPoints) {
  const TriangleMesh mesh = icosphere(2);
  Points warp = mesh.vertices;
  warp.row(4) *= 3.0;
  EXPECT_THROW(pullback_operator(mesh, warp), ValidationError);
  EXPECT_THROW(pullback_operator(mesh, warp.topRows(5)), ConfigError);
}

TEST(Warps, TwistTurnsLatitudesRigidly) {
  const TriangleMesh mesh = icosphere(3);
  const Points w = twist_warp(mesh, 0.1);
  for (Index i = 0; i < mesh.num_vertices(); ++i) {
    EXPECT_NEAR(w(i, 2), mesh.vertices(i, 2), 1e-14);
    EXPECT_NEAR(w.row(i).head<2>().norm(), mesh.vertices.row(i).head<2>().norm(), 1e-12);
    // Turn angle epsilon * pi * z / h with h = 1.
    const double expected = 0.1 * std::numbers::pi * mesh.vertices(i, 2);
    const double r = mesh.vertices.row(i).head<2>().norm();
    if (r > 1e-6) {
      const double turn = std::atan2(mesh.vertices(i, 0) * w(i, 1) - mesh.vertices(i, 1) * w(i, 0),
                                     mesh.vertices(i, 0) * w(i, 0) + mesh.vertices(i, 1) * w(i, 1));
      EXPECT_NEAR(std::abs(turn), std::abs(expected), 1e-9);
    }
  }
  const Points rot = rotation_warp(mesh, Vector3::UnitZ(), 0.3);
  for (Index i = 0; i < mesh.num_vertices(); ++i) EXPECT_NEAR(rot.row(i).norm(), 1.0, 1e-12);
}

}  // namespace
}  // namespace geoscatter
