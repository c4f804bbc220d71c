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

#include <geoscatter/spectral.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "test_util.hpp"

namespace geoscatter {
namespace {

// Stiffness from interior angles via acos, independent of the library's
// cross-product cotangents.
Matrix reference_stiffness(const TriangleMesh& mesh) {
  const Index n = mesh.num_vertices();
  Matrix s = Matrix::Zero(n, n);
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int o = mesh.faces(f, k), a = mesh.faces(f, (k + 1) % 3), b = mesh.faces(f, (k + 2) % 3);
      const Vector3 u = (mesh.vertices.row(a) - mesh.vertices.row(o)).transpose();
      const Vector3 v = (mesh.vertices.row(b) - mesh.vertices.row(o)).transpose();
      const double angle = std::acos(u.dot(v) / (u.norm() * v.norm()));
      const double w = 0.5 / std::tan(angle);
      s(a, b) -= w;
      s(b, a) -= w;
      s(a, a) += w;
      s(b, b) += w;
    }
  }
  return s;
}

Vector reference_mass(const TriangleMesh& mesh) {
  Vector m = Vector::Zero(mesh.num_vertices());
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Vector3 a = mesh.vertices.row(mesh.faces(f, 0)).transpose();
    const Vector3 b = mesh.vertices.row(mesh.faces(f, 1)).transpose();
    const Vector3 c = mesh.vertices.row(mesh.faces(f, 2)).transpose();
    const double area = 0.5 * (b - a).cross(c - a).norm();
    for (int k = 0; k < 3; ++k) m[mesh.faces(f, k)] += area / 3;
  }
  return m;
}

TEST(Operators, MatchReferenceAssembly) {
  for (const TriangleMesh& mesh : {icosphere(1), torus(10, 5, 1.0, 0.35), tetrahedron(2.0)}) {
    EXPECT_LT((Matrix(cotangent_stiffness(mesh)) - reference_stiffness(mesh)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((lumped_mass(mesh).diag - reference_mass(mesh)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(lumped_mass(mesh).total(), surface_area(mesh), 1e-12);
  }
}

TEST(Operators, StiffnessIsSymmetricPsdWithZeroRowSums) {
  const Matrix s = Matrix(cotangent_stiffness(torus(12, 6, 1.0, 0.4)));
  EXPECT_LT((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(s.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  EXPECT_GT(solver.eigenvalues().minCoeff(), -1e-12);
}

TEST(Eigenbasis, RegularTetrahedronIsAnalytic) {
  // S = (4I - 11^T)/sqrt(3) and M = (sqrt(3)/4) I for unit edges, so the
  // nonzero eigenvalue is 16/3 with multiplicity three.
  const SpectralBasis basis = eigenbasis(tetrahedron(1.0), 4);
  EXPECT_NEAR(basis.eigenvalues[0], 0, 1e-12);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(basis.eigenvalues[k], 16.0 / 3.0, 1e-12);
  // Unit edge length scales as 1/e^2.
  EXPECT_NEAR(eigenbasis(tetrahedron(2.0), 4).eigenvalues[3], 4.0 / 3.0, 1e-12);
}

TEST(Eigenbasis, MOrthonormalWithSmallResiduals) {
  const TriangleMesh mesh = icosphere(3);
  const StiffnessMatrix s = cotangent_stiffness(mesh);
  const SpectralBasis basis = eigenbasis(mesh, 80);
  const Matrix gram = basis.eigenvectors.transpose() * basis.mass.diag.asDiagonal() * basis.eigenvectors;
  EXPECT_LT((gram - Matrix::Identity(80, 80)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(eigen_residuals(s, basis).maxCoeff(), 1e-8);
  for (Index k = 1; k < basis.size(); ++k) EXPECT_LE(basis.eigenvalues[k - 1], basis.eigenvalues[k]);
  // phi_0 is the constant area^{-1/2}.
  EXPECT_LT((basis.eigenvectors.col(0).array() - 1 / std::sqrt(basis.area())).abs().maxCoeff(), 1e-10);
}

TEST(Eigenbasis, SignConvention) {
  const SpectralBasis basis = eigenbasis(torus(16, 8, 2.0, 0.5), 20);
  for (Index k = 0; k < basis.size(); ++k) {
    Index arg;
    basis.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(basis.eigenvectors(arg, k), 0);
  }
}

TEST(Eigenbasis, LanczosMatchesDense) {
  const TriangleMesh mesh = icosphere(3);
  EigenOptions dense, lanczos;
  dense.solver = EigenSolverKind::kDense;
  lanczos.solver = EigenSolverKind::kLanczos;
  const SpectralBasis a = eigenbasis(mesh, 49, dense);
  const SpectralBasis b = eigenbasis(mesh, 49, lanczos);
  EXPECT_LT((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 1e-9);
  // Eigenvectors agree up to rotation inside each multiplet: compare the
  // M-projectors onto the first 49 (a full set of clusters l <= 6).
  const Matrix pa = a.eigenvectors * a.eigenvectors.transpose();
  const Matrix pb = b.eigenvectors * b.eigenvectors.transpose();
  EXPECT_LT((pa - pb).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Eigenbasis, LargeMeshUsesLanczos) {
  const TriangleMesh mesh = icosphere(5);
  ASSERT_GT(mesh.num_vertices(), 4096);
  const SpectralBasis basis = eigenbasis(mesh, 16);
  EXPECT_LT(eigen_residuals(cotangent_stiffness(mesh), basis).maxCoeff(), 1e-6);
  const double exact[] = {0, 2, 2, 2, 6, 6, 6, 6, 6, 12, 12, 12, 12, 12, 12, 12};
  for (int k = 1; k < 16; ++k) EXPECT_NEAR(basis.eigenvalues[k], exact[k], 0.002 * exact[k]);
}

TEST(Eigenbasis, ConvergesToSphereSpectrum) {
  double previous = 1;
  for (int s = 2; s <= 4; ++s) {
    const SpectralBasis basis = eigenbasis(icosphere(s), 9);
    const double error = std::abs(basis.eigenvalues[8] - 6) / 6;
    EXPECT_LT(error, previous);
    previous = error;
  }
  EXPECT_LT(previous, 0.005);
}

TEST(Eigenbasis, ScalesInverselyWithArea) {
  const SpectralBasis a = eigenbasis(icosphere(2, 1.0), 10);
  const SpectralBasis b = eigenbasis(icosphere(2, 3.0), 10);
  EXPECT_LT((a.eigenvalues - 9 * b.eigenvalues).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Eigenbasis, ClustersFollowSphericalHarmonics) {
  const SpectralBasis basis = eigenbasis(icosphere(3), 25);
  const auto clusters = eigenvalue_clusters(basis.eigenvalues);
  ASSERT_GE(clusters.size(), 5u);
  for (size_t l = 0; l < 5; ++l) EXPECT_EQ(clusters[l].size(), 2 * l + 1);
}

TEST(Eigenbasis, RejectsBadArguments) {
  const TriangleMesh mesh = icosphere(1);
  EXPECT_THROW(eigenbasis(mesh, 0), ConfigError);
  EXPECT_THROW(eigenbasis(mesh, mesh.num_vertices() + 1), ConfigError);
  MassMatrix bad = lumped_mass(mesh);
  bad.diag[0] = 0;
  EXPECT_THROW(eigenbasis(cotangent_stiffness(mesh), bad, 5), ConfigError);
  EXPECT_THROW(eigenbasis(mesh, 5).truncated(6), ConfigError);
}

TEST(Fourier, FullBasisRoundTripAndParseval) {
  std::mt19937_64 rng(3);
  const SpectralBasis basis = eigenbasis(torus(12, 6, 1.0, 0.4), 72);
  const Matrix f = testing::gaussian_matrix(rng, 72, 3);
  const Matrix fhat = fourier(basis, f);
  EXPECT_LT((synthesize(basis, fhat) - f).cwiseAbs().maxCoeff(), 1e-10);
  for (Index c = 0; c < 3; ++c) {
    EXPECT_NEAR(fhat.col(c).squaredNorm(), std::pow(lp_norm(basis.mass, f.col(c), 2), 2), 1e-9);
    EXPECT_NEAR(inner(basis.mass, f.col(c), f.col(c)), fhat.col(c).squaredNorm(), 1e-9);
  }
  // The DC coefficient is the integral over the area's square root.
  EXPECT_NEAR(fhat(0, 0), integrate(basis.mass, f.col(0)) / std::sqrt(basis.area()), 1e-10);
  EXPECT_THROW(lp_norm(basis.mass, f.col(0), 3), ConfigError);
}

TEST(Fourier, TruncatedProjectionIsBestApproximation) {
  std::mt19937_64 rng(4);
  const SpectralBasis full = eigenbasis(icosphere(2), 162);
  const SpectralBasis low = full.truncated(25);
  const Vector f = testing::gaussian_vector(rng, 162);
  const Vector p = synthesize(low, fourier(low, f));
  // The residual is M-orthogonal to every retained eigenvector.
  EXPECT_LT(fourier(low, Vector(f - p)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BasisCache, RoundTripAndCorruption) {
  const auto dir = testing::scratch_dir("basis");
  const SpectralBasis basis = eigenbasis(icosphere(2), 30);
  write_basis(basis, dir / "b.gsb");
  const SpectralBasis back = read_basis(dir / "b.gsb");
  EXPECT_EQ(back.eigenvalues, basis.eigenvalues);
  EXPECT_EQ(back.eigenvectors, basis.eigenvectors);
  EXPECT_EQ(back.mass.diag, basis.mass.diag);

  std::ofstream(dir / "bad.gsb") << "XXXXjunk";
  EXPECT_THROW(read_basis(dir / "bad.gsb"), IoError);
  std::filesystem::resize_file(dir / "b.gsb", 100);
  EXPECT_THROW(read_basis(dir / "b.gsb"), IoError);
  EXPECT_THROW(read_basis(dir / "missing.gsb"), IoError);
}

}  // namespace
}  // namespace geoscatter
