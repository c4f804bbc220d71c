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

#include "binary_io.hpp"
#include "lanczos.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace geoscatter {

using detail::get;
using detail::get_doubles;
using detail::put;
using detail::put_doubles;

StiffnessMatrix cotangent_stiffness(const TriangleMesh& mesh) {
  const Index n = mesh.num_vertices();
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<size_t>(12 * mesh.num_faces()));
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int corner = 0; corner < 3; ++corner) {
      const int o = mesh.faces(f, corner);
      const int i = mesh.faces(f, (corner + 1) % 3);
      const int j = mesh.faces(f, (corner + 2) % 3);
      const Vector3 u = (mesh.vertices.row(i) - mesh.vertices.row(o)).transpose();
      const Vector3 v = (mesh.vertices.row(j) - mesh.vertices.row(o)).transpose();
      const Scalar cot = u.dot(v) / u.cross(v).norm();
      if (!std::isfinite(cot) || std::abs(cot) > kMaxCotangent) {
        std::ostringstream msg;
        msg << "near-degenerate angle in face " << f << " at vertex " << o << " (cot " << cot << ")";
        throw NumericalError(msg.str());
      }
      const Scalar w = 0.5 * cot;
      triplets.emplace_back(i, j, -w);
      triplets.emplace_back(j, i, -w);
      triplets.emplace_back(i, i, w);
      triplets.emplace_back(j, j, w);
    }
  }
  StiffnessMatrix s(n, n);
  s.setFromTriplets(triplets.begin(), triplets.end());
  s.makeCompressed();
  return s;
}

MassMatrix lumped_mass(const TriangleMesh& mesh) {
  const Vector areas = face_areas(mesh);
  MassMatrix m{Vector::Zero(mesh.num_vertices())};
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) m.diag[mesh.faces(f, k)] += areas[f] / 3.0;
  }
  return m;
}

SpectralBasis SpectralBasis::truncated(Index k) const {
  if (k < 1 || k > size()) throw ConfigError("truncation size out of range");
  return SpectralBasis{eigenvalues.head(k), eigenvectors.leftCols(k), mass, mesh_name};
}

namespace {

Scalar gershgorin_bound(const SparseMatrix& a) {
  Vector row_sums = Vector::Zero(a.rows());
  for (Index c = 0; c < a.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) row_sums[it.row()] += std::abs(it.value());
  return row_sums.maxCoeff();
}

SparseMatrix similarity_transform(const StiffnessMatrix& s, const Vector& inv_sqrt_mass) {
  return inv_sqrt_mass.asDiagonal() * s * inv_sqrt_mass.asDiagonal();
}

void fix_signs(Matrix& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0) vectors.col(c) *= -1;
  }
}

}  // namespace

Vector eigen_residuals(const StiffnessMatrix& stiffness, const SpectralBasis& basis) {
  const Vector inv_sqrt = basis.mass.diag.cwiseSqrt().cwiseInverse();
  const SparseMatrix b = similarity_transform(stiffness, inv_sqrt);
  const Scalar scale = std::max(gershgorin_bound(b), std::numeric_limits<Scalar>::min());
  Vector residuals(basis.size());
  for (Index k = 0; k < basis.size(); ++k) {
    // Residual of the symmetric problem for u = M^{1/2} phi.
    const Vector u = basis.mass.diag.cwiseSqrt().cwiseProduct(basis.eigenvectors.col(k));
    residuals[k] = (b * u - basis.eigenvalues[k] * u).norm() / (scale * u.norm());
  }
  return residuals;
}

SpectralBasis eigenbasis(const StiffnessMatrix& stiffness, const MassMatrix& mass, Index k,
                         const EigenOptions& options) {
  const Index n = stiffness.rows();
  if (stiffness.cols() != n || mass.size() != n) throw ConfigError("stiffness/mass size mismatch");
  if (k < 1 || k > n) throw ConfigError("eigenpair count must be in [1, n_v]");
  if ((mass.diag.array() <= 0).any()) throw ConfigError("mass matrix must be positive");

  const Vector inv_sqrt = mass.diag.cwiseSqrt().cwiseInverse();
  const SparseMatrix b = similarity_transform(stiffness, inv_sqrt);

  const bool dense = options.solver == EigenSolverKind::kDense ||
                     (options.solver == EigenSolverKind::kAutomatic && n <= options.dense_limit);
  SpectralBasis basis;
  basis.mass = mass;
  if (dense) {
    const Eigen::SelfAdjointEigenSolver<Matrix> solver{Matrix(b)};
    if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
    basis.eigenvalues = solver.eigenvalues().head(k);
    basis.eigenvectors = inv_sqrt.asDiagonal() * solver.eigenvectors().leftCols(k);
  } else {
    // Shift strictly below the zero eigenvalue keeps B - shift I definite.
    const Scalar shift = -std::numbers::pi / mass.total();
    auto result = detail::shift_invert_lanczos(b, k, shift, options.seed);
    basis.eigenvalues = std::move(result.eigenvalues);
    basis.eigenvectors = inv_sqrt.asDiagonal() * result.eigenvectors;
  }
  fix_signs(basis.eigenvectors);

  const Vector residuals = eigen_residuals(stiffness, basis);
  Index worst = 0;
  if (residuals.maxCoeff(&worst) > options.residual_tolerance) {
    std::ostringstream msg;
    msg << "eigensolver residual " << residuals[worst] << " at pair " << worst << " (lambda "
        << basis.eigenvalues[worst] << ") exceeds " << options.residual_tolerance;
    throw NumericalError(msg.str());
  }
  return basis;
}

SpectralBasis eigenbasis(const TriangleMesh& mesh, Index k, const EigenOptions& options) {
  auto basis = eigenbasis(cotangent_stiffness(mesh), lumped_mass(mesh), k, options);
  basis.mesh_name = mesh.name;
  return basis;
}

std::vector<std::vector<Index>> eigenvalue_clusters(const Vector& eigenvalues, Scalar relative_gap) {
  std::vector<std::vector<Index>> clusters;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const bool join = i > 0 && std::abs(eigenvalues[i] - eigenvalues[i - 1]) <=
                                   relative_gap * std::max(std::abs(eigenvalues[i]), Scalar(1e-300));
    if (join) {
      clusters.back().push_back(i);
    } else {
      clusters.push_back({i});
    }
  }
  return clusters;
}

// ---------------------------------------------------------------------------
// Cache

namespace {

constexpr char kBasisMagic[4] = {'G', 'S', 'B', '1'};

constexpr char kCacheName[] = "basis cache";

}  // namespace

void write_basis(const SpectralBasis& basis, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write basis cache " + path.string());
  out.write(kBasisMagic, 4);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(basis.num_vertices()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(basis.size()));
  put_doubles(out, basis.mass.diag.data(), basis.mass.size());
  put_doubles(out, basis.eigenvalues.data(), basis.size());
  put_doubles(out, basis.eigenvectors.data(), basis.eigenvectors.size());
  if (!out) throw IoError("write failed for basis cache " + path.string());
}

SpectralBasis read_basis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open basis cache " + path.string());
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kBasisMagic, 4) != 0) {
    throw IoError("basis cache " + path.string() + " has wrong magic bytes");
  }
  const auto nv = get<std::uint64_t>(in, kCacheName, "vertex count");
  const auto k = get<std::uint64_t>(in, kCacheName, "eigenpair count");
  const auto file_size = std::filesystem::file_size(path);
  const std::uint64_t expected = 20 + 8 * (nv + k + nv * k);
  if (k == 0 || nv == 0 || k > nv || file_size != expected) {
    throw IoError("basis cache " + path.string() + " size does not match its header");
  }
  SpectralBasis basis;
  basis.mass.diag.resize(static_cast<Index>(nv));
  basis.eigenvalues.resize(static_cast<Index>(k));
  basis.eigenvectors.resize(static_cast<Index>(nv), static_cast<Index>(k));
  get_doubles(in, basis.mass.diag.data(), basis.mass.size(), kCacheName, "mass");
  get_doubles(in, basis.eigenvalues.data(), basis.size(), kCacheName, "eigenvalues");
  get_doubles(in, basis.eigenvectors.data(), basis.eigenvectors.size(), kCacheName, "eigenvectors");
  basis.mesh_name = path.stem().string();
  return basis;
}

}  // namespace geoscatter
