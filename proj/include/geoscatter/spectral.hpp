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

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace geoscatter {

/// Lumped (barycentric) vertex areas. Discretises the volume form: the
/// inner product is <f, g> = f^T M g.
struct MassMatrix {
  Vector diag;

  Index size() const { return diag.size(); }
  Scalar total() const { return diag.sum(); }
};

/// FEM cotangent stiffness S with S_ij = -(cot a + cot b) / 2 on edges and
/// zero row sums; discretises -Laplace-Beltrami in weak form.
using StiffnessMatrix = SparseMatrix;

/// Magnitude above which a cotangent marks a near-degenerate angle.
inline constexpr Scalar kMaxCotangent = 1e8;

StiffnessMatrix cotangent_stiffness(const TriangleMesh& mesh);
MassMatrix lumped_mass(const TriangleMesh& mesh);

/// K smallest generalized eigenpairs of S phi = lambda M phi.
struct SpectralBasis {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // n_v x K, M-orthonormal columns
  MassMatrix mass;
  std::string mesh_name;

  Index num_vertices() const { return eigenvectors.rows(); }
  Index size() const { return eigenvalues.size(); }
  Scalar area() const { return mass.total(); }

  /// Copy restricted to the first k eigenpairs.
  SpectralBasis truncated(Index k) const;
};

enum class EigenSolverKind { kAutomatic, kDense, kLanczos };

struct EigenOptions {
  EigenSolverKind solver = EigenSolverKind::kAutomatic;
  /// kAutomatic switches from dense to Lanczos above this vertex count.
  Index dense_limit = 4096;
  /// Relative residual ||S phi - lambda M phi|| / (|lambda| ||M phi|| + ||S|| eps)
  /// accepted per eigenpair.
  Scalar residual_tolerance = 1e-6;
  std::uint64_t seed = 0x5eed;
};

/// Solves via the similarity B = M^{-1/2} S M^{-1/2}. Columns are sign-fixed so
/// the entry of largest magnitude is positive. Throws NumericalError if a
/// residual exceeds options.residual_tolerance.
SpectralBasis eigenbasis(const StiffnessMatrix& stiffness, const MassMatrix& mass, Index k,
                         const EigenOptions& options = {});

/// Convenience: stiffness + mass + eigenbasis for a mesh.
SpectralBasis eigenbasis(const TriangleMesh& mesh, Index k, const EigenOptions& options = {});

/// Per-column relative residuals of S Phi = M Phi diag(lambda).
Vector eigen_residuals(const StiffnessMatrix& stiffness, const SpectralBasis& basis);

/// Groups of indices whose eigenvalues are separated by relative gaps below
/// `relative_gap`. Diagnostics only.
std::vector<std::vector<Index>> eigenvalue_clusters(const Vector& eigenvalues,
                                                    Scalar relative_gap = 0.05);

// ---------------------------------------------------------------------------
// Fourier analysis. All of these accept a single vertex function or a matrix
// holding one signal per column.

/// f_hat(k) = phi_k^T M f.
template <typename Derived>
Matrix fourier(const SpectralBasis& basis, const Eigen::MatrixBase<Derived>& f) {
  return basis.eigenvectors.transpose() * (basis.mass.diag.asDiagonal() * f);
}

/// Phi c.
template <typename Derived>
Matrix synthesize(const SpectralBasis& basis, const Eigen::MatrixBase<Derived>& coeffs) {
  return basis.eigenvectors * coeffs;
}

/// Integral of f against the volume form.
template <typename Derived>
Scalar integrate(const MassMatrix& mass, const Eigen::MatrixBase<Derived>& f) {
  return (mass.diag.transpose() * f).value();
}

/// ||f||_1 = sum_i M_ii |f_i|, ||f||_2 = (f^T M f)^{1/2}.
template <typename Derived>
Scalar lp_norm(const MassMatrix& mass, const Eigen::MatrixBase<Derived>& f, int p) {
  if (p == 1) return (mass.diag.transpose() * f.cwiseAbs()).value();
  if (p == 2) return std::sqrt((mass.diag.transpose() * f.cwiseAbs2()).value());
  throw ConfigError("lp_norm supports p = 1 or p = 2");
}

template <typename DerivedA, typename DerivedB>
Scalar inner(const MassMatrix& mass, const Eigen::MatrixBase<DerivedA>& f,
             const Eigen::MatrixBase<DerivedB>& g) {
  return (f.transpose() * (mass.diag.asDiagonal() * g)).value();
}

// ---------------------------------------------------------------------------
// Binary cache: "GSB1", u64 n_v, u64 K, f64 mass[n_v], f64 lambda[K],
// f64 Phi[n_v * K] column-major, all little-endian.

void write_basis(const SpectralBasis& basis, const std::filesystem::path& path);
SpectralBasis read_basis(const std::filesystem::path& path);

}  // namespace geoscatter
