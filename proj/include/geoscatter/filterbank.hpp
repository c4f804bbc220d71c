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
#include <optional>
#include <string>
#include <vector>

namespace geoscatter {

/// Spectral window G: non-negative, non-increasing, G(0) = 1.
///
/// "exp" is G(lambda) = exp(-lambda), the heat kernel. "table" interpolates
/// linearly between samples and holds the last sample beyond the table.
/// Monotonicity of a table is not enforced here; build_filterbank detects a
/// rising table through a negative telescoping difference.
class SpectralWindow {
 public:
  static SpectralWindow exponential();
  static SpectralWindow table(std::vector<Scalar> lambdas, std::vector<Scalar> values);

  const std::string& kind() const { return kind_; }
  Scalar operator()(Scalar lambda) const;

  template <typename Derived>
  Vector evaluate(const Eigen::MatrixBase<Derived>& lambdas) const {
    Vector out(lambdas.size());
    for (Index i = 0; i < lambdas.size(); ++i) out[i] = (*this)(lambdas[i]);
    return out;
  }

  bool is_non_increasing() const;

 private:
  std::string kind_ = "exp";
  std::vector<Scalar> lambdas_;
  std::vector<Scalar> values_;
};

struct FilterBankOptions {
  /// Finest-to-coarsest wavelet scales are [j_min, min(J, j_max)]. Unset
  /// means j_max = J.
  std::optional<int> j_max;
  /// Append h(k) = (1 - G(2^{j_min-1} lambda_k)^2)^{1/2} so the bank sums to one.
  bool residual_highpass = false;
  /// Fault injection for the verification suite: shifts the telescope by one
  /// scale, psi_j^2 = phi_j^2 - phi_{j+1}^2.
  bool sabotage_telescope = false;
};

/// Low-pass phi_J and wavelets psi_j in the Fourier domain of one basis.
///   phi_J(k) = G(2^J lambda_k)
///   psi_j(k) = (G(2^{j-1} lambda_k)^2 - G(2^j lambda_k)^2)^{1/2}
struct FilterBank {
  int J = 0;
  int j_min = -8;
  int j_max = 0;  // top wavelet scale actually built, <= J
  Vector eigenvalues;
  Vector lowpass;
  Matrix wavelets;  // K x num_wavelets(); column c holds scale j_min + c
  Vector highpass;  // empty unless requested
  SpectralWindow window;
  bool sabotaged = false;

  Index num_wavelets() const { return wavelets.cols(); }
  Index size() const { return lowpass.size(); }
  bool has_scale(int j) const { return j >= j_min && j <= j_max; }
  auto wavelet(int j) const { return wavelets.col(j - j_min); }
  std::vector<int> scales() const;
};

/// Throws ConfigError if j_min > J or the eigenvalues are not ascending from
/// ~0; NumericalError on a telescoping difference below -1e-14.
FilterBank build_filterbank(const SpectralWindow& window, int J, int j_min,
                            const Vector& eigenvalues, const FilterBankOptions& options = {});

/// phi_J(k)^2 + sum_j psi_j(k)^2 (+ highpass(k)^2) from the stored arrays.
Vector littlewood_paley_sum(const FilterBank& bank);

/// Value the sum above must take, computed from the window alone:
/// G(2^{j_min-1} lambda)^2 - G(2^{j_max} lambda)^2 + G(2^J lambda)^2, or 1
/// with the residual high-pass.
Vector littlewood_paley_target(const FilterBank& bank);

/// 1 - G(2^{j_min-1} lambda_k)^2: energy not covered by the truncated bank.
Vector truncation_residual(const FilterBank& bank);

/// f * h = Phi diag(hhat) Phi^T M f, column-wise for matrices.
template <typename Derived>
Matrix convolve(const SpectralBasis& basis, const Vector& hhat, const Eigen::MatrixBase<Derived>& f) {
  if (hhat.size() != basis.size()) throw ConfigError("filter length must equal basis size");
  if (f.rows() != basis.num_vertices()) throw ConfigError("signal length must equal vertex count");
  return synthesize(basis, hhat.asDiagonal() * fourier(basis, f));
}

/// Sum over every filter in the bank of ||f * h||_2^2.
Scalar frame_energy(const SpectralBasis& basis, const FilterBank& bank, const Vector& f);

/// Column K_{phi_J}(x_i, .) = sum_k exp(-2^J lambda_k) phi_k(i) phi_k(.).
Vector heat_kernel_column(const SpectralBasis& basis, int J, Index vertex);

/// Spatial kernel of an arbitrary spectral filter centred at one vertex.
Vector filter_kernel_column(const SpectralBasis& basis, const Vector& hhat, Index vertex);

/// max over `trials` Gaussian signals f of
///   ||T_h V f - V T_h f||_2 / ||f||_2.
Scalar equivariance_defect(const SpectralBasis& basis, const Vector& hhat,
                           const VertexPermutation& permutation, int trials,
                           std::uint64_t seed = 1);

/// CSV with header "k,lambda,hhat".
void write_filter_csv(const std::filesystem::path& path, const Vector& eigenvalues,
                      const Vector& hhat);

}  // namespace geoscatter
