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

#include <geoscatter/filterbank.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace geoscatter {

SpectralWindow SpectralWindow::exponential() { return SpectralWindow{}; }

SpectralWindow SpectralWindow::table(std::vector<Scalar> lambdas, std::vector<Scalar> values) {
  if (lambdas.size() != values.size() || lambdas.size() < 2) {
    throw ConfigError("window table needs at least two (lambda, G) samples");
  }
  if (lambdas.front() != 0 || values.front() != 1) throw ConfigError("window table must start at G(0) = 1");
  for (size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) throw ConfigError("window table lambdas must be strictly ascending");
  }
  for (Scalar v : values) {
    if (!(v >= 0)) throw ConfigError("window table values must be non-negative");
  }
  SpectralWindow w;
  w.kind_ = "table";
  w.lambdas_ = std::move(lambdas);
  w.values_ = std::move(values);
  return w;
}

Scalar SpectralWindow::operator()(Scalar lambda) const {
  if (kind_ == "exp") return std::exp(-lambda);
  if (lambda <= lambdas_.front()) return values_.front();
  if (lambda >= lambdas_.back()) return values_.back();
  const auto hi = std::upper_bound(lambdas_.begin(), lambdas_.end(), lambda);
  const size_t i = static_cast<size_t>(hi - lambdas_.begin());
  const Scalar t = (lambda - lambdas_[i - 1]) / (lambdas_[i] - lambdas_[i - 1]);
  return (1 - t) * values_[i - 1] + t * values_[i];
}

bool SpectralWindow::is_non_increasing() const {
  if (kind_ == "exp") return true;
  return std::is_sorted(values_.rbegin(), values_.rend());
}

std::vector<int> FilterBank::scales() const {
  std::vector<int> out;
  for (int j = j_min; j <= j_max; ++j) out.push_back(j);
  return out;
}

namespace {

Vector dilated(const SpectralWindow& window, const Vector& lambdas, int j) {
  return window.evaluate(std::ldexp(1.0, j) * lambdas);
}

}  // namespace

FilterBank build_filterbank(const SpectralWindow& window, int J, int j_min,
                            const Vector& eigenvalues, const FilterBankOptions& options) {
  if (j_min > J) throw ConfigError("filter bank needs j_min <= J");
  if (eigenvalues.size() == 0) throw ConfigError("filter bank needs at least one eigenvalue");
  for (Index k = 1; k < eigenvalues.size(); ++k) {
    if (eigenvalues[k] < eigenvalues[k - 1]) throw ConfigError("eigenvalues must be ascending");
  }
  if (std::abs(eigenvalues[0]) > 1e-8 * std::max<Scalar>(1, eigenvalues.tail(1)[0])) {
    throw ConfigError("first eigenvalue must be numerically zero");
  }
  const int top = std::min(J, options.j_max.value_or(J));
  if (top < j_min) throw ConfigError("filter bank wavelet range [j_min, j_max] is empty");

  // lambda_0 belongs to the constants and is exactly zero; solver round-off
  // there would otherwise leak into psi_j(0) through the square root.
  Vector lambdas = eigenvalues.cwiseMax(0.0);
  lambdas[0] = 0;

  FilterBank bank;
  bank.J = J;
  bank.j_min = j_min;
  bank.j_max = top;
  bank.eigenvalues = lambdas;
  bank.window = window;
  bank.sabotaged = options.sabotage_telescope;
  bank.lowpass = dilated(window, lambdas, J);
  bank.wavelets.resize(lambdas.size(), top - j_min + 1);

  for (int j = j_min; j <= top; ++j) {
    const Vector coarse = options.sabotage_telescope ? dilated(window, lambdas, j)
                                                     : dilated(window, lambdas, j - 1);
    const Vector fine = options.sabotage_telescope ? dilated(window, lambdas, j + 1)
                                                   : dilated(window, lambdas, j);
    const Vector diff = coarse.cwiseAbs2() - fine.cwiseAbs2();
    Index worst = 0;
    if (diff.minCoeff(&worst) < -1e-14) {
      std::ostringstream msg;
      msg << "negative telescoping difference " << diff[worst] << " at scale " << j
          << ", eigenvalue index " << worst << ": window is not non-increasing";
      throw NumericalError(msg.str());
    }
    bank.wavelets.col(j - j_min) = diff.cwiseMax(0.0).cwiseSqrt();
  }

  if (options.residual_highpass) {
    bank.highpass = (1.0 - dilated(window, lambdas, j_min - 1).cwiseAbs2().array())
                        .cwiseMax(0.0)
                        .sqrt()
                        .matrix();
  }
  return bank;
}

Vector littlewood_paley_sum(const FilterBank& bank) {
  Vector sum = bank.lowpass.cwiseAbs2() + bank.wavelets.cwiseAbs2().rowwise().sum();
  if (bank.highpass.size() > 0) sum += bank.highpass.cwiseAbs2();
  return sum;
}

Vector littlewood_paley_target(const FilterBank& bank) {
  const Index k = bank.eigenvalues.size();
  if (bank.highpass.size() > 0 && bank.j_max == bank.J) return Vector::Ones(k);
  Vector target = dilated(bank.window, bank.eigenvalues, bank.j_min - 1).cwiseAbs2() -
                  dilated(bank.window, bank.eigenvalues, bank.j_max).cwiseAbs2() +
                  bank.lowpass.cwiseAbs2();
  if (bank.highpass.size() > 0) target += bank.highpass.cwiseAbs2();
  return target;
}

Vector truncation_residual(const FilterBank& bank) {
  return (1.0 - dilated(bank.window, bank.eigenvalues, bank.j_min - 1).cwiseAbs2().array()).matrix();
}

Scalar frame_energy(const SpectralBasis& basis, const FilterBank& bank, const Vector& f) {
  Scalar energy = lp_norm(basis.mass, convolve(basis, bank.lowpass, f), 2);
  energy *= energy;
  for (Index c = 0; c < bank.num_wavelets(); ++c) {
    const Scalar e = lp_norm(basis.mass, convolve(basis, Vector(bank.wavelets.col(c)), f), 2);
    energy += e * e;
  }
  if (bank.highpass.size() > 0) {
    const Scalar e = lp_norm(basis.mass, convolve(basis, bank.highpass, f), 2);
    energy += e * e;
  }
  return energy;
}

Vector filter_kernel_column(const SpectralBasis& basis, const Vector& hhat, Index vertex) {
  if (vertex < 0 || vertex >= basis.num_vertices()) throw ConfigError("vertex index out of range");
  if (hhat.size() != basis.size()) throw ConfigError("filter length must equal basis size");
  return basis.eigenvectors * hhat.cwiseProduct(basis.eigenvectors.row(vertex).transpose());
}

Vector heat_kernel_column(const SpectralBasis& basis, int J, Index vertex) {
  const Vector hhat = (-std::ldexp(1.0, J) * basis.eigenvalues.array()).exp().matrix();
  return filter_kernel_column(basis, hhat, vertex);
}

Scalar equivariance_defect(const SpectralBasis& basis, const Vector& hhat,
                           const VertexPermutation& permutation, int trials, std::uint64_t seed) {
  if (permutation.size() != basis.num_vertices()) throw ConfigError("permutation size mismatch");
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal;
  Scalar worst = 0;
  for (int t = 0; t < trials; ++t) {
    Vector f(basis.num_vertices());
    for (Index i = 0; i < f.size(); ++i) f[i] = normal(rng);
    const Vector moved_then_filtered = convolve(basis, hhat, permutation.apply(f));
    const Vector filtered_then_moved = permutation.apply(convolve(basis, hhat, f));
    worst = std::max(worst, lp_norm(basis.mass, moved_then_filtered - filtered_then_moved, 2) /
                                lp_norm(basis.mass, f, 2));
  }
  return worst;
}

void write_filter_csv(const std::filesystem::path& path, const Vector& eigenvalues,
                      const Vector& hhat) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "k,lambda,hhat\n" << std::setprecision(17);
  for (Index k = 0; k < hhat.size(); ++k) out << k << ',' << eigenvalues[k] << ',' << hhat[k] << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace geoscatter
