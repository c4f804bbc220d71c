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

#include "lanczos.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <numeric>
#include <random>

namespace geoscatter::detail {

namespace {

constexpr Scalar kRitzTolerance = 1e-11;

Vector random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v.normalized();
}

// Two passes of classical Gram-Schmidt against the first `count` columns.
void orthogonalize(Vector& w, const Matrix& q, Index count) {
  for (int pass = 0; pass < 2; ++pass) {
    const auto basis = q.leftCols(count);
    w.noalias() -= basis * (basis.transpose() * w);
  }
}

// One Lanczos run on (B - shift)^{-1} restricted to the orthogonal
// complement of `locked`. Returns up to k converged pairs, ascending in B.
LanczosResult deflated_run(const Eigen::SimplicialLDLT<SparseMatrix>& solver, Index n, Index k,
                           Scalar shift, const Matrix& locked, std::mt19937_64& rng) {
  const Index room = n - locked.cols();
  k = std::min(k, room);
  auto project_out = [&](Vector& w) {
    if (locked.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) w.noalias() -= locked * (locked.transpose() * w);
  };
  auto fresh_start = [&]() {
    Vector v = random_unit(n, rng);
    project_out(v);
    return Vector(v.normalized());
  };

  Matrix q(n, std::min(room, 2 * k + 32));
  Vector alpha(q.cols()), beta(q.cols());
  q.col(0) = fresh_start();

  Index steps = 0;
  Eigen::SelfAdjointEigenSolver<Matrix> ritz;
  const Index check_every = std::max<Index>(8, k / 8);
  for (Index j = 0; j < room; ++j) {
    if (j + 2 > q.cols() && q.cols() < room) {
      const Index grown = std::min(room, q.cols() + std::max<Index>(k, 32));
      q.conservativeResize(Eigen::NoChange, grown);
      alpha.conservativeResize(grown);
      beta.conservativeResize(grown);
    }
    Vector w = solver.solve(q.col(j));
    project_out(w);
    alpha[j] = q.col(j).dot(w);
    orthogonalize(w, q, j + 1);
    beta[j] = w.norm();
    steps = j + 1;

    const bool last = (j + 1 == room);
    if (steps >= k && (last || (steps - k) % check_every == 0)) {
      Matrix t = Matrix::Zero(steps, steps);
      for (Index i = 0; i < steps; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[i];
      }
      ritz.compute(t);
      if (ritz.info() != Eigen::Success) throw NumericalError("Lanczos: tridiagonal solve failed");
      if (last) break;
      // Largest Ritz values of the inverse are the wanted ones.
      bool converged = true;
      for (Index i = 0; i < k && converged; ++i) {
        const Index c = steps - 1 - i;
        const Scalar theta = ritz.eigenvalues()[c];
        converged = std::abs(beta[j] * ritz.eigenvectors()(steps - 1, c)) <=
                    kRitzTolerance * std::abs(theta);
      }
      if (converged) break;
    }

    if (beta[j] <= 1e-13 * std::abs(alpha[j])) {
      // Invariant subspace found: continue from a fresh orthogonal direction.
      Vector fresh = fresh_start();
      orthogonalize(fresh, q, j + 1);
      beta[j] = 0;
      q.col(j + 1) = fresh.normalized();
    } else {
      q.col(j + 1) = w / beta[j];
    }
  }

  std::vector<std::pair<Scalar, Index>> order;
  for (Index i = 0; i < k; ++i) {
    const Index c = steps - 1 - i;
    order.emplace_back(shift + 1.0 / ritz.eigenvalues()[c], c);
  }
  // Ritz values of the inverse come out descending; map back to ascending.
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  LanczosResult result{Vector(k), Matrix(n, k), steps};
  for (Index i = 0; i < k; ++i) {
    result.eigenvalues[i] = order[static_cast<size_t>(i)].first;
    result.eigenvectors.col(i) = q.leftCols(steps) * ritz.eigenvectors().col(order[static_cast<size_t>(i)].second);
  }
  return result;
}

}  // namespace

LanczosResult shift_invert_lanczos(const SparseMatrix& b, Index k, Scalar shift,
                                   std::uint64_t seed) {
  const Index n = b.rows();
  if (k < 1 || k > n) throw ConfigError("Lanczos: requested eigenpair count out of range");

  SparseMatrix shifted = b;
  for (Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Lanczos: factorization of the shifted operator failed");
  }
  std::mt19937_64 rng(seed);

  // A single Krylov sequence sees one copy of a repeated eigenvalue at a time,
  // so converged pairs are locked and the search restarts in their complement
  // until nothing smaller than the current k-th value turns up.
  LanczosResult best = deflated_run(solver, n, k, shift, Matrix(n, 0), rng);
  Index total_steps = best.steps;
  for (int restart = 0; restart < 64 && best.eigenvalues.size() < n; ++restart) {
    const Scalar kth = best.eigenvalues[k - 1];
    const Scalar tolerance = 1e-9 * std::max<Scalar>(1, std::abs(kth));
    const LanczosResult extra =
        deflated_run(solver, n, std::min<Index>(k, 8), shift, best.eigenvectors, rng);
    total_steps += extra.steps;
    if (extra.eigenvalues.size() == 0 || extra.eigenvalues[0] >= kth - tolerance) break;

    // Merge and keep the k smallest.
    const Index pool = k + extra.eigenvalues.size();
    std::vector<Index> order(static_cast<size_t>(pool));
    std::iota(order.begin(), order.end(), 0);
    auto value = [&](Index i) { return i < k ? best.eigenvalues[i] : extra.eigenvalues[i - k]; };
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index c) { return value(a) < value(c); });
    LanczosResult merged{Vector(k), Matrix(n, k), 0};
    for (Index i = 0; i < k; ++i) {
      const Index src = order[static_cast<size_t>(i)];
      merged.eigenvalues[i] = value(src);
      if (src < k) {
        merged.eigenvectors.col(i) = best.eigenvectors.col(src);
      } else {
        merged.eigenvectors.col(i) = extra.eigenvectors.col(src - k);
      }
    }
    best = std::move(merged);
  }
  best.steps = total_steps;
  return best;
}

}  // namespace geoscatter::detail
