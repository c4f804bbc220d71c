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

#include <geoscatter/scattering.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace geoscatter {

// ---------------------------------------------------------------------------
// Paths

std::string path_label(const Path& path) {
  if (path.empty()) return "-";
  std::string out;
  for (size_t i = 0; i < path.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(path[i]);
  }
  return out;
}

Path parse_path_label(const std::string& label) {
  if (label == "-") return {};
  Path path;
  std::istringstream in(label);
  std::string token;
  while (std::getline(in, token, '|')) {
    size_t used = 0;
    int j = 0;
    try {
      j = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (token.empty() || used != token.size()) throw ConfigError("malformed path label '" + label + "'");
    path.push_back(j);
  }
  if (path.empty()) throw ConfigError("malformed path label '" + label + "'");
  return path;
}

std::string to_string(PathRule rule) {
  return rule == PathRule::kAll ? "all" : "nonincreasing-frequency";
}

PathRule parse_path_rule(const std::string& text) {
  if (text == "all") return PathRule::kAll;
  if (text == "nonincreasing-frequency") return PathRule::kNonincreasingFrequency;
  throw ConfigError("unknown path rule '" + text + "' (expected all or nonincreasing-frequency)");
}

std::string to_string(NonWindowedScale scale) {
  return scale == NonWindowedScale::kVolumeNormalized ? "volume" : "l1";
}

NonWindowedScale parse_nonwindowed_scale(const std::string& text) {
  if (text == "volume") return NonWindowedScale::kVolumeNormalized;
  if (text == "l1") return NonWindowedScale::kL1;
  throw ConfigError("unknown non-windowed scale '" + text + "' (expected volume or l1)");
}

FilterBank make_filterbank(const SpectralBasis& basis, const ScatteringConfig& config) {
  if (config.K < 0 || config.K > basis.size()) {
    throw ConfigError("config K = " + std::to_string(config.K) + " exceeds the basis size " +
                      std::to_string(basis.size()));
  }
  const Index k = config.K == 0 ? basis.size() : config.K;
  FilterBankOptions options;
  options.j_max = config.j_max;
  return build_filterbank(config.window, config.J, config.j_min, basis.eigenvalues.head(k), options);
}

std::size_t count_paths(Index num_scales, int depth, PathRule rule) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  const auto s = static_cast<std::size_t>(num_scales);
  std::size_t total = 0;
  // layer holds the number of admissible paths of the current length; for the
  // ordered rule it is C(s + m - 1, m).
  std::size_t layer = 1;
  for (int m = 0; m <= depth; ++m) {
    if (m > 0) {
      if (rule == PathRule::kAll) {
        if (s != 0 && layer > kMax / s) return kMax;
        layer *= s;
      } else {
        const std::size_t num = s + static_cast<std::size_t>(m) - 1;
        if (layer > kMax / std::max<std::size_t>(num, 1)) return kMax;
        layer = layer * num / static_cast<std::size_t>(m);
      }
    }
    if (total > kMax - layer) return kMax;
    total += layer;
  }
  return total;
}

namespace {

void check_config(const ScatteringConfig& config) {
  if (config.L < 0) throw ConfigError("depth L must be non-negative");
  if (config.threads < 1) throw ConfigError("thread count must be at least 1");
}

void extend(std::vector<Path>& out, Path& prefix, const std::vector<int>& scales, int depth,
            PathRule rule) {
  out.push_back(prefix);
  if (static_cast<int>(prefix.size()) == depth) return;
  for (int j : scales) {
    if (rule == PathRule::kNonincreasingFrequency && !prefix.empty() && j < prefix.back()) continue;
    prefix.push_back(j);
    extend(out, prefix, scales, depth, rule);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const FilterBank& bank, const ScatteringConfig& config) {
  check_config(config);
  const std::size_t count = count_paths(bank.num_wavelets(), config.L, config.path_rule);
  if (count > config.path_cap) {
    std::ostringstream msg;
    msg << "scattering would produce " << count << " paths, above the cap of " << config.path_cap
        << "; reduce L or narrow the wavelet range [j_min, j_max]";
    throw PathCapError(msg.str());
  }
  std::vector<Path> paths;
  paths.reserve(count);
  Path prefix;
  extend(paths, prefix, bank.scales(), config.L, config.path_rule);
  return paths;
}

// ---------------------------------------------------------------------------
// Cascade engine

namespace {

// Depth-first traversal of the path tree for a block of signals (one per
// column). visit(path, U, U_hat) is called once per path in lexicographic
// order; U_hat is empty at leaves unless `hat_at_leaves` is set.
class Cascade {
 public:
  Cascade(const SpectralBasis& basis, const FilterBank& bank, const ScatteringConfig& config)
      : phi_(basis.eigenvectors.leftCols(bank.size())),
        mass_(basis.mass.diag),
        bank_(bank),
        depth_(config.L),
        rule_(config.path_rule),
        scales_(bank.scales()) {
    if (bank.size() > basis.size()) throw ConfigError("filter bank is longer than the basis");
    if (bank.size() == 0) throw ConfigError("empty filter bank");
  }

  template <typename Visit>
  void run(const Matrix& signals, bool hat_at_leaves, Visit&& visit) const {
    if (signals.rows() != phi_.rows()) throw ConfigError("signal length must equal vertex count");
    Path path;
    descend(path, signals, hat_at_leaves, visit);
  }

 private:
  template <typename Visit>
  void descend(Path& path, const Matrix& u, bool hat_at_leaves, Visit& visit) const {
    const bool leaf = static_cast<int>(path.size()) == depth_;
    Matrix u_hat;
    if (!leaf || hat_at_leaves) u_hat = phi_.transpose() * (mass_.asDiagonal() * u);
    visit(std::as_const(path), u, std::as_const(u_hat));
    if (leaf) return;
    for (int j : scales_) {
      if (rule_ == PathRule::kNonincreasingFrequency && !path.empty() && j < path.back()) continue;
      const Matrix next = (phi_ * (bank_.wavelet(j).asDiagonal() * u_hat)).cwiseAbs();
      path.push_back(j);
      descend(path, next, hat_at_leaves, visit);
      path.pop_back();
    }
  }

  Eigen::Ref<const Matrix> phi_;
  const Vector& mass_;
  const FilterBank& bank_;
  int depth_;
  PathRule rule_;
  std::vector<int> scales_;
};

// Splits the columns of `signals` into contiguous chunks and runs
// work(first_col, block) on each, in parallel when threads > 1.
template <typename Work>
void for_column_blocks(const Matrix& signals, int threads, Work&& work) {
  const Index n = signals.cols();
  const Index chunks = std::clamp<Index>(threads, 1, std::max<Index>(n, 1));
  if (chunks == 1) {
    work(Index{0}, signals);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(chunks));
  for (Index c = 0; c < chunks; ++c) {
    const Index first = c * n / chunks, last = (c + 1) * n / chunks;
    pool.emplace_back([&, c, first, last] {
      try {
        work(first, Matrix(signals.middleCols(first, last - first)));
      } catch (...) {
        errors[static_cast<size_t>(c)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::map<Path, size_t> index_paths(const std::vector<Path>& paths) {
  std::map<Path, size_t> index;
  for (size_t i = 0; i < paths.size(); ++i) index.emplace(paths[i], i);
  return index;
}

Scalar nonwindowed_scale(const SpectralBasis& basis, const ScatteringConfig& config) {
  return config.nonwindowed_scale == NonWindowedScale::kVolumeNormalized ? 1.0 / std::sqrt(basis.area())
                                                                          : 1.0;
}

}  // namespace

Vector u_path(const SpectralBasis& basis, const FilterBank& bank, const Vector& f, const Path& path) {
  if (bank.size() > basis.size()) throw ConfigError("filter bank is longer than the basis");
  for (int j : path) {
    if (!bank.has_scale(j)) {
      throw ConfigError("path scale " + std::to_string(j) + " is outside the filter bank range [" +
                        std::to_string(bank.j_min) + ", " + std::to_string(bank.j_max) + "]");
    }
  }
  const auto phi = basis.eigenvectors.leftCols(bank.size());
  Vector u = f;
  for (int j : path) {
    const Vector u_hat = phi.transpose() * (basis.mass.diag.asDiagonal() * u);
    u = (phi * (bank.wavelet(j).asDiagonal() * u_hat)).cwiseAbs();
  }
  return u;
}

BatchCoefficients scatter_windowed_batch(const SpectralBasis& basis, const FilterBank& bank,
                                         const Matrix& signals, const ScatteringConfig& config,
                                         std::span<const Index> rows) {
  BatchCoefficients out;
  out.paths = enumerate_paths(bank, config);
  const auto index = index_paths(out.paths);
  for (Index r : rows) {
    if (r < 0 || r >= basis.num_vertices()) throw ConfigError("sample row out of range");
  }
  const Cascade cascade(basis, bank, config);
  const auto phi = basis.eigenvectors.leftCols(bank.size());
  Matrix sampled(rows.size(), bank.size());
  for (size_t i = 0; i < rows.size(); ++i) sampled.row(static_cast<Index>(i)) = phi.row(rows[i]);
  const Index out_rows = rows.empty() ? basis.num_vertices() : static_cast<Index>(rows.size());

  out.values.assign(out.paths.size(), Matrix(out_rows, signals.cols()));
  for_column_blocks(signals, config.threads, [&](Index first, const Matrix& block) {
    cascade.run(block, true, [&](const Path& path, const Matrix&, const Matrix& u_hat) {
      Matrix& dest = out.values[index.at(path)];
      const Matrix low = bank.lowpass.asDiagonal() * u_hat;
      if (rows.empty()) {
        dest.middleCols(first, block.cols()) = phi * low;
      } else {
        dest.middleCols(first, block.cols()) = sampled * low;
      }
    });
  });
  return out;
}

BatchCoefficients scatter_nonwindowed_batch(const SpectralBasis& basis, const FilterBank& bank,
                                            const Matrix& signals, const ScatteringConfig& config) {
  BatchCoefficients out;
  out.paths = enumerate_paths(bank, config);
  const auto index = index_paths(out.paths);
  const Cascade cascade(basis, bank, config);
  const Scalar scale = nonwindowed_scale(basis, config);

  out.values.assign(out.paths.size(), Matrix(1, signals.cols()));
  for_column_blocks(signals, config.threads, [&](Index first, const Matrix& block) {
    cascade.run(block, false, [&](const Path& path, const Matrix& u, const Matrix&) {
      out.values[index.at(path)].middleCols(first, block.cols()) =
          scale * (basis.mass.diag.transpose() * u.cwiseAbs());
    });
  });
  return out;
}

WindowedCoefficients scatter_windowed(const SpectralBasis& basis, const FilterBank& bank,
                                      const Vector& f, const ScatteringConfig& config) {
  ScatteringConfig serial = config;
  serial.threads = 1;
  const BatchCoefficients batch = scatter_windowed_batch(basis, bank, Matrix(f), serial);
  WindowedCoefficients out;
  out.mass = basis.mass.diag;
  for (size_t i = 0; i < batch.paths.size(); ++i) out.values.emplace(batch.paths[i], batch.values[i].col(0));
  return out;
}

NonWindowedCoefficients scatter_nonwindowed(const SpectralBasis& basis, const FilterBank& bank,
                                            const Vector& f, const ScatteringConfig& config) {
  ScatteringConfig serial = config;
  serial.threads = 1;
  const BatchCoefficients batch = scatter_nonwindowed_batch(basis, bank, Matrix(f), serial);
  NonWindowedCoefficients out;
  for (size_t i = 0; i < batch.paths.size(); ++i) out.values.emplace(batch.paths[i], batch.values[i](0, 0));
  return out;
}

// ---------------------------------------------------------------------------
// Distances

namespace {

template <typename Map>
void require_same_paths(const Map& a, const Map& b) {
  const bool same = a.size() == b.size() &&
                    std::equal(a.begin(), a.end(), b.begin(),
                               [](const auto& x, const auto& y) { return x.first == y.first; });
  if (!same) throw ConfigError("scattering coefficients have different path sets");
}

}  // namespace

Scalar scattering_distance(const WindowedCoefficients& a, const WindowedCoefficients& b) {
  require_same_paths(a.values, b.values);
  Scalar sum = 0;
  for (auto ia = a.values.begin(), ib = b.values.begin(); ia != a.values.end(); ++ia, ++ib) {
    sum += a.mass.dot((ia->second - ib->second).cwiseAbs2());
  }
  return std::sqrt(sum);
}

Scalar scattering_distance(const NonWindowedCoefficients& a, const NonWindowedCoefficients& b) {
  require_same_paths(a.values, b.values);
  Scalar sum = 0;
  for (auto ia = a.values.begin(), ib = b.values.begin(); ia != a.values.end(); ++ia, ++ib) {
    sum += (ia->second - ib->second) * (ia->second - ib->second);
  }
  return std::sqrt(sum);
}

Scalar scattering_norm(const WindowedCoefficients& a) {
  Scalar sum = 0;
  for (const auto& [path, v] : a.values) sum += a.mass.dot(v.cwiseAbs2());
  return std::sqrt(sum);
}

Scalar scattering_norm(const NonWindowedCoefficients& a) {
  Scalar sum = 0;
  for (const auto& [path, v] : a.values) sum += v * v;
  return std::sqrt(sum);
}

Scalar path_energy(const SpectralBasis& basis, const FilterBank& bank, const Vector& f,
                   const ScatteringConfig& config) {
  enumerate_paths(bank, config);
  Scalar energy = 0;
  Cascade(basis, bank, config).run(Matrix(f), false, [&](const Path&, const Matrix& u, const Matrix&) {
    energy += basis.mass.diag.dot(u.col(0).cwiseAbs2());
  });
  return energy;
}

// ---------------------------------------------------------------------------
// Invariance and stability checks

std::vector<std::pair<int, Scalar>> isometry_invariance_curve(const SpectralBasis& basis,
                                                              const Vector& f,
                                                              const VertexPermutation& permutation,
                                                              std::span<const int> Js,
                                                              const ScatteringConfig& config) {
  if (permutation.size() != basis.num_vertices()) throw ConfigError("permutation size mismatch");
  const Vector moved = permutation.apply(f);
  std::vector<std::pair<int, Scalar>> curve;
  for (int J : Js) {
    ScatteringConfig at = config;
    at.J = J;
    const FilterBank bank = make_filterbank(basis, at);
    curve.emplace_back(J, scattering_distance(scatter_windowed(basis, bank, f, at),
                                              scatter_windowed(basis, bank, moved, at)));
  }
  return curve;
}

std::vector<std::pair<Scalar, Scalar>> diffeo_stability_probe(
    const TriangleMesh& mesh, const SpectralBasis& basis, const Vector& f, const WarpFamily& warp,
    std::span<const Scalar> amplitudes, const ScatteringConfig& config, TransformKind kind) {
  if (mesh.num_vertices() != basis.num_vertices()) throw ConfigError("mesh and basis sizes differ");
  const FilterBank bank = make_filterbank(basis, config);
  std::vector<std::pair<Scalar, Scalar>> out;
  if (kind == TransformKind::kWindowed) {
    const auto reference = scatter_windowed(basis, bank, f, config);
    for (Scalar eps : amplitudes) {
      const Vector moved = pullback(mesh, f, warp(eps));
      out.emplace_back(eps, scattering_distance(reference, scatter_windowed(basis, bank, moved, config)));
    }
  } else {
    const auto reference = scatter_nonwindowed(basis, bank, f, config);
    for (Scalar eps : amplitudes) {
      const Vector moved = pullback(mesh, f, warp(eps));
      out.emplace_back(eps,
                       scattering_distance(reference, scatter_nonwindowed(basis, bank, moved, config)));
    }
  }
  return out;
}

Scalar commutator_norm_estimate(const SpectralBasis& basis, const FilterBank& bank, int j,
                                const SparseMatrix& transport, const CommutatorOptions& options) {
  const Index n = basis.num_vertices();
  if (!bank.has_scale(j)) throw ConfigError("scale " + std::to_string(j) + " is outside the filter bank");
  if (bank.size() > basis.size()) throw ConfigError("filter bank is longer than the basis");
  if (transport.rows() != n || transport.cols() != n) throw ConfigError("transport must be n_v x n_v");
  if (options.probes < 1 || options.iterations < 1) throw ConfigError("need at least one probe and iteration");

  const auto phi = basis.eigenvectors.leftCols(bank.size());
  const Vector& m = basis.mass.diag;
  const Vector psi = bank.wavelet(j);
  // Psi = Phi diag(psi) Phi^T M is self-adjoint in the M inner product, so
  // C* = M^{-1} C^T M with C^T = V^T Psi^T - Psi^T V^T and Psi^T = M Psi M^{-1}.
  const auto apply_psi = [&](const Vector& x) -> Vector {
    return phi * (psi.asDiagonal() * (phi.transpose() * m.cwiseProduct(x)));
  };
  const SparseMatrix transport_t = transport.transpose();
  const auto apply_c = [&](const Vector& x) -> Vector {
    return apply_psi(transport * x) - transport * apply_psi(x);
  };
  const auto apply_c_adjoint = [&](const Vector& y) -> Vector {
    // M^{-1} (V^T M Psi y - M Psi M^{-1} V^T M y)
    const Vector my = m.cwiseProduct(y);
    return m.cwiseInverse().cwiseProduct(transport_t * m.cwiseProduct(apply_psi(y))) -
           apply_psi(m.cwiseInverse().cwiseProduct(transport_t * my));
  };
  const auto norm = [&](const Vector& x) { return std::sqrt(m.dot(x.cwiseAbs2())); };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<Scalar> normal;
  Scalar best = 0;
  for (int p = 0; p < options.probes; ++p) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = normal(rng);
    x /= norm(x);
    Scalar estimate = 0;
    for (int it = 0; it < options.iterations; ++it) {
      const Vector cx = apply_c(x);
      estimate = std::max(estimate, norm(cx));
      Vector next = apply_c_adjoint(cx);
      const Scalar size = norm(next);
      if (!(size > 0)) break;
      x = next / size;
    }
    best = std::max(best, estimate);
  }
  return best;
}

}  // namespace geoscatter
