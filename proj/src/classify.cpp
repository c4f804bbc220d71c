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

#include <geoscatter/classify.hpp>

#include "binary_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>

namespace geoscatter {

// ---------------------------------------------------------------------------
// Sampling

std::vector<Index> farthest_point_sample(const TriangleMesh& mesh, Index count) {
  const Index n = mesh.num_vertices();
  if (count < 1 || count > n) throw ConfigError("sample count must lie in [1, n_v]");

  std::vector<std::vector<std::pair<int, Scalar>>> adjacency(static_cast<size_t>(n));
  for (auto [a, b] : edges(mesh)) {
    const Scalar w = (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
    adjacency[static_cast<size_t>(a)].emplace_back(b, w);
    adjacency[static_cast<size_t>(b)].emplace_back(a, w);
  }

  constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> dist(static_cast<size_t>(n), kInf);
  std::vector<char> chosen(static_cast<size_t>(n), 0);
  std::vector<Index> samples;
  using Entry = std::pair<Scalar, int>;

  Index next = 0;
  while (true) {
    samples.push_back(next);
    chosen[static_cast<size_t>(next)] = 1;
    if (static_cast<Index>(samples.size()) == count) break;

    // Dijkstra from the new sample, only where it improves the distance to
    // the chosen set.
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[static_cast<size_t>(next)] = 0;
    queue.emplace(0.0, static_cast<int>(next));
    while (!queue.empty()) {
      const auto [d, v] = queue.top();
      queue.pop();
      if (d > dist[static_cast<size_t>(v)]) continue;
      for (auto [w, len] : adjacency[static_cast<size_t>(v)]) {
        const Scalar nd = d + len;
        if (nd < dist[static_cast<size_t>(w)]) {
          dist[static_cast<size_t>(w)] = nd;
          queue.emplace(nd, w);
        }
      }
    }

    Scalar best = -1;
    for (Index v = 0; v < n; ++v) {
      if (chosen[static_cast<size_t>(v)]) continue;
      if (dist[static_cast<size_t>(v)] == kInf) throw ValidationError("mesh is disconnected");
      if (dist[static_cast<size_t>(v)] > best) {
        best = dist[static_cast<size_t>(v)];
        next = v;
      }
    }
  }
  return samples;
}

Index sample_count_for_scale(int J, Index num_vertices) {
  if (J >= 1) return 1;
  Index count = 4;
  for (int j = 0; j > J && count < num_vertices; --j) count *= 4;
  return std::min(count, num_vertices);
}

// ---------------------------------------------------------------------------
// Features

Vector assemble_features(const WindowedCoefficients& coefficients, std::span<const Index> points,
                         std::vector<FeatureColumn>* manifest, int channel) {
  Vector row(static_cast<Index>(coefficients.values.size() * points.size()));
  Index c = 0;
  for (const auto& [path, values] : coefficients.values) {
    for (Index p : points) {
      if (p < 0 || p >= values.size()) throw ConfigError("sample point out of range");
      row[c++] = values[p];
      if (manifest) manifest->push_back({channel, path, p});
    }
  }
  return row;
}

Vector assemble_features(const NonWindowedCoefficients& coefficients, std::vector<FeatureColumn>* manifest,
                         int channel) {
  Vector row(static_cast<Index>(coefficients.values.size()));
  Index c = 0;
  for (const auto& [path, value] : coefficients.values) {
    row[c++] = value;
    if (manifest) manifest->push_back({channel, path, std::nullopt});
  }
  return row;
}

FeatureMatrix batch_features(const BatchCoefficients& batch, std::span<const Index> points, int channel) {
  FeatureMatrix out;
  if (batch.paths.empty()) return out;
  const Index samples = batch.values.front().cols();
  const Index per_path = points.empty() ? 1 : static_cast<Index>(points.size());
  out.values.resize(samples, per_path * static_cast<Index>(batch.paths.size()));
  for (size_t p = 0; p < batch.paths.size(); ++p) {
    const Matrix& v = batch.values[p];
    if (v.rows() != per_path || v.cols() != samples) {
      throw ConfigError("batch values do not match the requested sample points");
    }
    out.values.middleCols(static_cast<Index>(p) * per_path, per_path) = v.transpose();
    for (Index r = 0; r < per_path; ++r) {
      out.manifest.push_back({channel, batch.paths[p],
                              points.empty() ? std::nullopt : std::optional<Index>(points[static_cast<size_t>(r)])});
    }
  }
  return out;
}

FeatureMatrix concatenate(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw ConfigError("feature matrices have different row counts");
  FeatureMatrix out;
  out.values.resize(a.rows(), a.cols() + b.cols());
  out.values << a.values, b.values;
  out.manifest = a.manifest;
  out.manifest.insert(out.manifest.end(), b.manifest.begin(), b.manifest.end());
  return out;
}

void write_feature_csv(const FeatureMatrix& features, std::span<const int> labels,
                       const std::filesystem::path& path) {
  if (!labels.empty() && static_cast<Index>(labels.size()) != features.rows()) {
    throw ConfigError("label count must match feature rows");
  }
  if (static_cast<Index>(features.manifest.size()) != features.cols()) {
    throw ConfigError("feature manifest length must match the column count");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "#channel,";
  for (const auto& c : features.manifest) out << ',' << c.channel;
  out << "\n#path,";
  for (const auto& c : features.manifest) out << ',' << path_label(c.path);
  out << "\n#point,";
  for (const auto& c : features.manifest) {
    out << ',';
    if (c.point) {
      out << *c.point;
    } else {
      out << "global";
    }
  }
  out << "\nsample,label";
  for (Index j = 0; j < features.cols(); ++j) out << ",f" << j;
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < features.rows(); ++i) {
    out << i << ',';
    if (!labels.empty()) out << labels[static_cast<size_t>(i)];
    for (Index j = 0; j < features.cols(); ++j) out << ',' << features.values(i, j);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// SVM

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() == 0) throw ConfigError("cannot standardise an empty matrix");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale = ((x.rowwise() - s.mean.transpose()).cwiseAbs2().colwise().sum() / static_cast<Scalar>(x.rows()))
                .cwiseSqrt()
                .transpose();
  for (Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale[j] > 1e-12 * std::max<Scalar>(1, std::abs(s.mean[j])))) s.scale[j] = 1;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw ConfigError("feature width does not match the standardiser");
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

namespace {

Standardizer identity_standardizer(Index dim) { return {Vector::Zero(dim), Vector::Ones(dim)}; }

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  const Vector a2 = a.rowwise().squaredNorm();
  const Vector b2 = b.rowwise().squaredNorm();
  Matrix d = -2.0 * a * b.transpose();
  d.colwise() += a2;
  d.rowwise() += b2.transpose();
  return d.cwiseMax(0.0);
}

Matrix self_distances(const Matrix& a) {
  Matrix d = squared_distances(a, a);
  d.diagonal().setZero();
  return d.selfadjointView<Eigen::Upper>();
}

struct BinaryMachine {
  Vector alpha;
  Scalar rho = 0;
  Scalar violation = 0;
  std::int64_t iterations = 0;
};

// Dual coordinate descent on min 1/2 a^T Q a - e^T a, 0 <= a <= C, y^T a = 0,
// with the maximal-violating-pair working set.
BinaryMachine smo(const Matrix& kernel, const std::vector<Scalar>& y, Scalar C, const SvmOptions& options) {
  const Index n = kernel.rows();
  BinaryMachine m;
  m.alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);
  const auto at_upper = [&](Index t) { return m.alpha[t] >= C; };
  const auto at_lower = [&](Index t) { return m.alpha[t] <= 0; };

  while (true) {
    Scalar g_max = -std::numeric_limits<Scalar>::infinity(), g_min = std::numeric_limits<Scalar>::infinity();
    Index i = -1, j = -1;
    for (Index t = 0; t < n; ++t) {
      const Scalar v = -y[t] * grad[t];
      const bool up = y[t] > 0 ? !at_upper(t) : !at_lower(t);
      const bool low = y[t] > 0 ? !at_lower(t) : !at_upper(t);
      if (up && v > g_max) {
        g_max = v;
        i = t;
      }
      if (low && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    m.violation = (i < 0 || j < 0) ? 0 : g_max - g_min;
    if (i < 0 || j < 0 || m.violation <= options.tolerance || m.iterations >= options.max_iterations) break;
    ++m.iterations;

    const Scalar qij = y[i] * y[j] * kernel(i, j);
    const Scalar old_i = m.alpha[i], old_j = m.alpha[j];
    Scalar& ai = m.alpha[i];
    Scalar& aj = m.alpha[j];
    if (y[i] != y[j]) {
      Scalar quad = kernel(i, i) + kernel(j, j) + 2 * qij;
      if (quad <= 0) quad = 1e-12;
      const Scalar delta = (-grad[i] - grad[j]) / quad;
      const Scalar diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) {
          aj = 0;
          ai = diff;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > C) {
          ai = C;
          aj = C - diff;
        }
      } else if (aj > C) {
        aj = C;
        ai = C + diff;
      }
    } else {
      Scalar quad = kernel(i, i) + kernel(j, j) - 2 * qij;
      if (quad <= 0) quad = 1e-12;
      const Scalar delta = (grad[i] - grad[j]) / quad;
      const Scalar sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) {
          ai = C;
          aj = sum - C;
        }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > C) {
        if (aj > C) {
          aj = C;
          ai = sum - C;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    const Scalar di = ai - old_i, dj = aj - old_j;
    for (Index t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * kernel(t, i) * di + y[j] * kernel(t, j) * dj);
    }
  }

  Scalar ub = std::numeric_limits<Scalar>::infinity(), lb = -std::numeric_limits<Scalar>::infinity();
  Scalar free_sum = 0;
  Index free_count = 0;
  for (Index t = 0; t < n; ++t) {
    const Scalar yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  m.rho = free_count > 0 ? free_sum / static_cast<Scalar>(free_count) : (ub + lb) / 2;
  return m;
}

std::vector<int> distinct_classes(std::span<const int> labels) {
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

struct OvrFit {
  Matrix coef;  // classes x n
  Vector bias;
  std::vector<Scalar> violation;
  std::vector<std::int64_t> iterations;
};

OvrFit fit_ovr(const Matrix& kernel, std::span<const int> labels, const std::vector<int>& classes, Scalar C,
               const SvmOptions& options) {
  const Index n = kernel.rows();
  OvrFit fit;
  fit.coef = Matrix::Zero(static_cast<Index>(classes.size()), n);
  fit.bias.resize(static_cast<Index>(classes.size()));
  std::vector<Scalar> y(static_cast<size_t>(n));
  for (size_t c = 0; c < classes.size(); ++c) {
    for (Index t = 0; t < n; ++t) y[static_cast<size_t>(t)] = labels[static_cast<size_t>(t)] == classes[c] ? 1.0 : -1.0;
    const BinaryMachine m = smo(kernel, y, C, options);
    for (Index t = 0; t < n; ++t) fit.coef(static_cast<Index>(c), t) = y[static_cast<size_t>(t)] * m.alpha[t];
    fit.bias[static_cast<Index>(c)] = -m.rho;
    fit.violation.push_back(m.violation);
    fit.iterations.push_back(m.iterations);
  }
  return fit;
}

std::vector<int> argmax_classes(const Matrix& decision, const std::vector<int>& classes) {
  std::vector<int> out(static_cast<size_t>(decision.rows()));
  for (Index i = 0; i < decision.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < decision.cols(); ++c) {
      if (decision(i, c) > decision(i, best)) best = c;
    }
    out[static_cast<size_t>(i)] = classes[static_cast<size_t>(best)];
  }
  return out;
}

void check_training_input(const Matrix& features, std::span<const int> labels, Scalar gamma, Scalar C) {
  if (features.rows() != static_cast<Index>(labels.size())) throw ConfigError("feature rows must match labels");
  if (!features.allFinite()) throw ConfigError("features contain non-finite values");
  if (!(gamma > 0) || !(C > 0)) throw ConfigError("gamma and C must be positive");
  if (distinct_classes(labels).size() < 2) throw ConfigError("training needs at least two classes");
}

}  // namespace

SvmModel svm_train(const Matrix& features, std::span<const int> labels, Scalar gamma, Scalar C,
                   const SvmOptions& options) {
  check_training_input(features, labels, gamma, C);
  SvmModel model;
  model.classes = distinct_classes(labels);
  model.gamma = gamma;
  model.C = C;
  model.standardizer =
      options.standardize ? Standardizer::fit(features) : identity_standardizer(features.cols());
  const Matrix x = model.standardizer.apply(features);
  const Matrix kernel = (-gamma * self_distances(x)).array().exp().matrix();
  const OvrFit fit = fit_ovr(kernel, labels, model.classes, C, options);

  for (Index t = 0; t < x.rows(); ++t) {
    if ((fit.coef.col(t).array() != 0).any()) model.support_indices.push_back(t);
  }
  const auto s = static_cast<Index>(model.support_indices.size());
  model.support_vectors.resize(s, x.cols());
  model.coef.resize(fit.coef.rows(), s);
  for (Index k = 0; k < s; ++k) {
    model.support_vectors.row(k) = x.row(model.support_indices[static_cast<size_t>(k)]);
    model.coef.col(k) = fit.coef.col(model.support_indices[static_cast<size_t>(k)]);
  }
  model.bias = fit.bias;
  model.max_violation = fit.violation;
  model.iterations = fit.iterations;
  return model;
}

Matrix svm_decision(const SvmModel& model, const Matrix& features) {
  const Matrix x = model.standardizer.apply(features);
  const Matrix kernel = (-model.gamma * squared_distances(x, model.support_vectors)).array().exp().matrix();
  Matrix decision = kernel * model.coef.transpose();
  decision.rowwise() += model.bias.transpose();
  return decision;
}

std::vector<int> svm_predict(const SvmModel& model, const Matrix& features) {
  return argmax_classes(svm_decision(model, features), model.classes);
}

Scalar accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw ConfigError("accuracy needs equal, non-empty inputs");
  size_t hits = 0;
  for (size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<Scalar>(hits) / static_cast<Scalar>(truth.size());
}

namespace {

constexpr char kModelMagic[4] = {'G', 'S', 'V', 'M'};
constexpr std::uint32_t kModelVersion = 1;
constexpr char kModelName[] = "model file";

// Row-major element order for a column-major matrix.
void put_rows(std::ostream& out, const Matrix& m) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = m;
  detail::put_doubles(out, r.data(), r.size());
}

Matrix get_rows(std::istream& in, Index rows, Index cols, const std::string& what) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r(rows, cols);
  detail::get_doubles(in, r.data(), r.size(), kModelName, what);
  return r;
}

}  // namespace

void save_model(const SvmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kModelMagic, 4);
  detail::put<std::uint32_t>(out, kModelVersion);
  detail::put<std::uint64_t>(out, model.classes.size());
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(model.support_vectors.cols()));
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(model.support_vectors.rows()));
  detail::put_doubles(out, &model.gamma, 1);
  detail::put_doubles(out, &model.C, 1);
  for (int c : model.classes) detail::put<std::int64_t>(out, c);
  detail::put_doubles(out, model.standardizer.mean.data(), model.standardizer.mean.size());
  detail::put_doubles(out, model.standardizer.scale.data(), model.standardizer.scale.size());
  put_rows(out, model.support_vectors);
  put_rows(out, model.coef);
  detail::put_doubles(out, model.bias.data(), model.bias.size());
  if (!out) throw IoError("write failed for " + path.string());
}

SvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kModelMagic, 4) != 0) {
    throw IoError(path.string() + " is not a GSVM model file");
  }
  const auto version = detail::get<std::uint32_t>(in, kModelName, "version");
  if (version != kModelVersion) throw IoError("unsupported model version " + std::to_string(version));
  const auto classes = detail::get<std::uint64_t>(in, kModelName, "class count");
  const auto dim = detail::get<std::uint64_t>(in, kModelName, "dimension");
  const auto svs = detail::get<std::uint64_t>(in, kModelName, "support vector count");
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 32;
  if (classes < 2 || classes > kLimit || dim > kLimit || svs > kLimit) {
    throw IoError(path.string() + " has an implausible header");
  }
  SvmModel model;
  detail::get_doubles(in, &model.gamma, 1, kModelName, "gamma");
  detail::get_doubles(in, &model.C, 1, kModelName, "C");
  for (std::uint64_t c = 0; c < classes; ++c) {
    model.classes.push_back(static_cast<int>(detail::get<std::int64_t>(in, kModelName, "class ids")));
  }
  const auto d = static_cast<Index>(dim), s = static_cast<Index>(svs), k = static_cast<Index>(classes);
  model.standardizer.mean.resize(d);
  model.standardizer.scale.resize(d);
  detail::get_doubles(in, model.standardizer.mean.data(), d, kModelName, "means");
  detail::get_doubles(in, model.standardizer.scale.data(), d, kModelName, "scales");
  model.support_vectors = get_rows(in, s, d, "support vectors");
  model.coef = get_rows(in, k, s, "coefficients");
  model.bias.resize(k);
  detail::get_doubles(in, model.bias.data(), k, kModelName, "bias");
  if (in.peek() != std::char_traits<char>::eof()) throw IoError(path.string() + " has trailing bytes");
  return model;
}

// ---------------------------------------------------------------------------
// Cross-validation

CvPlan CvPlan::mesh_task() {
  CvPlan plan;
  plan.gammas = {0.001, 0.005, 0.01, 0.02, 0.04};
  plan.Cs = {50, 100, 250, 400, 500};
  return plan;
}

CvPlan CvPlan::digit_task() {
  CvPlan plan;
  plan.gammas = {1e-5, 1e-4, 1e-3};
  plan.Cs = {25, 100, 250, 500};
  return plan;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("need at least two folds");
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), -1);
  int offset = 0;
  for (auto& [label, members] : by_class) {
    if (members.size() < static_cast<size_t>(folds)) {
      throw ConfigError("class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                        " samples, fewer than " + std::to_string(folds) + " folds");
    }
    std::shuffle(members.begin(), members.end(), rng);
    // Continue dealing where the previous class stopped so fold sizes stay
    // balanced overall.
    for (size_t r = 0; r < members.size(); ++r) {
      fold[members[r]] = static_cast<int>((static_cast<size_t>(offset) + r) % static_cast<size_t>(folds));
    }
    offset = static_cast<int>((static_cast<size_t>(offset) + members.size()) % static_cast<size_t>(folds));
  }
  return fold;
}

namespace {

Matrix take_rows(const Matrix& x, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

std::vector<int> take(std::span<const int> v, const std::vector<Index>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (Index r : rows) out.push_back(v[static_cast<size_t>(r)]);
  return out;
}

// Squared distances for one train/test split after standardising with the
// training rows.
struct SplitDistances {
  Matrix train;  // train x train
  Matrix test;   // test x train
};

SplitDistances split_distances(const Matrix& x, const std::vector<Index>& train, const std::vector<Index>& test,
                               bool standardize) {
  const Matrix xt = take_rows(x, train);
  const Standardizer s = standardize ? Standardizer::fit(xt) : identity_standardizer(x.cols());
  const Matrix a = s.apply(xt);
  return {self_distances(a), squared_distances(s.apply(take_rows(x, test)), a)};
}

Scalar evaluate(const SplitDistances& d, std::span<const int> train_labels, std::span<const int> test_labels,
                Scalar gamma, Scalar C, const SvmOptions& options) {
  const std::vector<int> classes = distinct_classes(train_labels);
  const Matrix k_train = (-gamma * d.train).array().exp().matrix();
  const OvrFit fit = fit_ovr(k_train, train_labels, classes, C, options);
  Matrix decision = (-gamma * d.test).array().exp().matrix() * fit.coef.transpose();
  decision.rowwise() += fit.bias.transpose();
  return accuracy(argmax_classes(decision, classes), test_labels);
}

}  // namespace

CvReport nested_cv(std::span<const FeatureCandidate> candidates, std::span<const int> labels, const CvPlan& plan) {
  if (candidates.empty()) throw ConfigError("nested CV needs at least one feature set");
  if (plan.gammas.empty() || plan.Cs.empty()) throw ConfigError("hyperparameter grids must not be empty");
  if (plan.inner_folds < 2) throw ConfigError("need at least two inner folds");
  for (const auto& c : candidates) {
    if (c.features.rows() != static_cast<Index>(labels.size())) {
      throw ConfigError("feature set '" + c.name + "' has " + std::to_string(c.features.rows()) + " rows for " +
                        std::to_string(labels.size()) + " labels");
    }
    if (!c.features.allFinite()) throw ConfigError("feature set '" + c.name + "' contains non-finite values");
  }
  if (distinct_classes(labels).size() < 2) throw ConfigError("nested CV needs at least two classes");

  CvReport report;
  report.plan = plan;
  report.selection_counts.assign(candidates.size(), 0);
  for (const auto& c : candidates) {
    report.candidate_names.push_back(c.name);
    report.candidate_depths.push_back(c.depth);
  }

  const std::vector<int> outer = stratified_folds(labels, plan.outer_folds, plan.seed);
  for (int f = 0; f < plan.outer_folds; ++f) {
    std::vector<Index> train, test;
    for (size_t i = 0; i < outer.size(); ++i) (outer[i] == f ? test : train).push_back(static_cast<Index>(i));
    const std::vector<int> train_labels = take(labels, train);
    const std::vector<int> test_labels = take(labels, test);
    const std::vector<int> inner =
        stratified_folds(train_labels, plan.inner_folds, plan.seed + 1000003 * static_cast<std::uint64_t>(f + 1));

    CvFold best;
    best.fold = f;
    best.inner_accuracy = -1;
    for (size_t c = 0; c < candidates.size(); ++c) {
      const Matrix x = take_rows(candidates[c].features, train);
      std::vector<Scalar> score(plan.gammas.size() * plan.Cs.size(), 0);
      for (int g = 0; g < plan.inner_folds; ++g) {
        std::vector<Index> fit_rows, val_rows;
        for (size_t i = 0; i < inner.size(); ++i) (inner[i] == g ? val_rows : fit_rows).push_back(static_cast<Index>(i));
        const SplitDistances d = split_distances(x, fit_rows, val_rows, plan.svm.standardize);
        const std::vector<int> fit_labels = take(train_labels, fit_rows);
        const std::vector<int> val_labels = take(train_labels, val_rows);
        for (size_t gi = 0; gi < plan.gammas.size(); ++gi) {
          for (size_t ci = 0; ci < plan.Cs.size(); ++ci) {
            score[gi * plan.Cs.size() + ci] +=
                evaluate(d, fit_labels, val_labels, plan.gammas[gi], plan.Cs[ci], plan.svm) / plan.inner_folds;
          }
        }
      }
      for (size_t gi = 0; gi < plan.gammas.size(); ++gi) {
        for (size_t ci = 0; ci < plan.Cs.size(); ++ci) {
          const Scalar s = score[gi * plan.Cs.size() + ci];
          if (s > best.inner_accuracy) {
            best.inner_accuracy = s;
            best.candidate = static_cast<int>(c);
            best.gamma = plan.gammas[gi];
            best.C = plan.Cs[ci];
          }
        }
      }
    }

    const SplitDistances d =
        split_distances(candidates[static_cast<size_t>(best.candidate)].features, train, test, plan.svm.standardize);
    best.test_accuracy = evaluate(d, train_labels, test_labels, best.gamma, best.C, plan.svm);
    best.train_size = static_cast<Index>(train.size());
    best.test_size = static_cast<Index>(test.size());
    ++report.selection_counts[static_cast<size_t>(best.candidate)];
    report.folds.push_back(best);
  }

  Scalar sum = 0, sq = 0;
  for (const auto& f : report.folds) sum += f.test_accuracy;
  report.mean_accuracy = sum / static_cast<Scalar>(report.folds.size());
  for (const auto& f : report.folds) sq += (f.test_accuracy - report.mean_accuracy) * (f.test_accuracy - report.mean_accuracy);
  report.std_accuracy = std::sqrt(sq / static_cast<Scalar>(report.folds.size()));
  return report;
}

std::string CvReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["plan"] = {{"outer_folds", plan.outer_folds},
                 {"inner_folds", plan.inner_folds},
                 {"gammas", plan.gammas},
                 {"Cs", plan.Cs},
                 {"seed", plan.seed},
                 {"kkt_tolerance", plan.svm.tolerance},
                 {"max_iterations", plan.svm.max_iterations},
                 {"standardize", plan.svm.standardize}};
  doc["candidates"] = nlohmann::ordered_json::array();
  for (size_t c = 0; c < candidate_names.size(); ++c) {
    doc["candidates"].push_back(
        {{"name", candidate_names[c]}, {"depth", candidate_depths[c]}, {"selected", selection_counts[c]}});
  }
  doc["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : folds) {
    doc["folds"].push_back({{"fold", f.fold},
                            {"train_size", f.train_size},
                            {"test_size", f.test_size},
                            {"candidate", candidate_names[static_cast<size_t>(f.candidate)]},
                            {"depth", candidate_depths[static_cast<size_t>(f.candidate)]},
                            {"gamma", f.gamma},
                            {"C", f.C},
                            {"inner_accuracy", f.inner_accuracy},
                            {"test_accuracy", f.test_accuracy}});
  }
  doc["mean_accuracy"] = mean_accuracy;
  doc["std_accuracy"] = std_accuracy;
  return doc.dump(2);
}

}  // namespace geoscatter
