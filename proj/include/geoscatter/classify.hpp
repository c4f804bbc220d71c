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
#include <geoscatter/scattering.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geoscatter {

// ---------------------------------------------------------------------------
// Sampling and feature assembly

/// Greedy farthest-point sampling under edge-length Dijkstra distance,
/// starting at vertex 0. Indices are returned in selection order.
std::vector<Index> farthest_point_sample(const TriangleMesh& mesh, Index count);

/// Sample points used for windowed features at scale J: 4^{1-J} (4, 16, 64
/// for J = 0, -1, -2), capped at n_v.
Index sample_count_for_scale(int J, Index num_vertices);

struct FeatureColumn {
  int channel = 0;             // input signal the column came from
  Path path;
  std::optional<Index> point;  // vertex index, or empty for a global scalar

  friend bool operator==(const FeatureColumn&, const FeatureColumn&) = default;
};

struct FeatureMatrix {
  Matrix values;  // one row per sample
  std::vector<FeatureColumn> manifest;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// One feature row: paths in lexicographic order, then sample points in the
/// given order.
Vector assemble_features(const WindowedCoefficients& coefficients, std::span<const Index> points,
                         std::vector<FeatureColumn>* manifest = nullptr, int channel = 0);
Vector assemble_features(const NonWindowedCoefficients& coefficients,
                         std::vector<FeatureColumn>* manifest = nullptr, int channel = 0);

/// Feature rows for a batch transform (one row per signal column). Windowed
/// batch values must already be restricted to `points`.
FeatureMatrix batch_features(const BatchCoefficients& batch, std::span<const Index> points, int channel = 0);

/// Columns of b appended to a (rows must match).
FeatureMatrix concatenate(const FeatureMatrix& a, const FeatureMatrix& b);

/// CSV: header rows "#channel", "#path", "#point" (index or "global"), then
/// "sample,label,values..." rows.
void write_feature_csv(const FeatureMatrix& features, std::span<const int> labels,
                       const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// RBF support vector machine

/// Per-column standardisation fitted on training rows only. Columns with zero
/// spread are centred but not scaled.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

struct SvmOptions {
  Scalar tolerance = 1e-3;        // largest KKT violation at convergence
  std::int64_t max_iterations = 100'000;
  bool standardize = true;
};

/// One-vs-rest RBF machine. Decision value for class c at x:
///   sum_i coef(c, i) K(sv_i, x) + bias(c),   K(u, v) = exp(-gamma |u - v|^2).
struct SvmModel {
  std::vector<int> classes;  // ascending
  Scalar gamma = 0;
  Scalar C = 0;
  Standardizer standardizer;
  Matrix support_vectors;    // standardised, one per row
  Matrix coef;               // classes x support vectors, y_i alpha_i
  Vector bias;
  std::vector<Index> support_indices;  // rows of the training matrix
  std::vector<Scalar> max_violation;   // per class at exit
  std::vector<std::int64_t> iterations;

  Index num_classes() const { return static_cast<Index>(classes.size()); }
};

/// Throws ConfigError on fewer than two classes or mismatched sizes.
SvmModel svm_train(const Matrix& features, std::span<const int> labels, Scalar gamma, Scalar C,
                   const SvmOptions& options = {});

/// samples x classes decision values.
Matrix svm_decision(const SvmModel& model, const Matrix& features);

/// argmax of the decision values; ties go to the smaller class id.
std::vector<int> svm_predict(const SvmModel& model, const Matrix& features);

Scalar accuracy(std::span<const int> predicted, std::span<const int> truth);

/// "GSVM", u32 version 1, u64 classes, u64 dim, u64 support vectors,
/// f64 gamma, f64 C, i64 class ids, f64 mean[dim], f64 scale[dim],
/// f64 support vectors (row-major), f64 coef (row-major), f64 bias; all
/// little-endian.
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Nested cross-validation

struct CvPlan {
  int outer_folds = 5;
  int inner_folds = 3;
  std::vector<Scalar> gammas;
  std::vector<Scalar> Cs;
  std::uint64_t seed = 1;
  SvmOptions svm;

  /// gamma {0.001, 0.005, 0.01, 0.02, 0.04}, C {50, 100, 250, 400, 500}.
  static CvPlan mesh_task();
  /// gamma {1e-5, 1e-4, 1e-3}, C {25, 100, 250, 500}.
  static CvPlan digit_task();
};

/// Stratified fold id per sample: each class is shuffled with the seed and
/// dealt round-robin. Throws ConfigError if a class has fewer samples than
/// folds.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// One feature set to choose from, typically one scattering depth.
struct FeatureCandidate {
  std::string name;
  int depth = 0;
  Matrix features;
};

struct CvFold {
  int fold = 0;
  Index train_size = 0;
  Index test_size = 0;
  int candidate = 0;
  Scalar gamma = 0;
  Scalar C = 0;
  Scalar inner_accuracy = 0;
  Scalar test_accuracy = 0;
};

struct CvReport {
  std::vector<CvFold> folds;
  Scalar mean_accuracy = 0;
  Scalar std_accuracy = 0;
  std::vector<int> selection_counts;  // per candidate
  std::vector<std::string> candidate_names;
  std::vector<int> candidate_depths;
  CvPlan plan;

  /// Deterministic JSON text (fixed key order, round-trip doubles).
  std::string to_json() const;
};

/// Outer stratified folds; inside each training split, an inner stratified
/// CV picks (candidate, gamma, C) by mean inner accuracy. Ties go to the
/// earliest candidate, then the earliest gamma, then the earliest C.
CvReport nested_cv(std::span<const FeatureCandidate> candidates, std::span<const int> labels,
                   const CvPlan& plan);

}  // namespace geoscatter
