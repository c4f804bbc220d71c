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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "test_util.hpp"

namespace geoscatter {
namespace {

// Gaussian blobs around well separated centres, one class per centre.
struct Blobs {
  Matrix x;
  std::vector<int> y;
};

// Centres depend on the seed only, so draws of different sizes share them.
Blobs blobs(int classes, int per_class, Index dim, double spread, std::uint64_t seed) {
  std::mt19937_64 centres(seed);
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(per_class) * 1000);
  Blobs b;
  b.x.resize(classes * per_class, dim);
  for (int c = 0; c < classes; ++c) {
    const Vector centre = 4.0 * testing::gaussian_vector(centres, dim);
    for (int i = 0; i < per_class; ++i) {
      b.x.row(c * per_class + i) = (centre + spread * testing::gaussian_vector(rng, dim)).transpose();
      b.y.push_back(c * 3 + 1);  // non-contiguous ids
    }
  }
  return b;
}

// All-pairs edge-length distances by Floyd-Warshall.
Matrix graph_distances(const TriangleMesh& mesh) {
  const Index n = mesh.num_vertices();
  Matrix d = Matrix::Constant(n, n, std::numeric_limits<double>::infinity());
  for (Index i = 0; i < n; ++i) d(i, i) = 0;
  for (auto [a, b] : edges(mesh)) {
    d(a, b) = d(b, a) = (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
  }
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

TEST(Sampling, FarthestPointIsGreedyMaxMin) {
  const TriangleMesh mesh = icosphere(2);
  const Matrix d = graph_distances(mesh);
  const std::vector<Index> picks = farthest_point_sample(mesh, 12);
  ASSERT_EQ(picks.size(), 12u);
  EXPECT_EQ(picks[0], 0);
  Vector nearest = d.col(0);
  for (size_t i = 1; i < picks.size(); ++i) {
    EXPECT_NEAR(nearest[picks[i]], nearest.maxCoeff(), 1e-12);
    nearest = nearest.cwiseMin(d.col(picks[i]));
  }
  EXPECT_THROW(farthest_point_sample(mesh, 0), ConfigError);
  EXPECT_THROW(farthest_point_sample(mesh, mesh.num_vertices() + 1), ConfigError);
}

TEST(Sampling, CountsPerScale) {
  EXPECT_EQ(sample_count_for_scale(0, 642), 4);
  EXPECT_EQ(sample_count_for_scale(-1, 642), 16);
  EXPECT_EQ(sample_count_for_scale(-2, 642), 64);
  EXPECT_EQ(sample_count_for_scale(-5, 642), 642);
}

TEST(Features, AssemblyOrderAndBatchAgreement) {
  std::mt19937_64 rng(1);
  const TriangleMesh mesh = icosphere(2);
  const SpectralBasis basis = eigenbasis(mesh, mesh.num_vertices());
  ScatteringConfig config;
  config.J = -1;
  config.L = 1;
  config.j_max = std::nullopt;
  const FilterBank bank = make_filterbank(basis, config);
  const Matrix signals = testing::gaussian_matrix(rng, basis.num_vertices(), 3);
  const std::vector<Index> points = {5, 0, 77};
  const FeatureMatrix batch = batch_features(scatter_windowed_batch(basis, bank, signals, config, points), points, 2);
  ASSERT_EQ(batch.rows(), 3);
  for (Index c = 0; c < 3; ++c) {
    const WindowedCoefficients w = scatter_windowed(basis, bank, signals.col(c), config);
    std::vector<FeatureColumn> manifest;
    const Vector row = assemble_features(w, points, &manifest, 2);
    EXPECT_LT((row - batch.values.row(c).transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(manifest, batch.manifest);
    // Paths in order, then points in the given order.
    size_t i = 0;
    for (const auto& [path, value] : w.values) {
      for (Index p : points) {
        EXPECT_EQ(manifest[i].path, path);
        EXPECT_EQ(manifest[i].point, p);
        EXPECT_EQ(manifest[i].channel, 2);
        EXPECT_EQ(row[static_cast<Index>(i)], value[p]);
        ++i;
      }
    }
  }
  const NonWindowedCoefficients s = scatter_nonwindowed(basis, bank, signals.col(0), config);
  std::vector<FeatureColumn> manifest;
  const Vector scalars = assemble_features(s, &manifest);
  EXPECT_EQ(scalars.size(), static_cast<Index>(s.values.size()));
  EXPECT_FALSE(manifest.front().point.has_value());

  FeatureMatrix one{Matrix::Ones(3, 2), {{0, {}, std::nullopt}, {0, {1}, std::nullopt}}};
  const FeatureMatrix both = concatenate(batch, one);
  EXPECT_EQ(both.cols(), batch.cols() + 2);
  EXPECT_EQ(both.manifest.back(), one.manifest.back());
  EXPECT_THROW(concatenate(batch, FeatureMatrix{Matrix::Ones(2, 1), {{}}}), ConfigError);
}

TEST(Features, CsvHeaders) {
  const auto dir = testing::scratch_dir("features");
  FeatureMatrix f{Matrix::Identity(2, 2), {{0, {}, 4}, {1, {-2, 0}, std::nullopt}}};
  const std::vector<int> labels = {3, 5};
  write_feature_csv(f, labels, dir / "f.csv");
  std::ifstream in(dir / "f.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "#channel,,0,1");
  EXPECT_EQ(lines[1], "#path,,-,-2|0");
  EXPECT_EQ(lines[2], "#point,,4,global");
  EXPECT_EQ(lines[3].rfind("sample,label,", 0), 0u);
  EXPECT_EQ(lines[4], "0,3,1,0");
  const std::vector<int> short_labels = {3};
  EXPECT_THROW(write_feature_csv(f, short_labels, dir / "g.csv"), ConfigError);
}

TEST(Standardizer, PopulationMomentsAndConstantColumns) {
  Matrix x(4, 3);
  x << 1, 5, 2,  //
      2, 5, 4,   //
      3, 5, 6,   //
      4, 5, 8;
  const Standardizer s = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.5);
  EXPECT_DOUBLE_EQ(s.scale[0], std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(s.scale[1], 1);
  const Matrix z = s.apply(x);
  EXPECT_NEAR(z.col(2).mean(), 0, 1e-15);
  EXPECT_NEAR(z.col(2).squaredNorm() / 4, 1, 1e-14);
  EXPECT_EQ(z.col(1), Vector::Zero(4));
  EXPECT_THROW(s.apply(Matrix::Ones(2, 2)), ConfigError);
}

TEST(Svm, SeparatesBlobsAndSatisfiesDualConstraints) {
  const Blobs train = blobs(3, 30, 5, 0.5, 2);
  const SvmModel model = svm_train(train.x, train.y, 0.1, 10);
  EXPECT_EQ(model.classes, (std::vector<int>{1, 4, 7}));
  EXPECT_EQ(accuracy(svm_predict(model, train.x), train.y), 1.0);
  for (Scalar v : model.max_violation) EXPECT_LE(v, 1e-3);
  // One-vs-rest duals: |y_i alpha_i| <= C and sum_i y_i alpha_i = 0.
  EXPECT_LE(model.coef.cwiseAbs().maxCoeff(), 10 + 1e-12);
  for (Index c = 0; c < model.num_classes(); ++c) EXPECT_NEAR(model.coef.row(c).sum(), 0, 1e-8);

  const Blobs test = blobs(3, 10, 5, 0.5, 2);
  EXPECT_GE(accuracy(svm_predict(model, test.x), test.y), 0.9);
}

TEST(Svm, DecisionMatchesExplicitKernelExpansion) {
  const Blobs train = blobs(2, 20, 3, 1.0, 3);
  const SvmModel model = svm_train(train.x, train.y, 0.3, 5);
  const Matrix x = model.standardizer.apply(train.x.topRows(5));
  const Matrix decision = svm_decision(model, train.x.topRows(5));
  for (Index i = 0; i < 5; ++i) {
    for (Index c = 0; c < model.num_classes(); ++c) {
      double value = model.bias[c];
      for (Index s = 0; s < model.support_vectors.rows(); ++s) {
        value += model.coef(c, s) * std::exp(-0.3 * (x.row(i) - model.support_vectors.row(s)).squaredNorm());
      }
      EXPECT_NEAR(decision(i, c), value, 1e-10);
    }
  }
}

TEST(Svm, ModelFileRoundTrip) {
  const auto dir = testing::scratch_dir("svm");
  const Blobs train = blobs(3, 10, 4, 0.8, 4);
  const SvmModel model = svm_train(train.x, train.y, 0.2, 50);
  save_model(model, dir / "m.gsvm");
  const SvmModel back = load_model(dir / "m.gsvm");
  EXPECT_EQ(back.classes, model.classes);
  EXPECT_EQ(svm_decision(back, train.x), svm_decision(model, train.x));
  std::ifstream in(dir / "m.gsvm", std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  EXPECT_EQ(std::string(magic, 4), "GSVM");

  std::ofstream(dir / "bad.gsvm") << "NOPE";
  EXPECT_THROW(load_model(dir / "bad.gsvm"), IoError);
  EXPECT_THROW(load_model(dir / "none.gsvm"), IoError);
}

TEST(Svm, RejectsBadInput) {
  const Blobs b = blobs(2, 5, 2, 1.0, 5);
  const std::vector<int> one_class(10, 1);
  EXPECT_THROW(svm_train(b.x, one_class, 0.1, 1), ConfigError);
  EXPECT_THROW(svm_train(b.x, b.y, -1, 1), ConfigError);
  EXPECT_THROW(svm_train(b.x.topRows(3), b.y, 0.1, 1), ConfigError);
  Matrix bad = b.x;
  bad(0, 0) = std::nan("");
  EXPECT_THROW(svm_train(bad, b.y, 0.1, 1), ConfigError);
  const std::vector<int> empty;
  EXPECT_THROW(accuracy(empty, empty), ConfigError);
}

TEST(Folds, StratifiedAndDeterministic) {
  std::vector<int> labels;
  for (int i = 0; i < 23; ++i) labels.push_back(0);
  for (int i = 0; i < 11; ++i) labels.push_back(9);
  const std::vector<int> folds = stratified_folds(labels, 5, 3);
  EXPECT_EQ(folds, stratified_folds(labels, 5, 3));
  EXPECT_NE(folds, stratified_folds(labels, 5, 4));
  std::map<std::pair<int, int>, int> counts;
  for (size_t i = 0; i < labels.size(); ++i) ++counts[{labels[i], folds[i]}];
  for (int label : {0, 9}) {
    int lo = 1000, hi = 0;
    for (int f = 0; f < 5; ++f) {
      lo = std::min(lo, counts[{label, f}]);
      hi = std::max(hi, counts[{label, f}]);
    }
    EXPECT_LE(hi - lo, 1);
  }
  EXPECT_THROW(stratified_folds(labels, 12, 1), ConfigError);
  EXPECT_THROW(stratified_folds(labels, 1, 1), ConfigError);
}

TEST(NestedCv, AccurateDeterministicAndTieBreaksToFirstCandidate) {
  const Blobs b = blobs(3, 15, 4, 0.6, 6);
  CvPlan plan = CvPlan::mesh_task();
  plan.gammas = {0.05, 0.2};
  plan.Cs = {10, 100};
  // Identical candidates always tie; the first must win every fold.
  const std::vector<FeatureCandidate> candidates = {{"a", 0, b.x}, {"b", 1, b.x}};
  const CvReport report = nested_cv(candidates, b.y, plan);
  EXPECT_GE(report.mean_accuracy, 0.95);
  EXPECT_EQ(report.selection_counts, (std::vector<int>{5, 0}));
  EXPECT_EQ(report.folds.size(), 5u);
  for (const CvFold& f : report.folds) EXPECT_EQ(f.gamma, 0.05);
  EXPECT_EQ(report.to_json(), nested_cv(candidates, b.y, plan).to_json());

  // Noise features lose to informative ones.
  std::mt19937_64 rng(7);
  const std::vector<FeatureCandidate> mixed = {{"noise", 0, testing::gaussian_matrix(rng, b.x.rows(), 4)},
                                               {"signal", 1, b.x}};
  EXPECT_GE(nested_cv(mixed, b.y, plan).selection_counts[1], 4);

  plan.Cs.clear();
  EXPECT_THROW(nested_cv(candidates, b.y, plan), ConfigError);
}

TEST(NestedCv, PlansMatchPublishedGrids) {
  const CvPlan mesh = CvPlan::mesh_task();
  EXPECT_EQ(mesh.gammas, (std::vector<Scalar>{0.001, 0.005, 0.01, 0.02, 0.04}));
  EXPECT_EQ(mesh.Cs, (std::vector<Scalar>{50, 100, 250, 400, 500}));
  const CvPlan digit = CvPlan::digit_task();
  EXPECT_EQ(digit.gammas, (std::vector<Scalar>{1e-5, 1e-4, 1e-3}));
  EXPECT_EQ(digit.Cs, (std::vector<Scalar>{25, 100, 250, 500}));
}

}  // namespace
}  // namespace geoscatter
