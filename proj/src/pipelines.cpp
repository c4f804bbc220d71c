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

#include <geoscatter/pipelines.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <memory>
#include <sstream>

namespace geoscatter {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

void say(const ProgressSink& progress, const std::string& line) {
  if (progress) progress(line);
}

Scalar seconds_since(Clock::time_point start) {
  return std::chrono::duration<Scalar>(Clock::now() - start).count();
}

// Columns whose path has at most `depth` scales.
Matrix columns_up_to_depth(const FeatureMatrix& features, int depth) {
  std::vector<Index> keep;
  for (Index c = 0; c < features.cols(); ++c) {
    if (static_cast<int>(features.manifest[static_cast<size_t>(c)].path.size()) <= depth) keep.push_back(c);
  }
  Matrix out(features.rows(), static_cast<Index>(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Index>(i)) = features.values.col(keep[i]);
  return out;
}

Json scattering_json(const ScatteringConfig& c) {
  return {{"J", c.J},
          {"L", c.L},
          {"j_min", c.j_min},
          {"j_max", c.j_max ? Json(*c.j_max) : Json(nullptr)},
          {"K", c.K},
          {"window", c.window.kind()},
          {"path_rule", to_string(c.path_rule)},
          {"nonwindowed_scale", to_string(c.nonwindowed_scale)},
          {"threads", c.threads}};
}

}  // namespace

DemoResult run_shapes_demo(const ShapesDemoConfig& config, const ProgressSink& progress) {
  const auto start = Clock::now();
  if (config.depths.empty()) throw ConfigError("shapes demo needs at least one candidate depth");
  for (int d : config.depths) {
    if (d < 0) throw ConfigError("depths must be non-negative");
  }
  if (config.K < 1) throw ConfigError("K must be positive");
  ShapeDatasetSpec spec = config.dataset;
  if (spec.classes.empty()) {
    for (ShapeKind k : {ShapeKind::kSphere, ShapeKind::kTorus, ShapeKind::kBumpy}) {
      spec.classes.push_back(ShapeClassSpec::defaults(k));
    }
  }

  const LabeledMeshSet set = synthetic_shapes(spec);
  say(progress, "generated " + std::to_string(set.size()) + " meshes in " +
                    std::to_string(set.class_names.size()) + " classes");

  ScatteringConfig scat;
  scat.J = std::max(0, config.j_max);
  scat.j_min = config.j_min;
  scat.j_max = config.j_max;
  scat.L = *std::max_element(config.depths.begin(), config.depths.end());
  scat.threads = config.threads;

  FeatureMatrix features;
  for (Index i = 0; i < set.size(); ++i) {
    const TriangleMesh& mesh = set.meshes[static_cast<size_t>(i)];
    const SpectralBasis basis = set.basis(i, config.K);
    const FilterBank bank = make_filterbank(basis, scat);
    const Vector signal = centroid_distance_signal(mesh);
    const FeatureMatrix row = batch_features(scatter_nonwindowed_batch(basis, bank, Matrix(signal), scat), {});
    if (i == 0) {
      features.manifest = row.manifest;
      features.values.resize(set.size(), row.cols());
    }
    if (row.cols() != features.cols()) throw ConfigError("meshes produced different path sets");
    features.values.row(i) = row.values.row(0);
  }
  say(progress, "scattering features: " + std::to_string(features.cols()) + " per mesh");

  std::vector<int> depths = config.depths;
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  std::vector<FeatureCandidate> candidates;
  for (int d : depths) candidates.push_back({"L=" + std::to_string(d), d, columns_up_to_depth(features, d)});
  const std::vector<FeatureCandidate> baseline{{"L=0", 0, columns_up_to_depth(features, 0)}};

  DemoResult result;
  result.cv = nested_cv(candidates, set.labels, config.plan);
  say(progress, "nested CV mean accuracy " + std::to_string(result.cv.mean_accuracy));
  result.baseline = nested_cv(baseline, set.labels, config.plan);
  say(progress, "L=0 baseline mean accuracy " + std::to_string(result.baseline.mean_accuracy));

  Json doc;
  doc["demo"] = "shapes";
  doc["dataset"] = Json::parse(shapes_manifest_json(spec));
  doc["classes"] = set.class_names;
  doc["signal"] = "centroid distance";
  doc["scattering"] = scattering_json(scat);
  doc["scattering"]["transform"] = "non-windowed";
  doc["K"] = config.K;
  doc["depths"] = depths;
  doc["features"] = features.cols();
  doc["cv"] = Json::parse(result.cv.to_json());
  doc["baseline"] = Json::parse(result.baseline.to_json());
  doc["mean_accuracy"] = result.cv.mean_accuracy;
  doc["baseline_accuracy"] = result.baseline.mean_accuracy;
  doc["improvement"] = result.cv.mean_accuracy > result.baseline.mean_accuracy;
  doc["seconds"] = seconds_since(start);
  result.json = doc.dump(2);
  return result;
}

DemoResult run_mnist_demo(const MnistDemoConfig& config, const ProgressSink& progress) {
  const auto start = Clock::now();
  if (config.selection.per_class < 1) throw ConfigError("--per-class must be positive");
  if (config.L < 0) throw ConfigError("depth L must be non-negative");
  if (config.subdivisions < 0 || config.subdivisions > 7) throw ConfigError("subdivisions must lie in [0, 7]");
  if (!std::filesystem::exists(config.images)) throw IoError("missing image file " + config.images.string());
  if (!std::filesystem::exists(config.labels)) throw IoError("missing label file " + config.labels.string());

  const RasterSet digits = select_digits(load_idx(config.images, config.labels), config.selection);
  auto mesh = std::make_shared<const TriangleMesh>(icosphere(config.subdivisions, 1.0));
  const LabeledSignalSet signals =
      project_digits(digits, mesh, config.rotated, config.seed, config.projection, config.threads);
  say(progress, signals.meta);

  const SpectralBasis basis = eigenbasis(*mesh, mesh->num_vertices());
  ScatteringConfig scat;
  scat.J = config.J;
  scat.L = config.L;
  scat.j_min = config.j_min;
  scat.j_max = 0;
  scat.threads = config.threads;
  const FilterBank bank = make_filterbank(basis, scat);

  const std::vector<Index> points =
      farthest_point_sample(*mesh, sample_count_for_scale(config.J, mesh->num_vertices()));
  const BatchCoefficients batch = scatter_windowed_batch(basis, bank, signals.signals, scat, points);
  const FeatureMatrix features = batch_features(batch, points);
  say(progress, "scattering features: " + std::to_string(batch.paths.size()) + " paths x " +
                    std::to_string(points.size()) + " points");

  const std::vector<FeatureCandidate> main{{"L=" + std::to_string(config.L), config.L, features.values}};
  const std::vector<FeatureCandidate> baseline{{"L=0", 0, columns_up_to_depth(features, 0)}};
  DemoResult result;
  result.cv = nested_cv(main, signals.labels, config.plan);
  say(progress, "nested CV mean accuracy " + std::to_string(result.cv.mean_accuracy));
  result.baseline = nested_cv(baseline, signals.labels, config.plan);
  say(progress, "L=0 baseline mean accuracy " + std::to_string(result.baseline.mean_accuracy));

  Json doc;
  doc["demo"] = "mnist";
  doc["images"] = config.images.string();
  doc["labels"] = config.labels.string();
  std::vector<int> kept;
  for (int l : digits.labels)
    if (kept.empty() || kept.back() != l) kept.push_back(l);
  doc["digits"] = kept;
  doc["per_class"] = config.selection.per_class;
  doc["remove_six"] = config.selection.remove_six;
  doc["rotated"] = config.rotated;
  doc["seed"] = config.seed;
  doc["mesh"] = {{"name", mesh->name}, {"vertices", mesh->num_vertices()}};
  doc["projection"] = {{"cap_angle", config.projection.cap_angle}, {"map", "azimuthal equidistant"},
                       {"sampling", "bilinear"}};
  doc["scattering"] = scattering_json(scat);
  doc["scattering"]["transform"] = "windowed";
  doc["scattering"]["paths"] = batch.paths.size();
  doc["sample_points"] = points.size();
  doc["features"] = features.cols();
  doc["cv"] = Json::parse(result.cv.to_json());
  doc["baseline"] = Json::parse(result.baseline.to_json());
  doc["mean_accuracy"] = result.cv.mean_accuracy;
  doc["baseline_accuracy"] = result.baseline.mean_accuracy;
  doc["improvement"] = result.cv.mean_accuracy > result.baseline.mean_accuracy;
  doc["seconds"] = seconds_since(start);
  result.json = doc.dump(2);
  return result;
}

std::filesystem::path bundled_mnist_images(const std::filesystem::path& root) {
  return root / "data" / "mnist-5k" / "images-idx3-ubyte";
}

std::filesystem::path bundled_mnist_labels(const std::filesystem::path& root) {
  return root / "data" / "mnist-5k" / "labels-idx1-ubyte";
}

}  // namespace geoscatter
