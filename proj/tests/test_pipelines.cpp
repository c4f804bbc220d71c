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

#include <gtest/gtest.h>

#include <json.hpp>

#include "test_util.hpp"

namespace geoscatter {
namespace {

using Json = nlohmann::json;

Json without_timing(const std::string& text) {
  Json doc = Json::parse(text);
  doc.erase("seconds");
  return doc;
}

ShapesDemoConfig small_shapes() {
  ShapesDemoConfig config;
  config.dataset.classes = {ShapeClassSpec::defaults(ShapeKind::kSphere), ShapeClassSpec::defaults(ShapeKind::kTorus)};
  for (auto& c : config.dataset.classes) c.resolution = c.kind == ShapeKind::kTorus ? 6 : 2;
  config.dataset.per_class = 6;
  config.depths = {0, 1};
  config.K = 60;
  config.plan.outer_folds = 3;
  config.plan.inner_folds = 2;
  return config;
}

MnistDemoConfig small_mnist() {
  const std::filesystem::path root = GEOSCATTER_SOURCE_DIR;
  MnistDemoConfig config;
  config.images = bundled_mnist_images(root);
  config.labels = bundled_mnist_labels(root);
  config.selection.per_class = 12;
  config.selection.digits = {0, 1, 7};
  config.subdivisions = 2;
  config.L = 1;
  config.plan.outer_folds = 3;
  config.plan.inner_folds = 2;
  return config;
}

TEST(ShapesDemo, ReportsConfigAndBaseline) {
  std::vector<std::string> progress;
  const DemoResult result = run_shapes_demo(small_shapes(), [&](const std::string& s) { progress.push_back(s); });
  EXPECT_FALSE(progress.empty());
  const Json doc = Json::parse(result.json);
  EXPECT_EQ(doc.at("demo"), "shapes");
  EXPECT_EQ(doc.at("classes"), Json({"sphere", "torus"}));
  EXPECT_EQ(doc.at("depths"), Json({0, 1}));
  EXPECT_EQ(doc.at("K"), 60);
  EXPECT_EQ(doc.at("scattering").at("transform"), "non-windowed");
  EXPECT_EQ(doc.at("scattering").at("L"), 1);
  // depth <= 1 over nine scales: 1 + 9 paths.
  EXPECT_EQ(doc.at("features"), 10);
  EXPECT_EQ(doc.at("mean_accuracy"), result.cv.mean_accuracy);
  EXPECT_EQ(doc.at("baseline_accuracy"), result.baseline.mean_accuracy);
  EXPECT_EQ(result.cv.folds.size(), 3u);
  for (const CvFold& f : result.baseline.folds) EXPECT_EQ(f.candidate, 0);
  EXPECT_GE(result.cv.mean_accuracy, 0.8);
}

TEST(ShapesDemo, DeterministicGivenSeed) {
  const DemoResult a = run_shapes_demo(small_shapes());
  const DemoResult b = run_shapes_demo(small_shapes());
  EXPECT_EQ(without_timing(a.json), without_timing(b.json));
}

TEST(ShapesDemo, RejectsBadConfig) {
  ShapesDemoConfig config = small_shapes();
  config.depths.clear();
  EXPECT_THROW(run_shapes_demo(config), ConfigError);
  config = small_shapes();
  config.depths = {-1};
  EXPECT_THROW(run_shapes_demo(config), ConfigError);
  config = small_shapes();
  config.K = 0;
  EXPECT_THROW(run_shapes_demo(config), ConfigError);
}

TEST(MnistDemo, SmallRunOnBundledDigits) {
  const DemoResult result = run_mnist_demo(small_mnist());
  const Json doc = Json::parse(result.json);
  EXPECT_EQ(doc.at("demo"), "mnist");
  EXPECT_EQ(doc.at("digits"), Json({0, 1, 7}));
  EXPECT_EQ(doc.at("mesh").at("vertices"), 162);
  EXPECT_EQ(doc.at("sample_points"), 64);
  // Wavelets j_min..J are seven scales at J = -2: 1 + 7 paths at depth <= 1.
  EXPECT_EQ(doc.at("scattering").at("paths"), 8);
  EXPECT_EQ(doc.at("features"), 512);
  EXPECT_EQ(result.cv.folds.size(), 3u);
  EXPECT_GT(result.cv.mean_accuracy, 0.5);  // chance is 1/3
  EXPECT_EQ(without_timing(result.json), without_timing(run_mnist_demo(small_mnist()).json));
}

TEST(MnistDemo, RejectsBadConfig) {
  MnistDemoConfig config = small_mnist();
  config.selection.per_class = 0;
  EXPECT_THROW(run_mnist_demo(config), ConfigError);
  config = small_mnist();
  config.subdivisions = 8;
  EXPECT_THROW(run_mnist_demo(config), ConfigError);
  config = small_mnist();
  config.images = "/nonexistent/images";
  EXPECT_THROW(run_mnist_demo(config), IoError);
  config = small_mnist();
  config.selection.per_class = 600;
  EXPECT_THROW(run_mnist_demo(config), ConfigError);
}

}  // namespace
}  // namespace geoscatter
