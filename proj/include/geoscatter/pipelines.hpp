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

// End-to-end classification runs: dataset -> scattering -> features ->
// nested cross-validation.

#pragma once

#include <geoscatter/classify.hpp>
#include <geoscatter/datasets.hpp>
#include <geoscatter/scattering.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace geoscatter {

/// Receives one progress line per stage; may be empty.
using ProgressSink = std::function<void(const std::string&)>;

struct ShapesDemoConfig {
  ShapeDatasetSpec dataset;  // empty class list means sphere, torus, bumpy
  /// Candidate depths; the report cross-validates over all of them.
  std::vector<int> depths = {0, 1, 2};
  int j_min = -8;
  int j_max = 0;
  Index K = 512;
  CvPlan plan = CvPlan::mesh_task();
  int threads = 1;
};

struct MnistDemoConfig {
  std::filesystem::path images;
  std::filesystem::path labels;
  DigitSelection selection;
  bool rotated = false;
  int J = -2;
  int L = 2;
  int j_min = -8;
  int subdivisions = 3;
  ProjectionOptions projection;
  CvPlan plan = CvPlan::digit_task();
  std::uint64_t seed = 1;
  int threads = 1;
};

struct DemoResult {
  CvReport cv;        // requested configuration
  CvReport baseline;  // depth 0 on the same folds
  std::string json;   // full report including the resolved config
};

/// Non-windowed scattering of the centroid-distance signal on every mesh.
DemoResult run_shapes_demo(const ShapesDemoConfig& config, const ProgressSink& progress = {});

/// Windowed scattering of projected digits, downsampled at
/// sample_count_for_scale(J) farthest points; the baseline keeps only the
/// low-pass path at the same points.
DemoResult run_mnist_demo(const MnistDemoConfig& config, const ProgressSink& progress = {});

/// The digit subset shipped under data/mnist-5k relative to `root`.
std::filesystem::path bundled_mnist_images(const std::filesystem::path& root);
std::filesystem::path bundled_mnist_labels(const std::filesystem::path& root);

}  // namespace geoscatter
