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

#include <geoscatter/datasets.hpp>

#include <Eigen/Geometry>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace geoscatter {

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  std::uint32_t u32_be() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  const std::uint8_t* take(size_t n) {
    need(n);
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError(source_ + ": unexpected end of data");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::string source_;
  size_t pos_ = 0;
};

void put_u32_be(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

std::string hex(std::uint32_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << std::setw(8) << std::setfill('0') << v;
  return s.str();
}

}  // namespace

std::vector<Image> read_idx_images(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  ByteReader in(bytes, path.string());
  const std::uint32_t magic = in.u32_be();
  if (magic != kIdxImageMagic) {
    throw IoError(path.string() + ": bad IDX image magic " + hex(magic) + ", expected 0x00000803");
  }
  const std::uint32_t count = in.u32_be(), rows = in.u32_be(), cols = in.u32_be();
  if (rows != 28 || cols != 28) {
    throw IoError(path.string() + ": image dimensions " + std::to_string(rows) + "x" +
                  std::to_string(cols) + ", expected 28x28");
  }
  std::vector<Image> images;
  images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    images.emplace_back(Eigen::Map<const Image>(in.take(rows * cols), rows, cols));
  }
  return images;
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  ByteReader in(bytes, path.string());
  const std::uint32_t magic = in.u32_be();
  if (magic != kIdxLabelMagic) {
    throw IoError(path.string() + ": bad IDX label magic " + hex(magic) + ", expected 0x00000801");
  }
  const std::uint32_t count = in.u32_be();
  const std::uint8_t* data = in.take(count);
  std::vector<int> labels(data, data + count);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 9) throw IoError(path.string() + ": label " + std::to_string(labels[i]) + " at " +
                                     std::to_string(i) + " outside [0, 9]");
  }
  return labels;
}

RasterSet load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  RasterSet set;
  set.images = read_idx_images(images);
  set.labels = read_idx_labels(labels);
  if (set.images.size() != set.labels.size()) {
    throw IoError("image/label count mismatch: " + std::to_string(set.images.size()) + " images, " +
                  std::to_string(set.labels.size()) + " labels");
  }
  return set;
}

void write_idx_images(const std::vector<Image>& images, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto rows = images.empty() ? 28u : static_cast<std::uint32_t>(images.front().rows());
  const auto cols = images.empty() ? 28u : static_cast<std::uint32_t>(images.front().cols());
  put_u32_be(out, kIdxImageMagic);
  put_u32_be(out, static_cast<std::uint32_t>(images.size()));
  put_u32_be(out, rows);
  put_u32_be(out, cols);
  for (const Image& image : images) {
    if (image.rows() != rows || image.cols() != cols) throw ConfigError("images differ in size");
    out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_idx_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  put_u32_be(out, kIdxLabelMagic);
  put_u32_be(out, static_cast<std::uint32_t>(labels.size()));
  for (int label : labels) {
    if (label < 0 || label > 255) throw ConfigError("IDX labels must fit in one byte");
    out.put(static_cast<char>(label));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

RasterSet select_digits(const RasterSet& set, const DigitSelection& selection) {
  if (selection.per_class < 1) throw ConfigError("per-class count must be positive");
  std::vector<int> digits = selection.digits;
  if (digits.empty()) {
    for (int d = 0; d <= 9; ++d) digits.push_back(d);
  }
  if (selection.remove_six) std::erase(digits, 6);
  std::sort(digits.begin(), digits.end());
  digits.erase(std::unique(digits.begin(), digits.end()), digits.end());

  std::mt19937_64 rng(selection.seed);
  RasterSet out;
  for (int d : digits) {
    std::vector<size_t> pool;
    for (size_t i = 0; i < set.labels.size(); ++i)
      if (set.labels[i] == d) pool.push_back(i);
    if (pool.size() < static_cast<size_t>(selection.per_class)) {
      throw ConfigError("digit " + std::to_string(d) + " has " + std::to_string(pool.size()) +
                        " images, fewer than the requested " + std::to_string(selection.per_class));
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(static_cast<size_t>(selection.per_class));
    std::sort(pool.begin(), pool.end());
    for (size_t i : pool) {
      out.images.push_back(set.images[i]);
      out.labels.push_back(d);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spherical projection

Vector project_to_sphere(const Image& image, const TriangleMesh& mesh, const Matrix3& rotation,
                         const ProjectionOptions& options) {
  if (image.size() == 0) throw ConfigError("empty image");
  if (!(options.cap_angle > 0 && options.cap_angle <= std::numbers::pi)) {
    throw ConfigError("cap angle must lie in (0, pi]");
  }
  const Vector3 centre = mesh.vertices.colwise().mean().transpose();
  const Vector radii = (mesh.vertices.rowwise() - centre.transpose()).rowwise().norm();
  const Scalar mean_radius = radii.mean();
  const Scalar deviation = (radii.array() - mean_radius).abs().maxCoeff() / mean_radius;
  if (!(deviation <= options.sphere_tolerance)) {
    std::ostringstream msg;
    msg << "mesh '" << mesh.name << "' is not a sphere: radii deviate by " << deviation
        << " relative (tolerance " << options.sphere_tolerance << ")";
    throw ValidationError(msg.str());
  }

  const Index h = image.rows(), w = image.cols();
  const auto pixel = [&](Index r, Index c) {
    return static_cast<Scalar>(image(std::clamp<Index>(r, 0, h - 1), std::clamp<Index>(c, 0, w - 1)));
  };
  Vector signal = Vector::Zero(mesh.num_vertices());
  for (Index i = 0; i < mesh.num_vertices(); ++i) {
    const Vector3 u = rotation.transpose() * (mesh.vertices.row(i).transpose() - centre) / radii[i];
    const Scalar theta = std::acos(std::clamp(u[2], -1.0, 1.0));
    if (theta > options.cap_angle) continue;
    const Scalar rho = theta / options.cap_angle;
    const Scalar azimuth = std::atan2(u[1], u[0]);
    const Scalar x = rho * std::cos(azimuth), y = rho * std::sin(azimuth);
    const Scalar col = std::clamp((x + 1) / 2 * static_cast<Scalar>(w) - 0.5, 0.0, static_cast<Scalar>(w - 1));
    const Scalar row = std::clamp((1 - y) / 2 * static_cast<Scalar>(h) - 0.5, 0.0, static_cast<Scalar>(h - 1));
    const auto c0 = static_cast<Index>(std::floor(col)), r0 = static_cast<Index>(std::floor(row));
    const Scalar tc = col - static_cast<Scalar>(c0), tr = row - static_cast<Scalar>(r0);
    const Scalar value = (1 - tr) * ((1 - tc) * pixel(r0, c0) + tc * pixel(r0, c0 + 1)) +
                         tr * ((1 - tc) * pixel(r0 + 1, c0) + tc * pixel(r0 + 1, c0 + 1));
    signal[i] = value / 255.0;
  }
  return signal;
}

Matrix3 random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> normal;
  Eigen::Quaternion<Scalar> q;
  do {
    q = Eigen::Quaternion<Scalar>(normal(rng), normal(rng), normal(rng), normal(rng));
  } while (q.norm() < 1e-8);
  return q.normalized().toRotationMatrix();
}

Matrix coordinate_signals(const TriangleMesh& mesh) { return mesh.vertices; }

Vector centroid_distance_signal(const TriangleMesh& mesh) {
  const Vector areas = face_areas(mesh);
  Vector3 centroid = Vector3::Zero();
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Vector3 mid = (mesh.vertices.row(mesh.faces(f, 0)) + mesh.vertices.row(mesh.faces(f, 1)) +
                         mesh.vertices.row(mesh.faces(f, 2)))
                            .transpose() /
                        3.0;
    centroid += areas[f] * mid;
  }
  centroid /= areas.sum();
  return (mesh.vertices.rowwise() - centroid.transpose()).rowwise().norm();
}

LabeledSignalSet project_digits(const RasterSet& set, std::shared_ptr<const TriangleMesh> mesh,
                                bool rotated, std::uint64_t seed, const ProjectionOptions& options,
                                int threads) {
  if (!mesh) throw ConfigError("projection needs a mesh");
  if (threads < 1) throw ConfigError("thread count must be at least 1");
  LabeledSignalSet out;
  out.signals.resize(mesh->num_vertices(), set.size());
  out.labels = set.labels;
  const auto work = [&](Index first, Index last) {
    for (Index i = first; i < last; ++i) {
      const Matrix3 r =
          rotated ? random_rotation(seed + static_cast<std::uint64_t>(i)) : Matrix3::Identity().eval();
      out.signals.col(i) = project_to_sphere(set.images[static_cast<size_t>(i)], *mesh, r, options);
    }
  };
  const Index n = set.size();
  const Index chunks = std::clamp<Index>(threads, 1, std::max<Index>(n, 1));
  std::vector<std::thread> pool;
  for (Index c = 1; c < chunks; ++c) pool.emplace_back(work, c * n / chunks, (c + 1) * n / chunks);
  work(0, n / chunks);
  for (auto& t : pool) t.join();

  std::ostringstream meta;
  meta << "spherical digits: " << n << " images on " << mesh->name << " (" << mesh->num_vertices()
       << " vertices), cap " << options.cap_angle << " rad, " << (rotated ? "rotated" : "not rotated")
       << ", seed " << seed;
  out.meta = meta.str();
  out.mesh = std::move(mesh);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic shapes

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kSphere: return "sphere";
    case ShapeKind::kTorus: return "torus";
    case ShapeKind::kBumpy: return "bumpy";
  }
  return "?";
}

ShapeKind parse_shape_kind(const std::string& text) {
  if (text == "sphere") return ShapeKind::kSphere;
  if (text == "torus") return ShapeKind::kTorus;
  if (text == "bumpy") return ShapeKind::kBumpy;
  throw ConfigError("unknown shape class '" + text + "' (expected sphere, torus or bumpy)");
}

ShapeClassSpec ShapeClassSpec::defaults(ShapeKind kind) {
  ShapeClassSpec spec;
  spec.kind = kind;
  if (kind == ShapeKind::kTorus) spec.resolution = 16;
  return spec;
}

SpectralBasis LabeledMeshSet::basis(Index i, Index k, const EigenOptions& options) const {
  if (i < 0 || i >= size()) throw ConfigError("mesh index out of range");
  const TriangleMesh& mesh = meshes[static_cast<size_t>(i)];
  return eigenbasis(mesh, std::min(k, mesh.num_vertices()), options);
}

namespace {

// Smooth random stretch along the coordinate axes.
void stretch(TriangleMesh& mesh, Scalar amount, std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> unit(-1.0, 1.0);
  for (int axis = 0; axis < 3; ++axis) mesh.vertices.col(axis) *= 1.0 + amount * unit(rng);
}

TriangleMesh draw_shape(const ShapeClassSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> unit(-1.0, 1.0);
  switch (spec.kind) {
    case ShapeKind::kSphere: {
      TriangleMesh mesh = icosphere(spec.resolution, spec.radius);
      stretch(mesh, spec.perturbation, rng);
      return mesh;
    }
    case ShapeKind::kTorus: {
      const Scalar big = spec.major_radius * (1.0 + spec.perturbation * unit(rng));
      const Scalar small = spec.minor_radius * (1.0 + spec.perturbation * unit(rng));
      if (!(small > 0 && small < big)) throw ValidationError("torus radii out of order");
      TriangleMesh mesh = torus(2 * spec.resolution, spec.resolution, big, small);
      stretch(mesh, 0.5 * spec.perturbation, rng);
      return mesh;
    }
    case ShapeKind::kBumpy: {
      TriangleMesh mesh = icosphere(spec.resolution, 1.0);
      std::normal_distribution<Scalar> normal;
      std::vector<Vector3> centres;
      for (int b = 0; b < spec.bump_count; ++b) {
        centres.push_back(Vector3(normal(rng), normal(rng), normal(rng)).normalized());
      }
      const Scalar amplitude = spec.bump_amplitude * (1.0 + spec.perturbation * unit(rng));
      constexpr Scalar kWidth = 0.35;  // angular radius of a bump, radians
      for (Index i = 0; i < mesh.num_vertices(); ++i) {
        const Vector3 u = mesh.vertices.row(i).transpose();
        Scalar lift = 0;
        for (const Vector3& c : centres) {
          const Scalar angle = std::acos(std::clamp(u.dot(c), -1.0, 1.0));
          lift += std::exp(-0.5 * angle * angle / (kWidth * kWidth));
        }
        mesh.vertices.row(i) = spec.radius * (1.0 + amplitude * lift) * u.transpose();
      }
      stretch(mesh, spec.perturbation, rng);
      return mesh;
    }
  }
  throw ConfigError("unknown shape kind");
}

}  // namespace

LabeledMeshSet synthetic_shapes(const ShapeDatasetSpec& spec) {
  if (spec.classes.empty()) throw ConfigError("synthetic shapes need at least one class");
  if (spec.per_class < 1) throw ConfigError("per-class count must be positive");
  LabeledMeshSet set;
  for (size_t c = 0; c < spec.classes.size(); ++c) {
    const ShapeClassSpec& cls = spec.classes[c];
    if (cls.resolution < 0 || (cls.kind != ShapeKind::kTorus && cls.resolution > 7) ||
        (cls.kind == ShapeKind::kTorus && cls.resolution < 3)) {
      throw ConfigError("shape resolution out of range for class " + to_string(cls.kind));
    }
    set.class_names.push_back(to_string(cls.kind));
    for (int instance = 0; instance < spec.per_class; ++instance) {
      std::optional<TriangleMesh> accepted;
      std::string last_problem;
      for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
        std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                          static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(instance),
                          static_cast<std::uint32_t>(attempt)};
        std::mt19937_64 rng(seq);
        try {
          TriangleMesh mesh = draw_shape(cls, rng);
          validate_or_throw(mesh);
          if (spec.unit_area) mesh = normalize_unit_area(mesh);
          std::uniform_int_distribution<std::uint64_t> seeds;
          mesh = rigid_transform(mesh, random_rotation(seeds(rng)));
          mesh.name = to_string(cls.kind) + "-" + std::to_string(instance);
          accepted = std::move(mesh);
        } catch (const ValidationError& e) {
          last_problem = e.what();
        }
      }
      if (!accepted) {
        throw ValidationError("could not draw a valid " + to_string(cls.kind) + " instance after 10 attempts: " +
                              last_problem);
      }
      set.meshes.push_back(std::move(*accepted));
      set.labels.push_back(static_cast<int>(c));
    }
  }
  set.meta = "synthetic shapes: " + shapes_manifest_json(spec);
  return set;
}

std::string shapes_manifest_json(const ShapeDatasetSpec& spec) {
  nlohmann::ordered_json doc;
  doc["seed"] = spec.seed;
  doc["per_class"] = spec.per_class;
  doc["unit_area"] = spec.unit_area;
  doc["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : spec.classes) {
    doc["classes"].push_back({{"kind", to_string(c.kind)},
                              {"radius", c.radius},
                              {"major_radius", c.major_radius},
                              {"minor_radius", c.minor_radius},
                              {"bump_amplitude", c.bump_amplitude},
                              {"bump_count", c.bump_count},
                              {"perturbation", c.perturbation},
                              {"resolution", c.resolution}});
  }
  return doc.dump();
}

ShapeDatasetSpec parse_shapes_manifest(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("manifest must be a JSON object");
  const auto reject_unknown = [](const nlohmann::json& obj, const std::set<std::string>& known,
                                 const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
      if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
  };
  ShapeDatasetSpec spec;
  try {
    reject_unknown(doc, {"seed", "per_class", "unit_area", "classes"}, "manifest");
    spec.seed = doc.value("seed", spec.seed);
    spec.per_class = doc.value("per_class", spec.per_class);
    spec.unit_area = doc.value("unit_area", spec.unit_area);
    for (const auto& c : doc.at("classes")) {
      reject_unknown(c,
                     {"kind", "radius", "major_radius", "minor_radius", "bump_amplitude", "bump_count",
                      "perturbation", "resolution"},
                     "class spec");
      ShapeClassSpec cls = ShapeClassSpec::defaults(parse_shape_kind(c.at("kind").get<std::string>()));
      cls.radius = c.value("radius", cls.radius);
      cls.major_radius = c.value("major_radius", cls.major_radius);
      cls.minor_radius = c.value("minor_radius", cls.minor_radius);
      cls.bump_amplitude = c.value("bump_amplitude", cls.bump_amplitude);
      cls.bump_count = c.value("bump_count", cls.bump_count);
      cls.perturbation = c.value("perturbation", cls.perturbation);
      cls.resolution = c.value("resolution", cls.resolution);
      spec.classes.push_back(cls);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return spec;
}

LabeledMeshSet load_mesh_directory(const std::filesystem::path& directory,
                                   const std::filesystem::path& labels_csv, bool unit_area) {
  std::ifstream in(labels_csv);
  if (!in) throw IoError("cannot open " + labels_csv.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(labels_csv.string() + ": expected 'filename,label' in '" + line + "'");
    std::string name = line.substr(0, comma), label = line.substr(comma + 1);
    if (first && name == "filename" && label == "label") {
      first = false;
      continue;
    }
    first = false;
    rows.emplace_back(std::move(name), std::move(label));
  }
  if (rows.empty()) throw IoError(labels_csv.string() + ": no meshes listed");

  const auto is_integer = [](const std::string& s) {
    size_t used = 0;
    try {
      std::stol(s, &used);
    } catch (const std::exception&) {
      return false;
    }
    return used == s.size();
  };
  std::vector<std::string> names;
  for (const auto& row : rows) names.push_back(row.second);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  if (std::all_of(names.begin(), names.end(), is_integer)) {
    std::sort(names.begin(), names.end(),
              [](const std::string& a, const std::string& b) { return std::stol(a) < std::stol(b); });
  }

  LabeledMeshSet set;
  set.class_names = names;
  for (const auto& [file, label] : rows) {
    TriangleMesh mesh = load_off(directory / file);
    if (unit_area) mesh = normalize_unit_area(mesh);
    set.meshes.push_back(std::move(mesh));
    set.labels.push_back(static_cast<int>(std::find(names.begin(), names.end(), label) - names.begin()));
  }
  set.meta = "mesh directory " + directory.string() + " labelled by " + labels_csv.string();
  return set;
}

}  // namespace geoscatter
