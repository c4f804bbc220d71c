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

#include <geoscatter/mesh.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace geoscatter {

namespace {

Vector3 vertex(const TriangleMesh& mesh, int i) { return mesh.vertices.row(i).transpose(); }

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(Index n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Uniform hash grid over a point set for radius queries.
class PointGrid {
 public:
  PointGrid(const Points& points, Scalar cell) : points_(points), cell_(cell) {
    for (Index i = 0; i < points.rows(); ++i) {
      cells_[key(cell_of(points.row(i).transpose()))].push_back(static_cast<int>(i));
    }
  }

  template <typename Visit>
  void for_each_within(const Vector3& q, Scalar radius, Visit&& visit) const {
    const auto c = cell_of(q);
    const int reach = static_cast<int>(std::ceil(radius / cell_));
    const Scalar r2 = radius * radius;
    for (int dx = -reach; dx <= reach; ++dx)
      for (int dy = -reach; dy <= reach; ++dy)
        for (int dz = -reach; dz <= reach; ++dz) {
          auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == cells_.end()) continue;
          for (int i : it->second) {
            if ((points_.row(i).transpose() - q).squaredNorm() <= r2) visit(i);
          }
        }
  }

  /// Nearest point within `radius`, or -1.
  int nearest_within(const Vector3& q, Scalar radius) const {
    int best = -1;
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for_each_within(q, radius, [&](int i) {
      const Scalar d = (points_.row(i).transpose() - q).squaredNorm();
      if (d < best_d || (d == best_d && i < best)) {
        best_d = d;
        best = i;
      }
    });
    return best;
  }

 private:
  std::array<std::int64_t, 3> cell_of(const Vector3& p) const {
    return {static_cast<std::int64_t>(std::floor(p[0] / cell_)),
            static_cast<std::int64_t>(std::floor(p[1] / cell_)),
            static_cast<std::int64_t>(std::floor(p[2] / cell_))};
  }
  static std::int64_t key(const std::array<std::int64_t, 3>& c) {
    constexpr std::int64_t kMask = (1 << 21) - 1;
    return ((c[0] & kMask) << 42) | ((c[1] & kMask) << 21) | (c[2] & kMask);
  }

  const Points& points_;
  Scalar cell_;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Validation

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  out << "vertices " << num_vertices << "\n";
  out << "faces " << num_faces << "\n";
  out << "edges " << num_edges << "\n";
  out << "components " << num_components << "\n";
  out << "area " << std::setprecision(12) << total_area << "\n";
  for (const auto& issue : issues) out << "error: " << issue << "\n";
  out << (ok() ? "status OK" : "status INVALID") << "\n";
  return out.str();
}

Vector face_areas(const TriangleMesh& mesh) {
  Vector areas(mesh.num_faces());
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Vector3 a = vertex(mesh, mesh.faces(f, 0));
    const Vector3 b = vertex(mesh, mesh.faces(f, 1));
    const Vector3 c = vertex(mesh, mesh.faces(f, 2));
    areas[f] = 0.5 * (b - a).cross(c - a).norm();
  }
  return areas;
}

Scalar surface_area(const TriangleMesh& mesh) { return face_areas(mesh).sum(); }

std::vector<std::pair<int, int>> edges(const TriangleMesh& mesh) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<size_t>(3 * mesh.num_faces()));
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int a = mesh.faces(f, k), b = mesh.faces(f, (k + 1) % 3);
      if (a > b) std::swap(a, b);
      out.emplace_back(a, b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Scalar mean_edge_length(const TriangleMesh& mesh) {
  const auto e = edges(mesh);
  if (e.empty()) return 0;
  Scalar total = 0;
  for (auto [a, b] : e) total += (mesh.vertices.row(a) - mesh.vertices.row(b)).norm();
  return total / static_cast<Scalar>(e.size());
}

ValidationReport validate(const TriangleMesh& mesh) {
  ValidationReport report;
  report.num_vertices = mesh.num_vertices();
  report.num_faces = mesh.num_faces();
  const Index nv = mesh.num_vertices();

  if (nv == 0 || mesh.num_faces() == 0) {
    report.issues.push_back("empty mesh");
    return report;
  }
  if (!mesh.vertices.allFinite()) report.issues.push_back("non-finite vertex coordinate");

  bool indices_ok = true;
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.faces(f, k);
      if (v < 0 || v >= nv) {
        std::ostringstream msg;
        msg << "face " << f << " index " << v << " out of range [0, " << nv << ")";
        report.issues.push_back(msg.str());
        indices_ok = false;
      }
    }
  }
  if (!indices_ok) return report;

  const Vector areas = face_areas(mesh);
  report.total_area = areas.sum();
  const Scalar threshold = kDegenerateAreaRatio * areas.mean();
  int degenerate = 0;
  for (Index f = 0; f < areas.size(); ++f) {
    if (!(areas[f] > threshold)) {
      if (++degenerate <= 10) {
        std::ostringstream msg;
        msg << "degenerate face " << f << " (area " << areas[f] << ")";
        report.issues.push_back(msg.str());
      }
    }
  }
  if (degenerate > 10) {
    report.issues.push_back(std::to_string(degenerate) + " degenerate faces in total");
  }

  std::unordered_map<std::uint64_t, int> edge_count;
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) ++edge_count[edge_key(mesh.faces(f, k), mesh.faces(f, (k + 1) % 3))];
  }
  report.num_edges = static_cast<Index>(edge_count.size());
  std::vector<std::pair<std::uint64_t, int>> bad;
  for (auto [key, count] : edge_count)
    if (count != 2) bad.emplace_back(key, count);
  std::sort(bad.begin(), bad.end());
  int boundary = 0, nonmanifold = 0;
  for (auto [key, count] : bad) {
    const auto a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
    std::ostringstream msg;
    if (count == 1) {
      if (++boundary > 10) continue;
      msg << "boundary edge (" << a << ", " << b << ")";
    } else {
      if (++nonmanifold > 10) continue;
      msg << "non-manifold edge (" << a << ", " << b << ") shared by " << count << " faces";
    }
    report.issues.push_back(msg.str());
  }
  if (boundary > 10) report.issues.push_back(std::to_string(boundary) + " boundary edges in total");
  if (nonmanifold > 10) {
    report.issues.push_back(std::to_string(nonmanifold) + " non-manifold edges in total");
  }

  UnionFind components(nv);
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    components.unite(mesh.faces(f, 0), mesh.faces(f, 1));
    components.unite(mesh.faces(f, 0), mesh.faces(f, 2));
  }
  std::set<int> roots;
  for (Index v = 0; v < nv; ++v) roots.insert(components.find(static_cast<int>(v)));
  report.num_components = static_cast<Index>(roots.size());
  if (roots.size() != 1) {
    report.issues.push_back("mesh is disconnected (" + std::to_string(roots.size()) +
                            " components)");
  }
  return report;
}

void validate_or_throw(const TriangleMesh& mesh) {
  const auto report = validate(mesh);
  if (!report.ok()) {
    std::string msg = "invalid mesh '" + mesh.name + "':";
    for (const auto& issue : report.issues) msg += "\n  " + issue;
    throw ValidationError(msg);
  }
}

// ---------------------------------------------------------------------------
// OFF

TriangleMesh parse_off(std::istream& in, std::string name) {
  // Tokenise with '#' comments stripped.
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    lines.push_back(line);
  }
  std::size_t cursor = 0;
  auto next_line = [&]() -> std::istringstream {
    if (cursor >= lines.size()) throw IoError("OFF parse error in '" + name + "': unexpected end of file");
    return std::istringstream(lines[cursor++]);
  };

  std::istringstream header = next_line();
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw IoError("OFF parse error in '" + name + "': missing OFF header");
  long long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv)) header = next_line(), header >> nv;
  if (!(header >> nf >> ne) || nv < 0 || nf < 0) {
    throw IoError("OFF parse error in '" + name + "': malformed counts line");
  }

  TriangleMesh mesh;
  mesh.name = std::move(name);
  mesh.vertices.resize(nv, 3);
  for (long long i = 0; i < nv; ++i) {
    auto row = next_line();
    if (!(row >> mesh.vertices(i, 0) >> mesh.vertices(i, 1) >> mesh.vertices(i, 2))) {
      throw IoError("OFF parse error in '" + mesh.name + "': bad vertex line " + std::to_string(i));
    }
  }
  mesh.faces.resize(nf, 3);
  for (long long f = 0; f < nf; ++f) {
    auto row = next_line();
    int arity = 0;
    if (!(row >> arity)) throw IoError("OFF parse error in '" + mesh.name + "': bad face line " + std::to_string(f));
    if (arity != 3) {
      throw ValidationError("non-triangle face " + std::to_string(f) + " (arity " +
                            std::to_string(arity) + ") in '" + mesh.name + "'");
    }
    if (!(row >> mesh.faces(f, 0) >> mesh.faces(f, 1) >> mesh.faces(f, 2))) {
      throw IoError("OFF parse error in '" + mesh.name + "': bad face line " + std::to_string(f));
    }
  }
  validate_or_throw(mesh);
  return mesh;
}

TriangleMesh load_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  return parse_off(in, path.stem().string());
}

void write_off(const TriangleMesh& mesh, std::ostream& out) {
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
  out << std::setprecision(17);
  for (Index i = 0; i < mesh.num_vertices(); ++i) {
    out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
  }
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    out << "3 " << mesh.faces(f, 0) << ' ' << mesh.faces(f, 1) << ' ' << mesh.faces(f, 2) << '\n';
  }
}

void write_off(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file " + path.string());
  write_off(mesh, out);
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Generators

TriangleMesh icosphere(int subdivisions, Scalar radius) {
  if (subdivisions < 0 || subdivisions > 7) throw ConfigError("icosphere subdivisions must be in [0, 7]");
  if (!(radius > 0)) throw ConfigError("icosphere radius must be positive");

  const Scalar t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vector3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::unordered_map<std::uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = edge_key(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(faces.size() * 4);
    for (const auto& [a, b, c] : faces) {
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      refined.push_back({a, ab, ca});
      refined.push_back({b, bc, ab});
      refined.push_back({c, ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces = std::move(refined);
  }

  TriangleMesh mesh;
  mesh.name = "icosphere" + std::to_string(subdivisions);
  mesh.vertices.resize(static_cast<Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<Index>(i)) = radius * verts[i].transpose();
  mesh.faces.resize(static_cast<Index>(faces.size()), 3);
  for (size_t f = 0; f < faces.size(); ++f) {
    mesh.faces.row(static_cast<Index>(f)) << faces[f][0], faces[f][1], faces[f][2];
  }
  return mesh;
}

TriangleMesh torus(int n_major, int n_minor, Scalar major_radius, Scalar minor_radius) {
  if (n_major < 3 || n_minor < 3) throw ConfigError("torus grid needs at least 3 x 3 samples");
  if (!(major_radius > 0) || !(minor_radius > 0) || !(minor_radius < major_radius)) {
    throw ConfigError("torus radii must satisfy 0 < r < R");
  }
  TriangleMesh mesh;
  mesh.name = "torus";
  mesh.vertices.resize(n_major * n_minor, 3);
  for (int i = 0; i < n_major; ++i) {
    const Scalar u = 2 * std::numbers::pi * i / n_major;
    for (int j = 0; j < n_minor; ++j) {
      const Scalar v = 2 * std::numbers::pi * j / n_minor;
      const Scalar ring = major_radius + minor_radius * std::cos(v);
      mesh.vertices.row(i * n_minor + j) << ring * std::cos(u), ring * std::sin(u),
          minor_radius * std::sin(v);
    }
  }
  mesh.faces.resize(2 * n_major * n_minor, 3);
  Index f = 0;
  for (int i = 0; i < n_major; ++i) {
    for (int j = 0; j < n_minor; ++j) {
      const int a = i * n_minor + j;
      const int b = ((i + 1) % n_major) * n_minor + j;
      const int c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor;
      const int d = i * n_minor + (j + 1) % n_minor;
      mesh.faces.row(f++) << a, b, c;
      mesh.faces.row(f++) << a, c, d;
    }
  }
  return mesh;
}

TriangleMesh tetrahedron(Scalar edge_length) {
  if (!(edge_length > 0)) throw ConfigError("tetrahedron edge length must be positive");
  TriangleMesh mesh;
  mesh.name = "tetrahedron";
  const Scalar s = edge_length / (2.0 * std::sqrt(2.0));
  mesh.vertices.resize(4, 3);
  mesh.vertices << s, s, s, s, -s, -s, -s, s, -s, -s, -s, s;
  mesh.faces.resize(4, 3);
  mesh.faces << 0, 2, 1, 0, 1, 3, 0, 3, 2, 1, 2, 3;
  return mesh;
}

TriangleMesh rigid_transform(const TriangleMesh& mesh, const Matrix3& rotation,
                             const Vector3& translation) {
  TriangleMesh out = mesh;
  out.vertices = (mesh.vertices * rotation.transpose()).rowwise() + translation.transpose();
  return out;
}

TriangleMesh normalize_unit_area(const TriangleMesh& mesh) {
  const Vector areas = face_areas(mesh);
  const Scalar total = areas.sum();
  Vector3 centroid = Vector3::Zero();
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Vector3 c = (vertex(mesh, mesh.faces(f, 0)) + vertex(mesh, mesh.faces(f, 1)) +
                       vertex(mesh, mesh.faces(f, 2))) / 3.0;
    centroid += areas[f] * c;
  }
  centroid /= total;
  TriangleMesh out = mesh;
  out.vertices = (mesh.vertices.rowwise() - centroid.transpose()) / std::sqrt(total);
  return out;
}

// ---------------------------------------------------------------------------
// Permutations

VertexPermutation::VertexPermutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  std::vector<char> seen(mapping_.size(), 0);
  for (int m : mapping_) {
    if (m < 0 || static_cast<size_t>(m) >= mapping_.size() || seen[m]) {
      throw ConfigError("vertex mapping is not a permutation");
    }
    seen[m] = 1;
  }
}

VertexPermutation VertexPermutation::identity(Index n) {
  std::vector<int> m(static_cast<size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  return VertexPermutation(std::move(m));
}

bool VertexPermutation::is_identity() const {
  for (size_t i = 0; i < mapping_.size(); ++i)
    if (mapping_[i] != static_cast<int>(i)) return false;
  return true;
}

VertexPermutation VertexPermutation::inverse() const {
  std::vector<int> inv(mapping_.size());
  for (size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = static_cast<int>(i);
  return VertexPermutation(std::move(inv));
}

SparseMatrix VertexPermutation::matrix() const {
  std::vector<Eigen::Triplet<Scalar>> t;
  t.reserve(mapping_.size());
  for (size_t i = 0; i < mapping_.size(); ++i) t.emplace_back(mapping_[i], static_cast<int>(i), 1.0);
  SparseMatrix p(size(), size());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

namespace {

Matrix3 frame(const Vector3& a, const Vector3& b) {
  Matrix3 f;
  const Vector3 e1 = a.normalized();
  const Vector3 e2 = (b - b.dot(e1) * e1).normalized();
  f.col(0) = e1;
  f.col(1) = e2;
  f.col(2) = e1.cross(e2);
  return f;
}

}  // namespace

std::vector<VertexPermutation> symmetry_permutations(const TriangleMesh& mesh,
                                                     const SymmetrySearchOptions& options) {
  const Index n = mesh.num_vertices();
  const Scalar tol = options.tolerance;
  std::vector<VertexPermutation> result{VertexPermutation::identity(n)};
  if (n < 3) return result;

  const Vector3 centroid = mesh.vertices.colwise().mean().transpose();
  const Points centred = mesh.vertices.rowwise() - centroid.transpose();

  // Anchor: first vertex off the centroid; partner: its nearest vertex that is
  // not collinear with the anchor through the centroid.
  int anchor = -1;
  for (Index i = 0; i < n && anchor < 0; ++i)
    if (centred.row(i).norm() > 10 * tol) anchor = static_cast<int>(i);
  if (anchor < 0) return result;
  const Vector3 pa = centred.row(anchor).transpose();
  int partner = -1;
  Scalar partner_d = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (i == anchor) continue;
    const Vector3 pb = centred.row(i).transpose();
    if (pa.cross(pb).norm() <= 10 * tol * std::max<Scalar>(1, pa.norm())) continue;
    const Scalar d = (pb - pa).norm();
    if (d < partner_d) {
      partner_d = d;
      partner = static_cast<int>(i);
    }
  }
  if (partner < 0) return result;
  const Vector3 pb = centred.row(partner).transpose();
  const Scalar ra = pa.norm(), rb = pb.norm();
  const Matrix3 source = frame(pa, pb);

  const PointGrid grid(centred, std::max(partner_d, 4 * tol));
  std::unordered_set<std::string> face_set;
  auto face_key = [](int a, int b, int c) {
    std::array<int, 3> f{a, b, c};
    std::sort(f.begin(), f.end());
    return std::to_string(f[0]) + "," + std::to_string(f[1]) + "," + std::to_string(f[2]);
  };
  for (Index f = 0; f < mesh.num_faces(); ++f)
    face_set.insert(face_key(mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)));

  std::set<std::vector<int>> found;
  std::vector<int> mapping(static_cast<size_t>(n));
  std::vector<char> used(static_cast<size_t>(n));

  auto try_rotation = [&](const Matrix3& rotation) {
    std::fill(used.begin(), used.end(), 0);
    for (Index i = 0; i < n; ++i) {
      const int j = grid.nearest_within(rotation * centred.row(i).transpose(), tol);
      if (j < 0 || used[j]) return;
      used[j] = 1;
      mapping[i] = j;
    }
    for (Index f = 0; f < mesh.num_faces(); ++f) {
      if (!face_set.contains(face_key(mapping[mesh.faces(f, 0)], mapping[mesh.faces(f, 1)],
                                      mapping[mesh.faces(f, 2)]))) {
        return;
      }
    }
    found.insert(mapping);
  };

  Matrix3 flip = Matrix3::Identity();
  flip(2, 2) = -1;
  for (Index a = 0; a < n; ++a) {
    const Vector3 qa = centred.row(a).transpose();
    if (std::abs(qa.norm() - ra) > 2 * tol) continue;
    grid.for_each_within(qa, partner_d + 2 * tol, [&](int b) {
      if (b == a) return;
      const Vector3 qb = centred.row(b).transpose();
      if (std::abs(qb.norm() - rb) > 2 * tol) return;
      if (std::abs((qb - qa).norm() - partner_d) > 2 * tol) return;
      const Matrix3 target = frame(qa, qb);
      try_rotation(target * source.transpose());
      if (options.include_reflections) try_rotation(target * flip * source.transpose());
    });
  }

  for (const auto& m : found) {
    VertexPermutation p(m);
    if (!p.is_identity()) result.push_back(std::move(p));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Closest point and pullback

namespace {

// Closest point on triangle (a, b, c) to p, returned as barycentric weights.
// Vertex and edge regions produce exact 0/1 weights.
Vector3 closest_barycentric(const Vector3& p, const Vector3& a, const Vector3& b,
                            const Vector3& c) {
  const Vector3 ab = b - a, ac = c - a, ap = p - a;
  const Scalar d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return {1, 0, 0};
  const Vector3 bp = p - b;
  const Scalar d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return {0, 1, 0};
  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const Scalar v = d1 / (d1 - d3);
    return {1 - v, v, 0};
  }
  const Vector3 cp = p - c;
  const Scalar d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return {0, 0, 1};
  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const Scalar w = d2 / (d2 - d6);
    return {1 - w, 0, w};
  }
  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const Scalar w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {0, 1 - w, w};
  }
  const Scalar denom = 1 / (va + vb + vc);
  const Scalar v = vb * denom, w = vc * denom;
  return {1 - v - w, v, w};
}

struct FaceBounds {
  Points centre;
  Vector radius;
};

FaceBounds face_bounds(const TriangleMesh& mesh) {
  FaceBounds fb{Points(mesh.num_faces(), 3), Vector(mesh.num_faces())};
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Vector3 a = vertex(mesh, mesh.faces(f, 0)), b = vertex(mesh, mesh.faces(f, 1)),
                  c = vertex(mesh, mesh.faces(f, 2));
    const Vector3 m = (a + b + c) / 3.0;
    fb.centre.row(f) = m.transpose();
    fb.radius[f] = std::max({(a - m).norm(), (b - m).norm(), (c - m).norm()});
  }
  return fb;
}

SurfacePoint closest_with_bounds(const TriangleMesh& mesh, const FaceBounds& bounds,
                                 const Vector3& q) {
  SurfacePoint best;
  best.distance = std::numeric_limits<Scalar>::infinity();
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const Scalar lower = (bounds.centre.row(f).transpose() - q).norm() - bounds.radius[f];
    if (lower >= best.distance) continue;
    const Vector3 a = vertex(mesh, mesh.faces(f, 0)), b = vertex(mesh, mesh.faces(f, 1)),
                  c = vertex(mesh, mesh.faces(f, 2));
    const Vector3 w = closest_barycentric(q, a, b, c);
    const Scalar d = (w[0] * a + w[1] * b + w[2] * c - q).norm();
    if (d < best.distance) {
      best.distance = d;
      best.face = static_cast<int>(f);
      best.barycentric = w;
    }
  }
  return best;
}

}  // namespace

SurfacePoint closest_surface_point(const TriangleMesh& mesh, const Vector3& query) {
  return closest_with_bounds(mesh, face_bounds(mesh), query);
}

SparseMatrix pullback_operator(const TriangleMesh& mesh, const Points& warp,
                               const PullbackOptions& options) {
  if (warp.rows() != mesh.num_vertices()) throw ConfigError("warp must have one point per vertex");
  const FaceBounds bounds = face_bounds(mesh);
  const Scalar limit = options.max_distance_edge_ratio * mean_edge_length(mesh);
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<size_t>(3 * warp.rows()));
  std::vector<Index> offending;
  for (Index i = 0; i < warp.rows(); ++i) {
    const SurfacePoint sp = closest_with_bounds(mesh, bounds, warp.row(i).transpose());
    if (sp.distance > limit) {
      offending.push_back(i);
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      if (sp.barycentric[k] != 0) {
        triplets.emplace_back(static_cast<int>(i), mesh.faces(sp.face, k), sp.barycentric[k]);
      }
    }
  }
  if (!offending.empty()) {
    std::ostringstream msg;
    msg << offending.size() << " warp point(s) farther than " << limit
        << " from the surface; indices:";
    for (size_t k = 0; k < std::min<size_t>(offending.size(), 20); ++k) msg << ' ' << offending[k];
    if (offending.size() > 20) msg << " ...";
    throw ValidationError(msg.str());
  }
  SparseMatrix w(warp.rows(), mesh.num_vertices());
  w.setFromTriplets(triplets.begin(), triplets.end());
  return w;
}

Vector pullback(const TriangleMesh& mesh, const Vector& signal, const Points& warp,
                const PullbackOptions& options) {
  if (signal.size() != mesh.num_vertices()) throw ConfigError("signal length must equal vertex count");
  return pullback_operator(mesh, warp, options) * signal;
}

// ---------------------------------------------------------------------------
// Warps

Points twist_warp(const TriangleMesh& mesh, Scalar epsilon) {
  const Vector3 centroid = mesh.vertices.colwise().mean().transpose();
  const Scalar half_height =
      0.5 * (mesh.vertices.col(2).maxCoeff() - mesh.vertices.col(2).minCoeff());
  Points out(mesh.num_vertices(), 3);
  for (Index i = 0; i < mesh.num_vertices(); ++i) {
    const Vector3 p = mesh.vertices.row(i).transpose() - centroid;
    // The inverse twist turns the opposite way at the same height.
    const Scalar angle = -epsilon * std::numbers::pi * p[2] / half_height;
    const Scalar c = std::cos(angle), s = std::sin(angle);
    out.row(i) << centroid[0] + c * p[0] - s * p[1], centroid[1] + s * p[0] + c * p[1],
        centroid[2] + p[2];
  }
  return out;
}

Points rotation_warp(const TriangleMesh& mesh, const Vector3& axis, Scalar angle) {
  const Vector3 centroid = mesh.vertices.colwise().mean().transpose();
  const Matrix3 inverse = Eigen::AngleAxis<Scalar>(-angle, axis.normalized()).toRotationMatrix();
  return ((mesh.vertices.rowwise() - centroid.transpose()) * inverse.transpose()).rowwise() +
         centroid.transpose();
}

}  // namespace geoscatter
