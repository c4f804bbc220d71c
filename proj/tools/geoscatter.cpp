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

// geoscatter command-line tool. Exit codes: 0 ok, 1 numerical failure,
// 2 validation failure, 3 I/O error, 4 configuration error, 5 path cap.

#include <geoscatter/classify.hpp>
#include <geoscatter/datasets.hpp>
#include <geoscatter/filterbank.hpp>
#include <geoscatter/mesh.hpp>
#include <geoscatter/pipelines.hpp>
#include <geoscatter/scattering.hpp>
#include <geoscatter/spectral.hpp>
#include <geoscatter/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef GEOSCATTER_DATA_ROOT
#define GEOSCATTER_DATA_ROOT "."
#endif

namespace gs = geoscatter;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitConfig = 4;
constexpr int kExitPathCap = 5;

// --config FILE: a JSON object whose keys are long flag names without the
// dashes. Flags given on the command line take precedence; unknown keys are
// rejected.
class ConfigBinder {
 public:
  explicit ConfigBinder(CLI::App* app) {
    app->add_option("--config", path_, "JSON file with defaults for this subcommand's flags");
  }

  template <typename T>
  void bind(const std::string& key, CLI::Option* option, T& target) {
    setters_[key] = [option, &target, key](const Json& value) {
      if (option->count() > 0) return;
      try {
        target = value.get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw gs::ConfigError("config key '" + key + "': " + e.what());
      }
    };
  }

  template <typename T>
  void bind(const std::string& key, CLI::Option* option, std::optional<T>& target) {
    setters_[key] = [option, &target, key](const Json& value) {
      if (option->count() > 0) return;
      if (value.is_null()) {
        target.reset();
        return;
      }
      try {
        target = value.get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw gs::ConfigError("config key '" + key + "': " + e.what());
      }
    };
  }

  void apply() const {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) throw gs::IoError("cannot open config file " + path_);
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw gs::ConfigError("config file " + path_ + ": " + e.what());
    }
    if (!doc.is_object()) throw gs::ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
      const auto it = setters_.find(key);
      if (it == setters_.end()) throw gs::ConfigError("unknown config key '" + key + "'");
      it->second(value);
    }
  }

 private:
  std::string path_;
  std::map<std::string, std::function<void(const Json&)>> setters_;
};

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw gs::ConfigError(what + " path is required");
  if (!fs::exists(path)) throw gs::IoError(what + " not found: " + path);
}

gs::TriangleMesh load_valid_mesh(const std::string& path) {
  require_file(path, "mesh");
  gs::TriangleMesh mesh = gs::load_off(path);
  gs::validate_or_throw(mesh);
  return mesh;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw gs::IoError("cannot write " + path);
  out << text << '\n';
  if (!out) throw gs::IoError("write failed for " + path);
}

// Signals as CSV: one row per vertex, one column per signal. A first row that
// does not parse as numbers is taken as a header.
gs::Matrix read_signal_csv(const std::string& path) {
  require_file(path, "signal file");
  std::ifstream in(path);
  if (!in) throw gs::IoError("cannot open " + path);
  std::vector<std::vector<gs::Scalar>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<gs::Scalar> row;
    std::stringstream cells(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(cells, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        numeric = numeric && used == cell.size();
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw gs::IoError(path + ": non-numeric row " + std::to_string(rows.size() + 1));
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw gs::IoError(path + ": ragged row " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw gs::IoError(path + ": no signal rows");
  gs::Matrix out(static_cast<gs::Index>(rows.size()), static_cast<gs::Index>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) out(static_cast<gs::Index>(r), static_cast<gs::Index>(c)) = rows[r][c];
  }
  return out;
}

// Basis from a cache file or computed from a mesh.
struct BasisSource {
  std::string basis_path;
  std::string mesh_path;
  gs::Index k = 512;

  void add_to(CLI::App* app, ConfigBinder& binder) {
    binder.bind("basis", app->add_option("--basis", basis_path, "Basis cache written by 'basis compute'"),
                basis_path);
    binder.bind("mesh", app->add_option("--mesh", mesh_path, "OFF mesh; the basis is computed on the fly"),
                mesh_path);
    binder.bind("k", app->add_option("--k", k, "Eigenpairs when computing from --mesh")->capture_default_str(),
                k);
  }

  gs::SpectralBasis load(std::optional<gs::TriangleMesh>* mesh_out = nullptr) const {
    if (basis_path.empty() == mesh_path.empty()) throw gs::ConfigError("give exactly one of --basis or --mesh");
    if (!basis_path.empty()) {
      require_file(basis_path, "basis cache");
      return gs::read_basis(basis_path);
    }
    gs::TriangleMesh mesh = load_valid_mesh(mesh_path);
    if (k < 1) throw gs::ConfigError("--k must be positive");
    const gs::Index used = std::min(k, mesh.num_vertices());
    if (used < k) std::cerr << "warning: --k " << k << " exceeds the vertex count; using " << used << '\n';
    gs::SpectralBasis basis = gs::eigenbasis(mesh, used);
    if (mesh_out) *mesh_out = std::move(mesh);
    return basis;
  }
};

// ---------------------------------------------------------------------------
// mesh

struct MeshGen {
  std::optional<int> icosphere;
  double radius = 1.0;
  std::vector<double> torus;
  std::optional<double> tetrahedron;
  std::string output;
};

int run_mesh_gen(const MeshGen& o) {
  const int chosen = (o.icosphere ? 1 : 0) + (o.torus.empty() ? 0 : 1) + (o.tetrahedron ? 1 : 0);
  if (chosen != 1) throw gs::ConfigError("choose exactly one of --icosphere, --torus, --tetrahedron");
  if (o.output.empty()) throw gs::ConfigError("output path (-o) is required");
  gs::TriangleMesh mesh;
  if (o.icosphere) {
    mesh = gs::icosphere(*o.icosphere, o.radius);
  } else if (!o.torus.empty()) {
    if (o.torus.size() != 4) throw gs::ConfigError("--torus takes n_major n_minor R r");
    mesh = gs::torus(static_cast<int>(o.torus[0]), static_cast<int>(o.torus[1]), o.torus[2], o.torus[3]);
  } else {
    mesh = gs::tetrahedron(*o.tetrahedron);
  }
  gs::validate_or_throw(mesh);
  gs::write_off(mesh, o.output);
  std::cout << "wrote " << o.output << ": " << mesh.num_vertices() << " vertices, " << mesh.num_faces()
            << " faces\n";
  return kExitOk;
}

int run_mesh_validate(const std::string& path) {
  require_file(path, "mesh");
  std::ifstream in(path);
  if (!in) throw gs::IoError("cannot open " + path);
  const gs::TriangleMesh mesh = gs::parse_off(in, fs::path(path).stem().string());
  const gs::ValidationReport report = gs::validate(mesh);
  std::cout << report.to_string();
  return report.ok() ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------
// basis

struct BasisCompute {
  std::string mesh;
  gs::Index k = 512;
  std::string solver = "auto";
  std::string output;
};

int run_basis_compute(const BasisCompute& o) {
  if (o.output.empty()) throw gs::ConfigError("output path (-o) is required");
  if (o.k < 1) throw gs::ConfigError("--k must be positive");
  gs::EigenOptions options;
  if (o.solver == "dense") {
    options.solver = gs::EigenSolverKind::kDense;
  } else if (o.solver == "lanczos") {
    options.solver = gs::EigenSolverKind::kLanczos;
  } else if (o.solver != "auto") {
    throw gs::ConfigError("--solver must be auto, dense or lanczos");
  }
  const gs::TriangleMesh mesh = load_valid_mesh(o.mesh);
  const gs::Index k = std::min(o.k, mesh.num_vertices());
  if (k < o.k) std::cerr << "warning: --k " << o.k << " exceeds the vertex count; clamped to " << k << '\n';
  const gs::StiffnessMatrix stiffness = gs::cotangent_stiffness(mesh);
  gs::SpectralBasis basis = gs::eigenbasis(stiffness, gs::lumped_mass(mesh), k, options);
  basis.mesh_name = mesh.name;
  gs::write_basis(basis, o.output);
  const gs::Vector residuals = gs::eigen_residuals(stiffness, basis);
  std::cout << std::setprecision(6) << "mesh " << mesh.name << ": " << mesh.num_vertices() << " vertices, area "
            << basis.area() << "\n"
            << "eigenpairs " << k << ", lambda in [" << basis.eigenvalues[0] << ", " << basis.eigenvalues[k - 1]
            << "]\n"
            << "max relative residual " << residuals.maxCoeff() << "\n"
            << "wrote " << o.output << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// scatter

struct ScatterRun {
  BasisSource source;
  std::string signals;
  int column = 0;
  std::string coordinate;
  int J = 0;
  int L = 2;
  int j_min = -8;
  std::optional<int> j_max = 0;
  bool nonwindowed = false;
  std::string path_rule = "all";
  std::string scale = "volume";
  std::size_t path_cap = 1'000'000;
  int threads = 1;
  std::string output;
};

int run_scatter(const ScatterRun& o) {
  if (o.output.empty()) throw gs::ConfigError("output path (-o) is required");
  if (o.signals.empty() == o.coordinate.empty()) throw gs::ConfigError("give exactly one of --signals or --coordinate");
  if (!o.coordinate.empty() && o.source.mesh_path.empty()) throw gs::ConfigError("--coordinate needs --mesh");

  std::optional<gs::TriangleMesh> mesh;
  const gs::SpectralBasis basis = o.source.load(&mesh);
  gs::Vector f;
  if (!o.coordinate.empty()) {
    const int axis = o.coordinate == "x" ? 0 : o.coordinate == "y" ? 1 : o.coordinate == "z" ? 2 : -1;
    if (axis < 0) throw gs::ConfigError("--coordinate must be x, y or z");
    f = mesh->vertices.col(axis);
  } else {
    const gs::Matrix all = read_signal_csv(o.signals);
    if (all.rows() != basis.num_vertices()) {
      throw gs::ValidationError("signal has " + std::to_string(all.rows()) + " rows, mesh has " +
                                std::to_string(basis.num_vertices()) + " vertices");
    }
    if (o.column < 0 || o.column >= all.cols()) throw gs::ConfigError("--column out of range");
    f = all.col(o.column);
  }

  gs::ScatteringConfig config;
  config.J = o.J;
  config.L = o.L;
  config.j_min = o.j_min;
  config.j_max = o.j_max;
  config.path_rule = gs::parse_path_rule(o.path_rule);
  config.nonwindowed_scale = gs::parse_nonwindowed_scale(o.scale);
  config.path_cap = o.path_cap;
  config.threads = o.threads;
  const gs::FilterBank bank = gs::make_filterbank(basis, config);
  const std::vector<gs::Path> paths = gs::enumerate_paths(bank, config);

  const gs::Scalar energy = gs::lp_norm(basis.mass, f, 2);
  const gs::Scalar captured = energy > 0 ? gs::fourier(basis, f).squaredNorm() / (energy * energy) : 1.0;
  std::cerr << "captured energy fraction " << std::setprecision(6) << captured << '\n';

  std::ofstream out(o.output);
  if (!out) throw gs::IoError("cannot write " + o.output);
  out << std::setprecision(17);
  if (o.nonwindowed) {
    const gs::NonWindowedCoefficients s = gs::scatter_nonwindowed(basis, bank, f, config);
    out << "path,value\n";
    for (const auto& [path, value] : s.values) out << gs::path_label(path) << ',' << value << '\n';
  } else {
    const gs::WindowedCoefficients s = gs::scatter_windowed(basis, bank, f, config);
    out << "path";
    for (gs::Index i = 0; i < basis.num_vertices(); ++i) out << ",v" << i;
    out << '\n';
    for (const auto& [path, values] : s.values) {
      out << gs::path_label(path);
      for (gs::Index i = 0; i < values.size(); ++i) out << ',' << values[i];
      out << '\n';
    }
  }
  if (!out) throw gs::IoError("write failed for " + o.output);

  Json echo;
  echo["basis"] = o.source.basis_path;
  echo["mesh"] = o.source.mesh_path;
  echo["k"] = basis.size();
  echo["signals"] = o.signals.empty() ? Json("coordinate " + o.coordinate) : Json(o.signals);
  echo["column"] = o.column;
  echo["transform"] = o.nonwindowed ? "non-windowed" : "windowed";
  echo["J"] = config.J;
  echo["L"] = config.L;
  echo["j_min"] = config.j_min;
  echo["j_max"] = bank.j_max;
  echo["window"] = config.window.kind();
  echo["path_rule"] = gs::to_string(config.path_rule);
  echo["nonwindowed_scale"] = gs::to_string(config.nonwindowed_scale);
  echo["threads"] = config.threads;
  echo["paths"] = paths.size();
  echo["captured_energy"] = captured;
  write_text(fs::path(o.output).replace_extension(".json").string(), echo.dump(2));
  std::cout << "wrote " << paths.size() << " paths to " << o.output << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// filters

struct FiltersDump {
  BasisSource source;
  int J = 0;
  int j_min = -8;
  std::optional<int> j_max = 0;
  bool residual_highpass = false;
  std::string output;
};

int run_filters_dump(const FiltersDump& o) {
  if (o.output.empty()) throw gs::ConfigError("output directory (-o) is required");
  const gs::SpectralBasis basis = o.source.load();
  gs::FilterBankOptions options;
  options.j_max = o.j_max;
  options.residual_highpass = o.residual_highpass;
  const gs::FilterBank bank =
      gs::build_filterbank(gs::SpectralWindow::exponential(), o.J, o.j_min, basis.eigenvalues, options);
  std::error_code ec;
  fs::create_directories(o.output, ec);
  if (ec) throw gs::IoError("cannot create " + o.output + ": " + ec.message());
  const fs::path dir(o.output);
  gs::write_filter_csv(dir / "lowpass.csv", bank.eigenvalues, bank.lowpass);
  for (int j : bank.scales()) {
    gs::write_filter_csv(dir / ("wavelet_" + std::to_string(j) + ".csv"), bank.eigenvalues, bank.wavelet(j));
  }
  if (bank.highpass.size() > 0) gs::write_filter_csv(dir / "highpass.csv", bank.eigenvalues, bank.highpass);
  std::cout << "wrote " << 1 + bank.num_wavelets() + (bank.highpass.size() > 0 ? 1 : 0) << " filters to "
            << o.output << "\nmax truncation residual 1 - G(2^(j_min-1) lambda)^2: "
            << gs::truncation_residual(bank).maxCoeff() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyRun {
  std::uint64_t seed = 1;
  std::string sabotage;
  int threads = 1;
  bool list = false;
};

int run_verify_cmd(const VerifyRun& o) {
  if (o.list) {
    for (const gs::CheckInfo& info : gs::verify_manifest()) std::cout << info.module << '/' << info.name << '\n';
    return kExitOk;
  }
  gs::VerifyOptions options;
  options.seed = o.seed;
  options.threads = o.threads;
  if (!o.sabotage.empty()) {
    if (o.sabotage != "telescope") throw gs::ConfigError("--sabotage supports only 'telescope'");
    options.sabotage_telescope = true;
  }
  int failed = 0;
  const auto results = gs::run_verify(options, [&](const gs::CheckResult& r) {
    if (!r.passed) ++failed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.module << '/' << r.name << ": " << r.detail << " ("
              << std::fixed << std::setprecision(2) << r.seconds << " s)" << std::defaultfloat << std::endl;
  });
  std::cout << results.size() - static_cast<size_t>(failed) << '/' << results.size() << " invariants passed\n";
  return failed == 0 ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------
// demos

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct ShapesRun {
  std::string classes = "sphere,torus,bumpy";
  int per_class = 10;
  int L = 2;
  gs::Index K = 512;
  int j_min = -8;
  int j_max = 0;
  std::uint64_t seed = 1;
  bool no_unit_area = false;
  int threads = 1;
  std::string output;
};

int run_demo_shapes(const ShapesRun& o) {
  if (o.L < 0) throw gs::ConfigError("--L must be non-negative");
  gs::ShapesDemoConfig config;
  for (const std::string& name : split_list(o.classes)) {
    config.dataset.classes.push_back(gs::ShapeClassSpec::defaults(gs::parse_shape_kind(name)));
  }
  if (config.dataset.classes.size() < 2) throw gs::ConfigError("--classes needs at least two shape kinds");
  config.dataset.per_class = o.per_class;
  config.dataset.seed = o.seed;
  config.dataset.unit_area = !o.no_unit_area;
  config.depths.clear();
  for (int d = 0; d <= o.L; ++d) config.depths.push_back(d);
  config.K = o.K;
  config.j_min = o.j_min;
  config.j_max = o.j_max;
  config.plan.seed = o.seed;
  config.threads = o.threads;
  const gs::DemoResult result = gs::run_shapes_demo(config, [](const std::string& s) { std::cerr << s << '\n'; });
  write_text(o.output, result.json);
  return kExitOk;
}

struct MnistRun {
  std::string images;
  std::string labels;
  std::string data_root = GEOSCATTER_DATA_ROOT;
  int per_class = 100;
  std::string digits;
  bool keep_six = false;
  bool rotated = false;
  int J = -2;
  int L = 2;
  int j_min = -8;
  int subdivisions = 3;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output;
};

int run_demo_mnist(const MnistRun& o) {
  gs::MnistDemoConfig config;
  config.images = o.images.empty() ? gs::bundled_mnist_images(o.data_root) : fs::path(o.images);
  config.labels = o.labels.empty() ? gs::bundled_mnist_labels(o.data_root) : fs::path(o.labels);
  config.selection.per_class = o.per_class;
  for (const std::string& d : split_list(o.digits)) {
    try {
      config.selection.digits.push_back(std::stoi(d));
    } catch (const std::exception&) {
      throw gs::ConfigError("--digits must be a comma-separated list of integers");
    }
  }
  config.selection.remove_six = !o.keep_six;
  config.selection.seed = o.seed;
  config.rotated = o.rotated;
  config.J = o.J;
  config.L = o.L;
  config.j_min = o.j_min;
  config.subdivisions = o.subdivisions;
  config.plan.seed = o.seed;
  config.seed = o.seed;
  config.threads = o.threads;
  const gs::DemoResult result = gs::run_mnist_demo(config, [](const std::string& s) { std::cerr << s << '\n'; });
  write_text(o.output, result.json);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric wavelet scattering on triangle meshes"};
  app.require_subcommand(1);
  std::function<int()> action;

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate or validate OFF meshes");
  mesh_cmd->require_subcommand(1);
  MeshGen gen;
  auto* gen_cmd = mesh_cmd->add_subcommand("gen", "Write a generated mesh as OFF");
  ConfigBinder gen_cfg(gen_cmd);
  gen_cfg.bind("icosphere", gen_cmd->add_option("--icosphere", gen.icosphere, "Subdivision level (0-7)"),
               gen.icosphere);
  gen_cfg.bind("radius", gen_cmd->add_option("--radius", gen.radius, "Icosphere radius")->capture_default_str(),
               gen.radius);
  gen_cfg.bind("torus",
               gen_cmd->add_option("--torus", gen.torus, "n_major n_minor R r")->expected(4)->allow_extra_args(false),
               gen.torus);
  auto* tet = gen_cmd->add_option("--tetrahedron", gen.tetrahedron, "Regular tetrahedron with this edge length");
  gen_cfg.bind("tetrahedron", tet, gen.tetrahedron);
  gen_cfg.bind("output", gen_cmd->add_option("-o,--output", gen.output, "Output OFF path"), gen.output);
  gen_cmd->callback([&] { action = [&] { gen_cfg.apply(); return run_mesh_gen(gen); }; });

  std::string validate_path;
  auto* val_cmd = mesh_cmd->add_subcommand("validate", "Print the validation report of an OFF mesh");
  val_cmd->add_option("mesh", validate_path, "OFF file")->required();
  val_cmd->callback([&] { action = [&] { return run_mesh_validate(validate_path); }; });

  // basis
  auto* basis_cmd = app.add_subcommand("basis", "Laplace-Beltrami eigenbasis cache");
  basis_cmd->require_subcommand(1);
  BasisCompute bc;
  auto* compute_cmd = basis_cmd->add_subcommand("compute", "Compute and cache the K smallest eigenpairs");
  ConfigBinder bc_cfg(compute_cmd);
  bc_cfg.bind("mesh", compute_cmd->add_option("--mesh", bc.mesh, "OFF mesh"), bc.mesh);
  bc_cfg.bind("k", compute_cmd->add_option("--k", bc.k, "Eigenpairs (capped at the vertex count)")->capture_default_str(),
              bc.k);
  bc_cfg.bind("solver", compute_cmd->add_option("--solver", bc.solver, "auto, dense or lanczos")->capture_default_str(),
              bc.solver);
  bc_cfg.bind("output", compute_cmd->add_option("-o,--output", bc.output, "Cache path"), bc.output);
  compute_cmd->callback([&] { action = [&] { bc_cfg.apply(); return run_basis_compute(bc); }; });

  // scatter
  ScatterRun sr;
  auto* scatter_cmd = app.add_subcommand("scatter", "Scattering coefficients of one signal");
  ConfigBinder sr_cfg(scatter_cmd);
  sr.source.add_to(scatter_cmd, sr_cfg);
  sr_cfg.bind("signals", scatter_cmd->add_option("--signals", sr.signals, "Signal CSV, one row per vertex"),
              sr.signals);
  sr_cfg.bind("column", scatter_cmd->add_option("--column", sr.column, "Signal column to use")->capture_default_str(),
              sr.column);
  sr_cfg.bind("coordinate", scatter_cmd->add_option("--coordinate", sr.coordinate, "Use the x, y or z coordinate"),
              sr.coordinate);
  sr_cfg.bind("J", scatter_cmd->add_option("--J", sr.J, "Low-pass scale")->capture_default_str(), sr.J);
  sr_cfg.bind("L", scatter_cmd->add_option("--L", sr.L, "Depth")->capture_default_str(), sr.L);
  sr_cfg.bind("jmin", scatter_cmd->add_option("--jmin", sr.j_min, "Finest wavelet scale")->capture_default_str(),
              sr.j_min);
  sr_cfg.bind("jmax", scatter_cmd->add_option("--jmax", sr.j_max, "Coarsest wavelet scale (capped at J)")
                          ->capture_default_str(),
              sr.j_max);
  sr_cfg.bind("nonwindowed", scatter_cmd->add_flag("--nonwindowed", sr.nonwindowed, "One scalar per path"),
              sr.nonwindowed);
  sr_cfg.bind("path-rule",
              scatter_cmd->add_option("--path-rule", sr.path_rule, "all or nonincreasing-frequency")->capture_default_str(),
              sr.path_rule);
  sr_cfg.bind("scale", scatter_cmd->add_option("--scale", sr.scale, "Non-windowed scale: volume or l1")->capture_default_str(),
              sr.scale);
  sr_cfg.bind("path-cap", scatter_cmd->add_option("--path-cap", sr.path_cap, "Largest path count")->capture_default_str(),
              sr.path_cap);
  sr_cfg.bind("threads", scatter_cmd->add_option("--threads", sr.threads)->capture_default_str(), sr.threads);
  sr_cfg.bind("output", scatter_cmd->add_option("-o,--output", sr.output, "Coefficient CSV; config echo goes next to it"),
              sr.output);
  scatter_cmd->callback([&] { action = [&] { sr_cfg.apply(); return run_scatter(sr); }; });

  // filters
  auto* filters_cmd = app.add_subcommand("filters", "Filter bank inspection");
  filters_cmd->require_subcommand(1);
  FiltersDump fd;
  auto* dump_cmd = filters_cmd->add_subcommand("dump", "Write each filter as CSV (k, lambda, hhat)");
  ConfigBinder fd_cfg(dump_cmd);
  fd.source.add_to(dump_cmd, fd_cfg);
  fd_cfg.bind("J", dump_cmd->add_option("--J", fd.J)->capture_default_str(), fd.J);
  fd_cfg.bind("jmin", dump_cmd->add_option("--jmin", fd.j_min)->capture_default_str(), fd.j_min);
  fd_cfg.bind("jmax", dump_cmd->add_option("--jmax", fd.j_max)->capture_default_str(), fd.j_max);
  fd_cfg.bind("residual-highpass",
              dump_cmd->add_flag("--residual-highpass", fd.residual_highpass, "Append the residual high-pass filter"),
              fd.residual_highpass);
  fd_cfg.bind("output", dump_cmd->add_option("-o,--output", fd.output, "Output directory"), fd.output);
  dump_cmd->callback([&] { action = [&] { fd_cfg.apply(); return run_filters_dump(fd); }; });

  // verify
  VerifyRun vr;
  auto* verify_cmd = app.add_subcommand("verify", "Run the numerical invariant suite");
  ConfigBinder vr_cfg(verify_cmd);
  vr_cfg.bind("seed", verify_cmd->add_option("--seed", vr.seed)->capture_default_str(), vr.seed);
  vr_cfg.bind("sabotage", verify_cmd->add_option("--sabotage", vr.sabotage, "Fault injection: telescope"),
              vr.sabotage);
  vr_cfg.bind("threads", verify_cmd->add_option("--threads", vr.threads)->capture_default_str(), vr.threads);
  vr_cfg.bind("list", verify_cmd->add_flag("--list", vr.list, "Print the invariant manifest and exit"), vr.list);
  verify_cmd->callback([&] { action = [&] { vr_cfg.apply(); return run_verify_cmd(vr); }; });

  // demo
  auto* demo_cmd = app.add_subcommand("demo", "End-to-end classification runs");
  demo_cmd->require_subcommand(1);
  ShapesRun sh;
  auto* shapes_cmd = demo_cmd->add_subcommand("shapes", "Synthetic shape classes, non-windowed scattering");
  ConfigBinder sh_cfg(shapes_cmd);
  sh_cfg.bind("classes", shapes_cmd->add_option("--classes", sh.classes, "Comma-separated: sphere, torus, bumpy")
                             ->capture_default_str(),
              sh.classes);
  sh_cfg.bind("per-class", shapes_cmd->add_option("--per-class", sh.per_class)->capture_default_str(), sh.per_class);
  sh_cfg.bind("L", shapes_cmd->add_option("--L", sh.L, "Largest depth; depths 0..L are cross-validated")
                       ->capture_default_str(),
              sh.L);
  sh_cfg.bind("K", shapes_cmd->add_option("--K", sh.K, "Eigenpairs per mesh")->capture_default_str(), sh.K);
  sh_cfg.bind("jmin", shapes_cmd->add_option("--jmin", sh.j_min)->capture_default_str(), sh.j_min);
  sh_cfg.bind("jmax", shapes_cmd->add_option("--jmax", sh.j_max)->capture_default_str(), sh.j_max);
  sh_cfg.bind("seed", shapes_cmd->add_option("--seed", sh.seed)->capture_default_str(), sh.seed);
  sh_cfg.bind("no-unit-area", shapes_cmd->add_flag("--no-unit-area", sh.no_unit_area, "Keep the generated scale"),
              sh.no_unit_area);
  sh_cfg.bind("threads", shapes_cmd->add_option("--threads", sh.threads)->capture_default_str(), sh.threads);
  sh_cfg.bind("output", shapes_cmd->add_option("-o,--output", sh.output, "Report JSON (default stdout)"), sh.output);
  shapes_cmd->callback([&] { action = [&] { sh_cfg.apply(); return run_demo_shapes(sh); }; });

  MnistRun mn;
  auto* mnist_cmd = demo_cmd->add_subcommand("mnist", "Spherical digits, windowed scattering");
  ConfigBinder mn_cfg(mnist_cmd);
  mn_cfg.bind("images", mnist_cmd->add_option("--images", mn.images, "IDX image file"), mn.images);
  mn_cfg.bind("labels", mnist_cmd->add_option("--labels", mn.labels, "IDX label file"), mn.labels);
  mn_cfg.bind("data-root", mnist_cmd->add_option("--data-root", mn.data_root, "Directory holding data/mnist-5k")
                               ->capture_default_str(),
              mn.data_root);
  mn_cfg.bind("per-class", mnist_cmd->add_option("--per-class", mn.per_class)->capture_default_str(), mn.per_class);
  mn_cfg.bind("digits", mnist_cmd->add_option("--digits", mn.digits, "Comma-separated digits (default all)"),
              mn.digits);
  mn_cfg.bind("keep-six", mnist_cmd->add_flag("--keep-six", mn.keep_six, "Keep digit 6"), mn.keep_six);
  mn_cfg.bind("rotated", mnist_cmd->add_flag("--rotated", mn.rotated, "Random rotation per image"), mn.rotated);
  mn_cfg.bind("J", mnist_cmd->add_option("--J", mn.J)->capture_default_str(), mn.J);
  mn_cfg.bind("L", mnist_cmd->add_option("--L", mn.L)->capture_default_str(), mn.L);
  mn_cfg.bind("jmin", mnist_cmd->add_option("--jmin", mn.j_min)->capture_default_str(), mn.j_min);
  mn_cfg.bind("subdivisions", mnist_cmd->add_option("--subdivisions", mn.subdivisions)->capture_default_str(),
              mn.subdivisions);
  mn_cfg.bind("seed", mnist_cmd->add_option("--seed", mn.seed)->capture_default_str(), mn.seed);
  mn_cfg.bind("threads", mnist_cmd->add_option("--threads", mn.threads)->capture_default_str(), mn.threads);
  mn_cfg.bind("output", mnist_cmd->add_option("-o,--output", mn.output, "Report JSON (default stdout)"), mn.output);
  mnist_cmd->callback([&] { action = [&] { mn_cfg.apply(); return run_demo_mnist(mn); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const gs::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const gs::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const gs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gs::PathCapError& e) {
    std::cerr << "path cap exceeded: " << e.what() << '\n';
    return kExitPathCap;
  } catch (const gs::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
