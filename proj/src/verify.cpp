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

#include <geoscatter/verify.hpp>

#include <geoscatter/filterbank.hpp>
#include <geoscatter/mesh.hpp>
#include <geoscatter/scattering.hpp>
#include <geoscatter/spectral.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

namespace geoscatter {

namespace {

constexpr Scalar kSlack = 1e-9;

// Pass/fail plus a one-line explanation.
struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(Scalar x) {
  std::ostringstream out;
  out.precision(3);
  out << x;
  return out.str();
}

Outcome bounded(const std::string& what, Scalar value, Scalar limit) {
  return {value <= limit, what + " " + fmt(value) + " (limit " + fmt(limit) + ")"};
}

// Fixtures are built on first use and shared by the checks of one run.
class Fixtures {
 public:
  explicit Fixtures(const VerifyOptions& options) : options_(options) {}

  const VerifyOptions& options() const { return options_; }

  std::mt19937_64 rng(std::uint64_t salt) const { return std::mt19937_64(options_.seed * 0x9e3779b97f4a7c15ULL + salt); }

  const TriangleMesh& sphere() {
    if (!sphere_) sphere_ = icosphere(3, 1.0);
    return *sphere_;
  }
  const SpectralBasis& sphere_basis() {
    if (!sphere_basis_) sphere_basis_ = eigenbasis(sphere(), sphere().num_vertices());
    return *sphere_basis_;
  }
  const StiffnessMatrix& sphere_stiffness() {
    if (!sphere_stiffness_) sphere_stiffness_ = cotangent_stiffness(sphere());
    return *sphere_stiffness_;
  }
  const std::vector<VertexPermutation>& symmetries() {
    if (!symmetries_) symmetries_ = symmetry_permutations(sphere());
    return *symmetries_;
  }
  const std::vector<TriangleMesh>& all_meshes() {
    if (!meshes_) meshes_ = {tetrahedron(1.0), sphere(), torus(16, 8, 2.0, 0.5)};
    return *meshes_;
  }

  FilterBank bank(const SpectralBasis& basis, int J, int j_min = -8) const {
    FilterBankOptions fb;
    fb.j_max = 0;
    fb.sabotage_telescope = options_.sabotage_telescope;
    return build_filterbank(SpectralWindow::exponential(), J, j_min, basis.eigenvalues, fb);
  }

  ScatteringConfig config(int J, int L) const {
    ScatteringConfig c;
    c.J = J;
    c.L = L;
    c.threads = options_.threads;
    return c;
  }

  Vector gaussian(std::mt19937_64& gen, Index n) const {
    std::normal_distribution<Scalar> g;
    Vector v(n);
    for (auto& x : v) x = g(gen);
    return v;
  }

 private:
  VerifyOptions options_;
  std::optional<TriangleMesh> sphere_;
  std::optional<SpectralBasis> sphere_basis_;
  std::optional<StiffnessMatrix> sphere_stiffness_;
  std::optional<std::vector<VertexPermutation>> symmetries_;
  std::optional<std::vector<TriangleMesh>> meshes_;
};

using CheckFn = Outcome (*)(Fixtures&);

// ---------------------------------------------------------------------------
// spectral

Outcome mass_total_area(Fixtures& fx) {
  Scalar worst = 0;
  bool positive = true;
  for (const TriangleMesh& mesh : fx.all_meshes()) {
    const MassMatrix m = lumped_mass(mesh);
    positive = positive && m.diag.minCoeff() > 0;
    const Scalar area = surface_area(mesh);
    worst = std::max(worst, std::abs(m.total() - area) / area);
  }
  Outcome o = bounded("max relative area error", worst, 1e-9);
  o.passed = o.passed && positive;
  if (!positive) o.detail += "; non-positive mass entry";
  return o;
}

Outcome stiffness_symmetric(Fixtures& fx) {
  Scalar worst = 0;
  for (const TriangleMesh& mesh : fx.all_meshes()) {
    const StiffnessMatrix s = cotangent_stiffness(mesh);
    const SparseMatrix st = s.transpose();
    worst = std::max(worst, Matrix(s - st).cwiseAbs().maxCoeff());
  }
  return bounded("max |S - S^T|", worst, 1e-12);
}

Outcome stiffness_row_sums(Fixtures& fx) {
  Scalar worst = 0;
  for (const TriangleMesh& mesh : fx.all_meshes()) {
    const StiffnessMatrix s = cotangent_stiffness(mesh);
    worst = std::max(worst, (s * Vector::Ones(s.cols())).cwiseAbs().maxCoeff());
  }
  return bounded("max |row sum|", worst, 1e-9);
}

Outcome stiffness_psd(Fixtures& fx) {
  auto gen = fx.rng(1);
  Scalar worst = 0;
  for (const TriangleMesh& mesh : fx.all_meshes()) {
    const StiffnessMatrix s = cotangent_stiffness(mesh);
    for (int t = 0; t < 100; ++t) {
      const Vector v = fx.gaussian(gen, s.cols());
      worst = std::min(worst, v.dot(s * v) / v.squaredNorm());
    }
  }
  return {worst >= -1e-9, "min Rayleigh quotient " + fmt(worst)};
}

Outcome lambda0_zero(Fixtures& fx) {
  const Vector& lambda = fx.sphere_basis().eigenvalues;
  const bool ascending = std::is_sorted(lambda.begin(), lambda.end());
  const bool zero = lambda[0] >= -1e-9 && lambda[0] <= 1e-9 * lambda[1];
  return {ascending && zero, "lambda_0 = " + fmt(lambda[0]) + ", lambda_1 = " + fmt(lambda[1]) +
                                 (ascending ? ", ascending" : ", NOT ascending")};
}

Outcome m_orthonormal(Fixtures& fx) {
  const SpectralBasis& b = fx.sphere_basis();
  const Matrix gram = b.eigenvectors.transpose() * b.mass.diag.asDiagonal() * b.eigenvectors;
  return bounded("max |Phi^T M Phi - I|", (gram - Matrix::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(),
                 1e-8);
}

Outcome phi0_constant(Fixtures& fx) {
  const auto phi0 = fx.sphere_basis().eigenvectors.col(0);
  const Scalar mean = phi0.mean();
  return bounded("relative variation of phi_0", (phi0.array() - mean).abs().maxCoeff() / std::abs(mean), 1e-6);
}

Outcome eigen_residual(Fixtures& fx) {
  return bounded("max relative residual", eigen_residuals(fx.sphere_stiffness(), fx.sphere_basis()).maxCoeff(),
                 1e-6);
}

Outcome parseval(Fixtures& fx) {
  auto gen = fx.rng(2);
  const SpectralBasis& full = fx.sphere_basis();
  const SpectralBasis part = full.truncated(150);
  Scalar equality = 0;
  bool inequality = true;
  for (int t = 0; t < 10; ++t) {
    const Vector f = fx.gaussian(gen, full.num_vertices());
    const Scalar energy = lp_norm(full.mass, f, 2) * lp_norm(full.mass, f, 2);
    equality = std::max(equality, std::abs(fourier(full, f).squaredNorm() - energy) / energy);
    inequality = inequality && fourier(part, f).squaredNorm() <= energy * (1 + 1e-12);
  }
  Outcome o = bounded("relative Parseval defect at K = n_v", equality, 1e-8);
  o.passed = o.passed && inequality;
  o.detail += inequality ? "; Bessel inequality at K = 150 holds" : "; Bessel inequality at K = 150 FAILS";
  return o;
}

// Largest relative error of the l <= 2 eigenvalues against l(l+1).
Scalar low_mode_error(const Vector& lambda) {
  Scalar worst = std::abs(lambda[0]);
  for (Index k = 1; k < 9; ++k) {
    const Scalar exact = k < 4 ? 2.0 : 6.0;
    worst = std::max(worst, std::abs(lambda[k] - exact) / exact);
  }
  return worst;
}

Outcome refinement_monotone(Fixtures& fx) {
  EigenOptions lanczos;
  lanczos.solver = EigenSolverKind::kLanczos;
  std::vector<Scalar> errors;
  for (int s = 2; s <= 4; ++s) {
    const TriangleMesh mesh = s == 3 ? fx.sphere() : icosphere(s, 1.0);
    errors.push_back(low_mode_error(eigenbasis(mesh, 9, s == 4 ? lanczos : EigenOptions{}).eigenvalues));
  }
  const bool ok = errors[1] < errors[0] && errors[2] < errors[1];
  return {ok, "l <= 2 relative errors at s = 2, 3, 4: " + fmt(errors[0]) + ", " + fmt(errors[1]) + ", " +
                  fmt(errors[2])};
}

Outcome multiplicity_clusters(Fixtures& fx) {
  const auto clusters = eigenvalue_clusters(fx.sphere_basis().eigenvalues.head(25), 0.05);
  std::string sizes;
  bool ok = clusters.size() >= 4;
  for (size_t c = 0; c < std::min<size_t>(4, clusters.size()); ++c) {
    sizes += (c ? "/" : "") + std::to_string(clusters[c].size());
    ok = ok && clusters[c].size() == 2 * c + 1;
  }
  return {ok, "first cluster sizes " + sizes};
}

Outcome sphere_spectrum(Fixtures& fx) {
  return bounded("max relative error for l <= 2", low_mode_error(fx.sphere_basis().eigenvalues), 0.02);
}

// ---------------------------------------------------------------------------
// filterbank

Outcome window_properties(Fixtures&) {
  const SpectralWindow g = SpectralWindow::exponential();
  bool ok = g(0.0) == 1.0;
  Scalar previous = 1.0;
  Scalar worst = 0;
  for (int i = 0; i <= 4000; ++i) {
    const Scalar x = 0.01 * i;
    const Scalar v = g(x);
    ok = ok && v >= 0 && v <= previous;
    worst = std::max(worst, std::abs(v - std::exp(-x)));
    previous = v;
  }
  ok = ok && worst == 0;
  return {ok, "G(0) = " + fmt(g(0.0)) + ", max |G - exp(-x)| = " + fmt(worst)};
}

Outcome lowpass_dc(Fixtures& fx) {
  const FilterBank bank = fx.bank(fx.sphere_basis(), 0);
  return bounded("|phi_J(0) - 1|", std::abs(bank.lowpass[0] - 1.0), 1e-15);
}

Outcome wavelet_dc(Fixtures& fx) {
  const FilterBank bank = fx.bank(fx.sphere_basis(), 0);
  return bounded("max |psi_j(0)|", bank.wavelets.row(0).cwiseAbs().maxCoeff(), 1e-15);
}

Outcome telescope(Fixtures& fx) {
  const FilterBank bank = fx.bank(fx.sphere_basis(), 0);
  const Vector& lambda = bank.eigenvalues;
  Scalar worst = 0;
  bool non_negative = true;
  for (int j : bank.scales()) {
    const Vector expected = ((-std::ldexp(2.0, j - 1) * lambda).array().exp() -
                             (-std::ldexp(2.0, j) * lambda).array().exp())
                                .cwiseMax(0.0);
    const Vector psi = bank.wavelet(j);
    non_negative = non_negative && psi.minCoeff() >= 0;
    worst = std::max(worst, (psi.cwiseAbs2() - expected).cwiseAbs().maxCoeff());
  }
  Outcome o = bounded("max |psi_j^2 - (phi_{j-1}^2 - phi_j^2)|", worst, 1e-12);
  o.passed = o.passed && non_negative;
  return o;
}

Outcome littlewood_paley(Fixtures& fx) {
  const FilterBank bank = fx.bank(fx.sphere_basis(), 0);
  Vector sum = bank.lowpass.cwiseAbs2();
  for (Index c = 0; c < bank.num_wavelets(); ++c) sum += bank.wavelets.col(c).cwiseAbs2();
  const Vector target = (-std::ldexp(2.0, bank.j_min - 1) * bank.eigenvalues).array().exp().matrix();
  return bounded("max |phi^2 + sum psi^2 - G(2^(j_min-1) lambda)^2|", (sum - target).cwiseAbs().maxCoeff(), 1e-12);
}

Outcome frame_isometry(Fixtures& fx) {
  auto gen = fx.rng(3);
  const SpectralBasis basis = fx.sphere_basis().truncated(150);
  const FilterBank bank = fx.bank(basis, 0);
  const Vector weight = (-std::ldexp(2.0, bank.j_min - 1) * basis.eigenvalues).array().exp().matrix();
  Scalar worst = 0;
  for (int t = 0; t < 20; ++t) {
    const Vector f = synthesize(basis, fx.gaussian(gen, basis.size()));
    const Vector fhat = fourier(basis, f);
    const Scalar expected = weight.dot(fhat.cwiseAbs2());
    worst = std::max(worst, std::abs(frame_energy(basis, bank, f) - expected) / fhat.squaredNorm());
  }
  return bounded("max relative frame-energy defect", worst, 1e-9);
}

Outcome analysis_nonexpansive(Fixtures& fx) {
  auto gen = fx.rng(4);
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  Scalar worst = -1;
  for (int t = 0; t < 20; ++t) {
    const Vector d = fx.gaussian(gen, basis.num_vertices()) - fx.gaussian(gen, basis.num_vertices());
    const Scalar norm = lp_norm(basis.mass, d, 2);
    worst = std::max(worst, frame_energy(basis, bank, d) - norm * norm);
  }
  return bounded("max (sum_h |T_h d|^2 - |d|^2)", worst, kSlack);
}

Outcome wavelet_range(Fixtures& fx) {
  const FilterBank bank = fx.bank(fx.sphere_basis(), 0);
  const Scalar lo = std::min(bank.lowpass.minCoeff(), bank.wavelets.minCoeff());
  const Scalar hi = std::max(bank.lowpass.maxCoeff(), bank.wavelets.maxCoeff());
  return {lo >= 0 && hi <= 1, "filter values in [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

Outcome convolve_linear(Fixtures& fx) {
  auto gen = fx.rng(5);
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  const Vector f = fx.gaussian(gen, basis.num_vertices());
  const Vector g = fx.gaussian(gen, basis.num_vertices());
  const Scalar alpha = 0.37;
  Scalar worst = 0;
  for (Index c = 0; c < bank.num_wavelets(); ++c) {
    const Vector h = bank.wavelets.col(c);
    const Matrix lhs = convolve(basis, h, Vector(f + alpha * g));
    const Matrix rhs = convolve(basis, h, f) + alpha * convolve(basis, h, g);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return bounded("max linearity defect", worst, 1e-10);
}

Outcome filter_equivariance(Fixtures& fx) {
  const SpectralBasis basis = fx.sphere_basis().truncated(150);
  const FilterBank bank = fx.bank(basis, 0);
  const auto& symmetries = fx.symmetries();
  Scalar worst = 0;
  for (size_t s = 1; s < std::min<size_t>(symmetries.size(), 11); ++s) {
    worst = std::max(worst, equivariance_defect(basis, bank.lowpass, symmetries[s], 3, fx.options().seed));
  }
  return bounded("max equivariance defect over 10 rotations", worst, 1e-6);
}

Outcome heat_kernel_mass(Fixtures& fx) {
  const SpectralBasis& basis = fx.sphere_basis();
  const Vector column = heat_kernel_column(basis, 0, 0);
  return bounded("|integral of heat kernel column - 1|", std::abs(integrate(basis.mass, column) - 1.0), 1e-6);
}

// ---------------------------------------------------------------------------
// scattering

Outcome scattering_nonexpansive(Fixtures& fx) {
  auto gen = fx.rng(6);
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  Scalar worst = -1;
  for (int L = 1; L <= 3; ++L) {
    const ScatteringConfig config = fx.config(0, L);
    for (int t = 0; t < 4; ++t) {
      const Vector f1 = fx.gaussian(gen, basis.num_vertices());
      const Vector f2 = t % 2 ? Vector(f1 + 0.05 * fx.gaussian(gen, basis.num_vertices()))
                              : fx.gaussian(gen, basis.num_vertices());
      const Scalar d = lp_norm(basis.mass, Vector(f1 - f2), 2);
      worst = std::max(worst, scattering_distance(scatter_windowed(basis, bank, f1, config),
                                                  scatter_windowed(basis, bank, f2, config)) - d);
      worst = std::max(worst, scattering_distance(scatter_nonwindowed(basis, bank, f1, config),
                                                  scatter_nonwindowed(basis, bank, f2, config)) - d);
    }
  }
  return bounded("max (scattering distance - |f1 - f2|)", worst, kSlack);
}

Outcome layer_energy(Fixtures& fx) {
  auto gen = fx.rng(7);
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  Scalar worst = -1;
  for (int L = 0; L <= 3; ++L) {
    for (int t = 0; t < 3; ++t) {
      const Vector f = fx.gaussian(gen, basis.num_vertices());
      const Scalar norm = lp_norm(basis.mass, f, 2);
      worst = std::max(worst, path_energy(basis, bank, f, fx.config(0, L)) - (L + 1) * norm * norm);
    }
  }
  return bounded("max (sum_p |U[p] f|^2 - (L+1)|f|^2)", worst, kSlack);
}

Outcome ell2_bound(Fixtures& fx) {
  auto gen = fx.rng(8);
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  Scalar worst = -1;
  for (int L = 0; L <= 3; ++L) {
    for (int t = 0; t < 3; ++t) {
      const Vector f = fx.gaussian(gen, basis.num_vertices()).cwiseAbs();
      worst = std::max(worst, scattering_norm(scatter_nonwindowed(basis, bank, f, fx.config(0, L))) -
                                  lp_norm(basis.mass, f, 2));
    }
  }
  return bounded("max (|S f|_2 - |f|_2) over non-negative f", worst, kSlack);
}

Outcome permutation_invariance(Fixtures& fx) {
  auto gen = fx.rng(9);
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  const ScatteringConfig config = fx.config(0, 2);
  const Vector f = fx.gaussian(gen, basis.num_vertices());
  const NonWindowedCoefficients reference = scatter_nonwindowed(basis, bank, f, config);
  Scalar worst = 0;
  for (const VertexPermutation& zeta : fx.symmetries()) {
    const NonWindowedCoefficients moved = scatter_nonwindowed(basis, bank, zeta.apply(f), config);
    for (const auto& [path, value] : reference.values) {
      worst = std::max(worst, std::abs(value - moved.values.at(path)));
    }
  }
  return bounded("max coefficient change over " + std::to_string(fx.symmetries().size()) + " rotations",
                 worst, 1e-8 * lp_norm(basis.mass, f, 2));
}

Outcome zeroth_path(Fixtures& fx) {
  auto gen = fx.rng(10);
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  const Vector f = fx.gaussian(gen, basis.num_vertices());
  const WindowedCoefficients s = scatter_windowed(basis, bank, f, fx.config(0, 1));
  const Vector direct = convolve(basis, bank.lowpass, f);
  return bounded("max |S[0] f - phi_J * f|", (s.values.at(Path{}) - direct).cwiseAbs().maxCoeff(), 1e-13);
}

Outcome determinism(Fixtures& fx) {
  auto gen = fx.rng(11);
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  Matrix signals(basis.num_vertices(), 6);
  for (Index c = 0; c < signals.cols(); ++c) signals.col(c) = fx.gaussian(gen, basis.num_vertices());
  ScatteringConfig one = fx.config(0, 2);
  one.threads = 1;
  ScatteringConfig three = one;
  three.threads = 3;
  const BatchCoefficients a = scatter_windowed_batch(basis, bank, signals, one);
  const BatchCoefficients b = scatter_windowed_batch(basis, bank, signals, one);
  const BatchCoefficients c = scatter_windowed_batch(basis, bank, signals, three);
  bool identical = a.paths == b.paths && a.paths == c.paths;
  Scalar across = 0;
  for (size_t p = 0; identical && p < a.paths.size(); ++p) {
    identical = identical && (a.values[p].array() == b.values[p].array()).all();
    across = std::max(across, (a.values[p] - c.values[p]).cwiseAbs().maxCoeff());
  }
  return {identical && across <= 1e-12,
          std::string(identical ? "repeat runs bit-identical" : "repeat runs DIFFER") +
              ", max difference across thread counts " + fmt(across)};
}

Outcome cross_mesh_invariance(Fixtures& fx) {
  auto gen = fx.rng(12);
  const TriangleMesh& mesh = fx.sphere();
  Eigen::Quaternion<Scalar> q(fx.gaussian(gen, 4).normalized().data());
  const Vector3 shift = fx.gaussian(gen, 3);
  const TriangleMesh other = rigid_transform(mesh, q.toRotationMatrix(), shift);
  const SpectralBasis& a = fx.sphere_basis();
  const SpectralBasis b = eigenbasis(other, other.num_vertices());
  const ScatteringConfig config = fx.config(0, 2);
  const FilterBank bank_a = fx.bank(a, 0);
  const FilterBank bank_b = fx.bank(b, 0);
  Scalar worst = 0;
  for (int axis = 0; axis < 3; ++axis) {
    // Vertex i of `other` is the image of vertex i of `mesh`, so the
    // transported coordinate function has the same vertex values.
    const Vector f = mesh.vertices.col(axis);
    const NonWindowedCoefficients sa = scatter_nonwindowed(a, bank_a, f, config);
    const NonWindowedCoefficients sb = scatter_nonwindowed(b, bank_b, f, config);
    for (const auto& [path, value] : sa.values) {
      worst = std::max(worst, std::abs(value - sb.values.at(path)) / std::max(std::abs(value), 1e-300));
    }
  }
  return bounded("max relative coefficient change", worst, 1e-8);
}

Outcome isometry_decay(Fixtures& fx) {
  auto gen = fx.rng(13);
  const SpectralBasis& basis = fx.sphere_basis();
  const auto& symmetries = fx.symmetries();
  const Vector f = fx.gaussian(gen, basis.num_vertices());
  const std::vector<int> Js = {0, 1, 2, 3};
  bool ok = true;
  std::string curve;
  ScatteringConfig config = fx.config(0, 2);
  for (size_t s = 1; s < std::min<size_t>(symmetries.size(), 4); ++s) {
    const auto points = isometry_invariance_curve(basis, f, symmetries[s], Js, config);
    for (size_t i = 1; i < points.size(); ++i) ok = ok && points[i].second <= points[i - 1].second + kSlack;
    if (s == 1) {
      for (const auto& [J, d] : points) curve += (curve.empty() ? "" : ", ") + fmt(d);
    }
  }
  return {ok, "distance at J = 0..3: " + curve};
}

Outcome commutator_symmetry(Fixtures& fx) {
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  CommutatorOptions options;
  options.seed = fx.options().seed;
  Scalar worst = 0;
  const auto& symmetries = fx.symmetries();
  for (size_t s = 1; s < std::min<size_t>(symmetries.size(), 4); ++s) {
    for (int j : {-2, -1, 0}) {
      worst = std::max(worst, commutator_norm_estimate(basis, bank, j, symmetries[s].matrix(), options));
    }
  }
  return bounded("max commutator for exact symmetries", worst, 1e-6);
}

std::vector<Scalar> twist_commutators(Fixtures& fx, Scalar epsilon) {
  const SpectralBasis& basis = fx.sphere_basis();
  const FilterBank bank = fx.bank(basis, 0);
  const SparseMatrix transport = pullback_operator(fx.sphere(), twist_warp(fx.sphere(), epsilon));
  CommutatorOptions options;
  options.seed = fx.options().seed;
  std::vector<Scalar> out;
  for (int j : {-2, -1, 0}) out.push_back(commutator_norm_estimate(basis, bank, j, transport, options));
  return out;
}

Outcome commutator_monotone(Fixtures& fx) {
  const std::vector<Scalar> c = twist_commutators(fx, 0.05);
  return {c[1] < c[0] && c[2] < c[1],
          "twist 0.05 commutator at j = -2, -1, 0: " + fmt(c[0]) + ", " + fmt(c[1]) + ", " + fmt(c[2])};
}

Outcome commutator_linearity(Fixtures& fx) {
  const std::vector<Scalar> a = twist_commutators(fx, 0.05);
  const std::vector<Scalar> b = twist_commutators(fx, 0.1);
  bool ok = true;
  std::string ratios;
  for (size_t i = 0; i < a.size(); ++i) {
    const Scalar r = b[i] / a[i];
    ok = ok && r >= 1.5 && r <= 2.5;
    ratios += (i ? ", " : "") + fmt(r);
  }
  return {ok, "commutator ratio for twist 0.1 vs 0.05 at j = -2, -1, 0: " + ratios};
}

Outcome diffeo_stability(Fixtures& fx) {
  auto gen = fx.rng(14);
  const TriangleMesh& mesh = fx.sphere();
  const SpectralBasis& basis = fx.sphere_basis();
  const Vector f = synthesize(basis.truncated(16), fx.gaussian(gen, 16));
  const std::vector<Scalar> amplitudes = {0.01, 0.02, 0.04};
  const auto curve = diffeo_stability_probe(
      mesh, basis, f, [&](Scalar eps) { return twist_warp(mesh, eps); }, amplitudes, fx.config(0, 2));
  bool ok = true;
  std::string ratios;
  for (size_t i = 1; i < curve.size(); ++i) {
    const Scalar r = curve[i].second / curve[i - 1].second;
    ok = ok && r >= 1.5 && r <= 2.5;
    ratios += (i > 1 ? ", " : "") + fmt(r);
  }
  return {ok, "distance ratios for twist 0.01 -> 0.02 -> 0.04: " + ratios};
}

struct Entry {
  CheckInfo info;
  CheckFn fn;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"spectral", "mass-total-area"}, mass_total_area},
      {{"spectral", "stiffness-symmetric"}, stiffness_symmetric},
      {{"spectral", "stiffness-row-sums"}, stiffness_row_sums},
      {{"spectral", "stiffness-psd"}, stiffness_psd},
      {{"spectral", "lambda0-zero"}, lambda0_zero},
      {{"spectral", "m-orthonormal"}, m_orthonormal},
      {{"spectral", "phi0-constant"}, phi0_constant},
      {{"spectral", "eigen-residual"}, eigen_residual},
      {{"spectral", "parseval"}, parseval},
      {{"spectral", "refinement-monotone"}, refinement_monotone},
      {{"spectral", "multiplicity-clusters"}, multiplicity_clusters},
      {{"spectral", "sphere-spectrum"}, sphere_spectrum},
      {{"filterbank", "window-properties"}, window_properties},
      {{"filterbank", "lowpass-dc"}, lowpass_dc},
      {{"filterbank", "wavelet-dc"}, wavelet_dc},
      {{"filterbank", "telescope"}, telescope},
      {{"filterbank", "littlewood-paley"}, littlewood_paley},
      {{"filterbank", "frame-isometry"}, frame_isometry},
      {{"filterbank", "analysis-nonexpansive"}, analysis_nonexpansive},
      {{"filterbank", "wavelet-range"}, wavelet_range},
      {{"filterbank", "convolve-linear"}, convolve_linear},
      {{"filterbank", "equivariance"}, filter_equivariance},
      {{"filterbank", "heat-kernel-mass"}, heat_kernel_mass},
      {{"scattering", "nonexpansive"}, scattering_nonexpansive},
      {{"scattering", "layer-energy"}, layer_energy},
      {{"scattering", "ell2-bound"}, ell2_bound},
      {{"scattering", "permutation-invariance"}, permutation_invariance},
      {{"scattering", "zeroth-path"}, zeroth_path},
      {{"scattering", "determinism"}, determinism},
      {{"scattering", "cross-mesh-invariance"}, cross_mesh_invariance},
      {{"scattering", "isometry-decay"}, isometry_decay},
      {{"scattering", "commutator-symmetry"}, commutator_symmetry},
      {{"scattering", "commutator-monotone"}, commutator_monotone},
      {{"scattering", "commutator-linearity"}, commutator_linearity},
      {{"scattering", "diffeo-stability"}, diffeo_stability},
  };
  return entries;
}

CheckResult run_entry(const Entry& entry, Fixtures& fx) {
  CheckResult result;
  result.module = entry.info.module;
  result.name = entry.info.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Outcome outcome = entry.fn(fx);
    result.passed = outcome.passed;
    result.detail = outcome.detail;
  } catch (const std::exception& e) {
    result.passed = false;
    result.detail = std::string("error: ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

const std::vector<CheckInfo>& verify_manifest() {
  static const std::vector<CheckInfo> manifest = [] {
    std::vector<CheckInfo> out;
    for (const Entry& e : registry()) out.push_back(e.info);
    return out;
  }();
  return manifest;
}

CheckResult run_check(const std::string& name, const VerifyOptions& options) {
  for (const Entry& e : registry()) {
    if (e.info.name == name) {
      Fixtures fx(options);
      return run_entry(e, fx);
    }
  }
  throw ConfigError("unknown check '" + name + "'");
}

std::vector<CheckResult> run_verify(const VerifyOptions& options,
                                    const std::function<void(const CheckResult&)>& on_result) {
  Fixtures fx(options);
  std::vector<CheckResult> results;
  for (const Entry& e : registry()) {
    results.push_back(run_entry(e, fx));
    if (on_result) on_result(results.back());
  }
  return results;
}

}  // namespace geoscatter
