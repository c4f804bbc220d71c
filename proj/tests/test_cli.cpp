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

// Drives the geoscatter binary end to end and checks exit codes and outputs.

#include <geoscatter/mesh.hpp>
#include <geoscatter/spectral.hpp>

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "test_util.hpp"

namespace geoscatter {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::scratch_dir(std::string("cli-") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  Outcome run(const std::string& args) const {
    const std::string command = std::string(GEOSCATTER_CLI) + " " + args + " > " + path("stdout").string() +
                                " 2> " + path("stderr").string();
    const int status = std::system(command.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(path("stdout")), slurp(path("stderr"))};
  }

  std::vector<std::string> lines(const fs::path& file) const {
    std::ifstream in(file);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
  }

  fs::path dir_;
};

TEST_F(Cli, MeshGenIcosphereAndTorus) {
  Outcome r = run("mesh gen --icosphere 3 --radius 1 -o " + path("sphere.off").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_off(path("sphere.off")).num_vertices(), 642);
  r = run("mesh gen --torus 16 8 2 0.5 -o " + path("torus.off").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_off(path("torus.off")).num_vertices(), 128);
  r = run("mesh gen --tetrahedron 1 -o " + path("tet.off").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(run("mesh gen --icosphere 2 --tetrahedron 1 -o " + path("x.off").string()).code, 4);
  EXPECT_EQ(run("mesh gen --icosphere 9 -o " + path("x.off").string()).code, 4);
}

TEST_F(Cli, MeshValidateOpenSurface) {
  std::ofstream(path("broken.off")) << "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 1 3 2\n";
  const Outcome r = run("mesh validate " + path("broken.off").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE((r.out + r.err).find("boundary edge"), std::string::npos);
  write_off(icosphere(1), path("good.off"));
  EXPECT_EQ(run("mesh validate " + path("good.off").string()).code, 0);
  EXPECT_EQ(run("mesh validate " + path("missing.off").string()).code, 3);
}

TEST_F(Cli, BasisComputeClampsAndIsDeterministic) {
  write_off(icosphere(2), path("s.off"));
  Outcome r = run("basis compute --mesh " + path("s.off").string() + " --k 500 -o " + path("a.gsb").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(read_basis(path("a.gsb")).size(), 162);

  write_off(icosphere(3), path("t.off"));
  r = run("basis compute --mesh " + path("t.off").string() + " --k 150 -o " + path("b.gsb").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const SpectralBasis basis = read_basis(path("b.gsb"));
  for (int k = 1; k <= 3; ++k) EXPECT_NEAR(basis.eigenvalues[k], 2.0, 0.04);
  run("basis compute --mesh " + path("t.off").string() + " --k 150 -o " + path("c.gsb").string());
  EXPECT_EQ(slurp(path("b.gsb")), slurp(path("c.gsb")));
  EXPECT_EQ(run("basis compute --mesh " + path("t.off").string() + " --solver magic -o " + path("d.gsb").string()).code, 4);
}

TEST_F(Cli, ScatterZCoordinateHas31Paths) {
  write_off(icosphere(3), path("s.off"));
  ASSERT_EQ(run("basis compute --mesh " + path("s.off").string() + " --k 150 -o " + path("s.gsb").string()).code, 0);
  ASSERT_EQ(run("scatter --mesh " + path("s.off").string() + " --k 150 --coordinate z --J 0 --jmin -4 --L 2 -o " +
                path("z.csv").string())
                .code,
            0);
  const auto rows = lines(path("z.csv"));
  ASSERT_EQ(rows.size(), 32u);  // header + 31 paths
  EXPECT_EQ(rows[1].rfind("-,", 0), 0u);
  const Json echo = Json::parse(slurp(path("z.json")));
  EXPECT_EQ(echo.at("paths"), 31);
  EXPECT_EQ(echo.at("J"), 0);
  EXPECT_EQ(echo.at("j_min"), -4);

  // The same signal from a CSV with a header, via the cached basis.
  const TriangleMesh mesh = icosphere(3);
  std::ofstream csv(path("sig.csv"));
  csv << "x,z\n";
  csv.precision(17);
  for (Index i = 0; i < mesh.num_vertices(); ++i) csv << mesh.vertices(i, 0) << ',' << mesh.vertices(i, 2) << '\n';
  csv.close();
  ASSERT_EQ(run("scatter --basis " + path("s.gsb").string() + " --signals " + path("sig.csv").string() +
                " --column 1 --J 0 --jmin -4 --L 2 -o " + path("z2.csv").string())
                .code,
            0);
  EXPECT_EQ(slurp(path("z.csv")), slurp(path("z2.csv")));
}

TEST_F(Cli, ScatterConstantSignalAndDepthZero) {
  write_off(icosphere(2), path("s.off"));
  std::ofstream csv(path("one.csv"));
  for (int i = 0; i < 162; ++i) csv << "1\n";
  csv.close();
  ASSERT_EQ(run("scatter --mesh " + path("s.off").string() + " --signals " + path("one.csv").string() +
                " --L 2 --nonwindowed -o " + path("c.csv").string())
                .code,
            0);
  const auto rows = lines(path("c.csv"));
  EXPECT_EQ(rows[0], "path,value");
  for (size_t i = 2; i < rows.size(); ++i) {
    EXPECT_LE(std::abs(std::stod(rows[i].substr(rows[i].find(',') + 1))), 1e-10) << rows[i];
  }
  ASSERT_EQ(run("scatter --mesh " + path("s.off").string() + " --signals " + path("one.csv").string() +
                " --L 0 --nonwindowed -o " + path("d.csv").string())
                .code,
            0);
  EXPECT_EQ(lines(path("d.csv")).size(), 2u);
}

TEST_F(Cli, ScatterErrors) {
  write_off(icosphere(1), path("s.off"));
  const std::string base = "scatter --mesh " + path("s.off").string() + " --coordinate x ";
  const Outcome cap = run(base + "--L 4 --path-cap 100 -o " + path("o.csv").string());
  EXPECT_EQ(cap.code, 5);
  EXPECT_NE(cap.err.find("path"), std::string::npos);
  EXPECT_EQ(run(base + "--coordinate w -o " + path("o.csv").string()).code, 4);
  EXPECT_EQ(run("scatter --basis " + path("none.gsb").string() + " --signals x.csv -o " + path("o.csv").string()).code, 3);
  std::ofstream(path("short.csv")) << "1\n2\n";
  EXPECT_EQ(run("scatter --mesh " + path("s.off").string() + " --signals " + path("short.csv").string() + " -o " +
                path("o.csv").string())
                .code,
            2);
  EXPECT_EQ(run("scatter --bogus").code, 4);
}

TEST_F(Cli, FiltersDump) {
  write_off(icosphere(2), path("s.off"));
  ASSERT_EQ(run("basis compute --mesh " + path("s.off").string() + " --k 40 -o " + path("s.gsb").string()).code, 0);
  const Outcome r = run("filters dump --basis " + path("s.gsb").string() + " --J 0 --jmin -3 -o " + path("f").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("f") / "lowpass.csv"));
  for (int j = -3; j <= 0; ++j) EXPECT_TRUE(fs::exists(path("f") / ("wavelet_" + std::to_string(j) + ".csv"))) << j;
  EXPECT_EQ(lines(path("f") / "lowpass.csv").size(), 41u);
}

TEST_F(Cli, VerifyListAndSabotage) {
  Outcome r = run("verify --list");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("filterbank/littlewood-paley"), std::string::npos);
  r = run("verify --sabotage telescope");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("FAIL filterbank/littlewood-paley"), std::string::npos);
  EXPECT_EQ(run("verify --sabotage other").code, 4);
}

TEST_F(Cli, DemoConfigErrorsAndMissingData) {
  EXPECT_EQ(run("demo mnist --per-class 0").code, 4);
  EXPECT_EQ(run("demo mnist --images /nonexistent/a --labels /nonexistent/b").code, 3);
  EXPECT_EQ(run("demo shapes --classes cube").code, 4);
}

TEST_F(Cli, DemoShapesSmallRunWithConfigFile) {
  std::ofstream(path("cfg.json")) << R"({"classes": "sphere,torus", "per-class": 5, "L": 1, "K": 60})";
  const Outcome r = run("demo shapes --config " + path("cfg.json").string() + " --seed 3 -o " + path("r.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Json::parse(slurp(path("r.json")));
  EXPECT_EQ(report.at("classes"), Json({"sphere", "torus"}));
  EXPECT_EQ(report.at("K"), 60);
  EXPECT_EQ(report.at("dataset").at("seed"), 3);
  EXPECT_TRUE(report.contains("mean_accuracy"));

  std::ofstream(path("bad.json")) << R"({"colour": 1})";
  EXPECT_EQ(run("demo shapes --config " + path("bad.json").string()).code, 4);
}

}  // namespace
}  // namespace geoscatter
