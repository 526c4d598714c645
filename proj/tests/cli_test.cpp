/*
 * Copyright 2026 The RubberEdge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rubberedge/io.hpp"

#ifndef RUBBEREDGE_CLI
#error "RUBBEREDGE_CLI must name the command-line binary"
#endif

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  Result r;
  const std::string cmd = std::string(RUBBEREDGE_CLI) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rubberedge_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::unsetenv("RUBBEREDGE_CONFIG");
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

const char* kSmallManifest = R"({
  "seed": 42, "profile": "experiment",
  "techniques": ["position", "rubberedge"], "transfers": ["cg"],
  "distances_mm": [172, 344, 688], "widths_mm": [4], "repetitions": 9
})";

TEST_F(CliTest, ModelWritesVersionedCsv) {
  const auto csv = dir_ / "laptop.csv";
  const auto r = run("model --profile laptop --width 4 --to 700 --out " + csv.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("crossover: 488 mm"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("discontinuity"), std::string::npos);
  std::istringstream lines(slurp(csv));
  std::string l1, l2, l3;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  EXPECT_EQ(l1, "# rubberedge model-sweep v1");
  EXPECT_EQ(l2.rfind("# params: {", 0), 0u);
  EXPECT_EQ(l3, "D,W,technique,T,T1,T2,N,D2");
  EXPECT_NE(slurp(csv).find("\n688,4,hybrid,"), std::string::npos);
}

TEST_F(CliTest, ModelPdaCrossoverInRange) {
  const auto r = run("model -p pda -o " + (dir_ / "pda.csv").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto pos = r.out.find("crossover: ");
  ASSERT_NE(pos, std::string::npos);
  const double x = std::stod(r.out.substr(pos + 11));
  EXPECT_GE(x, 40.0);
  EXPECT_LE(x, 110.0);
}

TEST_F(CliTest, ModelProfileErrorsExitTwo) {
  EXPECT_EQ(run("model").code, 2);
  EXPECT_EQ(run("model --profile watch").code, 2);
  EXPECT_EQ(run("model --profile laptop --width -1").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(CliTest, ConfigEnvironmentAddsProfiles) {
  const auto cfg = write("config.json", R"({"profiles": {"tablet": {"d_mm": 25, "display_mm": [200, 150]}}})");
  const auto r = run("model --profile tablet -o " + (dir_ / "t.csv").string());
  EXPECT_EQ(r.code, 2);
  ::setenv("RUBBEREDGE_CONFIG", cfg.c_str(), 1);
  const auto ok = run("model --profile tablet -o " + (dir_ / "t.csv").string());
  EXPECT_EQ(ok.code, 0) << ok.out;
  ::setenv("RUBBEREDGE_CONFIG", (dir_ / "missing.json").c_str(), 1);
  EXPECT_EQ(run("model --profile laptop -o " + (dir_ / "t.csv").string()).code, 2);
  ::unsetenv("RUBBEREDGE_CONFIG");
}

TEST_F(CliTest, SimulateProducesAllLogsDeterministically) {
  const auto manifest = write("m.json", kSmallManifest);
  const auto a = run("simulate -m " + manifest.string() + " -o " + (dir_ / "a").string());
  const auto b = run("simulate -m " + manifest.string() + " -o " + (dir_ / "b").string() + " --jobs 3");
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0) << b.out;
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a" / "trials")) {
    if (e.path().extension() != ".csv") continue;
    ++csvs;
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / "trials" / e.path().filename()));
  }
  EXPECT_EQ(csvs, 54u);
  EXPECT_EQ(slurp(dir_ / "a" / "summary.csv"), slurp(dir_ / "b" / "summary.csv"));
  const auto run_json = nlohmann::json::parse(slurp(dir_ / "a" / "run.json"));
  EXPECT_EQ(run_json.at("seed"), 42);
  EXPECT_EQ(run_json.at("trials"), 54);
}

TEST_F(CliTest, SimulateSeedOverrideChangesTargets) {
  const auto manifest = write("m.json", kSmallManifest);
  ASSERT_EQ(run("simulate -m " + manifest.string() + " -o " + (dir_ / "a").string()).code, 0);
  ASSERT_EQ(run("simulate -m " + manifest.string() + " -s 7 -o " + (dir_ / "b").string()).code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "trials" / "trial_0000.csv"), slurp(dir_ / "b" / "trials" / "trial_0000.csv"));
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "b" / "run.json")).at("seed"), 7);
}

TEST_F(CliTest, SimulateBadManifestExitsTwo) {
  EXPECT_EQ(run("simulate -m " + (dir_ / "nope.json").string()).code, 2);
  EXPECT_EQ(run("simulate -m " + write("bad.json", "{\"techniques\": [\"joystick\"]}").string()).code, 2);
  EXPECT_EQ(run("simulate -m " + write("broken.json", "{").string()).code, 2);
}

TEST_F(CliTest, CalibrateWritesLoadableJson) {
  std::ostringstream trace, pushes;
  trace.precision(17);
  pushes.precision(17);
  trace << "x,y\n";
  for (int i = 0; i < 24; ++i) {
    const double a = 2 * M_PI * i / 24;
    trace << 1 + 19 * std::cos(a) << ',' << -2 + 19 * std::sin(a) << '\n';
  }
  for (int i = 0; i < 8; ++i) {
    const double a = M_PI / 4 * i;
    pushes << 45 * i << ',' << 1 + 21.5 * std::cos(a) << ',' << -2 + 21.5 * std::sin(a) << '\n';
  }
  const auto out = dir_ / "cal.json";
  const auto r = run("calibrate --trace " + write("trace.csv", trace.str()).string() + " --pushes " +
                     write("pushes.csv", pushes.str()).string() + " -o " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto profile = rubberedge::io::calibration_from_json(nlohmann::json::parse(slurp(out)));
  EXPECT_NEAR(profile.boundary().radius, 19.0, 1e-6);
  EXPECT_NEAR(profile.max_penetration(10.0), 2.5, 1e-6);
}

TEST_F(CliTest, CalibrateFailuresExitNonZero) {
  const auto pushes = write("p.csv", "0,22,0\n");
  EXPECT_EQ(run("calibrate --trace " + write("t.csv", "0,0\n1,1\n2,2\n").string() + " --pushes " + pushes.string())
                .code,
            1);
  EXPECT_EQ(run("calibrate --trace " + (dir_ / "none.csv").string() + " --pushes " + pushes.string()).code, 2);
  EXPECT_EQ(run("calibrate --trace " + write("t2.csv", "1,2,3\n").string() + " --pushes " + pushes.string()).code,
            2);
}

TEST_F(CliTest, ServeBadParamsExitTwo) {
  EXPECT_EQ(run("serve --port 0 --params " + write("p.json", R"({"zone": {"radius_mm": -3}})").string()).code, 2);
}

}  // namespace
