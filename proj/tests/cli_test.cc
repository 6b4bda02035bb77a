// Copyright 2026 The fep Authors
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

#include "fep/cli.h"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fep/data.h"
#include "fep/dct.h"
#include "fep/tensor_io.h"
#include "json.hpp"
#include "test_util.h"

namespace fep {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::ScratchDir(
        ::testing::UnitTest::GetInstance()->current_test_info()->name());
  }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  RunResult Run(std::vector<std::string> args) const {
    std::ostringstream out, err;
    const int code = RunCli(args, out, err);
    return {code, out.str(), err.str()};
  }

  // Small noiseless dataset plus the analytic template model.
  void MakeDeskFixture(std::size_t n = 4) {
    ASSERT_EQ(Run({"generate", "--n", std::to_string(n), "--seed", "3", "--out",
                   P("d.fepd")})
                  .code,
              0);
    ASSERT_EQ(
        Run({"train", "--data", P("d.fepd"), "--model", "template", "--out",
             P("m.fepm")})
            .code,
        0);
  }

  static std::vector<std::uint8_t> Bytes(const std::string& path) {
    return ReadFileBytes(path);
  }

  fs::path dir_;
};

TEST_F(CliTest, GenerateIsDeterministicAndReports) {
  const auto a = Run({"generate", "--n", "50", "--seed", "7", "--out", P("a.fepd")});
  const auto b = Run({"generate", "--n", "50", "--seed", "7", "--out", P("b.fepd")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_NE(a.out.find("50 clips"), std::string::npos) << a.out;
  EXPECT_NE(a.out.find("seed 7"), std::string::npos) << a.out;
  EXPECT_EQ(Bytes(P("a.fepd")), Bytes(P("b.fepd")));
  EXPECT_EQ(LoadDataset(P("a.fepd")).size(), 50u);
  const auto sidecar = nlohmann::json::parse(std::ifstream(P("a.fepd.json")));
  EXPECT_EQ(sidecar["spec"]["seed"], 7);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(Run({"generate", "--n", "0", "--out", P("z.fepd")}).code, 2);
  EXPECT_EQ(Run({"generate", "--out", P("z.fepd")}).code, 2);  // --n missing
  EXPECT_EQ(Run({"generate", "--n", "2", "--blob", "12", "--out", P("z.fepd")}).code, 2);
  EXPECT_EQ(Run({"frobnicate"}).code, 2);
  EXPECT_EQ(Run({}).code, 2);
  EXPECT_EQ(Run({"--help"}).code, 0);
}

TEST_F(CliTest, MissingInputsExitTwo) {
  const auto r = Run({"explain", "--data", P("none.fepd"), "--model", P("none.fepm"),
                      "--out-prefix", P("e")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("none.fepd"), std::string::npos) << r.err;
}

TEST_F(CliTest, ExplainRejectsOverlappingBands) {
  MakeDeskFixture();
  const auto r = Run({"explain", "--data", P("d.fepd"), "--model", P("m.fepm"),
                      "--method", "fep", "--rl", "0.6", "--rh", "0.6",
                      "--out-prefix", P("e")});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(P("e.mask.fept")));
}

TEST_F(CliTest, ExplainWritesArtifacts) {
  MakeDeskFixture();
  const auto r = Run({"explain", "--data", P("d.fepd"), "--model", P("m.fepm"),
                      "--method", "fep", "--rl", "0.5", "--rh", "0.2",
                      "--iterations", "30", "--clip", "2", "--out-prefix",
                      P("e"), "--heatmaps", P("hm")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Tensor masks = LoadTensor(P("e.mask.fept"));
  EXPECT_EQ(masks.shape(), (Shape{1, 8, 1, 16, 16}));
  std::ifstream trace(P("e.trace.csv"));
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "clip,iteration,confidence,objective");
  std::size_t rows = 0;
  while (std::getline(trace, line)) ++rows;
  EXPECT_EQ(rows, 30u);
  const auto cfg = nlohmann::json::parse(std::ifstream(P("e.config.json")));
  EXPECT_EQ(cfg["optimizer"]["gfm"]["r_l"], 0.5);
  EXPECT_EQ(cfg["optimizer"]["gfm"]["r_h"], 0.2);
  EXPECT_EQ(cfg["optimizer"]["iterations"], 30);
  EXPECT_EQ(cfg["optimizer"]["score"], "logit");
  EXPECT_EQ(cfg["clips"][0]["index"], 2);
  EXPECT_TRUE(fs::exists(dir_ / "hm" / "clip_2" / "overlay_000.pgm"));
  EXPECT_EQ(Run({"explain", "--data", P("d.fepd"), "--model", P("m.fepm"),
                 "--clip", "9", "--out-prefix", P("x")})
                .code,
            2);
}

TEST_F(CliTest, FullBandFepMatchesEp) {
  MakeDeskFixture();
  ASSERT_EQ(Run({"explain", "--data", P("d.fepd"), "--model", P("m.fepm"),
                 "--method", "ep", "--iterations", "60", "--out-prefix", P("ep")})
                .code,
            0);
  ASSERT_EQ(Run({"explain", "--data", P("d.fepd"), "--model", P("m.fepm"),
                 "--method", "fep", "--rl", "1", "--rh", "0", "--iterations",
                 "60", "--out-prefix", P("fep")})
                .code,
            0);
  EXPECT_LT(MaxAbsDiff(LoadTensor(P("ep.mask.fept")), LoadTensor(P("fep.mask.fept"))),
            1e-9);
}

TEST_F(CliTest, NumericalAbortExitsThree) {
  ASSERT_EQ(Run({"generate", "--n", "1", "--intensity", "1e300", "--out",
                 P("d.fepd")})
                .code,
            0);
  ASSERT_EQ(Run({"train", "--data", P("d.fepd"), "--model", "template",
                 "--temperature", "1e-300", "--out", P("m.fepm")})
                .code,
            0);
  const auto r = Run({"explain", "--data", P("d.fepd"), "--model", P("m.fepm"),
                      "--out-prefix", P("e")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("iteration 0"), std::string::npos) << r.err;
}

// Writes boxes or a constant as an N x T x 1 x H x W mask stack.
void WriteMaskStack(const std::vector<LabeledClip>& data, const std::string& path,
                    std::optional<double> constant) {
  std::vector<double> values;
  for (const auto& item : data) {
    for (double b : item.boxes.values()) values.push_back(constant ? *constant : b);
  }
  SaveTensor(Tensor({data.size(), 8, 1, 16, 16}, values), path);
}

TEST_F(CliTest, EvaluateSelfCoverAndIdentityMask) {
  MakeDeskFixture(6);
  const auto data = LoadDataset(P("d.fepd"));
  WriteMaskStack(data, P("boxes.fept"), std::nullopt);
  WriteMaskStack(data, P("ones.fept"), 1.0);
  const auto r = Run({"evaluate", "--data", P("d.fepd"), "--model", P("m.fepm"),
                      "--masks", P("boxes.fept"), "--out", P("boxes.json"),
                      "--deletion-steps", "4", "--curves", P("curves.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream curves(P("curves.csv"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(curves, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 1u + 6 * 5);
  EXPECT_EQ(lines[0], "clip,fraction,confidence");
  EXPECT_EQ(lines[1].rfind("0,0,", 0), 0u);
  EXPECT_EQ(lines[5].rfind("0,1,", 0), 0u);
  EXPECT_NE(r.out.find("STC"), std::string::npos);
  const auto boxes = nlohmann::json::parse(std::ifstream(P("boxes.json")));
  EXPECT_EQ(boxes["stc"], 100.0);
  EXPECT_EQ(boxes["n_clips"], 6);
  ASSERT_EQ(Run({"evaluate", "--data", P("d.fepd"), "--model", P("m.fepm"),
                 "--masks", P("ones.fept"), "--out", P("ones.json")})
                .code,
            0);
  const auto ones = nlohmann::json::parse(std::ifstream(P("ones.json")));
  EXPECT_EQ(ones["dc"], 0.0);
  EXPECT_EQ(ones["acc"], 100.0);
  ASSERT_EQ(Run({"evaluate", "--data", P("d.fepd"), "--model", P("m.fepm"),
                 "--masks", P("boxes.fept"), "--out", P("again.json"),
                 "--deletion-steps", "4"})
                .code,
            0);
  // Same inputs, same bytes (the config echo holds the same paths).
  const auto a = Bytes(P("boxes.json"));
  const auto b = Bytes(P("again.json"));
  EXPECT_EQ(nlohmann::json::parse(a).dump().size() > 0, true);
  auto strip_out = [](std::vector<std::uint8_t> v) {
    auto j = nlohmann::ordered_json::parse(v);
    j["config"].erase("out");
    return j.dump();
  };
  EXPECT_EQ(strip_out(a), strip_out(b));
}

TEST_F(CliTest, EvaluateCountMismatchExitsTwo) {
  MakeDeskFixture(6);
  auto data = LoadDataset(P("d.fepd"));
  data.pop_back();
  WriteMaskStack(data, P("five.fept"), 1.0);
  const auto r = Run({"evaluate", "--data", P("d.fepd"), "--model", P("m.fepm"),
                      "--masks", P("five.fept"), "--out", P("r.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("5 masks"), std::string::npos) << r.err;
}

TEST_F(CliTest, AblateCsvShapeAndWarnings) {
  MakeDeskFixture(4);
  const auto r = Run({"ablate", "--data", P("d.fepd"), "--model", P("m.fepm"),
                      "--rl-grid", "0.5,0.2", "--rh-grid", "0,0.6",
                      "--iterations", "20", "--out", P("a.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  std::ifstream csv(P("a.csv"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(csv, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "rl,rh,stc,dc,acc,tv");
  EXPECT_EQ(lines[1].rfind("0.2000,0.0000,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("0.2000,0.6000,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("0.5000,0.0000,", 0), 0u);
  EXPECT_EQ(lines[4], "0.5000,0.6000,nan,nan,nan,nan");
  EXPECT_TRUE(fs::exists(P("a.csv.json")));
}

TEST_F(CliTest, AblateEmptyGridIsUsageError) {
  MakeDeskFixture(4);
  EXPECT_EQ(Run({"ablate", "--data", P("d.fepd"), "--model", P("m.fepm"),
                 "--rl-grid", "0.5:0.1:0.1", "--out", P("a.csv")})
                .code,
            2);
  EXPECT_EQ(Run({"ablate", "--data", P("d.fepd"), "--model", P("m.fepm"),
                 "--rl-grid", ",", "--out", P("a.csv")})
                .code,
            2);
  EXPECT_EQ(Run({"ablate", "--data", P("d.fepd"), "--model", P("m.fepm"),
                 "--rl-grid", "x", "--out", P("a.csv")})
                .code,
            2);
}

TEST_F(CliTest, DctRoundTripAndDcConcentration) {
  const Tensor x = testing::RandomTensor({4, 5, 6}, 1);
  SaveTensor(x, P("x.fept"));
  ASSERT_EQ(Run({"dct", "--in", P("x.fept"), "--out", P("g.fept")}).code, 0);
  ASSERT_EQ(Run({"dct", "--in", P("g.fept"), "--out", P("y.fept"), "--inverse"}).code,
            0);
  EXPECT_LT(MaxAbsDiff(LoadTensor(P("y.fept")), x), 1e-10);

  SaveTensor(Tensor({4, 4, 4}, 1.0), P("c.fept"));
  ASSERT_EQ(Run({"dct", "--in", P("c.fept"), "--out", P("cg.fept")}).code, 0);
  const Tensor cg = LoadTensor(P("cg.fept"));
  EXPECT_NEAR(cg[0], 8.0, 1e-12);
  for (std::size_t i = 1; i < cg.size(); ++i) EXPECT_NEAR(cg[i], 0.0, 1e-12);

  SaveTensor(Tensor({3, 3, 3}), P("z.fept"));
  ASSERT_EQ(Run({"dct", "--in", P("z.fept"), "--out", P("zi.fept"), "--inverse"}).code,
            0);
  EXPECT_EQ(LoadTensor(P("zi.fept")), Tensor({3, 3, 3}));

  SaveTensor(Tensor({2, 3}), P("r2.fept"));
  EXPECT_EQ(Run({"dct", "--in", P("r2.fept"), "--out", P("bad.fept")}).code, 2);
}

TEST_F(CliTest, ConfigFileSuppliesDefaultsAndFlagsWin) {
  std::ofstream(P("run.toml")) << "[generate]\nn = 3\nseed = 11\nnoise = 0.1\n";
  const auto from_file =
      Run({"--config", P("run.toml"), "generate", "--out", P("f.fepd")});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(LoadDataset(P("f.fepd")).size(), 3u);
  const auto sidecar = nlohmann::json::parse(std::ifstream(P("f.fepd.json")));
  EXPECT_EQ(sidecar["spec"]["seed"], 11);
  EXPECT_EQ(sidecar["spec"]["noise_sigma"], 0.1);

  const auto overridden = Run({"--config", P("run.toml"), "generate", "--n", "5",
                               "--out", P("g.fepd")});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_EQ(LoadDataset(P("g.fepd")).size(), 5u);
}

TEST_F(CliTest, TrainTinyConvIsSeeded) {
  ASSERT_EQ(Run({"generate", "--n", "8", "--preset", "distractor", "--out",
                 P("d.fepd")})
                .code,
            0);
  for (const char* name : {"a.fepm", "b.fepm"}) {
    const auto r = Run({"train", "--data", P("d.fepd"), "--model", "tinyconv",
                        "--epochs", "3", "--seed", "4", "--out", P(name)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(Bytes(P("a.fepm")), Bytes(P("b.fepm")));
}

}  // namespace
}  // namespace fep
