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

#include "fep/optimizer.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fep/data.h"
#include "fep/dct.h"
#include "fep/error.h"
#include "fep/metrics.h"
#include "test_util.h"

namespace fep {
namespace {

using testing::RandomTensor;

const ClipShape kDesk{8, 1, 16, 16};

struct DeskCase {
  TemplateModel model;
  LabeledClip item;
};

DeskCase MakeDeskCase(std::size_t index) {
  return {BuildMotionTemplateModel(kDesk, kDeskTemplateTemperature),
          GenerateClip(DeskSyntheticSpec(5), index)};
}

OptimizerConfig LogitConfig(std::size_t iterations) {
  OptimizerConfig cfg = DeskOptimizerConfig();
  cfg.score = ScoreMode::kLogit;
  cfg.iterations = iterations;
  return cfg;
}

TEST(OptimizerConfigTest, Validates) {
  OptimizerConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.iterations = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.epsilon = -0.1;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.gfm = GfmConfig{0.7, 0.7};
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.mask_init = 1.0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
}

TEST(OptimizerConfigTest, Presets) {
  const OptimizerConfig full = FullScaleOptimizerConfig();
  EXPECT_EQ(full.mask_step, 13u);
  EXPECT_EQ(full.mask_sigma, 23.0);
  const OptimizerConfig desk = DeskOptimizerConfig();
  EXPECT_EQ(desk.mask_step, 2u);
  EXPECT_EQ(desk.mask_sigma, 3.0);
  EXPECT_EQ(desk.epsilon, 0.02);
  EXPECT_EQ(desk.mask_init, 0.5);
}

TEST(ExplainTest, TracesAndMaskBounds) {
  const DeskCase c = MakeDeskCase(0);
  std::size_t calls = 0;
  const auto r = Explain(c.model, c.item.clip, c.item.label, LogitConfig(40),
                         [&](const IterationRecord& rec) {
                           EXPECT_EQ(rec.iteration, calls++);
                           for (double v : rec.mask.values()) {
                             EXPECT_GE(v, 0.0);
                             EXPECT_LE(v, 1.0);
                           }
                         });
  EXPECT_EQ(calls, 40u);
  EXPECT_EQ(r.iterations_run, 40u);
  EXPECT_EQ(r.confidence_trace.size(), 40u);
  EXPECT_EQ(r.objective_trace.size(), 40u);
  EXPECT_EQ(r.mask.shape(), kDesk.mask());
  for (double v : r.mask.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  for (double p : r.confidence_trace) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(ExplainTest, ZeroStepFreezesMask) {
  const DeskCase c = MakeDeskCase(1);
  OptimizerConfig cfg = LogitConfig(10);
  cfg.epsilon = 0.0;
  const auto r = Explain(c.model, c.item.clip, c.item.label, cfg);
  for (double v : r.mask.values()) EXPECT_EQ(v, 0.5);
  for (double p : r.confidence_trace) EXPECT_EQ(p, r.confidence_trace[0]);
}

TEST(ExplainTest, EmptyBandsFreezeMask) {
  const DeskCase c = MakeDeskCase(2);
  OptimizerConfig cfg = LogitConfig(10);
  cfg.gfm = GfmConfig{0.0, 0.0};
  const auto r = ExplainFep(c.model, c.item.clip, c.item.label, cfg);
  for (double v : r.mask.values()) EXPECT_EQ(v, 0.5);
}

TEST(ExplainTest, FullBandMatchesPlainEp) {
  const DeskCase c = MakeDeskCase(3);
  for (ScoreMode mode : {ScoreMode::kLogit, ScoreMode::kProbability}) {
    OptimizerConfig ep = LogitConfig(60);
    ep.score = mode;
    OptimizerConfig fep = ep;
    fep.gfm = GfmConfig{1.0, 0.0};
    std::vector<Tensor> ep_masks, ep_grads;
    Explain(c.model, c.item.clip, c.item.label, ep,
            [&](const IterationRecord& r) {
              ep_masks.push_back(r.mask);
              ep_grads.push_back(r.ascent_gradient);
            });
    std::size_t f = 0;
    Explain(c.model, c.item.clip, c.item.label, fep,
            [&](const IterationRecord& r) {
              EXPECT_LT(MaxAbsDiff(r.mask, ep_masks[f]), 1e-9) << f;
              EXPECT_LT(MaxAbsDiff(r.ascent_gradient, ep_grads[f]), 1e-10) << f;
              ++f;
            });
    EXPECT_EQ(f, 60u);
  }
}

TEST(ExplainTest, GridUpdateIsASpectralUpdate) {
  // Unit grid step: the grid lives at mask resolution, so the ascent step
  // on the grid is an update of its 3-D spectrum.
  const DeskCase c = MakeDeskCase(4);
  OptimizerConfig cfg = LogitConfig(20);
  cfg.mask_step = 1;
  cfg.mask_sigma = 0.05;
  cfg.gfm = GfmConfig{0.5, 0.2};
  const VolumeDims d{8, 16, 16};
  const DctPlan plan(d);
  const auto bands = BuildBandMasks(*cfg.gfm, d);
  const Tensor outside =
      Subtract(Tensor::Ones(d.shape()), Add(bands.low, bands.high));
  std::size_t checked = 0;
  ExplainFep(c.model, c.item.clip, c.item.label, cfg,
             [&](const IterationRecord& r) {
               auto vol = [](const Tensor& t) {
                 return t.Reshape({8, 16, 16});
               };
               const Tensor lhs = Dct3(plan, vol(r.grid_after));
               const Tensor rhs = AddScaled(Dct3(plan, vol(r.grid_before)),
                                            cfg.epsilon,
                                            Dct3(plan, vol(r.grid_direction)));
               EXPECT_LT(MaxAbsDiff(lhs, rhs), 1e-9);
               const Tensor leak = Multiply(outside, Dct3(plan, r.ascent_gradient));
               EXPECT_LT(MaxAbsDiff(leak, Tensor(d.shape())), 1e-12);
               ++checked;
             });
  EXPECT_EQ(checked, 20u);
}

TEST(ExplainTest, ObjectiveTrendsUpward) {
  for (std::size_t i = 0; i < 4; ++i) {
    const DeskCase c = MakeDeskCase(i);
    for (double eps : {0.02, 0.05}) {
      OptimizerConfig cfg = LogitConfig(200);
      cfg.epsilon = eps;
      const auto r = Explain(c.model, c.item.clip, c.item.label, cfg);
      for (std::size_t f = 0; f + 20 < r.objective_trace.size(); ++f) {
        EXPECT_GE(r.objective_trace[f + 20], r.objective_trace[f] - 1e-6)
            << "clip " << i << " eps " << eps << " f " << f;
      }
    }
  }
}

TEST(ExplainTest, LocalizesABlockTemplate) {
  // One class looks for a static 4x4 block; the other sees nothing.
  const ClipShape cs{4, 1, 16, 16};
  Tensor block(cs.clip());
  Tensor boxes(cs.volume());
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t h = 6; h < 10; ++h)
      for (std::size_t w = 3; w < 7; ++w) {
        block.at(t, 0, h, w) = 1.0;
        boxes.at(t, h, w) = 1.0;
      }
  const TemplateModel model(cs, {block, Tensor(cs.clip())}, {0.0, 0.0}, 1.0);
  OptimizerConfig cfg = LogitConfig(200);
  cfg.area = {0.1, 0.02};
  const auto r = Explain(model, block, 0, cfg);
  EXPECT_GE(Stc(r.mask, boxes, StcConfig{0.5}), 80.0);
}

TEST(ExplainTest, ErrorsAreReported) {
  const DeskCase c = MakeDeskCase(0);
  EXPECT_THROW(Explain(c.model, Tensor({8, 1, 16, 15}), 0, LogitConfig(1)),
               ShapeError);
  EXPECT_THROW(Explain(c.model, c.item.clip, 4, LogitConfig(1)), ConfigError);
  EXPECT_THROW(ExplainFep(c.model, c.item.clip, 0, LogitConfig(1)),
               ConfigError);
}

// Logits are finite but the reverse pass blows up.
class BrokenModel final : public Model {
 public:
  explicit BrokenModel(ClipShape cs) : cs_(cs) {}
  ModelKind kind() const override { return ModelKind::kTemplate; }
  std::size_t num_classes() const override { return 2; }
  const ClipShape& clip_shape() const override { return cs_; }
  std::vector<double> Logits(const Tensor&) const override { return {0, 0}; }
  Tensor LogitsVjp(const Tensor& clip, std::span<const double>) const override {
    Tensor g(clip.shape());
    g.mutable_values()[3] = std::numeric_limits<double>::infinity();
    return g;
  }

 private:
  ClipShape cs_;
};

TEST(ExplainTest, NonFiniteGradientAbortsWithIteration) {
  const ClipShape cs{2, 1, 6, 6};
  const BrokenModel model(cs);
  try {
    Explain(model, RandomTensor(cs.clip(), 1), 0, LogitConfig(5));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 0"), std::string::npos)
        << e.what();
  }
}

}  // namespace
}  // namespace fep
