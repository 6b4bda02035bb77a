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

#include "fep/metrics.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fep/error.h"
#include "test_util.h"

namespace fep {
namespace {

using testing::RandomTensor;

const ClipShape kPixel{1, 1, 1, 1};

// Two classes over a single pixel: logit_0 - logit_1 = w * x + b.
TemplateModel PixelModel(double w, double b) {
  return TemplateModel(kPixel, {Tensor({1, 1, 1, 1}, w), Tensor({1, 1, 1, 1})},
                       {b, 0.0}, 1.0);
}

// Chooses w, b so that p_0(1) = y and p_0(0.5) = y_e.
TemplateModel PixelModelFor(double y, double y_e) {
  auto logit = [](double p) { return std::log(p / (1 - p)); };
  const double w = 2.0 * (logit(y) - logit(y_e));
  return PixelModel(w, logit(y) - w);
}

TEST(DropInConfidenceTest, AllOnesMaskIsZero) {
  const ClipShape cs{2, 3, 4, 4};
  const auto tpl = RandomTensor(cs.clip(), 1);
  const TemplateModel m(cs, {tpl, Scale(tpl, -1)}, {0, 0}, 1.0);
  std::vector<Tensor> clips, masks;
  std::vector<std::size_t> labels;
  for (std::uint64_t s = 0; s < 5; ++s) {
    clips.push_back(RandomTensor(cs.clip(), 10 + s));
    masks.push_back(Tensor::Ones(cs.mask()));
    labels.push_back(s % 2);
  }
  EXPECT_EQ(DropInConfidence(m, clips, masks, labels), 0.0);
}

TEST(DropInConfidenceTest, DirectFormula) {
  const auto m = PixelModelFor(0.9, 0.7);
  const std::vector<Tensor> clips = {Tensor::Ones({1, 1, 1, 1})};
  const std::vector<Tensor> masks = {Tensor({1, 1, 1, 1}, 0.5)};
  const std::vector<std::size_t> labels = {0};
  ASSERT_NEAR(Predict(m, clips[0]).probs[0], 0.9, 1e-12);
  EXPECT_NEAR(DropInConfidence(m, clips, masks, labels), 20.0, 1e-9);
}

TEST(DropInConfidenceTest, ClampsIncreases) {
  const auto m = PixelModelFor(0.5, 0.8);
  const std::vector<Tensor> clips = {Tensor::Ones({1, 1, 1, 1})};
  const std::vector<Tensor> masks = {Tensor({1, 1, 1, 1}, 0.5)};
  const std::vector<std::size_t> labels = {0};
  EXPECT_EQ(DropInConfidence(m, clips, masks, labels), 0.0);
}

TEST(DropInConfidenceTest, MisalignedAndEmptyInputsThrow) {
  const auto m = PixelModel(1, 0);
  const std::vector<Tensor> one = {Tensor::Ones({1, 1, 1, 1})};
  const std::vector<Tensor> none;
  const std::vector<std::size_t> label = {0};
  const std::vector<std::size_t> no_labels;
  EXPECT_THROW(DropInConfidence(m, one, none, label), ShapeError);
  EXPECT_THROW(DropInConfidence(m, none, none, no_labels), ConfigError);
}

TEST(ExplanationAccuracyTest, AllOnesWithOwnPredictionsIs100) {
  const ClipShape cs{2, 1, 3, 3};
  const TemplateModel m(cs, {RandomTensor(cs.clip(), 2), RandomTensor(cs.clip(), 3),
                             RandomTensor(cs.clip(), 4)},
                        {0, 0, 0}, 1.0);
  std::vector<Tensor> clips, masks;
  std::vector<std::size_t> labels;
  for (std::uint64_t s = 0; s < 12; ++s) {
    clips.push_back(RandomTensor(cs.clip(), 20 + s));
    masks.push_back(Tensor::Ones(cs.mask()));
    labels.push_back(Predict(m, clips.back()).label);
  }
  EXPECT_EQ(ExplanationAccuracy(m, clips, masks, labels), 100.0);
}

TEST(ExplanationAccuracyTest, ZeroMasksPickClassZero) {
  const ClipShape cs{2, 1, 3, 3};
  const TemplateModel m(cs, {RandomTensor(cs.clip(), 5), RandomTensor(cs.clip(), 6)},
                        {0, 0}, 1.0);
  std::vector<Tensor> clips, masks;
  std::vector<std::size_t> labels = {0, 1, 1, 0, 1, 1, 1, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    clips.push_back(RandomTensor(cs.clip(), 30 + i));
    masks.push_back(Tensor::Zeros(cs.mask()));
  }
  // Zero input: equal logits, argmax ties to class 0 -> 3 of 8 correct.
  EXPECT_EQ(ExplanationAccuracy(m, clips, masks, labels), 37.5);
}

TEST(ExplanationAccuracyTest, EmptyDatasetIsAnError) {
  const auto m = PixelModel(1, 0);
  EXPECT_THROW(ExplanationAccuracy(m, {}, {}, {}), ConfigError);
}

TEST(StcTest, HalfCovered) {
  const Tensor boxes = Tensor::Ones({2, 2, 1});
  const Tensor mask({2, 2, 1}, std::vector<double>{1, 1, 0, 0});
  EXPECT_EQ(Stc(mask, boxes, {0.5}), 50.0);
}

TEST(StcTest, FullAndNoCover) {
  const Tensor boxes = [] {
    Tensor b({3, 4, 4});
    b.at(1, 2, 2) = b.at(2, 0, 3) = 1.0;
    return b;
  }();
  EXPECT_EQ(Stc(Tensor({3, 1, 4, 4}, 0.5), boxes, {0.5}), 100.0);
  EXPECT_EQ(Stc(Tensor({3, 1, 4, 4}, 0.49), boxes, {0.5}), 0.0);
}

TEST(StcTest, EmptyBoxesAreAnExplicitError) {
  EXPECT_THROW(Stc(Tensor::Ones({2, 3, 3}), Tensor({2, 3, 3}), {0.5}),
               NoGroundTruthError);
}

TEST(StcTest, MonotoneInTau) {
  const Tensor mask = RandomTensor({4, 6, 6}, 7, 0, 1);
  Tensor boxes({4, 6, 6});
  for (std::size_t i = 0; i < boxes.size(); i += 3) boxes[i] = 1.0;
  double prev = 100.0;
  for (double tau = 0.05; tau < 1.0; tau += 0.05) {
    const double s = Stc(mask, boxes, {tau});
    EXPECT_LE(s, prev);
    prev = s;
  }
  EXPECT_THROW(StcConfig{1.0}.Validate(), ConfigError);
}

TEST(StcTest, ShapeMismatchThrows) {
  EXPECT_THROW(Stc(Tensor({2, 3, 3}), Tensor::Ones({2, 3, 4}), {0.5}),
               ShapeError);
}

TEST(DeletionCurveTest, FlatModelGivesOneOverY) {
  const ClipShape cs{2, 2, 4, 4};
  const TemplateModel flat(cs, std::vector<Tensor>(5, Tensor(cs.clip())),
                           std::vector<double>(5, 0.0), 1.0);
  const auto curve = ComputeDeletionCurve(flat, RandomTensor(cs.clip(), 8),
                                          RandomTensor(cs.volume(), 9), 3, 10);
  for (const auto& [x, y] : curve.points) EXPECT_NEAR(y, 0.2, 1e-15);
  EXPECT_NEAR(curve.auc, 0.2, 1e-12);
}

TEST(DeletionCurveTest, EndpointsAndOrdering) {
  const ClipShape cs{2, 2, 4, 4};
  const TemplateModel m(cs, {RandomTensor(cs.clip(), 10), RandomTensor(cs.clip(), 11)},
                        {0.3, 0.0}, 1.0);
  const Tensor clip = RandomTensor(cs.clip(), 12);
  const auto curve =
      ComputeDeletionCurve(m, clip, RandomTensor(cs.volume(), 13), 0, 7);
  ASSERT_EQ(curve.points.size(), 8u);
  EXPECT_EQ(curve.points.front().first, 0.0);
  EXPECT_EQ(curve.points.front().second, Predict(m, clip).probs[0]);
  EXPECT_EQ(curve.points.back().first, 1.0);
  EXPECT_EQ(curve.points.back().second,
            Predict(m, Tensor(cs.clip())).probs[0]);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    EXPECT_GT(curve.points[i].first, curve.points[i - 1].first);
  }
  EXPECT_THROW(ComputeDeletionCurve(m, clip, Tensor(cs.volume()), 0, 1),
               ConfigError);
}

TEST(DeletionCurveTest, DeletesMostSalientFirstWithIndexTies) {
  // One-pixel template: deleting that pixel first drops the score at once.
  const ClipShape cs{1, 1, 2, 2};
  Tensor tpl(cs.clip());
  tpl.at(0, 0, 1, 1) = 4.0;
  const TemplateModel m(cs, {tpl, Tensor(cs.clip())}, {0, 0}, 1.0);
  const Tensor clip = Tensor::Ones(cs.clip());
  Tensor good({1, 2, 2});
  good.at(0, 1, 1) = 1.0;
  const auto fast = ComputeDeletionCurve(m, clip, good, 0, 4);
  const auto slow = ComputeDeletionCurve(m, clip, Tensor({1, 2, 2}), 0, 4);
  EXPECT_NEAR(fast.points[1].second, 0.5, 1e-15);
  EXPECT_GT(slow.points[1].second, 0.9);  // ties: flat index 0 goes first
  EXPECT_LT(fast.auc, slow.auc);
}

TEST(GradientSaliencyTest, ConstantModelGivesZeroMap) {
  const ClipShape cs{2, 3, 4, 5};
  const TemplateModel flat(cs, std::vector<Tensor>(2, Tensor(cs.clip())),
                           {1.0, -1.0}, 1.0);
  const Tensor s = GradientSaliency(flat, RandomTensor(cs.clip(), 14), 0);
  EXPECT_EQ(s.shape(), cs.volume());
  for (double v : s.values()) EXPECT_EQ(v, 0.0);
}

TEST(GradientSaliencyTest, TemplateClosedForm) {
  const ClipShape cs{2, 3, 4, 5};
  const double temperature = 2.0;
  const std::vector<Tensor> tpl = {RandomTensor(cs.clip(), 15),
                                   RandomTensor(cs.clip(), 16),
                                   RandomTensor(cs.clip(), 17)};
  const TemplateModel m(cs, tpl, {0.1, 0.2, 0.3}, temperature);
  const Tensor clip = RandomTensor(cs.clip(), 18);
  const auto p = Predict(m, clip).probs;
  const std::size_t y = 1;
  const Tensor s = GradientSaliency(m, clip, y);
  ASSERT_EQ(s.shape(), cs.volume());
  for (std::size_t t = 0; t < cs.t; ++t)
    for (std::size_t h = 0; h < cs.h; ++h)
      for (std::size_t w = 0; w < cs.w; ++w) {
        double expected = 0.0;
        for (std::size_t c = 0; c < cs.c; ++c) {
          double mean = 0.0;
          for (std::size_t k = 0; k < 3; ++k) mean += p[k] * tpl[k].at(t, c, h, w);
          expected += std::abs(p[y] * (tpl[y].at(t, c, h, w) - mean) / temperature);
        }
        EXPECT_NEAR(s.at(t, h, w), expected, 1e-14);
      }
}

TEST(TotalVariationTest, ConstantIsZero) {
  EXPECT_EQ(TotalVariation(Tensor({3, 1, 4, 4}, 0.3)), 0.0);
}

TEST(TotalVariationTest, HandCount) {
  const Tensor m({1, 1, 1, 4}, std::vector<double>{0, 1, 0, 1});
  EXPECT_EQ(TotalVariation(m), 3.0);
  EXPECT_EQ(TotalVariation(m.Reshape({4, 1, 1})), 3.0);
}

TEST(TotalVariationTest, MatchesAxisByAxisLoops) {
  // Dyadic values keep every partial sum exact, so summation order cannot
  // matter and the comparison can be exact.
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> q(0, 1024);
  Tensor m({5, 6, 7});
  for (double& v : m.mutable_values()) v = q(rng) / 1024.0;
  double oracle = 0.0;
  for (std::size_t t = 0; t + 1 < 5; ++t)
    for (std::size_t h = 0; h < 6; ++h)
      for (std::size_t w = 0; w < 7; ++w)
        oracle += std::abs(m.at(t + 1, h, w) - m.at(t, h, w));
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t h = 0; h + 1 < 6; ++h)
      for (std::size_t w = 0; w < 7; ++w)
        oracle += std::abs(m.at(t, h + 1, w) - m.at(t, h, w));
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t h = 0; h < 6; ++h)
      for (std::size_t w = 0; w + 1 < 7; ++w)
        oracle += std::abs(m.at(t, h, w + 1) - m.at(t, h, w));
  EXPECT_EQ(TotalVariation(m), oracle);
}

TEST(MetricsTest, Deterministic) {
  const ClipShape cs{2, 1, 4, 4};
  const TemplateModel m(cs, {RandomTensor(cs.clip(), 20), RandomTensor(cs.clip(), 21)},
                        {0, 0}, 1.0);
  const Tensor clip = RandomTensor(cs.clip(), 22);
  const Tensor sal = RandomTensor(cs.volume(), 23);
  const auto a = ComputeDeletionCurve(m, clip, sal, 1, 9, DeletionFill::kBlur);
  const auto b = ComputeDeletionCurve(m, clip, sal, 1, 9, DeletionFill::kBlur);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.auc, b.auc);
}

}  // namespace
}  // namespace fep
