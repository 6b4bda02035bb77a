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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fep/dct.h"

namespace fep {
namespace {

void CheckAligned(std::size_t clips, std::size_t masks, std::size_t labels,
                  const char* op) {
  if (clips != masks || clips != labels) {
    throw ShapeError(std::string(op) + ": misaligned inputs (" +
                     std::to_string(clips) + " clips, " +
                     std::to_string(masks) + " masks, " +
                     std::to_string(labels) + " labels)");
  }
  if (clips == 0) throw ConfigError(std::string(op) + ": empty dataset");
}

// X_e = M * X with M broadcast over channels.
Tensor MaskedInput(const Tensor& clip, const Tensor& mask) {
  const ClipShape cs = ClipShape::FromClip(clip.shape());
  return Multiply(clip, mask.Reshape(cs.mask()));
}

Tensor AsVolume(const Tensor& t) {
  return t.Reshape(VolumeDims::FromShape(t.shape()).shape());
}

}  // namespace

void StcConfig::Validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ConfigError("StcConfig: tau must lie in (0, 1), got " +
                      std::to_string(tau));
  }
}

double DropInConfidence(const Model& model, std::span<const Tensor> clips,
                        std::span<const Tensor> masks,
                        std::span<const std::size_t> labels) {
  CheckAligned(clips.size(), masks.size(), labels.size(), "DropInConfidence");
  double total = 0.0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const double y = ClassScore(model, clips[i], labels[i],
                                ScoreMode::kProbability);
    const double ye = ClassScore(model, MaskedInput(clips[i], masks[i]),
                                 labels[i], ScoreMode::kProbability);
    total += std::max(0.0, y - ye);
  }
  return 100.0 * total / static_cast<double>(clips.size());
}

double ExplanationAccuracy(const Model& model, std::span<const Tensor> clips,
                           std::span<const Tensor> masks,
                           std::span<const std::size_t> labels) {
  CheckAligned(clips.size(), masks.size(), labels.size(),
               "ExplanationAccuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (Predict(model, MaskedInput(clips[i], masks[i])).label == labels[i]) {
      ++hits;
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(clips.size());
}

double Stc(const Tensor& mask, const Tensor& boxes, const StcConfig& cfg) {
  cfg.Validate();
  const Tensor m = AsVolume(mask);
  const Tensor o = AsVolume(boxes);
  if (m.shape() != o.shape()) {
    throw ShapeError("STC: mask " + ShapeString(mask.shape()) +
                     " does not match boxes " + ShapeString(boxes.shape()));
  }
  std::size_t in_box = 0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (o[i] == 1.0) {
      ++in_box;
      if (m[i] >= cfg.tau) ++covered;
    }
  }
  if (in_box == 0) throw NoGroundTruthError();
  return 100.0 * static_cast<double>(covered) / static_cast<double>(in_box);
}

DeletionCurve ComputeDeletionCurve(const Model& model, const Tensor& clip,
                                   const Tensor& saliency, std::size_t label,
                                   std::size_t steps, DeletionFill fill,
                                   double blur_sigma) {
  if (steps < 2) throw ConfigError("DeletionCurve: steps must be >= 2");
  const ClipShape cs = ClipShape::FromClip(clip.shape());
  const Tensor sal = AsVolume(saliency);
  if (sal.shape() != cs.volume()) {
    throw ShapeError("DeletionCurve: saliency " +
                     ShapeString(saliency.shape()) + " does not match clip " +
                     ShapeString(clip.shape()));
  }
  const std::size_t voxels = cs.voxels();
  std::vector<std::size_t> order(voxels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sal[a] > sal[b]; });

  const Tensor replacement = fill == DeletionFill::kBlur
                                 ? GaussianBlur(clip, BlurKernel(blur_sigma))
                                 : Tensor(clip.shape());
  const std::size_t plane = cs.h * cs.w;
  Tensor work = clip;
  DeletionCurve curve;
  curve.points.emplace_back(
      0.0, ClassScore(model, work, label, ScoreMode::kProbability));
  std::size_t deleted = 0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const std::size_t target = (s * voxels + steps / 2) / steps;
    for (; deleted < target; ++deleted) {
      const std::size_t v = order[deleted];
      const std::size_t t = v / plane, p = v % plane;
      for (std::size_t c = 0; c < cs.c; ++c) {
        const std::size_t idx = (t * cs.c + c) * plane + p;
        work[idx] = replacement[idx];
      }
    }
    const double fraction =
        static_cast<double>(deleted) / static_cast<double>(voxels);
    if (fraction <= curve.points.back().first) continue;
    curve.points.emplace_back(
        fraction, ClassScore(model, work, label, ScoreMode::kProbability));
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& [x0, y0] = curve.points[i - 1];
    const auto& [x1, y1] = curve.points[i];
    curve.auc += 0.5 * (x1 - x0) * (y0 + y1);
  }
  return curve;
}

Tensor GradientSaliency(const Model& model, const Tensor& clip,
                        std::size_t label) {
  Tensor g = InputGradient(model, clip, label, ScoreMode::kProbability);
  for (double& v : g.mutable_values()) v = std::abs(v);
  return ReduceChannels(g);
}

double TotalVariation(const Tensor& mask) {
  const Tensor m = AsVolume(mask);
  const std::size_t T = m.dim(0), H = m.dim(1), W = m.dim(2);
  double tv = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t w = 0; w < W; ++w) {
        const double v = m.at(t, h, w);
        if (t + 1 < T) tv += std::abs(m.at(t + 1, h, w) - v);
        if (h + 1 < H) tv += std::abs(m.at(t, h + 1, w) - v);
        if (w + 1 < W) tv += std::abs(m.at(t, h, w + 1) - v);
      }
    }
  }
  return tv;
}

}  // namespace fep
