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
#include <string>

namespace fep {

void OptimizerConfig::Validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("OptimizerConfig: epsilon must be >= 0");
  }
  if (iterations == 0) {
    throw ConfigError("OptimizerConfig: iterations must be >= 1");
  }
  area.Validate();
  if (gfm) gfm->Validate();
  if (!(blur_sigma > 0.0) || !std::isfinite(blur_sigma)) {
    throw ConfigError("OptimizerConfig: blur_sigma must be > 0");
  }
  if (!(mask_init > 0.0 && mask_init < 1.0)) {
    throw ConfigError("OptimizerConfig: mask_init must lie in (0, 1)");
  }
  if (mask_step == 0) {
    throw ConfigError("OptimizerConfig: mask_step must be >= 1");
  }
  if (!(mask_sigma > 0.0) || !std::isfinite(mask_sigma)) {
    throw ConfigError("OptimizerConfig: mask_sigma must be > 0");
  }
}

OptimizerConfig DeskOptimizerConfig() { return OptimizerConfig{}; }

OptimizerConfig FullScaleOptimizerConfig() {
  OptimizerConfig cfg;
  cfg.blur_sigma = 10.0;
  cfg.mask_step = 13;
  cfg.mask_sigma = 23.0;
  return cfg;
}

ExplanationResult Explain(const Model& model, const Tensor& clip,
                          std::size_t class_index, const OptimizerConfig& cfg,
                          const IterationObserver& observer) {
  cfg.Validate();
  if (clip.shape() != model.clip_shape().clip()) {
    throw ShapeError("Explain: clip " + ShapeString(clip.shape()) +
                     " does not match model input " +
                     ShapeString(model.clip_shape().clip()));
  }
  if (class_index >= model.num_classes()) {
    throw ConfigError("Explain: class index " + std::to_string(class_index) +
                      " out of range");
  }

  const ClipShape cs = model.clip_shape();
  const VolumeDims dims{cs.t, cs.h, cs.w};
  const Tensor blurred = GaussianBlur(clip, BlurKernel(cfg.blur_sigma));
  const MaskExpander expander(dims, cfg.mask_step, cfg.mask_sigma);
  std::optional<DctPlan> plan;
  std::optional<BandMaskPair> bands;
  if (cfg.gfm) {
    plan.emplace(dims);
    bands = BuildBandMasks(*cfg.gfm, dims);
  }

  ExplanationResult result;
  result.config = cfg;
  result.confidence_trace.reserve(cfg.iterations);
  result.objective_trace.reserve(cfg.iterations);

  Tensor grid(expander.grid_shape(), Logit(cfg.mask_init));
  for (std::size_t f = 0; f < cfg.iterations; ++f) {
    const Tensor mask = expander.Expand(grid);
    const Tensor perturbed = Blend(clip, blurred, mask);
    const auto logits = model.Logits(perturbed);
    const double confidence = Softmax(logits)[class_index];
    const double score =
        cfg.score == ScoreMode::kLogit ? logits[class_index] : confidence;
    const double objective = score - cfg.area.lambda * AreaLoss(mask, cfg.area);

    Tensor raw;
    Tensor ascent;
    Tensor direction;
    try {
      raw = MaskGradient(model, clip, blurred, mask, class_index, cfg.area,
                         cfg.score);
      ascent = cfg.gfm ? ModulateGradient(*plan, raw, *bands) : raw;
      direction = expander.PullBack(grid, ascent);
      internal::CheckFinite(direction, "mask gradient");
    } catch (const NumericalError& e) {
      throw NumericalError("non-finite mask gradient at iteration " +
                           std::to_string(f) + ": " + e.what());
    }
    if (!std::isfinite(objective)) {
      throw NumericalError("non-finite objective at iteration " +
                           std::to_string(f));
    }
    Tensor next = AddScaled(grid, cfg.epsilon, direction);

    result.confidence_trace.push_back(confidence);
    result.objective_trace.push_back(objective);
    if (observer) {
      observer(IterationRecord{f, grid, mask, raw, ascent, direction, next,
                               confidence, objective});
    }
    grid = std::move(next);
  }
  result.iterations_run = cfg.iterations;
  result.mask = expander.Expand(grid);
  return result;
}

ExplanationResult ExplainFep(const Model& model, const Tensor& clip,
                             std::size_t class_index,
                             const OptimizerConfig& cfg,
                             const IterationObserver& observer) {
  if (!cfg.gfm) {
    throw ConfigError("ExplainFep: frequency band ratios (r_l, r_h) required");
  }
  return Explain(model, clip, class_index, cfg, observer);
}

}  // namespace fep
