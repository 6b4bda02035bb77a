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

#ifndef FEP_OPTIMIZER_H_
#define FEP_OPTIMIZER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fep/dct.h"
#include "fep/models.h"
#include "fep/perturb.h"
#include "fep/tensor.h"

namespace fep {

// Gradient-ascent settings for one explanation run. With `gfm` unset the run
// is plain extremal perturbation; with it set, every mask gradient is
// band-filtered in the 3-D DCT domain before the ascent step.
struct OptimizerConfig {
  double epsilon = 0.02;
  std::size_t iterations = 300;
  AreaConfig area{0.1, 0.02};
  std::optional<GfmConfig> gfm;
  double blur_sigma = 2.0;
  double mask_init = 0.5;
  std::size_t mask_step = 2;
  double mask_sigma = 3.0;
  ScoreMode score = ScoreMode::kProbability;
  // Recorded with every result; the optimizer itself draws no random numbers.
  std::uint64_t seed = 0;

  void Validate() const;
};

// 8 x 16 x 16 clips: blur sigma 2, grid step 2, smoothing sigma 3.
OptimizerConfig DeskOptimizerConfig();
// Full-size clips: blur sigma 10, grid step 13, smoothing sigma 23.
OptimizerConfig FullScaleOptimizerConfig();

struct ExplanationResult {
  Tensor mask;  // T x 1 x H x W, values in [0, 1]
  std::vector<double> confidence_trace;  // softmax probability per iteration
  std::vector<double> objective_trace;   // score - lambda * R_a per iteration
  std::size_t iterations_run = 0;
  OptimizerConfig config;
};

// Snapshot handed to an observer once per iteration, after the update.
struct IterationRecord {
  std::size_t iteration;
  const Tensor& grid_before;       // T x 1 x Hg x Wg
  const Tensor& mask;              // expanded from grid_before
  const Tensor& raw_gradient;      // T x H x W mask gradient
  const Tensor& ascent_gradient;   // raw_gradient after band filtering
  const Tensor& grid_direction;    // ascent_gradient pulled back to the grid
  const Tensor& grid_after;        // grid_before + epsilon * grid_direction
  double confidence;
  double objective;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

// Runs `cfg.iterations` ascent steps on the mask grid. Throws NumericalError
// naming the iteration if a gradient turns non-finite.
ExplanationResult Explain(const Model& model, const Tensor& clip,
                          std::size_t class_index, const OptimizerConfig& cfg,
                          const IterationObserver& observer = {});

// Explain with band filtering required; throws ConfigError if cfg.gfm is
// unset.
ExplanationResult ExplainFep(const Model& model, const Tensor& clip,
                             std::size_t class_index,
                             const OptimizerConfig& cfg,
                             const IterationObserver& observer = {});

}  // namespace fep

#endif  // FEP_OPTIMIZER_H_
