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

#ifndef FEP_METRICS_H_
#define FEP_METRICS_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fep/models.h"
#include "fep/perturb.h"
#include "fep/tensor.h"

namespace fep {

struct MetricReport {
  double dc = 0.0;            // percent, lower is better
  double acc = 0.0;           // percent
  double stc = 0.0;           // percent
  double deletion_auc = 0.0;  // in [0, 1], lower is better
  std::size_t n_clips = 0;
};

struct StcConfig {
  double tau = 0.5;  // in (0, 1)
  void Validate() const;
};

// 100 * sum_i max(0, y_i - y_e,i) / N with y = p_label(X), y_e = p_label(M*X)
// where M*X is the plain product (mask repeated over channels).
double DropInConfidence(const Model& model, std::span<const Tensor> clips,
                        std::span<const Tensor> masks,
                        std::span<const std::size_t> labels);

// Percentage of clips whose masked input M*X is classified as `labels[i]`.
double ExplanationAccuracy(const Model& model, std::span<const Tensor> clips,
                           std::span<const Tensor> masks,
                           std::span<const std::size_t> labels);

// Share of ground-truth box voxels where the mask reaches tau, in percent.
// Mask and boxes may each be T x H x W or T x 1 x H x W. Throws
// NoGroundTruthError if the boxes are empty.
double Stc(const Tensor& mask, const Tensor& boxes, const StcConfig& cfg);

class NoGroundTruthError : public Error {
 public:
  NoGroundTruthError() : Error("STC: bounding-box volume is empty") {}
};

enum class DeletionFill { kZero, kBlur };

struct DeletionCurve {
  std::vector<std::pair<double, double>> points;  // (fraction deleted, prob)
  double auc = 0.0;
};

// Deletes voxels in descending saliency order (ties by flat index) across all
// channels, in `steps` equal batches, recording p_label after each batch.
// The curve starts at (0, p_label(clip)) and ends at (1, p_label(empty)).
// AUC is the trapezoid rule over the fraction axis.
DeletionCurve ComputeDeletionCurve(const Model& model, const Tensor& clip,
                                   const Tensor& saliency, std::size_t label,
                                   std::size_t steps,
                                   DeletionFill fill = DeletionFill::kZero,
                                   double blur_sigma = 2.0);

// |d p_label / d clip| summed over channels, T x H x W.
Tensor GradientSaliency(const Model& model, const Tensor& clip,
                        std::size_t label);

// Sum of |m(v) - m(v + e)| over the +1 neighbours along t, h and w.
double TotalVariation(const Tensor& mask);

}  // namespace fep

#endif  // FEP_METRICS_H_
