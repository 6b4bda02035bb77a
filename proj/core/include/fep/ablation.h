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

#ifndef FEP_ABLATION_H_
#define FEP_ABLATION_H_

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fep/data.h"
#include "fep/metrics.h"
#include "fep/models.h"
#include "fep/optimizer.h"

namespace fep {

// Masks for a whole dataset. Each clip is explained for the class the model
// predicts on the clean clip.
struct DatasetExplanation {
  std::vector<Tensor> masks;
  std::vector<std::size_t> classes;
};

DatasetExplanation ExplainDataset(const Model& model,
                                  std::span<const LabeledClip> dataset,
                                  const OptimizerConfig& cfg);

struct AblationRow {
  double r_l = 1.0;
  double r_h = 0.0;
  bool valid = true;
  double stc = 0.0;  // mean STC, percent
  double dc = 0.0;   // percent
  double acc = 0.0;  // percent
  double tv = 0.0;   // mean total variation
};

// Explains every clip with `cfg` (gfm set or not) and aggregates metrics.
// The row is labelled (r_l, r_h); for plain EP pass (1, 0).
AblationRow EvaluateMethod(const Model& model,
                           std::span<const LabeledClip> dataset,
                           const OptimizerConfig& cfg, const StcConfig& stc,
                           double r_l, double r_h);

// One row per pair, sorted by (r_l, r_h). Pairs with r_l + r_h > 1 or outside
// [0, 1] produce an invalid row and a line on `warnings`.
std::vector<AblationRow> Ablate(const Model& model,
                                std::span<const LabeledClip> dataset,
                                std::vector<std::pair<double, double>> grid,
                                const OptimizerConfig& base,
                                const StcConfig& stc, std::ostream& warnings);

// Inclusive range start, start + step, ... up to stop (within step / 1e6).
std::vector<double> ParseGridRange(double start, double stop, double step);

inline constexpr const char* kAblationCsvHeader = "rl,rh,stc,dc,acc,tv";
// Fixed precision so rows compare as text; invalid metrics print as "nan".
std::string FormatAblationRow(const AblationRow& row);

}  // namespace fep

#endif  // FEP_ABLATION_H_
