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

#include "fep/ablation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fep/error.h"

namespace fep {

DatasetExplanation ExplainDataset(const Model& model,
                                  std::span<const LabeledClip> dataset,
                                  const OptimizerConfig& cfg) {
  DatasetExplanation out;
  out.masks.reserve(dataset.size());
  for (const LabeledClip& item : dataset) {
    const std::size_t cls = Predict(model, item.clip).label;
    out.masks.push_back(Explain(model, item.clip, cls, cfg).mask);
    out.classes.push_back(cls);
  }
  return out;
}

AblationRow EvaluateMethod(const Model& model,
                           std::span<const LabeledClip> dataset,
                           const OptimizerConfig& cfg, const StcConfig& stc,
                           double r_l, double r_h) {
  if (dataset.empty()) throw ConfigError("EvaluateMethod: empty dataset");
  const DatasetExplanation ex = ExplainDataset(model, dataset, cfg);
  std::vector<Tensor> clips;
  clips.reserve(dataset.size());
  for (const LabeledClip& item : dataset) clips.push_back(item.clip);

  AblationRow row;
  row.r_l = r_l;
  row.r_h = r_h;
  row.dc = DropInConfidence(model, clips, ex.masks, ex.classes);
  row.acc = ExplanationAccuracy(model, clips, ex.masks, ex.classes);
  double stc_sum = 0.0, tv_sum = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    stc_sum += Stc(ex.masks[i], dataset[i].boxes, stc);
    tv_sum += TotalVariation(ex.masks[i]);
  }
  const double n = static_cast<double>(dataset.size());
  row.stc = stc_sum / n;
  row.tv = tv_sum / n;
  return row;
}

std::vector<AblationRow> Ablate(const Model& model,
                                std::span<const LabeledClip> dataset,
                                std::vector<std::pair<double, double>> grid,
                                const OptimizerConfig& base,
                                const StcConfig& stc, std::ostream& warnings) {
  if (grid.empty()) throw ConfigError("Ablate: empty (r_l, r_h) grid");
  std::stable_sort(grid.begin(), grid.end());
  std::vector<AblationRow> rows;
  for (const auto& [r_l, r_h] : grid) {
    OptimizerConfig cfg = base;
    cfg.gfm = GfmConfig{r_l, r_h};
    try {
      cfg.Validate();
    } catch (const ConfigError& e) {
      warnings << "warning: skipping (r_l=" << r_l << ", r_h=" << r_h
               << "): " << e.what() << "\n";
      constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
      rows.push_back({r_l, r_h, false, kNan, kNan, kNan, kNan});
      continue;
    }
    rows.push_back(EvaluateMethod(model, dataset, cfg, stc, r_l, r_h));
  }
  return rows;
}

std::vector<double> ParseGridRange(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step) ||
      step <= 0.0) {
    throw ConfigError("grid range needs finite bounds and a positive step");
  }
  std::vector<double> values;
  const double slack = step * 1e-6;
  // Multiply rather than accumulate so 0.1:0.8:0.1 hits 0.8 and not 0.7999.
  for (std::size_t k = 0;; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (v > stop + slack) break;
    values.push_back(std::round(v * 1e12) / 1e12);
  }
  if (values.empty()) throw ConfigError("grid range is empty");
  return values;
}

std::string FormatAblationRow(const AblationRow& row) {
  char buf[256];
  if (!row.valid) {
    std::snprintf(buf, sizeof(buf), "%.4f,%.4f,nan,nan,nan,nan", row.r_l,
                  row.r_h);
  } else {
    std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.6f,%.6f,%.6f,%.6f", row.r_l,
                  row.r_h, row.stc, row.dc, row.acc, row.tv);
  }
  return buf;
}

}  // namespace fep
