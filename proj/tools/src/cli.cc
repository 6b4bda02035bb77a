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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fep/ablation.h"
#include "fep/data.h"
#include "fep/dct.h"
#include "fep/error.h"
#include "fep/metrics.h"
#include "fep/models.h"
#include "fep/optimizer.h"
#include "fep/tensor_io.h"

namespace fep {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Sub-seed offsets; every random draw in the pipeline hangs off --seed.
constexpr std::uint64_t kInitSeedOffset = 0;
constexpr std::uint64_t kShuffleSeedOffset = 1;

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void WriteJson(const fs::path& path, const Json& j) {
  WriteText(path, j.dump(2) + "\n");
}

fs::path Sidecar(const fs::path& out) {
  fs::path p = out;
  p += ".json";
  return p;
}

Json ToJson(const SyntheticSpec& s) {
  return Json{{"frames", s.shape.t},          {"channels", s.shape.c},
              {"height", s.shape.h},          {"width", s.shape.w},
              {"blob_size", s.blob_size},     {"blob_intensity", s.blob_intensity},
              {"noise_sigma", s.noise_sigma}, {"hf_amplitude", s.hf_amplitude},
              {"seed", s.seed}};
}

Json ToJson(const OptimizerConfig& c) {
  Json gfm = nullptr;
  if (c.gfm) gfm = Json{{"r_l", c.gfm->r_l}, {"r_h", c.gfm->r_h}};
  return Json{{"epsilon", c.epsilon},
              {"iterations", c.iterations},
              {"area", c.area.a},
              {"lambda", c.area.lambda},
              {"gfm", gfm},
              {"blur_sigma", c.blur_sigma},
              {"mask_init", c.mask_init},
              {"mask_step", c.mask_step},
              {"mask_sigma", c.mask_sigma},
              {"score", std::string(ScoreModeName(c.score))},
              {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Shared flag groups. Optional fields stay unset unless given, so presets can
// supply the defaults and flags (or config-file entries) override them.

struct OptimizerFlags {
  std::string preset = "desk";
  std::optional<double> epsilon, area, lambda, blur_sigma, mask_init,
      mask_sigma;
  std::optional<std::size_t> iterations, mask_step;
  std::string score = "auto";
  std::uint64_t seed = 0;

  void Register(CLI::App* app) {
    app->add_option("--preset", preset, "optimizer preset")
        ->check(CLI::IsMember({"desk", "full"}))
        ->capture_default_str();
    app->add_option("--epsilon", epsilon, "ascent step size");
    app->add_option("--iterations", iterations, "ascent iterations");
    app->add_option("--area", area, "target area fraction a");
    app->add_option("--lambda", lambda, "area regularizer weight");
    app->add_option("--blur-sigma", blur_sigma, "perturbation blur sigma");
    app->add_option("--mask-init", mask_init, "initial mask value");
    app->add_option("--mask-step", mask_step, "mask grid stride in pixels");
    app->add_option("--mask-sigma", mask_sigma, "mask smoothing sigma");
    app->add_option("--score", score, "class score: auto|probability|logit")
        ->capture_default_str();
    app->add_option("--seed", seed, "run seed (echoed)")->capture_default_str();
  }

  // "auto" scores the analytic template model by logit and everything else by
  // probability.
  OptimizerConfig Resolve(const Model& model) const {
    OptimizerConfig c =
        preset == "full" ? FullScaleOptimizerConfig() : DeskOptimizerConfig();
    if (epsilon) c.epsilon = *epsilon;
    if (iterations) c.iterations = *iterations;
    if (area) c.area.a = *area;
    if (lambda) c.area.lambda = *lambda;
    if (blur_sigma) c.blur_sigma = *blur_sigma;
    if (mask_init) c.mask_init = *mask_init;
    if (mask_step) c.mask_step = *mask_step;
    if (mask_sigma) c.mask_sigma = *mask_sigma;
    if (score == "auto") {
      c.score = model.kind() == ModelKind::kTemplate ? ScoreMode::kLogit
                                                     : ScoreMode::kProbability;
    } else {
      c.score = ParseScoreMode(score);
    }
    c.seed = seed;
    return c;
  }
};

std::vector<std::size_t> ResolveClasses(const Model& model,
                                        std::span<const LabeledClip> data,
                                        const std::string& labels) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const LabeledClip& item : data) {
    out.push_back(labels == "truth" ? item.label
                                    : Predict(model, item.clip).label);
  }
  return out;
}

// "0.1:0.8:0.1,1" -> {0.1, ..., 0.8, 1}. Items are single values or
// start:stop:step ranges.
std::vector<double> ParseGridSpec(const std::string& spec) {
  std::vector<double> values;
  std::stringstream items(spec);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (item.empty()) continue;
    std::vector<double> parts;
    std::stringstream fields(item);
    std::string field;
    while (std::getline(fields, field, ':')) {
      try {
        std::size_t used = 0;
        parts.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::logic_error&) {
        throw ConfigError("bad grid value '" + field + "' in '" + spec + "'");
      }
    }
    if (parts.size() == 1) {
      values.push_back(parts[0]);
    } else if (parts.size() == 3) {
      const auto range = ParseGridRange(parts[0], parts[1], parts[2]);
      values.insert(values.end(), range.begin(), range.end());
    } else {
      throw ConfigError("grid item '" + item + "' is not v or start:stop:step");
    }
  }
  if (values.empty()) throw ConfigError("empty grid '" + spec + "'");
  return values;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string preset = "desk";
  std::optional<std::size_t> frames, channels, height, width, blob;
  std::optional<double> intensity, noise, hf;
};

int Generate(const GenerateArgs& a, std::ostream& out) {
  SyntheticSpec spec = a.preset == "distractor" ? DistractorSyntheticSpec(a.seed)
                                                : DeskSyntheticSpec(a.seed);
  if (a.frames) spec.shape.t = *a.frames;
  if (a.channels) spec.shape.c = *a.channels;
  if (a.height) spec.shape.h = *a.height;
  if (a.width) spec.shape.w = *a.width;
  if (a.blob) spec.blob_size = *a.blob;
  if (a.intensity) spec.blob_intensity = *a.intensity;
  if (a.noise) spec.noise_sigma = *a.noise;
  if (a.hf) spec.hf_amplitude = *a.hf;
  const auto clips = GenerateDataset(spec, a.n);
  SaveDataset(clips, a.out);
  WriteJson(Sidecar(a.out), Json{{"command", "generate"},
                                 {"n", a.n},
                                 {"preset", a.preset},
                                 {"spec", ToJson(spec)}});
  out << "generated " << clips.size() << " clips (seed " << a.seed << ") -> "
      << a.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data, out, model = "tinyconv";
  std::size_t epochs = TrainConfig{}.epochs;
  double lr = TrainConfig{}.learning_rate;
  std::uint64_t seed = 0;
  double temperature = kDeskTemplateTemperature;
  std::size_t out_channels = ConvGeometry{}.out_channels;
};

int Train(const TrainArgs& a, std::ostream& out) {
  const auto data = LoadDataset(a.data);
  if (data.empty()) throw ConfigError("train: dataset '" + a.data + "' is empty");
  const ClipShape shape = ClipShape::FromClip(data.front().clip.shape());
  std::size_t classes = kNumMotions;
  for (const auto& item : data) classes = std::max(classes, item.label + 1);

  Json sidecar{{"command", "train"}, {"data", a.data}, {"model", a.model}};
  std::unique_ptr<Model> model;
  if (a.model == "template") {
    if (classes != kNumMotions) {
      throw ConfigError("train: the template model only knows 4 motions");
    }
    model = std::make_unique<TemplateModel>(
        BuildMotionTemplateModel(shape, a.temperature));
    sidecar["temperature"] = a.temperature;
  } else {
    ConvGeometry geometry;
    geometry.out_channels = a.out_channels;
    auto conv = std::make_unique<TinyConvModel>(TinyConvModel::Random(
        shape, classes, geometry, a.seed + kInitSeedOffset));
    std::vector<Tensor> clips;
    std::vector<std::size_t> labels;
    for (const auto& item : data) {
      clips.push_back(item.clip);
      labels.push_back(item.label);
    }
    TrainConfig cfg{a.epochs, a.lr, a.seed + kShuffleSeedOffset};
    const auto losses = TrainTinyConv(*conv, clips, labels, cfg);
    out << "epoch losses: first " << FormatDouble(losses.front()) << ", last "
        << FormatDouble(losses.back()) << "\n";
    sidecar["epochs"] = a.epochs;
    sidecar["lr"] = a.lr;
    sidecar["out_channels"] = a.out_channels;
    sidecar["final_loss"] = losses.back();
    model = std::move(conv);
  }
  sidecar["seed"] = a.seed;

  std::size_t correct = 0;
  for (const auto& item : data) {
    correct += Predict(*model, item.clip).label == item.label;
  }
  const double acc = 100.0 * static_cast<double>(correct) /
                     static_cast<double>(data.size());
  sidecar["train_accuracy"] = acc;
  SaveModel(*model, a.out);
  WriteJson(Sidecar(a.out), sidecar);
  out << a.model << " model: train accuracy " << correct << "/" << data.size()
      << " -> " << a.out << "\n";
  return kExitOk;
}

struct ExplainArgs {
  std::string data, model, out_prefix, heatmaps;
  std::optional<std::size_t> clip;
  std::string method = "fep";
  double rl = 0.5;
  double rh = 0.2;
  std::string labels = "predicted";
  OptimizerFlags opt;
};

int RunExplain(const ExplainArgs& a, std::ostream& out) {
  const auto data = LoadDataset(a.data);
  const auto model = LoadModel(a.model);
  OptimizerConfig cfg = a.opt.Resolve(*model);
  if (a.method == "fep") cfg.gfm = GfmConfig{a.rl, a.rh};
  cfg.Validate();

  std::vector<std::size_t> indices;
  if (a.clip) {
    if (*a.clip >= data.size()) {
      throw ConfigError("explain: clip " + std::to_string(*a.clip) +
                        " out of range (dataset has " +
                        std::to_string(data.size()) + ")");
    }
    indices.push_back(*a.clip);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) indices.push_back(i);
  }
  if (indices.empty()) throw ConfigError("explain: dataset is empty");

  const ClipShape cs = model->clip_shape();
  Shape stack_shape = cs.mask();
  stack_shape.insert(stack_shape.begin(), indices.size());
  Tensor stack(stack_shape);
  std::string trace = "clip,iteration,confidence,objective\n";
  Json clips_json = Json::array();
  const std::size_t mask_size = ShapeProduct(cs.mask());

  for (std::size_t k = 0; k < indices.size(); ++k) {
    const LabeledClip& item = data[indices[k]];
    const std::size_t cls = a.labels == "truth"
                                ? item.label
                                : Predict(*model, item.clip).label;
    ExplanationResult r;
    try {
      r = Explain(*model, item.clip, cls, cfg);
    } catch (const NumericalError& e) {
      throw NumericalError("clip " + std::to_string(indices[k]) + ": " +
                           e.what());
    }
    std::copy(r.mask.values().begin(), r.mask.values().end(),
              stack.mutable_values().begin() +
                  static_cast<std::ptrdiff_t>(k * mask_size));
    for (std::size_t f = 0; f < r.iterations_run; ++f) {
      trace += std::to_string(indices[k]) + "," + std::to_string(f) + "," +
               FormatDouble(r.confidence_trace[f]) + "," +
               FormatDouble(r.objective_trace[f]) + "\n";
    }
    clips_json.push_back(Json{{"index", indices[k]}, {"class", cls}});
    if (!a.heatmaps.empty()) {
      ExportHeatmapFrames(item.clip, r.mask,
                          fs::path(a.heatmaps) /
                              ("clip_" + std::to_string(indices[k])));
    }
    out << "clip " << indices[k] << " class " << cls << ": confidence "
        << std::fixed << std::setprecision(4) << r.confidence_trace.front()
        << " -> " << r.confidence_trace.back() << std::defaultfloat << " ("
        << r.iterations_run << " iterations)\n";
  }

  const std::string prefix = a.out_prefix;
  SaveTensor(stack, prefix + ".mask.fept");
  WriteText(prefix + ".trace.csv", trace);
  WriteJson(prefix + ".config.json",
            Json{{"command", "explain"},
                 {"data", a.data},
                 {"model", a.model},
                 {"method", a.method},
                 {"labels", a.labels},
                 {"optimizer", ToJson(cfg)},
                 {"clips", clips_json}});
  return kExitOk;
}

// Splits an N x T x 1 x H x W stack (or a single T x 1 x H x W mask).
std::vector<Tensor> SplitMasks(const Tensor& stack, const ClipShape& cs) {
  const Shape mask_shape = cs.mask();
  if (stack.shape() == mask_shape) return {stack};
  if (stack.rank() != 5 ||
      !std::equal(mask_shape.begin(), mask_shape.end(),
                  stack.shape().begin() + 1)) {
    throw ShapeError("masks " + ShapeString(stack.shape()) +
                     " are not a stack of " + ShapeString(mask_shape));
  }
  std::vector<Tensor> masks;
  const std::size_t size = ShapeProduct(mask_shape);
  for (std::size_t i = 0; i < stack.dim(0); ++i) {
    const auto first = stack.values().begin() +
                       static_cast<std::ptrdiff_t>(i * size);
    masks.emplace_back(mask_shape,
                       std::vector<double>(first, first + static_cast<std::ptrdiff_t>(size)));
  }
  return masks;
}

struct EvaluateArgs {
  std::string data, model, masks, out, curves;
  double tau = StcConfig{}.tau;
  std::size_t deletion_steps = 20;
  std::string labels = "predicted";
  std::string fill = "zero";
  double blur_sigma = DeskOptimizerConfig().blur_sigma;
};

int RunEvaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto data = LoadDataset(a.data);
  const auto model = LoadModel(a.model);
  const StcConfig stc{a.tau};
  stc.Validate();
  const auto masks = SplitMasks(LoadTensor(a.masks), model->clip_shape());
  if (masks.size() != data.size()) {
    throw ShapeError("evaluate: " + std::to_string(data.size()) +
                     " clips but " + std::to_string(masks.size()) + " masks");
  }
  const auto classes = ResolveClasses(*model, data, a.labels);
  std::vector<Tensor> clips;
  for (const auto& item : data) clips.push_back(item.clip);

  MetricReport report;
  report.n_clips = data.size();
  report.dc = DropInConfidence(*model, clips, masks, classes);
  report.acc = ExplanationAccuracy(*model, clips, masks, classes);
  const DeletionFill fill =
      a.fill == "blur" ? DeletionFill::kBlur : DeletionFill::kZero;
  double stc_sum = 0.0, auc_sum = 0.0;
  std::string curves = "clip,fraction,confidence\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    stc_sum += Stc(masks[i], data[i].boxes, stc);
    const DeletionCurve curve = ComputeDeletionCurve(
        *model, clips[i], masks[i], classes[i], a.deletion_steps, fill,
        a.blur_sigma);
    auc_sum += curve.auc;
    for (const auto& [fraction, confidence] : curve.points) {
      curves += std::to_string(i) + "," + FormatDouble(fraction) + "," +
                FormatDouble(confidence) + "\n";
    }
  }
  if (!a.curves.empty()) WriteText(a.curves, curves);
  const double n = static_cast<double>(data.size());
  report.stc = stc_sum / n;
  report.deletion_auc = auc_sum / n;

  WriteJson(a.out, Json{{"dc", report.dc},
                        {"acc", report.acc},
                        {"stc", report.stc},
                        {"deletion_auc", report.deletion_auc},
                        {"n_clips", report.n_clips},
                        {"config",
                         {{"command", "evaluate"},
                          {"data", a.data},
                          {"model", a.model},
                          {"masks", a.masks},
                          {"tau", a.tau},
                          {"deletion_steps", a.deletion_steps},
                          {"deletion_fill", a.fill},
                          {"blur_sigma", a.blur_sigma},
                          {"labels", a.labels}}}});
  out << std::fixed << std::setprecision(4) << "metric        value\n"
      << "DC (%)        " << report.dc << "\n"
      << "Acc (%)       " << report.acc << "\n"
      << "STC (%)       " << report.stc << "\n"
      << "deletion AUC  " << report.deletion_auc << "\n"
      << "clips         " << report.n_clips << "\n"
      << std::defaultfloat;
  return kExitOk;
}

struct AblateArgs {
  std::string data, model, out, rl_grid, rh_grid;
  double rh = 0.0;
  double tau = StcConfig{}.tau;
  OptimizerFlags opt;
};

int RunAblate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<double> rls = ParseGridSpec(a.rl_grid);
  const std::vector<double> rhs =
      a.rh_grid.empty() ? std::vector<double>{a.rh} : ParseGridSpec(a.rh_grid);
  std::vector<std::pair<double, double>> grid;
  for (double rl : rls) {
    for (double rh : rhs) grid.emplace_back(rl, rh);
  }
  const auto data = LoadDataset(a.data);
  const auto model = LoadModel(a.model);
  const OptimizerConfig base = a.opt.Resolve(*model);
  base.Validate();
  const StcConfig stc{a.tau};
  stc.Validate();

  const auto rows = Ablate(*model, data, grid, base, stc, err);
  std::string csv = std::string(kAblationCsvHeader) + "\n";
  for (const auto& row : rows) csv += FormatAblationRow(row) + "\n";
  WriteText(a.out, csv);
  WriteJson(Sidecar(a.out), Json{{"command", "ablate"},
                                 {"data", a.data},
                                 {"model", a.model},
                                 {"rl_grid", a.rl_grid},
                                 {"rh_grid", a.rh_grid.empty()
                                                 ? FormatDouble(a.rh)
                                                 : a.rh_grid},
                                 {"tau", a.tau},
                                 {"optimizer", ToJson(base)}});
  out << csv;
  return kExitOk;
}

struct DctArgs {
  std::string in, out;
  bool inverse = false;
};

int RunDct(const DctArgs& a, std::ostream& out) {
  const Tensor t = LoadTensor(a.in);
  if (t.rank() != 3) {
    throw ShapeError("dct: expected a rank-3 T x H x W tensor, got " +
                     ShapeString(t.shape()));
  }
  const DctPlan plan(VolumeDims::FromShape(t.shape()));
  SaveTensor(a.inverse ? Idct3(plan, t) : Dct3(plan, t), a.out);
  out << (a.inverse ? "inverse" : "forward") << " DCT of "
      << ShapeString(t.shape()) << " -> " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Frequency-domain extremal perturbation toolkit"};
  app.set_config("--config", "", "TOML/INI file of defaults; flags win");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset");
  generate->add_option("--n", gen.n, "number of clips")->required();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--out", gen.out, "FEPD output path")->required();
  generate->add_option("--preset", gen.preset)
      ->check(CLI::IsMember({"desk", "distractor"}))
      ->capture_default_str();
  generate->add_option("--frames", gen.frames);
  generate->add_option("--channels", gen.channels);
  generate->add_option("--height", gen.height);
  generate->add_option("--width", gen.width);
  generate->add_option("--blob", gen.blob, "blob edge in pixels");
  generate->add_option("--intensity", gen.intensity);
  generate->add_option("--noise", gen.noise, "Gaussian noise sigma");
  generate->add_option("--hf", gen.hf, "high-frequency distractor amplitude");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "build or train a model");
  train->add_option("--data", tr.data)->required();
  train->add_option("--model", tr.model)
      ->check(CLI::IsMember({"template", "tinyconv"}))
      ->capture_default_str();
  train->add_option("--out", tr.out, "FEPM output path")->required();
  train->add_option("--epochs", tr.epochs)->capture_default_str();
  train->add_option("--lr", tr.lr)->capture_default_str();
  train->add_option("--seed", tr.seed)->capture_default_str();
  train->add_option("--temperature", tr.temperature)->capture_default_str();
  train->add_option("--out-channels", tr.out_channels)->capture_default_str();

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "optimize perturbation masks");
  explain->add_option("--data", ex.data)->required();
  explain->add_option("--model", ex.model)->required();
  explain->add_option("--clip", ex.clip, "clip index (default: all)");
  explain->add_option("--method", ex.method)
      ->check(CLI::IsMember({"ep", "fep"}))
      ->capture_default_str();
  explain->add_option("--rl", ex.rl, "low-frequency ratio")->capture_default_str();
  explain->add_option("--rh", ex.rh, "high-frequency ratio")->capture_default_str();
  explain->add_option("--labels", ex.labels, "class to explain")
      ->check(CLI::IsMember({"predicted", "truth"}))
      ->capture_default_str();
  explain->add_option("--out-prefix", ex.out_prefix)->required();
  explain->add_option("--heatmaps", ex.heatmaps, "directory for PGM frames");
  ex.opt.Register(explain);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "score masks");
  evaluate->add_option("--data", ev.data)->required();
  evaluate->add_option("--model", ev.model)->required();
  evaluate->add_option("--masks", ev.masks)->required();
  evaluate->add_option("--out", ev.out, "JSON report path")->required();
  evaluate->add_option("--tau", ev.tau)->capture_default_str();
  evaluate->add_option("--deletion-steps", ev.deletion_steps)
      ->capture_default_str();
  evaluate->add_option("--labels", ev.labels)
      ->check(CLI::IsMember({"predicted", "truth"}))
      ->capture_default_str();
  evaluate->add_option("--deletion-fill", ev.fill)
      ->check(CLI::IsMember({"zero", "blur"}))
      ->capture_default_str();
  evaluate->add_option("--blur-sigma", ev.blur_sigma)->capture_default_str();
  evaluate->add_option("--curves", ev.curves, "deletion curve CSV path");

  AblateArgs ab;
  auto* ablate = app.add_subcommand("ablate", "sweep (r_l, r_h)");
  ablate->add_option("--data", ab.data)->required();
  ablate->add_option("--model", ab.model)->required();
  ablate->add_option("--rl-grid", ab.rl_grid, "e.g. 0.1:0.8:0.1 or 0.3,1")
      ->required();
  auto* rh_opt = ablate->add_option("--rh", ab.rh)->capture_default_str();
  ablate->add_option("--rh-grid", ab.rh_grid)->excludes(rh_opt);
  ablate->add_option("--out", ab.out, "CSV output path")->required();
  ablate->add_option("--tau", ab.tau)->capture_default_str();
  ab.opt.Register(ablate);

  DctArgs dc;
  auto* dct = app.add_subcommand("dct", "3-D DCT of a FEPT tensor");
  dct->add_option("--in", dc.in)->required();
  dct->add_option("--out", dc.out)->required();
  dct->add_flag("--inverse", dc.inverse);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*generate) return Generate(gen, out);
    if (*train) return Train(tr, out);
    if (*explain) return RunExplain(ex, out);
    if (*evaluate) return RunEvaluate(ev, out);
    if (*ablate) return RunAblate(ab, out, err);
    if (*dct) return RunDct(dc, out);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fep
