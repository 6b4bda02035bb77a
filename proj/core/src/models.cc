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

#include "fep/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fep {

std::string_view ScoreModeName(ScoreMode mode) {
  return mode == ScoreMode::kLogit ? "logit" : "probability";
}

ScoreMode ParseScoreMode(std::string_view name) {
  if (name == "probability" || name == "prob") return ScoreMode::kProbability;
  if (name == "logit") return ScoreMode::kLogit;
  throw ConfigError("unknown score mode '" + std::string(name) +
                    "' (expected probability or logit)");
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double peak = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

std::size_t ArgMax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void Model::CheckClip(const Tensor& clip) const {
  if (clip.shape() != clip_shape().clip()) {
    throw ShapeError("Model: clip " + ShapeString(clip.shape()) +
                     " does not match model input " +
                     ShapeString(clip_shape().clip()));
  }
}

void Model::CheckSeed(std::span<const double> seed) const {
  if (seed.size() != num_classes()) {
    throw ShapeError("Model: expected " + std::to_string(num_classes()) +
                     " logit seeds, got " + std::to_string(seed.size()));
  }
}

Prediction Predict(const Model& model, const Tensor& clip) {
  const auto logits = model.Logits(clip);
  Prediction p;
  p.probs = Softmax(logits);
  p.label = ArgMax(p.probs);
  return p;
}

namespace {

void CheckClass(const Model& model, std::size_t class_index) {
  if (class_index >= model.num_classes()) {
    throw ConfigError("class index " + std::to_string(class_index) +
                      " out of range for " +
                      std::to_string(model.num_classes()) + " classes");
  }
}

}  // namespace

double ClassScore(const Model& model, const Tensor& clip,
                  std::size_t class_index, ScoreMode mode) {
  CheckClass(model, class_index);
  const auto logits = model.Logits(clip);
  if (mode == ScoreMode::kLogit) return logits[class_index];
  return Softmax(logits)[class_index];
}

Tensor InputGradient(const Model& model, const Tensor& clip,
                     std::size_t class_index, ScoreMode mode) {
  CheckClass(model, class_index);
  std::vector<double> seed(model.num_classes(), 0.0);
  if (mode == ScoreMode::kLogit) {
    seed[class_index] = 1.0;
  } else {
    // d p_y / d logit_k = p_y (1[k == y] - p_k)
    const auto p = Softmax(model.Logits(clip));
    for (std::size_t k = 0; k < seed.size(); ++k) {
      seed[k] = p[class_index] * ((k == class_index ? 1.0 : 0.0) - p[k]);
    }
  }
  return model.LogitsVjp(clip, seed);
}

// ---------------------------------------------------------------------------
// TemplateModel

TemplateModel::TemplateModel(ClipShape shape, std::vector<Tensor> templates,
                             std::vector<double> bias, double temperature)
    : shape_(shape),
      templates_(std::move(templates)),
      bias_(std::move(bias)),
      temperature_(temperature) {
  shape_.Validate();
  if (templates_.empty()) throw ConfigError("TemplateModel: no classes");
  if (bias_.size() != templates_.size()) {
    throw ShapeError("TemplateModel: bias size does not match class count");
  }
  if (!(temperature_ > 0.0) || !std::isfinite(temperature_)) {
    throw ConfigError("TemplateModel: temperature must be > 0");
  }
  for (const Tensor& t : templates_) {
    if (t.shape() != shape_.clip()) {
      throw ShapeError("TemplateModel: template " + ShapeString(t.shape()) +
                       " does not match clip " + ShapeString(shape_.clip()));
    }
  }
}

std::vector<double> TemplateModel::Logits(const Tensor& clip) const {
  CheckClip(clip);
  std::vector<double> logits(templates_.size());
  auto x = clip.values();
  for (std::size_t y = 0; y < templates_.size(); ++y) {
    auto w = templates_[y].values();
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += w[i] * x[i];
    logits[y] = dot / temperature_ + bias_[y];
  }
  return logits;
}

Tensor TemplateModel::LogitsVjp(const Tensor& clip,
                                std::span<const double> seed) const {
  CheckClip(clip);
  CheckSeed(seed);
  Tensor grad(shape_.clip());
  auto g = grad.mutable_values();
  for (std::size_t y = 0; y < templates_.size(); ++y) {
    if (seed[y] == 0.0) continue;
    const double s = seed[y] / temperature_;
    auto w = templates_[y].values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * w[i];
  }
  return grad;
}

// ---------------------------------------------------------------------------
// TinyConvModel

TinyConvModel::TinyConvModel(ClipShape shape, std::size_t num_classes,
                             TinyConvParams params)
    : shape_(shape), num_classes_(num_classes), params_(std::move(params)) {
  shape_.Validate();
  if (num_classes_ == 0) throw ConfigError("TinyConvModel: no classes");
  const Tensor& k = params_.kernel;
  if (k.rank() != 5 || k.dim(1) != shape_.c || k.dim(0) == 0) {
    throw ShapeError("TinyConvModel: kernel must be C_out x C x kt x kh x kw, "
                     "got " + ShapeString(k.shape()));
  }
  const std::size_t cout = k.dim(0);
  if (k.dim(2) > shape_.t || k.dim(3) > shape_.h || k.dim(4) > shape_.w ||
      k.dim(2) == 0 || k.dim(3) == 0 || k.dim(4) == 0) {
    throw ShapeError("TinyConvModel: kernel " + ShapeString(k.shape()) +
                     " does not fit clip " + ShapeString(shape_.clip()));
  }
  if (params_.conv_bias.size() != cout ||
      params_.head.shape() != Shape{num_classes_, cout} ||
      params_.head_bias.size() != num_classes_) {
    throw ShapeError("TinyConvModel: bias/head sizes inconsistent");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(params_.conv_bias.begin(), params_.conv_bias.end(),
                   finite) ||
      !std::all_of(params_.head_bias.begin(), params_.head_bias.end(),
                   finite)) {
    throw NumericalError("TinyConvModel: non-finite parameter");
  }
  out_t_ = shape_.t - k.dim(2) + 1;
  out_h_ = shape_.h - k.dim(3) + 1;
  out_w_ = shape_.w - k.dim(4) + 1;
}

TinyConvModel TinyConvModel::Random(ClipShape shape, std::size_t num_classes,
                                    ConvGeometry g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double fan_in = static_cast<double>(shape.c * g.kt * g.kh * g.kw);
  std::normal_distribution<double> conv_dist(0.0, std::sqrt(2.0 / fan_in));
  std::normal_distribution<double> head_dist(
      0.0, std::sqrt(1.0 / static_cast<double>(g.out_channels)));
  TinyConvParams p;
  p.kernel = Tensor({g.out_channels, shape.c, g.kt, g.kh, g.kw});
  for (double& v : p.kernel.mutable_values()) v = conv_dist(rng);
  p.conv_bias.assign(g.out_channels, 0.01);
  p.head = Tensor({num_classes, g.out_channels});
  for (double& v : p.head.mutable_values()) v = head_dist(rng);
  p.head_bias.assign(num_classes, 0.0);
  return TinyConvModel(shape, num_classes, std::move(p));
}

ConvGeometry TinyConvModel::geometry() const {
  const Tensor& k = params_.kernel;
  return {k.dim(0), k.dim(2), k.dim(3), k.dim(4)};
}

TinyConvModel::Activations TinyConvModel::Forward(const Tensor& clip) const {
  CheckClip(clip);
  const Tensor& k = params_.kernel;
  const std::size_t cout = k.dim(0), cin = shape_.c;
  const std::size_t kt = k.dim(2), kh = k.dim(3), kw = k.dim(4);
  const std::size_t H = shape_.h, W = shape_.w;
  auto x = clip.values();
  auto kv = k.values();

  Activations act;
  act.pre = Tensor({cout, out_t_, out_h_, out_w_});
  auto pre = act.pre.mutable_values();
  std::size_t idx = 0;
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t t = 0; t < out_t_; ++t) {
      for (std::size_t h = 0; h < out_h_; ++h) {
        for (std::size_t w = 0; w < out_w_; ++w, ++idx) {
          double acc = params_.conv_bias[o];
          std::size_t ki = o * cin * kt * kh * kw;
          for (std::size_t c = 0; c < cin; ++c) {
            for (std::size_t dt = 0; dt < kt; ++dt) {
              for (std::size_t dh = 0; dh < kh; ++dh) {
                const std::size_t row =
                    (((t + dt) * cin + c) * H + (h + dh)) * W + w;
                for (std::size_t dw = 0; dw < kw; ++dw, ++ki) {
                  acc += kv[ki] * x[row + dw];
                }
              }
            }
          }
          pre[idx] = acc;
        }
      }
    }
  }

  const std::size_t positions = out_t_ * out_h_ * out_w_;
  act.pooled.assign(cout, 0.0);
  for (std::size_t o = 0; o < cout; ++o) {
    double s = 0.0;
    for (std::size_t p = 0; p < positions; ++p) {
      s += std::max(0.0, pre[o * positions + p]);
    }
    act.pooled[o] = s / static_cast<double>(positions);
  }

  act.logits.assign(num_classes_, 0.0);
  for (std::size_t y = 0; y < num_classes_; ++y) {
    double s = params_.head_bias[y];
    for (std::size_t o = 0; o < cout; ++o) {
      s += params_.head[y * cout + o] * act.pooled[o];
    }
    act.logits[y] = s;
  }
  return act;
}

void TinyConvModel::Backward(const Tensor& clip, const Activations& act,
                             std::span<const double> dlogits, Tensor* dclip,
                             TinyConvParams* dparams) const {
  const Tensor& k = params_.kernel;
  const std::size_t cout = k.dim(0), cin = shape_.c;
  const std::size_t kt = k.dim(2), kh = k.dim(3), kw = k.dim(4);
  const std::size_t H = shape_.h, W = shape_.w;
  const std::size_t positions = out_t_ * out_h_ * out_w_;

  std::vector<double> dpooled(cout, 0.0);
  for (std::size_t y = 0; y < num_classes_; ++y) {
    for (std::size_t o = 0; o < cout; ++o) {
      dpooled[o] += dlogits[y] * params_.head[y * cout + o];
    }
  }
  if (dparams) {
    for (std::size_t y = 0; y < num_classes_; ++y) {
      dparams->head_bias[y] += dlogits[y];
      for (std::size_t o = 0; o < cout; ++o) {
        dparams->head[y * cout + o] += dlogits[y] * act.pooled[o];
      }
    }
  }

  auto pre = act.pre.values();
  auto x = clip.values();
  auto kv = k.values();
  std::span<double> dx;
  if (dclip) dx = dclip->mutable_values();
  std::span<double> dk;
  if (dparams) dk = dparams->kernel.mutable_values();

  std::size_t idx = 0;
  for (std::size_t o = 0; o < cout; ++o) {
    const double dact = dpooled[o] / static_cast<double>(positions);
    for (std::size_t t = 0; t < out_t_; ++t) {
      for (std::size_t h = 0; h < out_h_; ++h) {
        for (std::size_t w = 0; w < out_w_; ++w, ++idx) {
          if (!(pre[idx] > 0.0)) continue;
          if (dparams) dparams->conv_bias[o] += dact;
          std::size_t ki = o * cin * kt * kh * kw;
          for (std::size_t c = 0; c < cin; ++c) {
            for (std::size_t dt = 0; dt < kt; ++dt) {
              for (std::size_t dh = 0; dh < kh; ++dh) {
                const std::size_t row =
                    (((t + dt) * cin + c) * H + (h + dh)) * W + w;
                for (std::size_t dw = 0; dw < kw; ++dw, ++ki) {
                  if (dclip) dx[row + dw] += kv[ki] * dact;
                  if (dparams) dk[ki] += x[row + dw] * dact;
                }
              }
            }
          }
        }
      }
    }
  }
}

std::vector<double> TinyConvModel::Logits(const Tensor& clip) const {
  return Forward(clip).logits;
}

Tensor TinyConvModel::LogitsVjp(const Tensor& clip,
                                std::span<const double> seed) const {
  CheckSeed(seed);
  const Activations act = Forward(clip);
  Tensor grad(shape_.clip());
  Backward(clip, act, seed, &grad, nullptr);
  return grad;
}

double TinyConvModel::MinAbsPreActivation(const Tensor& clip) const {
  const Activations act = Forward(clip);
  double m = INFINITY;
  for (double v : act.pre.values()) m = std::min(m, std::abs(v));
  return m;
}

namespace {

TinyConvParams ZerosLike(const TinyConvParams& p) {
  return {Tensor(p.kernel.shape()), std::vector<double>(p.conv_bias.size()),
          Tensor(p.head.shape()), std::vector<double>(p.head_bias.size())};
}

}  // namespace

double TinyConvModel::LossAndGradient(const Tensor& clip, std::size_t label,
                                      TinyConvParams& grad) const {
  if (label >= num_classes_) throw ConfigError("LossAndGradient: bad label");
  const Activations act = Forward(clip);
  std::vector<double> dlogits = Softmax(act.logits);
  const double loss = -std::log(std::max(dlogits[label], 1e-300));
  dlogits[label] -= 1.0;
  grad = ZerosLike(params_);
  Backward(clip, act, dlogits, nullptr, &grad);
  return loss;
}

void TinyConvModel::ApplyGradient(const TinyConvParams& grad,
                                  double learning_rate) {
  auto step = [learning_rate](std::span<double> p, std::span<const double> g) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= learning_rate * g[i];
  };
  step(params_.kernel.mutable_values(), grad.kernel.values());
  step(params_.conv_bias, grad.conv_bias);
  step(params_.head.mutable_values(), grad.head.values());
  step(params_.head_bias, grad.head_bias);
  if (!params_.kernel.AllFinite() || !params_.head.AllFinite()) {
    throw NumericalError("TinyConvModel: parameters diverged");
  }
}

std::vector<double> TrainTinyConv(TinyConvModel& model,
                                  std::span<const Tensor> clips,
                                  std::span<const std::size_t> labels,
                                  const TrainConfig& cfg) {
  if (clips.size() != labels.size()) {
    throw ShapeError("TrainTinyConv: clip and label counts differ");
  }
  if (clips.empty()) throw ConfigError("TrainTinyConv: empty training set");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> epoch_loss;
  TinyConvParams grad;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t i : order) {
      total += model.LossAndGradient(clips[i], labels[i], grad);
      model.ApplyGradient(grad, cfg.learning_rate);
    }
    epoch_loss.push_back(total / static_cast<double>(clips.size()));
  }
  return epoch_loss;
}

// ---------------------------------------------------------------------------
// Mask objective and its gradient

Tensor MaskGradient(const Model& model, const Tensor& clip,
                    const Tensor& blurred, const Tensor& mask,
                    std::size_t class_index, const AreaConfig& area,
                    ScoreMode mode) {
  area.Validate();
  const VolumeDims dims = VolumeDims::FromShape(mask.shape());
  const Tensor perturbed = Blend(clip, blurred, mask);
  const Tensor dscore = InputGradient(model, perturbed, class_index, mode);
  // d(perturbed)/d(mask) = clip - blurred, summed over channels.
  const Tensor model_term =
      ReduceChannels(Multiply(dscore, Subtract(clip, blurred)));
  const Tensor area_term =
      AreaLossGradient(mask, area).Reshape(dims.shape());
  return AddScaled(model_term, -area.lambda, area_term);
}

Tensor MaskGradient(const Model& model, const Tensor& clip, const Tensor& mask,
                    const BlurKernel& kernel, std::size_t class_index,
                    const AreaConfig& area, ScoreMode mode) {
  return MaskGradient(model, clip, GaussianBlur(clip, kernel), mask,
                      class_index, area, mode);
}

double MaskObjective(const Model& model, const Tensor& clip,
                     const Tensor& blurred, const Tensor& mask,
                     std::size_t class_index, const AreaConfig& area,
                     ScoreMode mode) {
  const double score =
      ClassScore(model, Blend(clip, blurred, mask), class_index, mode);
  return score - area.lambda * AreaLoss(mask, area);
}

double FiniteDifferencePartial(const ScalarField& f, const Tensor& point,
                               std::size_t index, double step) {
  if (!(step > 0.0)) throw ConfigError("finite differences need step > 0");
  Tensor probe = point;
  const double x0 = probe[index];
  probe[index] = x0 + step;
  const double up = f(probe);
  probe[index] = x0 - step;
  const double down = f(probe);
  return (up - down) / (2.0 * step);
}

Tensor FiniteDifferenceGradient(const ScalarField& f, const Tensor& point,
                                double step) {
  Tensor grad(point.shape());
  for (std::size_t i = 0; i < point.size(); ++i) {
    grad[i] = FiniteDifferencePartial(f, point, i, step);
  }
  return grad;
}

// ---------------------------------------------------------------------------
// FEPM checkpoints

std::vector<std::uint8_t> ModelToBytes(const Model& model) {
  ByteWriter w;
  w.Magic("FEPM");
  w.U8(kModelFormatVersion);
  w.U8(static_cast<std::uint8_t>(model.kind()));
  const ClipShape& s = model.clip_shape();
  for (std::size_t d : {s.t, s.c, s.h, s.w}) w.U32(static_cast<std::uint32_t>(d));
  w.U32(static_cast<std::uint32_t>(model.num_classes()));
  if (const auto* tm = dynamic_cast<const TemplateModel*>(&model)) {
    w.F64(tm->temperature());
    for (const Tensor& t : tm->templates()) w.F64s(t.values());
    w.F64s(tm->bias());
  } else if (const auto* cm = dynamic_cast<const TinyConvModel*>(&model)) {
    const ConvGeometry g = cm->geometry();
    for (std::size_t d : {g.out_channels, g.kt, g.kh, g.kw}) {
      w.U32(static_cast<std::uint32_t>(d));
    }
    const TinyConvParams& p = cm->params();
    w.F64s(p.kernel.values());
    w.F64s(p.conv_bias);
    w.F64s(p.head.values());
    w.F64s(p.head_bias);
  } else {
    throw ConfigError("ModelToBytes: unsupported model type");
  }
  return w.bytes();
}

std::unique_ptr<Model> ModelFromBytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.ExpectMagic("FEPM");
  const std::size_t version_at = r.offset();
  const std::uint8_t version = r.U8();
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported FEPM version " + std::to_string(version),
                      version_at);
  }
  const std::size_t kind_at = r.offset();
  const std::uint8_t kind = r.U8();
  ClipShape s;
  s.t = r.U32();
  s.c = r.U32();
  s.h = r.U32();
  s.w = r.U32();
  const std::size_t classes = r.U32();
  const std::size_t body_at = r.offset();
  std::unique_ptr<Model> model;
  try {
    if (kind == static_cast<std::uint8_t>(ModelKind::kTemplate)) {
      const double temperature = r.F64();
      std::vector<Tensor> templates;
      for (std::size_t y = 0; y < classes; ++y) {
        templates.emplace_back(s.clip(), r.F64s(ShapeProduct(s.clip())));
      }
      std::vector<double> bias = r.F64s(classes);
      model = std::make_unique<TemplateModel>(s, std::move(templates),
                                              std::move(bias), temperature);
    } else if (kind == static_cast<std::uint8_t>(ModelKind::kTinyConv)) {
      ConvGeometry g;
      g.out_channels = r.U32();
      g.kt = r.U32();
      g.kh = r.U32();
      g.kw = r.U32();
      TinyConvParams p;
      const Shape kshape{g.out_channels, s.c, g.kt, g.kh, g.kw};
      p.kernel = Tensor(kshape, r.F64s(ShapeProduct(kshape)));
      p.conv_bias = r.F64s(g.out_channels);
      p.head = Tensor({classes, g.out_channels},
                      r.F64s(classes * g.out_channels));
      p.head_bias = r.F64s(classes);
      model = std::make_unique<TinyConvModel>(s, classes, std::move(p));
    } else {
      throw FormatError("unknown FEPM model kind " + std::to_string(kind),
                        kind_at);
    }
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("invalid FEPM body: ") + e.what(), body_at);
  }
  r.ExpectEnd();
  return model;
}

void SaveModel(const Model& model, const std::filesystem::path& path) {
  WriteFileBytes(path, ModelToBytes(model));
}

std::unique_ptr<Model> LoadModel(const std::filesystem::path& path) {
  return ModelFromBytes(ReadFileBytes(path));
}

}  // namespace fep
