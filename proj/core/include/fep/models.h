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

#ifndef FEP_MODELS_H_
#define FEP_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "fep/perturb.h"
#include "fep/tensor.h"
#include "fep/tensor_io.h"

namespace fep {

// Which quantity of the classifier the explanation maximizes.
enum class ScoreMode {
  kProbability,  // softmax probability of the target class
  kLogit,        // pre-softmax score of the target class
};

std::string_view ScoreModeName(ScoreMode mode);
// Accepts "probability"/"prob" and "logit"; throws ConfigError otherwise.
ScoreMode ParseScoreMode(std::string_view name);

struct Prediction {
  std::vector<double> probs;
  std::size_t label = 0;  // argmax, ties to the lowest index
};

std::vector<double> Softmax(std::span<const double> logits);
std::size_t ArgMax(std::span<const double> values);

enum class ModelKind : std::uint8_t { kTemplate = 1, kTinyConv = 2 };

// A differentiable video classifier over clips of a fixed shape.
class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual const ClipShape& clip_shape() const = 0;

  virtual std::vector<double> Logits(const Tensor& clip) const = 0;
  // Vector-Jacobian product of the logits: sum_y seed[y] * dlogit_y/dclip.
  virtual Tensor LogitsVjp(const Tensor& clip,
                           std::span<const double> seed) const = 0;

 protected:
  void CheckClip(const Tensor& clip) const;
  void CheckSeed(std::span<const double> seed) const;
};

Prediction Predict(const Model& model, const Tensor& clip);
double ClassScore(const Model& model, const Tensor& clip,
                  std::size_t class_index, ScoreMode mode);
// Exact gradient of ClassScore with respect to every clip element.
Tensor InputGradient(const Model& model, const Tensor& clip,
                     std::size_t class_index,
                     ScoreMode mode = ScoreMode::kProbability);

// logits_y = <templates[y], clip> / temperature + bias[y].
class TemplateModel final : public Model {
 public:
  TemplateModel(ClipShape shape, std::vector<Tensor> templates,
                std::vector<double> bias, double temperature);

  ModelKind kind() const override { return ModelKind::kTemplate; }
  std::size_t num_classes() const override { return templates_.size(); }
  const ClipShape& clip_shape() const override { return shape_; }

  std::vector<double> Logits(const Tensor& clip) const override;
  Tensor LogitsVjp(const Tensor& clip,
                   std::span<const double> seed) const override;

  const std::vector<Tensor>& templates() const { return templates_; }
  const std::vector<double>& bias() const { return bias_; }
  double temperature() const { return temperature_; }

 private:
  ClipShape shape_;
  std::vector<Tensor> templates_;
  std::vector<double> bias_;
  double temperature_;
};

struct ConvGeometry {
  std::size_t out_channels = 4;
  std::size_t kt = 3;
  std::size_t kh = 3;
  std::size_t kw = 3;
};

struct TinyConvParams {
  Tensor kernel;                 // C_out x C x kt x kh x kw
  std::vector<double> conv_bias;  // C_out
  Tensor head;                   // Y x C_out
  std::vector<double> head_bias;  // Y
};

// Valid 3-D convolution -> ReLU -> global average pool -> linear -> logits.
// The ReLU derivative at exactly 0 is taken as 0.
class TinyConvModel final : public Model {
 public:
  TinyConvModel(ClipShape shape, std::size_t num_classes,
                TinyConvParams params);

  // He-style Gaussian initialization from a fixed seed.
  static TinyConvModel Random(ClipShape shape, std::size_t num_classes,
                              ConvGeometry geometry, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kTinyConv; }
  std::size_t num_classes() const override { return num_classes_; }
  const ClipShape& clip_shape() const override { return shape_; }

  std::vector<double> Logits(const Tensor& clip) const override;
  Tensor LogitsVjp(const Tensor& clip,
                   std::span<const double> seed) const override;

  const TinyConvParams& params() const { return params_; }
  ConvGeometry geometry() const;

  // Smallest |pre-activation| over the conv output; near-zero values sit on
  // the ReLU kink where finite differences are unreliable.
  double MinAbsPreActivation(const Tensor& clip) const;

  // Softmax cross-entropy for one example; writes d loss / d params.
  double LossAndGradient(const Tensor& clip, std::size_t label,
                         TinyConvParams& grad) const;
  // params -= learning_rate * grad
  void ApplyGradient(const TinyConvParams& grad, double learning_rate);

 private:
  struct Activations {
    Tensor pre;  // C_out x To x Ho x Wo
    std::vector<double> pooled;
    std::vector<double> logits;
  };
  Activations Forward(const Tensor& clip) const;
  // Backpropagates d logits; fills input and/or parameter gradients.
  void Backward(const Tensor& clip, const Activations& act,
                std::span<const double> dlogits, Tensor* dclip,
                TinyConvParams* dparams) const;

  ClipShape shape_;
  std::size_t num_classes_;
  TinyConvParams params_;
  std::size_t out_t_, out_h_, out_w_;
};

struct TrainConfig {
  std::size_t epochs = 40;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
};

// Plain per-example SGD on softmax cross-entropy, examples shuffled each
// epoch from `cfg.seed`. Returns the mean loss of every epoch.
std::vector<double> TrainTinyConv(TinyConvModel& model,
                                  std::span<const Tensor> clips,
                                  std::span<const std::size_t> labels,
                                  const TrainConfig& cfg);

// Gradient of score_y(mask (x) clip) - lambda * R_a(mask) with respect to the
// mask, as a T x H x W map. `blurred` must equal GaussianBlur(clip, kernel).
Tensor MaskGradient(const Model& model, const Tensor& clip,
                    const Tensor& blurred, const Tensor& mask,
                    std::size_t class_index, const AreaConfig& area,
                    ScoreMode mode = ScoreMode::kProbability);
Tensor MaskGradient(const Model& model, const Tensor& clip, const Tensor& mask,
                    const BlurKernel& kernel, std::size_t class_index,
                    const AreaConfig& area,
                    ScoreMode mode = ScoreMode::kProbability);

// score_y(mask (x) clip) - lambda * R_a(mask).
double MaskObjective(const Model& model, const Tensor& clip,
                     const Tensor& blurred, const Tensor& mask,
                     std::size_t class_index, const AreaConfig& area,
                     ScoreMode mode = ScoreMode::kProbability);

using ScalarField = std::function<double(const Tensor&)>;

// Central difference (f(x + h e_i) - f(x - h e_i)) / 2h at one entry.
double FiniteDifferencePartial(const ScalarField& f, const Tensor& point,
                               std::size_t index, double step);
// Central differences at every entry.
Tensor FiniteDifferenceGradient(const ScalarField& f, const Tensor& point,
                                double step);

// FEPM checkpoints: "FEPM", u8 version, u8 kind, u32 T/C/H/W, u32 classes,
// kind-specific u32 header, then the f64 parameter payload.
inline constexpr std::uint8_t kModelFormatVersion = 1;

std::vector<std::uint8_t> ModelToBytes(const Model& model);
std::unique_ptr<Model> ModelFromBytes(std::span<const std::uint8_t> bytes);
void SaveModel(const Model& model, const std::filesystem::path& path);
std::unique_ptr<Model> LoadModel(const std::filesystem::path& path);

}  // namespace fep

#endif  // FEP_MODELS_H_
