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

#include "fep/perturb.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fep {
namespace {

// 1-D symmetric-boundary convolution of every fiber along `axis`.
Tensor ConvolveAxis(const Tensor& in, std::size_t axis,
                    const BlurKernel& kernel) {
  const std::size_t n = in.dim(axis);
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= in.dim(i);
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < in.rank(); ++i) inner *= in.dim(i);

  const auto& w = kernel.weights();
  const long long r = static_cast<long long>(kernel.radius());
  Tensor out(in.shape());
  auto src = in.values();
  auto dst = out.mutable_values();
  std::vector<double> fiber(n);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in_i = 0; in_i < inner; ++in_i) {
      const std::size_t base = o * n * inner + in_i;
      for (std::size_t k = 0; k < n; ++k) fiber[k] = src[base + k * inner];
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (long long d = -r; d <= r; ++d) {
          acc += w[static_cast<std::size_t>(d + r)] *
                 fiber[ReflectIndex(static_cast<long long>(k) + d, n)];
        }
        dst[base + k * inner] = acc;
      }
    }
  }
  return out;
}

}  // namespace

BlurKernel::BlurKernel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("BlurKernel: sigma must be > 0, got " +
                      std::to_string(sigma));
  }
  radius_ = static_cast<std::size_t>(std::ceil(3.0 * sigma));
  weights_.resize(2 * radius_ + 1);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(radius_);
    weights_[i] = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& v : weights_) v /= total;
}

std::size_t ReflectIndex(long long i, std::size_t n) {
  const long long period = 2 * static_cast<long long>(n);
  long long m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<long long>(n)) m = period - 1 - m;
  return static_cast<std::size_t>(m);
}

Tensor GaussianBlur(const Tensor& clip, const BlurKernel& kernel) {
  if (clip.rank() != 4) {
    throw ShapeError("GaussianBlur: expected rank-4 tensor, got " +
                     ShapeString(clip.shape()));
  }
  return ConvolveAxis(ConvolveAxis(clip, 2, kernel), 3, kernel);
}

Tensor Blend(const Tensor& clip, const Tensor& blurred, const Tensor& mask) {
  if (clip.rank() != 4) {
    throw ShapeError("Blend: expected a T x C x H x W clip, got " +
                     ShapeString(clip.shape()));
  }
  if (clip.shape() != blurred.shape()) {
    throw ShapeError("Blend: clip " + ShapeString(clip.shape()) +
                     " vs blurred " + ShapeString(blurred.shape()));
  }
  const bool broadcast = internal::CheckBroadcast(clip, mask, "Blend");
  // m * x + (1 - m) * b, so m == 1 reproduces x bit-exactly.
  Tensor out(clip.shape());
  const std::size_t t = clip.dim(0), c = clip.dim(1);
  const std::size_t plane = clip.dim(2) * clip.dim(3);
  for (std::size_t ti = 0; ti < t; ++ti) {
    for (std::size_t ci = 0; ci < c; ++ci) {
      const std::size_t base = (ti * c + ci) * plane;
      const std::size_t mbase = broadcast ? ti * plane : base;
      for (std::size_t p = 0; p < plane; ++p) {
        const double m = mask[mbase + p];
        out[base + p] = m * clip[base + p] + (1.0 - m) * blurred[base + p];
      }
    }
  }
  internal::CheckFinite(out, "Blend");
  return out;
}

Tensor Perturb(const Tensor& clip, const Tensor& mask,
               const BlurKernel& kernel) {
  internal::CheckBroadcast(clip, mask, "Perturb");
  return Blend(clip, GaussianBlur(clip, kernel), mask);
}

double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double Logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("Logit: argument must lie in (0, 1), got " +
                      std::to_string(p));
  }
  return std::log(p / (1.0 - p));
}

MaskParams MaskParams::Constant(VolumeDims full, std::size_t step,
                                double smooth_sigma, double logit) {
  if (step == 0) throw ConfigError("MaskParams: step must be >= 1");
  const std::size_t hg = (full.h + step - 1) / step;
  const std::size_t wg = (full.w + step - 1) / step;
  MaskParams p{Tensor({full.t, 1, hg, wg}, logit), step, smooth_sigma};
  p.Validate(full);
  return p;
}

void MaskParams::Validate(VolumeDims full) const {
  if (step == 0) throw ConfigError("MaskParams: step must be >= 1");
  if (!(smooth_sigma > 0.0) || !std::isfinite(smooth_sigma)) {
    throw ConfigError("MaskParams: smooth_sigma must be > 0");
  }
  const Shape expected{full.t, 1, (full.h + step - 1) / step,
                       (full.w + step - 1) / step};
  if (grid.shape() != expected) {
    throw ShapeError("MaskParams: grid " + ShapeString(grid.shape()) +
                     " does not match expected " + ShapeString(expected));
  }
}

Matrix UpsampleMatrix(std::size_t n, std::size_t step, double sigma) {
  const std::size_t g = (n + step - 1) / step;
  Matrix m(n, g);
  std::vector<double> d2(g);
  for (std::size_t y = 0; y < n; ++y) {
    double nearest = INFINITY;
    for (std::size_t j = 0; j < g; ++j) {
      const double d = static_cast<double>(y) - static_cast<double>(j * step);
      d2[j] = d * d;
      nearest = std::min(nearest, d2[j]);
    }
    // Offsetting by the nearest node keeps tiny sigmas from underflowing
    // every weight to zero.
    double total = 0.0;
    for (std::size_t j = 0; j < g; ++j) {
      m(y, j) = std::exp(-(d2[j] - nearest) / (2.0 * sigma * sigma));
      total += m(y, j);
    }
    for (std::size_t j = 0; j < g; ++j) m(y, j) /= total;
  }
  return m;
}

MaskExpander::MaskExpander(VolumeDims full, std::size_t step,
                           double smooth_sigma)
    : full_(full) {
  if (step == 0) throw ConfigError("MaskExpander: step must be >= 1");
  if (!(smooth_sigma > 0.0) || !std::isfinite(smooth_sigma)) {
    throw ConfigError("MaskExpander: smooth_sigma must be > 0");
  }
  up_h_ = UpsampleMatrix(full.h, step, smooth_sigma);
  up_w_ = UpsampleMatrix(full.w, step, smooth_sigma);
  down_h_ = up_h_.Transposed();
  down_w_ = up_w_.Transposed();
}

Shape MaskExpander::grid_shape() const {
  return {full_.t, 1, up_h_.cols(), up_w_.cols()};
}

void MaskExpander::CheckGrid(const Tensor& grid) const {
  if (grid.shape() != grid_shape()) {
    throw ShapeError("MaskExpander: grid " + ShapeString(grid.shape()) +
                     " does not match expected " +
                     ShapeString(grid_shape()));
  }
}

Tensor MaskExpander::Expand(const Tensor& grid) const {
  CheckGrid(grid);
  // Interpolate around 0.5: rows of the upsampler sum to 1 only up to
  // rounding, and this keeps a constant 0.5 grid exactly 0.5.
  Tensor centred = grid;
  for (double& v : centred.mutable_values()) v = Logistic(v) - 0.5;
  Tensor mask = ApplyAlongAxis(ApplyAlongAxis(centred, 2, up_h_), 3, up_w_);
  for (double& v : mask.mutable_values()) v = std::clamp(v + 0.5, 0.0, 1.0);
  return mask;
}

Tensor MaskExpander::PullBack(const Tensor& grid,
                              const Tensor& mask_grad) const {
  CheckGrid(grid);
  const Tensor g4 = mask_grad.Reshape({full_.t, 1, full_.h, full_.w});
  Tensor out = ApplyAlongAxis(ApplyAlongAxis(g4, 2, down_h_), 3, down_w_);
  auto o = out.mutable_values();
  auto gv = grid.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double s = Logistic(gv[i]);
    o[i] *= s * (1.0 - s);
  }
  return out;
}

Tensor ExpandMask(const MaskParams& params, VolumeDims full) {
  params.Validate(full);
  return MaskExpander(full, params.step, params.smooth_sigma)
      .Expand(params.grid);
}

Tensor PullBackMaskGradient(const MaskParams& params, VolumeDims full,
                            const Tensor& mask_grad) {
  params.Validate(full);
  return MaskExpander(full, params.step, params.smooth_sigma)
      .PullBack(params.grid, mask_grad);
}

void AreaConfig::Validate() const {
  if (!(a > 0.0 && a < 1.0)) {
    throw ConfigError("AreaConfig: a must lie in (0, 1), got " +
                      std::to_string(a));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("AreaConfig: lambda must be >= 0, got " +
                      std::to_string(lambda));
  }
}

namespace {

// Flat indices ordered by descending mask value, ties by index.
std::vector<std::size_t> DescendingOrder(const Tensor& mask) {
  std::vector<std::size_t> order(mask.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) {
                     return mask[i] > mask[j];
                   });
  return order;
}

std::size_t TemplateOnes(const AreaConfig& cfg, std::size_t n) {
  cfg.Validate();
  return static_cast<std::size_t>(std::llround(cfg.a * static_cast<double>(n)));
}

}  // namespace

double AreaLoss(const Tensor& mask, const AreaConfig& cfg) {
  const std::size_t ones = TemplateOnes(cfg, mask.size());
  const auto order = DescendingOrder(mask);
  double loss = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double d = mask[order[k]] - (k < ones ? 1.0 : 0.0);
    loss += d * d;
  }
  return loss;
}

Tensor AreaLossGradient(const Tensor& mask, const AreaConfig& cfg) {
  const std::size_t ones = TemplateOnes(cfg, mask.size());
  const auto order = DescendingOrder(mask);
  Tensor grad(mask.shape());
  for (std::size_t k = 0; k < order.size(); ++k) {
    grad[order[k]] = 2.0 * (mask[order[k]] - (k < ones ? 1.0 : 0.0));
  }
  return grad;
}

}  // namespace fep
