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

#include "fep/dct.h"

#include <cmath>
#include <numbers>

namespace fep {
namespace {

// Ratios like 0.3 * 10 land a few ulps either side of an integer; snap them
// before rounding so band extents follow the decimal value.
constexpr double kRatioSnap = 1e-9;

void CheckVolume(const DctPlan& plan, const Tensor& t, const char* op) {
  if (t.shape() != plan.dims().shape()) {
    throw ShapeError(std::string(op) + ": tensor " + ShapeString(t.shape()) +
                     " does not match plan " +
                     ShapeString(plan.dims().shape()));
  }
}

}  // namespace

VolumeDims VolumeDims::FromShape(const Shape& shape) {
  if (shape.size() == 3) return {shape[0], shape[1], shape[2]};
  if (shape.size() == 4 && shape[1] == 1) return {shape[0], shape[2], shape[3]};
  throw ShapeError("VolumeDims: expected T x H x W or T x 1 x H x W, got " +
                   ShapeString(shape));
}

Matrix DctBasis(std::size_t n) {
  if (n == 0) throw ShapeError("DctBasis: length must be >= 1");
  Matrix m(n, n);
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double ck = k == 0 ? 1.0 / std::numbers::sqrt2 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      m(k, i) = ck * scale *
                std::cos(static_cast<double>((2 * i + 1) * k) *
                         std::numbers::pi / (2.0 * static_cast<double>(n)));
    }
  }
  return m;
}

DctPlan::DctPlan(VolumeDims dims)
    : dims_(dims),
      basis_{DctBasis(dims.t), DctBasis(dims.h), DctBasis(dims.w)},
      inverse_{basis_[0].Transposed(), basis_[1].Transposed(),
               basis_[2].Transposed()} {}

Tensor Dct3(const DctPlan& plan, const Tensor& volume) {
  CheckVolume(plan, volume, "Dct3");
  Tensor out = ApplyAlongAxis(volume, 0, plan.basis(0));
  out = ApplyAlongAxis(out, 1, plan.basis(1));
  return ApplyAlongAxis(out, 2, plan.basis(2));
}

Tensor Idct3(const DctPlan& plan, const Tensor& coefficients) {
  CheckVolume(plan, coefficients, "Idct3");
  Tensor out = ApplyAlongAxis(coefficients, 0, plan.inverse(0));
  out = ApplyAlongAxis(out, 1, plan.inverse(1));
  return ApplyAlongAxis(out, 2, plan.inverse(2));
}

void GfmConfig::Validate() const {
  if (!std::isfinite(r_l) || !std::isfinite(r_h) || r_l < 0.0 || r_h < 0.0 ||
      r_l > 1.0 || r_h > 1.0) {
    throw ConfigError("GfmConfig: r_l and r_h must lie in [0, 1], got r_l=" +
                      std::to_string(r_l) + " r_h=" + std::to_string(r_h));
  }
  if (r_l + r_h > 1.0 + 1e-12) {
    throw ConfigError("GfmConfig: r_l + r_h must not exceed 1, got r_l=" +
                      std::to_string(r_l) + " r_h=" + std::to_string(r_h));
  }
}

std::size_t LowBandExtent(double r_l, std::size_t n) {
  const double v = std::ceil(r_l * static_cast<double>(n) - kRatioSnap);
  return static_cast<std::size_t>(std::max(0.0, v));
}

std::size_t HighBandStart(double r_h, std::size_t n) {
  const double v =
      std::floor((1.0 - r_h) * static_cast<double>(n) + kRatioSnap);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, v)));
}

BandMaskPair BuildBandMasks(const GfmConfig& cfg, VolumeDims dims) {
  cfg.Validate();
  const std::size_t lt = LowBandExtent(cfg.r_l, dims.t);
  const std::size_t lh = LowBandExtent(cfg.r_l, dims.h);
  const std::size_t lw = LowBandExtent(cfg.r_l, dims.w);
  const std::size_t ht = HighBandStart(cfg.r_h, dims.t);
  const std::size_t hh = HighBandStart(cfg.r_h, dims.h);
  const std::size_t hw = HighBandStart(cfg.r_h, dims.w);

  BandMaskPair masks{Tensor(dims.shape()), Tensor(dims.shape())};
  std::size_t idx = 0;
  for (std::size_t i = 0; i < dims.t; ++i) {
    for (std::size_t j = 0; j < dims.h; ++j) {
      for (std::size_t k = 0; k < dims.w; ++k, ++idx) {
        const bool low = i < lt && j < lh && k < lw;
        const bool high = i >= ht || j >= hh || k >= hw;
        masks.low[idx] = low ? 1.0 : 0.0;
        masks.high[idx] = (high && !low) ? 1.0 : 0.0;
      }
    }
  }
  return masks;
}

Tensor ModulateGradient(const DctPlan& plan, const Tensor& grad,
                        const BandMaskPair& masks) {
  CheckVolume(plan, grad, "ModulateGradient");
  if (masks.low.shape() != grad.shape() || masks.high.shape() != grad.shape()) {
    throw ShapeError("ModulateGradient: band masks " +
                     ShapeString(masks.low.shape()) + " do not match gradient " +
                     ShapeString(grad.shape()));
  }
  const Tensor spectrum = Dct3(plan, grad);
  const Tensor low = Idct3(plan, Multiply(masks.low, spectrum));
  const Tensor high = Idct3(plan, Multiply(masks.high, spectrum));
  return Add(low, high);
}

}  // namespace fep
