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

#ifndef FEP_PERTURB_H_
#define FEP_PERTURB_H_

#include <cstddef>
#include <vector>

#include "fep/dct.h"
#include "fep/tensor.h"

namespace fep {

// Truncated, normalized 1-D Gaussian. radius = ceil(3 sigma).
class BlurKernel {
 public:
  explicit BlurKernel(double sigma);

  double sigma() const { return sigma_; }
  std::size_t radius() const { return radius_; }
  // 2 * radius + 1 taps, centre at index radius, summing to 1.
  const std::vector<double>& weights() const { return weights_; }

 private:
  double sigma_;
  std::size_t radius_;
  std::vector<double> weights_;
};

// Index into [0, n) of position `i` under half-sample symmetric reflection
// (... c b a | a b c ... | c b a ...), valid for any integer i.
std::size_t ReflectIndex(long long i, std::size_t n);

// Blurs every (frame, channel) plane of a rank-4 tensor along H and W.
Tensor GaussianBlur(const Tensor& clip, const BlurKernel& kernel);

// The perturbation operator: mask * clip + (1 - mask) * blur(clip). The mask
// is T x 1 x H x W and is repeated across channels.
Tensor Perturb(const Tensor& clip, const Tensor& mask, const BlurKernel& kernel);
// Same, with blur(clip) supplied by the caller.
Tensor Blend(const Tensor& clip, const Tensor& blurred, const Tensor& mask);

// Smooth mask parameterization: an unconstrained coarse grid per frame,
// squashed by the logistic function and interpolated to full resolution with
// normalized Gaussian weights centred on grid nodes at multiples of `step`.
struct MaskParams {
  Tensor grid;  // T x 1 x Hg x Wg, Hg = ceil(H / step), Wg = ceil(W / step)
  std::size_t step = 1;
  double smooth_sigma = 1.0;

  // Grid with every node at `logit`.
  static MaskParams Constant(VolumeDims full, std::size_t step,
                             double smooth_sigma, double logit);
  // Throws ShapeError / ConfigError if the grid does not fit `full`.
  void Validate(VolumeDims full) const;
};

double Logistic(double x);
double Logit(double p);

// n x ceil(n / step) interpolation matrix; each row sums to 1.
Matrix UpsampleMatrix(std::size_t n, std::size_t step, double sigma);

// Cached interpolation matrices for one (volume, step, sigma) combination.
class MaskExpander {
 public:
  MaskExpander(VolumeDims full, std::size_t step, double smooth_sigma);

  VolumeDims full() const { return full_; }
  Shape grid_shape() const;

  // logistic(grid) interpolated to T x 1 x H x W.
  Tensor Expand(const Tensor& grid) const;
  // Transpose of the Jacobian of Expand at `grid`, applied to a T x H x W
  // gradient; result has the grid's shape.
  Tensor PullBack(const Tensor& grid, const Tensor& mask_grad) const;

 private:
  void CheckGrid(const Tensor& grid) const;

  VolumeDims full_;
  Matrix up_h_, up_w_;
  Matrix down_h_, down_w_;
};

// Full-resolution T x 1 x H x W mask with values in [0, 1].
Tensor ExpandMask(const MaskParams& params, VolumeDims full);
// Chain rule through ExpandMask: maps dObjective/dMask (T x H x W) onto the
// grid (T x 1 x Hg x Wg).
Tensor PullBackMaskGradient(const MaskParams& params, VolumeDims full,
                            const Tensor& mask_grad);

struct AreaConfig {
  double a = 0.1;       // target area fraction, in (0, 1)
  double lambda = 0.0;  // regularizer weight, >= 0

  void Validate() const;
};

// ||vecsort(m) - r_a||^2 where vecsort sorts descending and r_a holds
// round(a * N) ones followed by zeros.
double AreaLoss(const Tensor& mask, const AreaConfig& cfg);
// Gradient of AreaLoss, same shape as the mask. Ties are ordered by flat
// index so the result is deterministic.
Tensor AreaLossGradient(const Tensor& mask, const AreaConfig& cfg);

}  // namespace fep

#endif  // FEP_PERTURB_H_
