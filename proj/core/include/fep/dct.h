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

#ifndef FEP_DCT_H_
#define FEP_DCT_H_

#include <array>
#include <cstddef>

#include "fep/tensor.h"

namespace fep {

// Extents of a T x H x W volume.
struct VolumeDims {
  std::size_t t = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  Shape shape() const { return {t, h, w}; }
  std::size_t size() const { return t * h * w; }
  static VolumeDims FromShape(const Shape& shape);

  friend bool operator==(const VolumeDims&, const VolumeDims&) = default;
};

// Orthonormal DCT-II matrix: row k, column n holds
// c_k * sqrt(2/N) * cos((2n + 1) k pi / (2N)), c_0 = 1/sqrt(2), c_k = 1.
Matrix DctBasis(std::size_t n);

// Per-axis DCT-II bases for a fixed T x H x W volume. Immutable and safe to
// share between threads.
class DctPlan {
 public:
  explicit DctPlan(VolumeDims dims);

  const VolumeDims& dims() const { return dims_; }
  const Matrix& basis(std::size_t axis) const { return basis_.at(axis); }
  const Matrix& inverse(std::size_t axis) const { return inverse_.at(axis); }

 private:
  VolumeDims dims_;
  std::array<Matrix, 3> basis_;
  std::array<Matrix, 3> inverse_;
};

// Separable 3-D DCT-II of a T x H x W tensor.
Tensor Dct3(const DctPlan& plan, const Tensor& volume);
// Inverse of Dct3 (transposed bases).
Tensor Idct3(const DctPlan& plan, const Tensor& coefficients);

// Fractions of the low and high ends of the spectrum that survive
// modulation. Requires r_l, r_h in [0, 1] and r_l + r_h <= 1.
struct GfmConfig {
  double r_l = 1.0;
  double r_h = 0.0;

  // Throws ConfigError when the invariants above do not hold.
  void Validate() const;

  friend bool operator==(const GfmConfig&, const GfmConfig&) = default;
};

// Binary frequency selections over T x H x W coefficients.
//   low(i,j,k)  = 1 iff i < ceil(r_l T) and j < ceil(r_l H) and k < ceil(r_l W)
//   high(i,j,k) = 1 iff i >= floor((1-r_h) T) or j >= ... or k >= ...
// Coefficients claimed by `low` are removed from `high`, so the two bands
// never overlap.
struct BandMaskPair {
  Tensor low;
  Tensor high;
};

BandMaskPair BuildBandMasks(const GfmConfig& cfg, VolumeDims dims);

// Number of leading indices kept by the low band along an axis of length n.
std::size_t LowBandExtent(double r_l, std::size_t n);
// First index of the high band along an axis of length n.
std::size_t HighBandStart(double r_h, std::size_t n);

// idct3(low * dct3(grad)) + idct3(high * dct3(grad)).
Tensor ModulateGradient(const DctPlan& plan, const Tensor& grad,
                        const BandMaskPair& masks);

}  // namespace fep

#endif  // FEP_DCT_H_
