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

#ifndef FEP_TENSOR_H_
#define FEP_TENSOR_H_

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fep/error.h"

namespace fep {

using Shape = std::vector<std::size_t>;

std::string ShapeString(const Shape& shape);
std::size_t ShapeProduct(const Shape& shape);

// Dense row-major tensor of doubles. Element (i0, ..., ik) lives at flat
// offset ((i0 * d1 + i1) * d2 + i2) ... .
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  // Throws ShapeError if values.size() != product(shape), NumericalError if
  // any value is not finite.
  Tensor(Shape shape, std::vector<double> values);

  static Tensor Zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor Ones(Shape shape) { return Tensor(std::move(shape), 1.0); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  template <typename... Idx>
  double at(Idx... idx) const {
    return values_[Offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... Idx>
  double& at(Idx... idx) {
    return values_[Offset({static_cast<std::size_t>(idx)...})];
  }

  // Flat offset of a full multi-index. Throws ShapeError on rank mismatch or
  // out-of-range coordinates.
  std::size_t Offset(std::initializer_list<std::size_t> index) const;
  std::size_t Offset(std::span<const std::size_t> index) const;
  // Inverse of Offset.
  std::vector<std::size_t> Unravel(std::size_t offset) const;

  // Same values, new shape with the same element count.
  Tensor Reshape(Shape shape) const&;
  Tensor Reshape(Shape shape) &&;

  bool AllFinite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Video clip geometry: frames x channels x height x width.
struct ClipShape {
  std::size_t t = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  // Throws ConfigError if any extent is zero.
  void Validate() const;

  Shape clip() const { return {t, c, h, w}; }
  Shape mask() const { return {t, 1, h, w}; }
  Shape volume() const { return {t, h, w}; }
  std::size_t voxels() const { return t * h * w; }

  // Reads T, C, H, W from a rank-4 shape.
  static ClipShape FromClip(const Shape& shape);

  friend bool operator==(const ClipShape&, const ClipShape&) = default;
};

// Dense row-major matrix used for axis-wise linear maps.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix Identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }
  std::span<const double> values() const { return values_; }

  Matrix Transposed() const;
  Matrix operator*(const Matrix& rhs) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

namespace internal {
// Throws ShapeError unless rhs matches lhs exactly or is lhs with the
// channel axis (axis 1 of a rank-4 tensor) collapsed to 1.
bool CheckBroadcast(const Tensor& lhs, const Tensor& rhs, const char* op);
void CheckFinite(const Tensor& t, const char* op);
}  // namespace internal

// out[i] = op(lhs[i], rhs[i]). rhs may be T x 1 x H x W against a
// T x C x H x W lhs, in which case it is repeated across channels.
template <typename BinaryOp>
Tensor Elementwise(BinaryOp op, const Tensor& lhs, const Tensor& rhs) {
  const bool broadcast = internal::CheckBroadcast(lhs, rhs, "Elementwise");
  Tensor out(lhs.shape());
  auto o = out.mutable_values();
  auto a = lhs.values();
  auto b = rhs.values();
  if (!broadcast) {
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = op(a[i], b[i]);
  } else {
    const std::size_t t = lhs.dim(0), c = lhs.dim(1);
    const std::size_t plane = lhs.dim(2) * lhs.dim(3);
    for (std::size_t ti = 0; ti < t; ++ti) {
      for (std::size_t ci = 0; ci < c; ++ci) {
        const std::size_t base = (ti * c + ci) * plane;
        const std::size_t mbase = ti * plane;
        for (std::size_t p = 0; p < plane; ++p) {
          o[base + p] = op(a[base + p], b[mbase + p]);
        }
      }
    }
  }
  internal::CheckFinite(out, "Elementwise");
  return out;
}

Tensor Add(const Tensor& lhs, const Tensor& rhs);
Tensor Subtract(const Tensor& lhs, const Tensor& rhs);
Tensor Multiply(const Tensor& lhs, const Tensor& rhs);
Tensor Scale(const Tensor& t, double factor);
// lhs + factor * rhs, same shape only.
Tensor AddScaled(const Tensor& lhs, double factor, const Tensor& rhs);

// Replaces every 1-D fiber along `axis` by map * fiber. The map must have
// map.cols() == shape[axis]; the output axis length becomes map.rows(), so
// square maps preserve the shape.
Tensor ApplyAlongAxis(const Tensor& t, std::size_t axis, const Matrix& map);

// Sums a T x C x H x W tensor over channels into T x H x W.
Tensor ReduceChannels(const Tensor& x);

double Sum(const Tensor& t);
double L2Norm(const Tensor& t);
// Largest |a[i] - b[i]|; shapes must match.
double MaxAbsDiff(const Tensor& a, const Tensor& b);

}  // namespace fep

#endif  // FEP_TENSOR_H_
