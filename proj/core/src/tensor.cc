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

#include "fep/tensor.h"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace fep {

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t ShapeProduct(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(ShapeProduct(shape_), fill) {
  if (!std::isfinite(fill)) {
    throw NumericalError("Tensor: fill value is not finite");
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (ShapeProduct(shape_) != values_.size()) {
    throw ShapeError("Tensor: shape " + ShapeString(shape_) + " needs " +
                     std::to_string(ShapeProduct(shape_)) + " values, got " +
                     std::to_string(values_.size()));
  }
  internal::CheckFinite(*this, "Tensor");
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("Tensor::dim: axis " + std::to_string(axis) +
                     " out of range for shape " + ShapeString(shape_));
  }
  return shape_[axis];
}

std::size_t Tensor::Offset(std::initializer_list<std::size_t> index) const {
  return Offset(std::span<const std::size_t>(index.begin(), index.size()));
}

std::size_t Tensor::Offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("Tensor::Offset: index of rank " +
                     std::to_string(index.size()) + " for shape " +
                     ShapeString(shape_));
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= shape_[i]) {
      throw ShapeError("Tensor::Offset: coordinate " +
                       std::to_string(index[i]) + " out of range on axis " +
                       std::to_string(i) + " of " + ShapeString(shape_));
    }
    offset = offset * shape_[i] + index[i];
  }
  return offset;
}

std::vector<std::size_t> Tensor::Unravel(std::size_t offset) const {
  if (offset >= values_.size()) {
    throw ShapeError("Tensor::Unravel: offset out of range");
  }
  std::vector<std::size_t> index(shape_.size());
  for (std::size_t i = shape_.size(); i-- > 0;) {
    index[i] = offset % shape_[i];
    offset /= shape_[i];
  }
  return index;
}

Tensor Tensor::Reshape(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).Reshape(std::move(shape));
}

Tensor Tensor::Reshape(Shape shape) && {
  if (ShapeProduct(shape) != values_.size()) {
    throw ShapeError("Tensor::Reshape: cannot view " + ShapeString(shape_) +
                     " as " + ShapeString(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

bool Tensor::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void ClipShape::Validate() const {
  if (t == 0 || c == 0 || h == 0 || w == 0) {
    throw ConfigError("ClipShape: all extents must be >= 1, got " +
                      ShapeString(clip()));
  }
}

ClipShape ClipShape::FromClip(const Shape& shape) {
  if (shape.size() != 4) {
    throw ShapeError("ClipShape: expected rank-4 T x C x H x W, got " +
                     ShapeString(shape));
  }
  return {shape[0], shape[1], shape[2], shape[3]};
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("Matrix: " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " needs " +
                     std::to_string(rows * cols) + " values");
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::Transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) {
    throw ShapeError("Matrix product: inner dimensions differ");
  }
  Matrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
    }
  }
  return out;
}

namespace internal {

bool CheckBroadcast(const Tensor& lhs, const Tensor& rhs, const char* op) {
  if (lhs.shape() == rhs.shape()) return false;
  const Shape& a = lhs.shape();
  const Shape& b = rhs.shape();
  if (a.size() == 4 && b.size() == 4 && b[1] == 1 && a[0] == b[0] &&
      a[2] == b[2] && a[3] == b[3]) {
    return true;
  }
  throw ShapeError(std::string(op) + ": shape mismatch " + ShapeString(a) +
                   " vs " + ShapeString(b));
}

void CheckFinite(const Tensor& t, const char* op) {
  if (!t.AllFinite()) {
    throw NumericalError(std::string(op) + ": produced a non-finite value");
  }
}

}  // namespace internal

Tensor Add(const Tensor& lhs, const Tensor& rhs) {
  return Elementwise(std::plus<>(), lhs, rhs);
}

Tensor Subtract(const Tensor& lhs, const Tensor& rhs) {
  return Elementwise(std::minus<>(), lhs, rhs);
}

Tensor Multiply(const Tensor& lhs, const Tensor& rhs) {
  return Elementwise(std::multiplies<>(), lhs, rhs);
}

Tensor Scale(const Tensor& t, double factor) {
  Tensor out = t;
  for (double& v : out.mutable_values()) v *= factor;
  internal::CheckFinite(out, "Scale");
  return out;
}

Tensor AddScaled(const Tensor& lhs, double factor, const Tensor& rhs) {
  if (lhs.shape() != rhs.shape()) {
    throw ShapeError("AddScaled: shape mismatch " + ShapeString(lhs.shape()) +
                     " vs " + ShapeString(rhs.shape()));
  }
  return Elementwise([factor](double a, double b) { return a + factor * b; },
                     lhs, rhs);
}

Tensor ApplyAlongAxis(const Tensor& t, std::size_t axis, const Matrix& map) {
  if (axis >= t.rank()) {
    throw ShapeError("ApplyAlongAxis: axis " + std::to_string(axis) +
                     " out of range for " + ShapeString(t.shape()));
  }
  const std::size_t n = t.dim(axis);
  if (map.cols() != n) {
    throw ShapeError("ApplyAlongAxis: " + std::to_string(map.rows()) + "x" +
                     std::to_string(map.cols()) +
                     " map does not fit axis length " + std::to_string(n) +
                     " of " + ShapeString(t.shape()));
  }
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= t.dim(i);
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < t.rank(); ++i) inner *= t.dim(i);

  Shape out_shape = t.shape();
  out_shape[axis] = map.rows();
  Tensor out(out_shape);
  auto src = t.values();
  auto dst = out.mutable_values();

  std::vector<double> fiber(n);
  const std::size_t m = map.rows();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t src_base = o * n * inner + in;
      for (std::size_t k = 0; k < n; ++k) fiber[k] = src[src_base + k * inner];
      const std::size_t dst_base = o * m * inner + in;
      for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += map(r, k) * fiber[k];
        dst[dst_base + r * inner] = acc;
      }
    }
  }
  internal::CheckFinite(out, "ApplyAlongAxis");
  return out;
}

Tensor ReduceChannels(const Tensor& x) {
  if (x.rank() != 4) {
    throw ShapeError("ReduceChannels: expected rank-4 T x C x H x W, got " +
                     ShapeString(x.shape()));
  }
  const std::size_t t = x.dim(0), c = x.dim(1);
  const std::size_t plane = x.dim(2) * x.dim(3);
  Tensor out({t, x.dim(2), x.dim(3)});
  auto src = x.values();
  auto dst = out.mutable_values();
  for (std::size_t ti = 0; ti < t; ++ti) {
    for (std::size_t ci = 0; ci < c; ++ci) {
      const std::size_t base = (ti * c + ci) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        dst[ti * plane + p] += src[base + p];
      }
    }
  }
  return out;
}

double Sum(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v;
  return s;
}

double L2Norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v * v;
  return std::sqrt(s);
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("MaxAbsDiff: shape mismatch " + ShapeString(a.shape()) +
                     " vs " + ShapeString(b.shape()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace fep
