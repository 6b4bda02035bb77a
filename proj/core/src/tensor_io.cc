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

#include "fep/tensor_io.h"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

namespace fep {

void ByteWriter::Magic(std::string_view magic) {
  bytes_.insert(bytes_.end(), magic.begin(), magic.end());
}

void ByteWriter::U8(std::uint8_t v) { bytes_.push_back(v); }

void ByteWriter::U32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back((v >> (8 * i)) & 0xff);
}

void ByteWriter::F64(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) bytes_.push_back((bits >> (8 * i)) & 0xff);
}

void ByteWriter::F64s(std::span<const double> v) {
  bytes_.reserve(bytes_.size() + 8 * v.size());
  for (double x : v) F64(x);
}

void ByteReader::Need(std::size_t n, const char* what) const {
  if (bytes_.size() - offset_ < n) {
    throw FormatError(std::string("truncated input while reading ") + what,
                      offset_);
  }
}

void ByteReader::ExpectMagic(std::string_view magic) {
  Need(magic.size(), "magic");
  for (std::size_t i = 0; i < magic.size(); ++i) {
    if (bytes_[offset_ + i] != static_cast<std::uint8_t>(magic[i])) {
      throw FormatError("bad magic, expected '" + std::string(magic) + "'",
                        offset_);
    }
  }
  offset_ += magic.size();
}

std::uint8_t ByteReader::U8() {
  Need(1, "u8");
  return bytes_[offset_++];
}

std::uint32_t ByteReader::U32() {
  Need(4, "u32");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
  }
  offset_ += 4;
  return v;
}

double ByteReader::F64() {
  Need(8, "f64");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(bytes_[offset_ + i]) << (8 * i);
  }
  offset_ += 8;
  return std::bit_cast<double>(bits);
}

std::vector<double> ByteReader::F64s(std::size_t count) {
  if (count > (bytes_.size() - offset_) / 8) {
    throw FormatError("truncated f64 payload", offset_);
  }
  std::vector<double> out(count);
  for (auto& v : out) v = F64();
  return out;
}

void ByteReader::ExpectEnd() const {
  if (!AtEnd()) throw FormatError("trailing bytes after payload", offset_);
}

void EncodeTensor(const Tensor& t, ByteWriter& out) {
  if (t.rank() > std::numeric_limits<std::uint8_t>::max()) {
    throw ShapeError("EncodeTensor: rank too large");
  }
  out.Magic("FEPT");
  out.U8(kTensorFormatVersion);
  out.U8(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      throw ShapeError("EncodeTensor: dimension exceeds u32");
    }
    out.U32(static_cast<std::uint32_t>(d));
  }
  out.F64s(t.values());
}

Tensor DecodeTensor(ByteReader& in) {
  in.ExpectMagic("FEPT");
  const std::size_t version_at = in.offset();
  const std::uint8_t version = in.U8();
  if (version != kTensorFormatVersion) {
    throw FormatError("unsupported FEPT version " + std::to_string(version),
                      version_at);
  }
  const std::uint8_t rank = in.U8();
  Shape shape(rank);
  for (auto& d : shape) d = in.U32();
  const std::size_t payload_at = in.offset();
  std::vector<double> values = in.F64s(ShapeProduct(shape));
  try {
    return Tensor(std::move(shape), std::move(values));
  } catch (const NumericalError&) {
    throw FormatError("FEPT payload contains non-finite values", payload_at);
  }
}

std::vector<std::uint8_t> TensorToBytes(const Tensor& t) {
  ByteWriter w;
  EncodeTensor(t, w);
  return w.bytes();
}

Tensor TensorFromBytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Tensor t = DecodeTensor(r);
  r.ExpectEnd();
  return t;
}

void SaveTensor(const Tensor& t, const std::filesystem::path& path) {
  WriteFileBytes(path, TensorToBytes(t));
}

Tensor LoadTensor(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  return TensorFromBytes(bytes);
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace fep
