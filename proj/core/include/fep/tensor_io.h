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

#ifndef FEP_TENSOR_IO_H_
#define FEP_TENSOR_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fep/tensor.h"

namespace fep {

// Little-endian encoder for the FEPT/FEPM/FEPD binary formats.
class ByteWriter {
 public:
  void Magic(std::string_view magic);
  void U8(std::uint8_t v);
  void U32(std::uint32_t v);
  void F64(double v);
  void F64s(std::span<const double> v);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Little-endian decoder. Every failure throws FormatError carrying the byte
// offset where decoding stopped.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void ExpectMagic(std::string_view magic);
  std::uint8_t U8();
  std::uint32_t U32();
  double F64();
  std::vector<double> F64s(std::size_t count);

  std::size_t offset() const { return offset_; }
  bool AtEnd() const { return offset_ == bytes_.size(); }
  // Throws unless every byte was consumed.
  void ExpectEnd() const;

 private:
  void Need(std::size_t n, const char* what) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

inline constexpr std::uint8_t kTensorFormatVersion = 1;

// FEPT: "FEPT", u8 version, u8 rank, rank x u32 dims, f64 payload.
void EncodeTensor(const Tensor& t, ByteWriter& out);
Tensor DecodeTensor(ByteReader& in);

std::vector<std::uint8_t> TensorToBytes(const Tensor& t);
Tensor TensorFromBytes(std::span<const std::uint8_t> bytes);

void SaveTensor(const Tensor& t, const std::filesystem::path& path);
Tensor LoadTensor(const std::filesystem::path& path);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

}  // namespace fep

#endif  // FEP_TENSOR_IO_H_
