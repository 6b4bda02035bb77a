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

#ifndef FEP_ERROR_H_
#define FEP_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fep {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes or dimensions disagree with an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A parameter or configuration value is out of its documented range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A computation produced NaN/Inf or otherwise cannot continue.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A binary file is malformed. `offset()` is the byte position at which
// decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Filesystem failure (missing input, unwritable output).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fep

#endif  // FEP_ERROR_H_
