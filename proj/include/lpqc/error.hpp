// Copyright 2026 The LPQC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lpqc {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// A configuration value is invalid (unknown family, odd layer count, ...).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Histograms passed to a transport solver are malformed.
class HistogramError : public Error {
  public:
    using Error::Error;
};

/// A generator produced an output that cannot be normalised.
class DegenerateOutputError : public Error {
  public:
    using Error::Error;
};

/// Malformed or invalid data on disk. `offset` is the byte offset (binary
/// formats) or record index (text formats) where the problem was found.
class DataError : public Error {
  public:
    DataError(const std::string &what, std::uint64_t offset)
        : Error(what + " (at " + std::to_string(offset) + ")"),
          offset_(offset) {}
    explicit DataError(const std::string &what) : Error(what) {}

    [[nodiscard]] std::uint64_t offset() const { return offset_; }

  private:
    std::uint64_t offset_ = 0;
};

#define LPQC_REQUIRE(cond, ErrType, msg)                                      \
    do {                                                                       \
        if (!(cond)) {                                                         \
            throw ErrType(msg);                                                \
        }                                                                      \
    } while (0)

} // namespace lpqc
