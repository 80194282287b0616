// Copyright 2026 The swinseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace swinseg {

// Base for every error raised by the library. Subclasses map onto the
// command-line exit codes (see tools/swinseg.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor extents or non-divisible spatial sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-range labels, mismatched parameter sets, bad argument values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward() on a non-scalar or on a released graph.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration records.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Problems reading or writing dataset files.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed image file. Carries the byte offset at which parsing failed.
class ParseError : public DataError {
 public:
  ParseError(const std::string& detail, std::size_t offset)
      : DataError(detail + " (at byte " + std::to_string(offset) + ")"),
        detail_(detail),
        offset_(offset) {}
  const std::string& detail() const { return detail_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

// Phantom geometry could not be placed within the retry budget.
class GenerationError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite loss during training.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace swinseg
