// Copyright 2026 The concept_tab Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace concept_tab {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad index, empty input,
// dimension mismatch between matrices, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input files or streams that cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or malformed run configuration (config file or flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  kMalformedHeader,
  kNonNumeric,
  kNonFinite,
  kBadLabel,
  kDimensionMismatch,
  kBadMagic,
  kTruncated,
};

const char* to_string(ParseErrorKind kind);

// Malformed data file. `row` is 1-based over data rows (the CSV header is
// row 0); `column` is the header name of the offending cell, when known.
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t row, std::string column,
             const std::string& detail);

  ParseErrorKind kind() const noexcept { return kind_; }
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  ParseErrorKind kind_;
  std::size_t row_;
  std::string column_;
};

}  // namespace concept_tab
