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

#include "concept_tab/errors.hpp"

namespace concept_tab {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kMalformedHeader: return "malformed header";
    case ParseErrorKind::kNonNumeric: return "non-numeric cell";
    case ParseErrorKind::kNonFinite: return "non-finite value";
    case ParseErrorKind::kBadLabel: return "invalid label";
    case ParseErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ParseErrorKind::kBadMagic: return "bad magic";
    case ParseErrorKind::kTruncated: return "truncated input";
  }
  return "parse error";
}

namespace {

std::string describe(ParseErrorKind kind, std::size_t row, const std::string& column,
                     const std::string& detail) {
  std::string msg = to_string(kind);
  msg += " at row " + std::to_string(row);
  if (!column.empty()) msg += ", column " + column;
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::size_t row, std::string column,
                       const std::string& detail)
    : Error(describe(kind, row, column, detail)),
      kind_(kind),
      row_(row),
      column_(std::move(column)) {}

}  // namespace concept_tab
