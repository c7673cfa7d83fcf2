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

#include "concept_tab/feature_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "concept_tab/errors.hpp"
#include "concept_tab/simd.hpp"

namespace concept_tab {

FeatureMatrix::FeatureMatrix(std::size_t count, std::size_t dims,
                             std::vector<double> values, std::vector<int> labels)
    : count_(count), dims_(dims), values_(std::move(values)), labels_(std::move(labels)) {
  if (count_ == 0 || dims_ == 0) {
    throw InvalidArgument("feature matrix needs at least one row and one column");
  }
  if (values_.size() != count_ * dims_) {
    throw InvalidArgument("feature matrix value count does not match n x d");
  }
  if (labels_.size() != count_) {
    throw InvalidArgument("feature matrix label count does not match row count");
  }
  for (const double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("feature matrix contains a non-finite value");
  }
  for (const int y : labels_) {
    if (y < 0) throw InvalidArgument("feature matrix contains a negative label");
  }
}

std::vector<double> FeatureMatrix::column(std::size_t k) const {
  std::vector<double> out(count_);
  for (std::size_t i = 0; i < count_; ++i) out[i] = values_[i * dims_ + k];
  return out;
}

int FeatureMatrix::num_classes() const {
  return 1 + *std::max_element(labels_.begin(), labels_.end());
}

bool FeatureMatrix::is_binary() const { return num_classes() <= 2; }

double StandardizationStats::scale(std::size_t k) const {
  return std::max(stds[k], kStdEpsilon);
}

std::vector<double> StandardizationStats::scales() const {
  std::vector<double> out(stds.size());
  for (std::size_t k = 0; k < stds.size(); ++k) out[k] = scale(k);
  return out;
}

Standardized standardize(const FeatureMatrix& m) {
  const auto& kern = simd::kernels();
  const std::size_t n = m.count();
  const std::size_t d = m.dims();

  // Two passes: means first, then squared deviations about them.
  std::vector<double> means(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) kern.accumulate(m.row(i).data(), means.data(), d);
  for (double& mu : means) mu /= static_cast<double>(n);

  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    kern.accumulate_sq_dev(m.row(i).data(), means.data(), var.data(), d);
  }
  std::vector<double> stds(d);
  for (std::size_t k = 0; k < d; ++k) stds[k] = std::sqrt(var[k] / static_cast<double>(n));

  StandardizationStats stats{std::move(means), std::move(stds)};
  FeatureMatrix out = apply_stats(m, stats);
  return {std::move(out), std::move(stats)};
}

FeatureMatrix apply_stats(const FeatureMatrix& m, const StandardizationStats& s) {
  const std::size_t d = m.dims();
  if (s.means.size() != d || s.stds.size() != d) {
    throw InvalidArgument("standardization stats have " + std::to_string(s.means.size()) +
                          " dims, matrix has " + std::to_string(d));
  }
  const auto& kern = simd::kernels();
  const std::vector<double> scales = s.scales();
  std::vector<double> values(m.values().size());
  for (std::size_t i = 0; i < m.count(); ++i) {
    kern.affine(m.row(i).data(), s.means.data(), scales.data(), values.data() + i * d, d);
  }
  return FeatureMatrix(m.count(), d, std::move(values),
                       std::vector<int>(m.labels().begin(), m.labels().end()));
}

namespace {

FeatureMatrix gather_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows,
                          std::vector<int> labels) {
  const std::size_t d = m.dims();
  std::vector<double> values;
  values.reserve(rows.size() * d);
  for (const std::size_t i : rows) {
    const auto r = m.row(i);
    values.insert(values.end(), r.begin(), r.end());
  }
  return FeatureMatrix(rows.size(), d, std::move(values), std::move(labels));
}

}  // namespace

LabelSplit split_by_label(const FeatureMatrix& m) {
  if (!m.is_binary()) throw InvalidArgument("split_by_label requires binary labels");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < m.count(); ++i) (m.label(i) == 1 ? pos : neg).push_back(i);
  if (pos.empty()) throw InvalidArgument("positive class is empty");
  if (neg.empty()) throw InvalidArgument("negative class is empty");
  const std::size_t npos = pos.size();
  const std::size_t nneg = neg.size();
  return {gather_rows(m, pos, std::vector<int>(npos, 1)),
          gather_rows(m, neg, std::vector<int>(nneg, 0))};
}

FeatureMatrix one_vs_rest(const FeatureMatrix& m, int cls) {
  std::vector<int> labels(m.count());
  for (std::size_t i = 0; i < m.count(); ++i) labels[i] = m.label(i) == cls ? 1 : 0;
  return FeatureMatrix(m.count(), m.dims(),
                       std::vector<double>(m.values().begin(), m.values().end()),
                       std::move(labels));
}

FeatureMatrix slice_rows(const FeatureMatrix& m, std::size_t begin, std::size_t end) {
  if (begin >= end || end > m.count()) throw InvalidArgument("row slice out of range");
  const std::size_t d = m.dims();
  return FeatureMatrix(
      end - begin, d,
      std::vector<double>(m.values().begin() + begin * d, m.values().begin() + end * d),
      std::vector<int>(m.labels().begin() + begin, m.labels().begin() + end));
}

void MaskSet::validate(std::size_t dims) const {
  if (!indices_.empty() && *indices_.rbegin() >= dims) {
    throw InvalidArgument("mask index " + std::to_string(*indices_.rbegin()) +
                          " out of range for " + std::to_string(dims) + " features");
  }
}

FeatureMatrix mask_features(const FeatureMatrix& m, const MaskSet& mask) {
  mask.validate(m.dims());
  std::vector<double> values(m.values().begin(), m.values().end());
  const std::size_t d = m.dims();
  for (std::size_t i = 0; i < m.count(); ++i) {
    for (const std::size_t k : mask.indices()) values[i * d + k] = 0.0;
  }
  return FeatureMatrix(m.count(), d, std::move(values),
                       std::vector<int>(m.labels().begin(), m.labels().end()));
}

// ---------------------------------------------------------------------------
// File I/O

namespace {

constexpr std::string_view kMagic = "CTAB0001";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

int check_label(long long raw, LabelPolicy policy, std::size_t row) {
  if (policy == LabelPolicy::kBinary) {
    if (raw == 1) return 1;
    if (raw == 0 || raw == -1) return 0;
    throw ParseError(ParseErrorKind::kBadLabel, row, "label",
                     "expected 0/1 (or -1), got " + std::to_string(raw));
  }
  if (raw < 0 || raw > 1'000'000) {
    throw ParseError(ParseErrorKind::kBadLabel, row, "label",
                     "expected a non-negative class id, got " + std::to_string(raw));
  }
  return static_cast<int>(raw);
}

}  // namespace

FileFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return (ext == ".bin" || ext == ".ctab") ? FileFormat::kBinary : FileFormat::kCsv;
}

FeatureMatrix read_csv(std::istream& in, LabelPolicy policy) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(ParseErrorKind::kMalformedHeader, 0, "", "empty input");
  }
  const auto header = split_cells(line);
  if (header.size() < 2 || header[0] != "label") {
    throw ParseError(ParseErrorKind::kMalformedHeader, 0, "",
                     "expected 'label,f0,...', got '" + std::string(trim(line)) + "'");
  }
  const std::size_t d = header.size() - 1;
  std::vector<std::string> names(d);
  for (std::size_t k = 0; k < d; ++k) {
    names[k] = "f" + std::to_string(k);
    if (header[k + 1] != names[k]) {
      throw ParseError(ParseErrorKind::kMalformedHeader, 0, std::string(header[k + 1]),
                       "expected " + names[k]);
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_cells(line);
    if (cells.size() != d + 1) {
      throw ParseError(ParseErrorKind::kDimensionMismatch, row, "",
                       "expected " + std::to_string(d + 1) + " cells, got " +
                           std::to_string(cells.size()));
    }
    long long raw_label = 0;
    {
      const auto c = cells[0];
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), raw_label);
      if (ec != std::errc() || ptr != c.data() + c.size() || c.empty()) {
        throw ParseError(ParseErrorKind::kNonNumeric, row, "label",
                         "'" + std::string(c) + "' is not an integer");
      }
    }
    labels.push_back(check_label(raw_label, policy, row));
    for (std::size_t k = 0; k < d; ++k) {
      const auto c = cells[k + 1];
      double v = 0.0;
      const char* first = c.data();
      if (!c.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, c.data() + c.size(), v);
      if (c.empty() || ptr != c.data() + c.size() ||
          (ec != std::errc() && ec != std::errc::result_out_of_range)) {
        throw ParseError(ParseErrorKind::kNonNumeric, row, names[k],
                         "'" + std::string(c) + "' is not a number");
      }
      if (ec == std::errc::result_out_of_range || !std::isfinite(v)) {
        throw ParseError(ParseErrorKind::kNonFinite, row, names[k],
                         "'" + std::string(c) + "' is not finite");
      }
      values.push_back(v);
    }
  }
  if (row == 0) throw ParseError(ParseErrorKind::kTruncated, 0, "", "no data rows");
  return FeatureMatrix(row, d, std::move(values), std::move(labels));
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_csv(std::ostream& out, const FeatureMatrix& m) {
  out << "label";
  for (std::size_t k = 0; k < m.dims(); ++k) out << ",f" << k;
  out << '\n';
  for (std::size_t i = 0; i < m.count(); ++i) {
    out << m.label(i);
    for (const double v : m.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  using U = std::make_unsigned_t<std::conditional_t<sizeof(T) == 8, std::int64_t, std::int32_t>>;
  U bits;
  std::memcpy(&bits, &v, sizeof bits);
  std::array<char, sizeof(U)> bytes;
  for (std::size_t b = 0; b < sizeof(U); ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
bool get_le(std::istream& in, T& v) {
  using U = std::make_unsigned_t<std::conditional_t<sizeof(T) == 8, std::int64_t, std::int32_t>>;
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) bits |= static_cast<U>(bytes[b]) << (8 * b);
  std::memcpy(&v, &bits, sizeof v);
  return true;
}

}  // namespace

void write_binary(std::ostream& out, const FeatureMatrix& m) {
  out.write(kMagic.data(), kMagic.size());
  put_le(out, static_cast<std::uint32_t>(m.count()));
  put_le(out, static_cast<std::uint32_t>(m.dims()));
  for (const int y : m.labels()) put_le(out, static_cast<std::int32_t>(y));
  for (const double v : m.values()) put_le(out, v);
}

FeatureMatrix read_binary(std::istream& in, LabelPolicy policy) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kMagic) {
    throw ParseError(ParseErrorKind::kBadMagic, 0, "", "expected CTAB0001");
  }
  std::uint32_t n = 0, d = 0;
  if (!get_le(in, n) || !get_le(in, d)) {
    throw ParseError(ParseErrorKind::kTruncated, 0, "", "missing shape");
  }
  if (n == 0 || d == 0) {
    throw ParseError(ParseErrorKind::kDimensionMismatch, 0, "",
                     "shape " + std::to_string(n) + "x" + std::to_string(d));
  }
  std::vector<int> labels(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::int32_t raw = 0;
    if (!get_le(in, raw)) throw ParseError(ParseErrorKind::kTruncated, i + 1, "label", "");
    labels[i] = check_label(raw, policy, i + 1);
  }
  std::vector<double> values(static_cast<std::size_t>(n) * d);
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    const std::size_t row = idx / d + 1;
    const std::string col = "f" + std::to_string(idx % d);
    if (!get_le(in, values[idx])) throw ParseError(ParseErrorKind::kTruncated, row, col, "");
    if (!std::isfinite(values[idx])) throw ParseError(ParseErrorKind::kNonFinite, row, col, "");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(ParseErrorKind::kDimensionMismatch, n, "", "trailing bytes after payload");
  }
  return FeatureMatrix(n, d, std::move(values), std::move(labels));
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path, FileFormat format,
                                  LabelPolicy policy) {
  std::ifstream in(path, format == FileFormat::kBinary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open " + path.string());
  return format == FileFormat::kBinary ? read_binary(in, policy) : read_csv(in, policy);
}

void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path,
                         FileFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == FileFormat::kBinary) {
    write_binary(out, m);
  } else {
    write_csv(out, m);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace concept_tab
