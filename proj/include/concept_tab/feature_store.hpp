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
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace concept_tab {

// n x d matrix of finite feature scalars, row-major, with one integer class
// label per row. Row i is the feature vector of sample i.
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t count, std::size_t dims, std::vector<double> values,
                std::vector<int> labels);

  std::size_t count() const noexcept { return count_; }
  std::size_t dims() const noexcept { return dims_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dims_, dims_};
  }
  double at(std::size_t i, std::size_t k) const { return values_[i * dims_ + k]; }
  std::vector<double> column(std::size_t k) const;

  std::span<const double> values() const noexcept { return values_; }
  std::span<const int> labels() const noexcept { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }

  // 1 + the largest label present.
  int num_classes() const;
  bool is_binary() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t count_;
  std::size_t dims_;
  std::vector<double> values_;
  std::vector<int> labels_;
};

// Value used in place of a standard deviation below it when scaling.
inline constexpr double kStdEpsilon = 1e-12;

struct StandardizationStats {
  std::vector<double> means;
  std::vector<double> stds;  // population standard deviation, unguarded

  double scale(std::size_t k) const;
  std::vector<double> scales() const;

  friend bool operator==(const StandardizationStats&,
                         const StandardizationStats&) = default;
};

struct Standardized {
  FeatureMatrix matrix;
  StandardizationStats stats;
};

// Column-wise (x - mean) / max(std, eps) using the matrix's own moments.
Standardized standardize(const FeatureMatrix& m);

// Applies previously computed statistics (e.g. train stats to test data).
FeatureMatrix apply_stats(const FeatureMatrix& m, const StandardizationStats& s);

struct LabelSplit {
  FeatureMatrix pos;  // label 1
  FeatureMatrix neg;  // label 0
};

// Partitions a binary-labeled matrix by class, keeping within-class order.
LabelSplit split_by_label(const FeatureMatrix& m);

// Relabels a multiclass matrix as `cls` -> 1, everything else -> 0.
FeatureMatrix one_vs_rest(const FeatureMatrix& m, int cls);

// Rows [begin, end) as a new matrix.
FeatureMatrix slice_rows(const FeatureMatrix& m, std::size_t begin, std::size_t end);

// Set of feature indices excluded from decision-making.
class MaskSet {
 public:
  MaskSet() = default;
  MaskSet(std::initializer_list<std::size_t> indices) : indices_(indices) {}
  explicit MaskSet(std::set<std::size_t> indices) : indices_(std::move(indices)) {}

  void add(std::size_t k) { indices_.insert(k); }
  void remove(std::size_t k) { indices_.erase(k); }
  bool contains(std::size_t k) const { return indices_.contains(k); }
  bool empty() const noexcept { return indices_.empty(); }
  std::size_t size() const noexcept { return indices_.size(); }
  const std::set<std::size_t>& indices() const noexcept { return indices_; }

  // Throws InvalidArgument if any index is >= dims.
  void validate(std::size_t dims) const;

  friend bool operator==(const MaskSet&, const MaskSet&) = default;

 private:
  std::set<std::size_t> indices_;
};

// Zeroes every masked column (psi * (e - sum e_k)).
FeatureMatrix mask_features(const FeatureMatrix& m, const MaskSet& mask);

enum class FileFormat { kCsv, kBinary };

enum class LabelPolicy {
  kBinary,      // {0, 1}; -1 is accepted and mapped to 0
  kMulticlass,  // any non-negative integer
};

// Binary if the extension is .bin or .ctab, CSV otherwise.
FileFormat format_from_path(const std::filesystem::path& path);

FeatureMatrix read_csv(std::istream& in, LabelPolicy policy = LabelPolicy::kBinary);
void write_csv(std::ostream& out, const FeatureMatrix& m);

FeatureMatrix read_binary(std::istream& in, LabelPolicy policy = LabelPolicy::kBinary);
void write_binary(std::ostream& out, const FeatureMatrix& m);

FeatureMatrix load_feature_matrix(const std::filesystem::path& path, FileFormat format,
                                  LabelPolicy policy = LabelPolicy::kBinary);
void save_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& path,
                         FileFormat format);

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace concept_tab
