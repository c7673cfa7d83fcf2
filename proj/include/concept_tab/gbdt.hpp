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
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"

#include "concept_tab/concept_metric.hpp"
#include "concept_tab/feature_store.hpp"

namespace concept_tab {

struct GbdtParams {
  int num_rounds = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double l2_leaf_reg = 1.0;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const GbdtParams&, const GbdtParams&) = default;
};

// One node of a regression tree, stored flat. Internal nodes route a row
// left iff row[split_feature] < threshold.
struct TreeNode {
  int split_feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf log-odds increment, learning rate applied
  double gain = 0.0;    // realized split gain (internal nodes)
  std::size_t cover = 0;

  bool is_leaf() const noexcept { return split_feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  // Index of the leaf that `row` reaches.
  int leaf_index(std::span<const double> row) const;
  int depth() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct GbdtModel {
  std::size_t dims = 0;
  double base_score = 0.0;
  GbdtParams params;
  std::vector<Tree> trees;
  ImportanceMap importance;  // total gain per feature; only split features
  // Mean training logistic loss before any tree, then after each round.
  std::vector<double> train_loss;

  friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

// Logistic loss on a single margin (log-odds) with label y in {0, 1}.
double logistic_loss(double margin, int y);
double sigmoid(double x);

struct GradHess {
  double grad;
  double hess;
};
// First and second derivative of logistic_loss with respect to the margin.
GradHess logistic_grad_hess(double margin, int y);

// Second-order split gain for a node with totals (G, H) split into a left
// part (G_L, H_L) and the remainder.
double split_gain(double grad_left, double hess_left, double grad_total, double hess_total,
                  double l2);

// Newton boosting on logistic loss with exact greedy splits.
GbdtModel train_gbdt(const FeatureMatrix& m, const GbdtParams& params);

double predict_margin(const GbdtModel& model, std::span<const double> row);
double predict_proba(const GbdtModel& model, std::span<const double> row);

// Fraction of rows where (predict_proba >= 0.5) agrees with the label.
double evaluate(const GbdtModel& model, const FeatureMatrix& m);

const ImportanceMap& feature_importance(const GbdtModel& model);

nlohmann::json to_json(const GbdtModel& model);
GbdtModel gbdt_from_json(const nlohmann::json& doc);
void save_model(const GbdtModel& model, const std::filesystem::path& path);
GbdtModel load_model(const std::filesystem::path& path);

nlohmann::json params_to_json(const GbdtParams& p);
GbdtParams params_from_json(const nlohmann::json& j, GbdtParams defaults = {});

// One binary model per class; predicted class is the argmax probability,
// ties to the lowest class id.
struct MulticlassGbdt {
  std::vector<GbdtModel> per_class;
};

MulticlassGbdt train_gbdt_ovr(const FeatureMatrix& m, const GbdtParams& params);
int predict_class(const MulticlassGbdt& model, std::span<const double> row);
double evaluate(const MulticlassGbdt& model, const FeatureMatrix& m);
// Per-feature gain summed over the per-class models.
ImportanceMap feature_importance(const MulticlassGbdt& model);

}  // namespace concept_tab
