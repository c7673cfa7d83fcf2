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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

#include "concept_tab/concept_metric.hpp"
#include "concept_tab/feature_store.hpp"
#include "concept_tab/gbdt.hpp"

namespace concept_tab {

enum class LinearKind { kLogistic, kLinearSvm };

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  LinearKind kind = LinearKind::kLogistic;
  // Objective after each epoch (for the SVM: evaluated at the averaged
  // iterate, which is what the model stores).
  std::vector<double> objective_trace;

  double score(std::span<const double> row) const;
  int predict(std::span<const double> row) const { return score(row) >= 0.0 ? 1 : 0; }
};

// |w_k| for every feature.
ImportanceMap linear_importance(const LinearModel& model);

// Mean logistic loss + (l2 / 2) * ||w||^2; the bias is not regularized.
double logistic_objective(const FeatureMatrix& m, std::span<const double> weights, double bias,
                          double l2);
struct LinearGradient {
  std::vector<double> weights;
  double bias = 0.0;
};
LinearGradient logistic_gradient(const FeatureMatrix& m, std::span<const double> weights,
                                 double bias, double l2);

// Full-batch gradient descent from w = 0.
LinearModel train_logistic(const FeatureMatrix& m, double l2, int epochs, double step);

// 0.5 * ||w||^2 + c * mean(max(0, 1 - y (w.x + b))) with y in {-1, +1}.
double svm_objective(const FeatureMatrix& m, std::span<const double> weights, double bias,
                     double c);

// Full-batch subgradient descent with step / sqrt(t) decay; returns the
// running average of the iterates.
LinearModel train_linear_svm(const FeatureMatrix& m, double c, int epochs, double step);

nlohmann::json to_json(const LinearModel& model);

using Predictor = std::function<int(std::span<const double>)>;

Predictor gbdt_predictor(const GbdtModel& model);
Predictor linear_predictor(const LinearModel& model);

double accuracy(const Predictor& predict, const FeatureMatrix& m);

// Mean accuracy drop over `repeats` seeded shuffles of each column. The
// shuffle for (feature k, repeat r) depends only on (seed, k, r).
ImportanceMap permutation_importance(const Predictor& predict, const FeatureMatrix& m,
                                     int repeats, std::uint64_t seed);

// Deterministic 64-bit mix used to derive independent seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace concept_tab
