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
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "concept_tab/feature_store.hpp"

namespace concept_tab {

// Class-relevancy of one feature: W1 distance between its standardized
// per-class empirical distributions.
struct ConceptScore {
  std::size_t feature_index = 0;
  double w = 0.0;

  friend bool operator==(const ConceptScore&, const ConceptScore&) = default;
};

// Feature index -> importance weight, as produced by any classifier.
using ImportanceMap = std::map<std::size_t, double>;

// Exact Wasserstein-1 distance between two empirical distributions with
// uniform weights: the integral of |F_a - F_b| over the merged sorted support.
double wasserstein1(std::span<const double> a, std::span<const double> b);

// W_k for every column of two (already standardized) class matrices.
// Columns are scored concurrently; output is ordered by k.
std::vector<ConceptScore> score_all_features(const FeatureMatrix& pos,
                                             const FeatureMatrix& neg);

// Splits by label and scores. Multiclass labels are scored one-vs-rest and
// reduced by the maximum over classes.
std::vector<ConceptScore> score_matrix(const FeatureMatrix& standardized);

// Indices of the m largest scores, descending; ties go to the lower index.
std::vector<std::size_t> top_m_concepts(std::span<const ConceptScore> scores, std::size_t m);

// Features ordered by importance, descending; ties go to the lower index.
std::vector<std::size_t> rank_by_importance(const ImportanceMap& importance);

// Mean W over the (up to) m most important features.
double avg_w_of_top_importance(std::span<const ConceptScore> scores,
                               const ImportanceMap& importance, std::size_t m);

// [{"k": int, "w": float}, ...]
void write_scores_json(std::ostream& out, std::span<const ConceptScore> scores);
std::vector<ConceptScore> read_scores_json(std::istream& in);
// Header "k,w".
void write_scores_csv(std::ostream& out, std::span<const ConceptScore> scores);

}  // namespace concept_tab
