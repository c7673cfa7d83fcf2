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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "concept_tab/concept_metric.hpp"
#include "concept_tab/feature_store.hpp"
#include "concept_tab/gbdt.hpp"
#include "concept_tab/synthetic_world.hpp"

namespace concept_tab {

inline constexpr double kDefaultLambda = 2.0;

enum class Direction { kPlus, kMinus };

struct LatentEdit {
  std::vector<double> base;
  std::size_t k = 0;
  double lambda = kDefaultLambda;
  Direction direction = Direction::kPlus;
};

// base +- lambda * e_k
std::vector<double> latent_modify(const LatentEdit& edit);

struct VisualizationTriple {
  RenderedImage base;
  RenderedImage minus;
  RenderedImage plus;
};

VisualizationTriple visualize_concept(const SyntheticSpec& spec, std::span<const double> base,
                                      std::size_t k, double lambda);

struct DebugReport {
  MaskSet mask;
  ImportanceMap importance_before;
  ImportanceMap importance_after;  // masked features present with value 0
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;

  friend bool operator==(const DebugReport&, const DebugReport&) = default;
};

// Trains a reference model on `train` and a debugged model on the masked
// train set; the debugged model is evaluated on `test` masked the same way.
DebugReport debug_mask_retrain(const FeatureMatrix& train, const FeatureMatrix& test,
                               const MaskSet& mask, const GbdtParams& params);

// Same, reusing an already trained reference model.
DebugReport debug_mask_retrain(const GbdtModel& reference, const FeatureMatrix& train,
                               const FeatureMatrix& test, const MaskSet& mask,
                               const GbdtParams& params, GbdtModel* debugged_out = nullptr);

struct ExplainedConcept {
  std::size_t feature = 0;
  double importance = 0.0;
  double w = 0.0;
  std::string semantic;  // empty when the dim has no known semantic
  // Written artifact paths (minus, base, plus); empty when not written.
  std::vector<std::string> images;

  friend bool operator==(const ExplainedConcept&, const ExplainedConcept&) = default;
};

struct ExplanationReport {
  std::string task;
  double lambda = kDefaultLambda;
  std::size_t requested = 0;
  bool truncated = false;  // fewer features carry importance than requested
  std::vector<ExplainedConcept> concepts;  // descending importance

  friend bool operator==(const ExplanationReport&, const ExplanationReport&) = default;
};

struct ExplainOptions {
  std::string task = "synthetic";
  // When set, triples are written as concept_{k}_{minus|base|plus}.pgm here.
  std::optional<std::filesystem::path> artifact_dir;
  // When set, lambda is read in standardized units and scaled by the
  // feature's training std before editing the raw latent.
  const StandardizationStats* stats = nullptr;
};

ExplanationReport build_explanation(const GbdtModel& model, std::span<const ConceptScore> scores,
                                    const SyntheticSpec& spec, std::span<const double> sample,
                                    std::size_t m, double lambda, const ExplainOptions& options = {});

nlohmann::json to_json(const DebugReport& report);
DebugReport debug_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExplanationReport& report);
ExplanationReport explanation_report_from_json(const nlohmann::json& j);

// {"<k>": value, ...}
nlohmann::json importance_to_json(const ImportanceMap& importance);
ImportanceMap importance_from_json(const nlohmann::json& j);
// [{"k": int, "importance": float}, ...] in descending importance order.
nlohmann::json importance_list_json(const ImportanceMap& importance);

}  // namespace concept_tab
