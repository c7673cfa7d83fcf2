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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "concept_tab/baselines.hpp"
#include "concept_tab/concept_metric.hpp"
#include "concept_tab/feature_store.hpp"
#include "concept_tab/gbdt.hpp"
#include "concept_tab/synthetic_world.hpp"

namespace concept_tab {

enum class ClassifierKind { kGbdt, kLogistic, kLinearSvm };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_from_string(const std::string& s);

struct LinearParams {
  double logistic_l2 = 1e-3;
  double svm_c = 1.0;
  int epochs = 500;
  double step = 0.5;
};

// Everything a pipeline run needs. Exactly one data source: train/test
// files, or a synthetic spec ("default" selects the built-in planted world).
struct PipelineConfig {
  std::optional<std::filesystem::path> train_path;
  std::optional<std::filesystem::path> test_path;
  std::optional<std::string> synthetic;  // "default", "recovery" or a spec JSON path
  std::string task = "synthetic";
  ClassifierKind classifier = ClassifierKind::kGbdt;
  GbdtParams gbdt;
  LinearParams linear;
  std::size_t top_m = 4;
  double lambda = 2.0;
  MaskSet mask;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  std::size_t samples = 2000;
  double train_fraction = 0.7;
  int permutation_repeats = 10;

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
// Fields present in `j` override `base`.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

// Raw and standardized splits; standardization uses train statistics only.
struct Dataset {
  FeatureMatrix train_raw;
  FeatureMatrix test_raw;
  FeatureMatrix train;
  FeatureMatrix test;
  StandardizationStats stats;
  std::optional<SyntheticSpec> spec;
};

SyntheticSpec resolve_synthetic_spec(const std::string& source);

// Samples the synthetic world and splits off the first train_fraction rows.
struct SyntheticSplit {
  FeatureMatrix train;
  FeatureMatrix test;
};
SyntheticSplit sample_split(const SyntheticSpec& spec, std::size_t n, double train_fraction,
                            std::uint64_t seed);

Dataset load_dataset(const PipelineConfig& config);
Dataset make_dataset(FeatureMatrix train_raw, FeatureMatrix test_raw,
                     std::optional<SyntheticSpec> spec);

// Fitted model of any kind, with a uniform importance view.
struct TrainedClassifier {
  ClassifierKind kind = ClassifierKind::kGbdt;
  std::optional<GbdtModel> gbdt;
  std::optional<LinearModel> linear;

  ImportanceMap importance() const;
  Predictor predictor() const;
  nlohmann::json to_json() const;
};

TrainedClassifier train_classifier(const FeatureMatrix& train, const PipelineConfig& config);

struct CompareRow {
  std::string classifier;
  double avg_w = 0.0;
  std::vector<std::size_t> top_features;
};

// avg_w_of_top_importance for each classifier kind, GBDT permutation
// importance on the test split, and the uniformly random m-feature baseline
// (its exact expectation, the mean W over all features).
std::vector<CompareRow> compare_classifiers(const Dataset& data,
                                            std::span<const ConceptScore> scores,
                                            const PipelineConfig& config, std::size_t m);

nlohmann::json compare_to_json(const std::vector<CompareRow>& rows, std::size_t m);

}  // namespace concept_tab
