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

#include "concept_tab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "concept_tab/errors.hpp"

namespace concept_tab {

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kGbdt: return "gbdt";
    case ClassifierKind::kLogistic: return "logistic";
    case ClassifierKind::kLinearSvm: return "svm";
  }
  return "gbdt";
}

ClassifierKind classifier_from_string(const std::string& s) {
  if (s == "gbdt") return ClassifierKind::kGbdt;
  if (s == "logistic") return ClassifierKind::kLogistic;
  if (s == "svm") return ClassifierKind::kLinearSvm;
  throw ConfigError("unknown classifier '" + s + "' (expected gbdt, logistic or svm)");
}

void PipelineConfig::validate() const {
  const bool files = train_path.has_value() || test_path.has_value();
  if (files && synthetic) {
    throw ConfigError("choose either --train/--test files or a synthetic spec, not both");
  }
  if (files && !(train_path && test_path)) {
    throw ConfigError("file input needs both a train and a test path");
  }
  if (top_m == 0) throw ConfigError("m must be positive");
  if (!std::isfinite(lambda)) throw ConfigError("lambda must be finite");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  if (samples < 4) throw ConfigError("samples must be at least 4");
  if (permutation_repeats < 1) throw ConfigError("permutation_repeats must be positive");
  if (linear.epochs < 1 || !(linear.step > 0.0) || linear.logistic_l2 < 0.0 ||
      !(linear.svm_c > 0.0)) {
    throw ConfigError("invalid linear baseline parameters");
  }
  try {
    gbdt.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j;
  if (c.train_path) j["train"] = c.train_path->string();
  if (c.test_path) j["test"] = c.test_path->string();
  if (c.synthetic) j["synthetic"] = *c.synthetic;
  j["task"] = c.task;
  j["classifier"] = to_string(c.classifier);
  j["gbdt"] = params_to_json(c.gbdt);
  j["linear"] = {{"logistic_l2", c.linear.logistic_l2},
                 {"svm_c", c.linear.svm_c},
                 {"epochs", c.linear.epochs},
                 {"step", c.linear.step}};
  j["m"] = c.top_m;
  j["lambda"] = c.lambda;
  j["mask"] = c.mask.indices();
  j["output_dir"] = c.output_dir.string();
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["train_fraction"] = c.train_fraction;
  j["permutation_repeats"] = c.permutation_repeats;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const char* const kKnown[] = {"train", "test", "synthetic", "task", "classifier",
                                       "gbdt", "linear", "m", "lambda", "mask",
                                       "output_dir", "seed", "samples", "train_fraction",
                                       "permutation_repeats"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  try {
    if (j.contains("train")) c.train_path = j.at("train").get<std::string>();
    if (j.contains("test")) c.test_path = j.at("test").get<std::string>();
    if (j.contains("synthetic")) c.synthetic = j.at("synthetic").get<std::string>();
    c.task = j.value("task", c.task);
    if (j.contains("classifier")) {
      c.classifier = classifier_from_string(j.at("classifier").get<std::string>());
    }
    if (j.contains("gbdt")) c.gbdt = params_from_json(j.at("gbdt"), c.gbdt);
    if (j.contains("linear")) {
      const auto& l = j.at("linear");
      c.linear.logistic_l2 = l.value("logistic_l2", c.linear.logistic_l2);
      c.linear.svm_c = l.value("svm_c", c.linear.svm_c);
      c.linear.epochs = l.value("epochs", c.linear.epochs);
      c.linear.step = l.value("step", c.linear.step);
    }
    c.top_m = j.value("m", c.top_m);
    c.lambda = j.value("lambda", c.lambda);
    if (j.contains("mask")) c.mask = MaskSet(j.at("mask").get<std::set<std::size_t>>());
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.seed = j.value("seed", c.seed);
    c.samples = j.value("samples", c.samples);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.permutation_repeats = j.value("permutation_repeats", c.permutation_repeats);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("configuration: ") + e.what());
  }
  return c;
}

SyntheticSpec resolve_synthetic_spec(const std::string& source) {
  if (source == "default") return default_spec();
  if (source == "recovery") return concept_recovery_spec();
  std::ifstream in(source);
  if (!in) throw IoError("cannot open synthetic spec " + source);
  nlohmann::json j;
  try {
    in >> j;
    SyntheticSpec spec = synthetic_spec_from_json(j);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("synthetic spec " + source + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError("synthetic spec " + source + ": " + e.what());
  }
}

SyntheticSplit sample_split(const SyntheticSpec& spec, std::size_t n, double train_fraction,
                            std::uint64_t seed) {
  const FeatureMatrix all = sample_dataset(spec, n, seed);
  auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  cut = std::clamp<std::size_t>(cut, 1, n - 1);
  return {slice_rows(all, 0, cut), slice_rows(all, cut, n)};
}

Dataset make_dataset(FeatureMatrix train_raw, FeatureMatrix test_raw,
                     std::optional<SyntheticSpec> spec) {
  if (train_raw.dims() != test_raw.dims()) {
    throw InvalidArgument("train and test have different feature counts (" +
                          std::to_string(train_raw.dims()) + " vs " +
                          std::to_string(test_raw.dims()) + ")");
  }
  Standardized st = standardize(train_raw);
  FeatureMatrix test = apply_stats(test_raw, st.stats);
  return Dataset{std::move(train_raw), std::move(test_raw), std::move(st.matrix),
                 std::move(test), std::move(st.stats), std::move(spec)};
}

Dataset load_dataset(const PipelineConfig& config) {
  config.validate();
  if (config.train_path) {
    auto train = load_feature_matrix(*config.train_path, format_from_path(*config.train_path));
    auto test = load_feature_matrix(*config.test_path, format_from_path(*config.test_path));
    return make_dataset(std::move(train), std::move(test), std::nullopt);
  }
  SyntheticSpec spec = resolve_synthetic_spec(config.synthetic.value_or("default"));
  auto split = sample_split(spec, config.samples, config.train_fraction, config.seed);
  return make_dataset(std::move(split.train), std::move(split.test), std::move(spec));
}

ImportanceMap TrainedClassifier::importance() const {
  if (gbdt) return gbdt->importance;
  return linear_importance(*linear);
}

Predictor TrainedClassifier::predictor() const {
  if (gbdt) return gbdt_predictor(*gbdt);
  return linear_predictor(*linear);
}

nlohmann::json TrainedClassifier::to_json() const {
  if (gbdt) return concept_tab::to_json(*gbdt);
  return concept_tab::to_json(*linear);
}

TrainedClassifier train_classifier(const FeatureMatrix& train, const PipelineConfig& config) {
  if (!train.is_binary()) throw InvalidArgument("training requires binary labels");
  TrainedClassifier out;
  out.kind = config.classifier;
  switch (config.classifier) {
    case ClassifierKind::kGbdt:
      out.gbdt = train_gbdt(train, config.gbdt);
      break;
    case ClassifierKind::kLogistic:
      out.linear = train_logistic(train, config.linear.logistic_l2, config.linear.epochs,
                                  config.linear.step);
      break;
    case ClassifierKind::kLinearSvm:
      out.linear = train_linear_svm(train, config.linear.svm_c, config.linear.epochs,
                                    config.linear.step);
      break;
  }
  return out;
}

namespace {

CompareRow make_row(std::string name, std::span<const ConceptScore> scores,
                    const ImportanceMap& importance, std::size_t m) {
  CompareRow row;
  row.classifier = std::move(name);
  row.avg_w = avg_w_of_top_importance(scores, importance, m);
  row.top_features = rank_by_importance(importance);
  row.top_features.resize(std::min(m, row.top_features.size()));
  return row;
}

}  // namespace

std::vector<CompareRow> compare_classifiers(const Dataset& data,
                                            std::span<const ConceptScore> scores,
                                            const PipelineConfig& config, std::size_t m) {
  if (m == 0) throw InvalidArgument("m must be positive");
  std::vector<CompareRow> rows;
  PipelineConfig c = config;
  for (const ClassifierKind kind :
       {ClassifierKind::kGbdt, ClassifierKind::kLogistic, ClassifierKind::kLinearSvm}) {
    c.classifier = kind;
    const TrainedClassifier model = train_classifier(data.train, c);
    rows.push_back(make_row(to_string(kind), scores, model.importance(), m));
    if (kind == ClassifierKind::kGbdt) {
      const ImportanceMap perm = permutation_importance(
          model.predictor(), data.test, config.permutation_repeats, config.seed);
      rows.push_back(make_row("gbdt_permutation", scores, perm, m));
    }
  }
  double mean_w = 0.0;
  for (const auto& s : scores) mean_w += s.w;
  CompareRow random;
  random.classifier = "random";
  random.avg_w = scores.empty() ? 0.0 : mean_w / static_cast<double>(scores.size());
  rows.push_back(std::move(random));
  return rows;
}

nlohmann::json compare_to_json(const std::vector<CompareRow>& rows, std::size_t m) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"classifier", r.classifier}, {"avg_w", r.avg_w},
                   {"top_features", r.top_features}});
  }
  return {{"m", m}, {"rows", arr}};
}

}  // namespace concept_tab
