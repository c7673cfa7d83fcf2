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

#include "concept_tab/explain_debug.hpp"

#include <algorithm>
#include <cmath>

#include "concept_tab/errors.hpp"

namespace concept_tab {

std::vector<double> latent_modify(const LatentEdit& edit) {
  if (edit.k >= edit.base.size()) {
    throw InvalidArgument("edit index " + std::to_string(edit.k) + " out of range");
  }
  if (!std::isfinite(edit.lambda)) throw InvalidArgument("lambda must be finite");
  std::vector<double> out = edit.base;
  out[edit.k] += edit.direction == Direction::kPlus ? edit.lambda : -edit.lambda;
  return out;
}

VisualizationTriple visualize_concept(const SyntheticSpec& spec, std::span<const double> base,
                                      std::size_t k, double lambda) {
  const std::vector<double> b(base.begin(), base.end());
  return {render(spec, b),
          render(spec, latent_modify({b, k, lambda, Direction::kMinus})),
          render(spec, latent_modify({b, k, lambda, Direction::kPlus}))};
}

DebugReport debug_mask_retrain(const GbdtModel& reference, const FeatureMatrix& train,
                               const FeatureMatrix& test, const MaskSet& mask,
                               const GbdtParams& params, GbdtModel* debugged_out) {
  mask.validate(train.dims());
  DebugReport report;
  report.mask = mask;
  report.importance_before = reference.importance;
  report.accuracy_before = evaluate(reference, test);

  GbdtModel debugged = train_gbdt(mask_features(train, mask), params);
  report.importance_after = debugged.importance;
  for (const std::size_t k : mask.indices()) {
    const auto it = report.importance_after.find(k);
    if (it != report.importance_after.end() && it->second != 0.0) {
      throw Error("masked feature " + std::to_string(k) + " received importance");
    }
    report.importance_after[k] = 0.0;
  }
  report.accuracy_after = evaluate(debugged, mask_features(test, mask));
  if (debugged_out) *debugged_out = std::move(debugged);
  return report;
}

DebugReport debug_mask_retrain(const FeatureMatrix& train, const FeatureMatrix& test,
                               const MaskSet& mask, const GbdtParams& params) {
  return debug_mask_retrain(train_gbdt(train, params), train, test, mask, params);
}

ExplanationReport build_explanation(const GbdtModel& model, std::span<const ConceptScore> scores,
                                    const SyntheticSpec& spec, std::span<const double> sample,
                                    std::size_t m, double lambda, const ExplainOptions& options) {
  if (m == 0) throw InvalidArgument("m must be positive");
  ExplanationReport report;
  report.task = options.task;
  report.lambda = lambda;
  report.requested = m;

  std::vector<std::size_t> ranked;
  for (const std::size_t k : rank_by_importance(model.importance)) {
    if (model.importance.at(k) > 0.0) ranked.push_back(k);
  }
  report.truncated = ranked.size() < m;
  ranked.resize(std::min(m, ranked.size()));

  if (options.artifact_dir) std::filesystem::create_directories(*options.artifact_dir);
  for (const std::size_t k : ranked) {
    if (k >= scores.size()) throw InvalidArgument("no W score for feature " + std::to_string(k));
    ExplainedConcept c;
    c.feature = k;
    c.importance = model.importance.at(k);
    c.w = scores[k].w;
    if (const ConceptDim* cd = spec.concept_for_dim(k)) c.semantic = to_string(cd->semantic);
    if (options.artifact_dir) {
      const double raw_lambda = options.stats ? lambda * options.stats->scale(k) : lambda;
      const auto triple = visualize_concept(spec, sample, k, raw_lambda);
      const std::pair<const char*, const RenderedImage*> parts[] = {
          {"minus", &triple.minus}, {"base", &triple.base}, {"plus", &triple.plus}};
      for (const auto& [tag, img] : parts) {
        const auto name = "concept_" + std::to_string(k) + "_" + tag + ".pgm";
        write_pgm(*img, *options.artifact_dir / name);
        c.images.push_back(name);
      }
    }
    report.concepts.push_back(std::move(c));
  }
  return report;
}

nlohmann::json importance_to_json(const ImportanceMap& importance) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : importance) j[std::to_string(k)] = v;
  return j;
}

ImportanceMap importance_from_json(const nlohmann::json& j) {
  ImportanceMap out;
  for (const auto& [key, v] : j.items()) out[std::stoul(key)] = v.get<double>();
  return out;
}

nlohmann::json importance_list_json(const ImportanceMap& importance) {
  nlohmann::json arr = nlohmann::json::array();
  for (const std::size_t k : rank_by_importance(importance)) {
    arr.push_back({{"k", k}, {"importance", importance.at(k)}});
  }
  return arr;
}

nlohmann::json to_json(const DebugReport& report) {
  return {{"mask", report.mask.indices()},
          {"importance_before", importance_to_json(report.importance_before)},
          {"importance_after", importance_to_json(report.importance_after)},
          {"accuracy_before", report.accuracy_before},
          {"accuracy_after", report.accuracy_after}};
}

DebugReport debug_report_from_json(const nlohmann::json& j) {
  DebugReport r;
  r.mask = MaskSet(j.at("mask").get<std::set<std::size_t>>());
  r.importance_before = importance_from_json(j.at("importance_before"));
  r.importance_after = importance_from_json(j.at("importance_after"));
  r.accuracy_before = j.at("accuracy_before").get<double>();
  r.accuracy_after = j.at("accuracy_after").get<double>();
  return r;
}

nlohmann::json to_json(const ExplanationReport& report) {
  nlohmann::json concepts = nlohmann::json::array();
  nlohmann::json w = nlohmann::json::object();
  for (const auto& c : report.concepts) {
    concepts.push_back({{"k", c.feature},
                        {"importance", c.importance},
                        {"w", c.w},
                        {"semantic", c.semantic},
                        {"images", c.images}});
    w[std::to_string(c.feature)] = c.w;
  }
  return {{"task", report.task},         {"lambda", report.lambda},
          {"requested", report.requested}, {"truncated", report.truncated},
          {"concepts", concepts},        {"w", w}};
}

ExplanationReport explanation_report_from_json(const nlohmann::json& j) {
  ExplanationReport r;
  r.task = j.at("task").get<std::string>();
  r.lambda = j.at("lambda").get<double>();
  r.requested = j.at("requested").get<std::size_t>();
  r.truncated = j.at("truncated").get<bool>();
  for (const auto& c : j.at("concepts")) {
    r.concepts.push_back({c.at("k").get<std::size_t>(), c.at("importance").get<double>(),
                          c.at("w").get<double>(), c.value("semantic", std::string()),
                          c.value("images", std::vector<std::string>{})});
  }
  return r;
}

}  // namespace concept_tab
