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

#include <filesystem>

#include "doctest.h"

#include "concept_tab/errors.hpp"
#include "concept_tab/explain_debug.hpp"
#include "concept_tab/pipeline.hpp"

using namespace concept_tab;

namespace {

const Dataset& planted() {
  static const Dataset data = [] {
    PipelineConfig c;
    c.synthetic = "default";
    c.samples = 1000;
    c.seed = 4;
    return load_dataset(c);
  }();
  return data;
}

GbdtParams quick_params() {
  GbdtParams p;
  p.num_rounds = 60;
  return p;
}

}  // namespace

TEST_CASE("latent_modify edits exactly one coordinate") {
  const std::vector<double> base{0.5, -1.0, 2.0};
  const auto plus = latent_modify({base, 1, 2.0, Direction::kPlus});
  const auto minus = latent_modify({base, 1, 2.0, Direction::kMinus});
  CHECK(plus == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(minus == std::vector<double>{0.5, -3.0, 2.0});
  CHECK(latent_modify({base, 2, 0.0, Direction::kPlus}) == base);
  CHECK_THROWS_AS(latent_modify({base, 3, 1.0, Direction::kPlus}), InvalidArgument);
}

TEST_CASE("lambda zero yields three identical images") {
  const SyntheticSpec spec = default_spec();
  const std::vector<double> base(spec.dims, 0.3);
  for (const std::size_t k : {3U, 7U, 30U}) {
    const auto t = visualize_concept(spec, base, k, 0.0);
    CHECK(t.base == t.minus);
    CHECK(t.base == t.plus);
  }
}

TEST_CASE("visualization moves the probe in the edit direction") {
  const SyntheticSpec spec = default_spec();
  const std::vector<double> base(spec.dims, 0.0);
  const auto t = visualize_concept(spec, base, 7, 1.5);
  CHECK(measure_semantic(t.minus, Semantic::kDiscRadius) <
        measure_semantic(t.base, Semantic::kDiscRadius));
  CHECK(measure_semantic(t.plus, Semantic::kDiscRadius) >
        measure_semantic(t.base, Semantic::kDiscRadius));
}

TEST_CASE("masking a feature zeroes its importance after retraining") {
  const Dataset& d = planted();
  const DebugReport r = debug_mask_retrain(d.train, d.test, MaskSet{7}, quick_params());
  CHECK(r.importance_before.at(7) > 0.0);
  CHECK(r.importance_after.at(7) == 0.0);
  CHECK(r.importance_after.at(41) > r.importance_before.at(41));
  CHECK(r.accuracy_before > 0.9);
  CHECK(r.accuracy_after > 0.9);
}

TEST_CASE("masking every informative feature collapses accuracy") {
  const Dataset& d = planted();
  const DebugReport r = debug_mask_retrain(d.train, d.test, MaskSet{3, 7, 12, 41}, quick_params());
  for (const std::size_t k : {3U, 7U, 12U, 41U}) CHECK(r.importance_after.at(k) == 0.0);
  CHECK(r.accuracy_after < 0.65);
}

TEST_CASE("reference overload reuses the given model and returns the debugged one") {
  const Dataset& d = planted();
  const GbdtModel ref = train_gbdt(d.train, quick_params());
  GbdtModel debugged;
  const DebugReport r = debug_mask_retrain(ref, d.train, d.test, MaskSet{3}, quick_params(),
                                           &debugged);
  CHECK(r.importance_before == ref.importance);
  CHECK(!debugged.importance.contains(3));
  CHECK(r == debug_mask_retrain(d.train, d.test, MaskSet{3}, quick_params()));
  CHECK_THROWS_AS(debug_mask_retrain(ref, d.train, d.test, MaskSet{64}, quick_params()),
                  InvalidArgument);
}

TEST_CASE("explanation lists concepts by importance and writes image triples") {
  const Dataset& d = planted();
  const GbdtModel model = train_gbdt(d.train, quick_params());
  const auto scores = score_matrix(d.train);
  const auto dir = std::filesystem::temp_directory_path() / "concept_tab_explain_test";
  std::filesystem::remove_all(dir);
  ExplainOptions opts;
  opts.artifact_dir = dir;
  opts.stats = &d.stats;
  const ExplanationReport rep =
      build_explanation(model, scores, *d.spec, d.test_raw.row(0), 4, 2.0, opts);
  CHECK(rep.concepts.size() == 4);
  CHECK(!rep.truncated);
  CHECK(rep.concepts[0].feature == 3);
  for (std::size_t i = 1; i < rep.concepts.size(); ++i) {
    CHECK(rep.concepts[i - 1].importance >= rep.concepts[i].importance);
  }
  for (const auto& c : rep.concepts) {
    CHECK(c.w == scores[c.feature].w);
    REQUIRE(c.images.size() == 3);
    for (const auto& name : c.images) CHECK(std::filesystem::exists(dir / name));
  }
  CHECK(explanation_report_from_json(to_json(rep)) == rep);
  std::filesystem::remove_all(dir);
}

TEST_CASE("explanation truncates when few features carry importance") {
  std::vector<double> v(60, 0.0);
  std::vector<int> y(20);
  for (int i = 0; i < 20; ++i) {
    v[i * 3] = i < 10 ? -1.0 : 1.0;
    y[i] = i < 10 ? 0 : 1;
  }
  const FeatureMatrix sep(20, 3, v, y);
  GbdtParams p;
  p.num_rounds = 5;
  p.min_samples_leaf = 1;
  const GbdtModel model = train_gbdt(sep, p);
  const auto scores = score_matrix(sep);
  SyntheticSpec spec;
  spec.dims = 3;
  const ExplanationReport rep = build_explanation(model, scores, spec, sep.row(0), 3, 2.0);
  CHECK(rep.truncated);
  CHECK(rep.concepts.size() == 1);
  CHECK(rep.concepts[0].images.empty());
  CHECK_THROWS_AS(build_explanation(model, scores, spec, sep.row(0), 0, 2.0), InvalidArgument);
}

TEST_CASE("debug report JSON uses string keys and round trips") {
  DebugReport r;
  r.mask = MaskSet{7};
  r.importance_before = {{3, 2.5}, {7, 1.0}};
  r.importance_after = {{3, 2.7}, {7, 0.0}};
  r.accuracy_before = 0.97;
  r.accuracy_after = 0.965;
  const auto j = to_json(r);
  CHECK(j.at("importance_after").at("7").get<double>() == 0.0);
  CHECK(debug_report_from_json(j) == r);
}
