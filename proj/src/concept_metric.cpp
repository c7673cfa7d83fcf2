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

#include "concept_tab/concept_metric.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include "json.hpp"
#include <numeric>
#include <ostream>

#include "concept_tab/errors.hpp"
#include "concept_tab/parallel.hpp"
#include "concept_tab/simd.hpp"

namespace concept_tab {

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("wasserstein1 needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  // Walk the merged support. Between consecutive support points t_j < t_{j+1}
  // both CDFs are constant; record the gap and the CDF difference there.
  std::vector<double> cdf_diff;
  std::vector<double> gap;
  cdf_diff.reserve(sa.size() + sb.size());
  gap.reserve(sa.size() + sb.size());
  std::size_t i = 0, j = 0;
  double t = std::min(sa.front(), sb.front());
  while (i < sa.size() || j < sb.size()) {
    while (i < sa.size() && sa[i] == t) ++i;
    while (j < sb.size() && sb[j] == t) ++j;
    if (i == sa.size() && j == sb.size()) break;
    const double next = (i == sa.size())   ? sb[j]
                        : (j == sb.size()) ? sa[i]
                                           : std::min(sa[i], sb[j]);
    cdf_diff.push_back(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    gap.push_back(next - t);
    t = next;
  }
  return simd::kernels().weighted_abs_sum(cdf_diff.data(), gap.data(), gap.size());
}

std::vector<ConceptScore> score_all_features(const FeatureMatrix& pos,
                                             const FeatureMatrix& neg) {
  if (pos.dims() != neg.dims()) {
    throw InvalidArgument("class matrices differ in dimension: " + std::to_string(pos.dims()) +
                          " vs " + std::to_string(neg.dims()));
  }
  std::vector<ConceptScore> scores(pos.dims());
  parallel_for(pos.dims(), [&](std::size_t k) {
    const auto a = pos.column(k);
    const auto b = neg.column(k);
    scores[k] = {k, wasserstein1(a, b)};
  });
  return scores;
}

std::vector<ConceptScore> score_matrix(const FeatureMatrix& standardized) {
  if (standardized.is_binary()) {
    const auto split = split_by_label(standardized);
    return score_all_features(split.pos, split.neg);
  }
  std::vector<ConceptScore> best(standardized.dims());
  for (std::size_t k = 0; k < best.size(); ++k) best[k].feature_index = k;
  for (int cls = 0; cls < standardized.num_classes(); ++cls) {
    const auto split = split_by_label(one_vs_rest(standardized, cls));
    const auto s = score_all_features(split.pos, split.neg);
    for (std::size_t k = 0; k < best.size(); ++k) best[k].w = std::max(best[k].w, s[k].w);
  }
  return best;
}

std::vector<std::size_t> top_m_concepts(std::span<const ConceptScore> scores, std::size_t m) {
  if (m > scores.size()) {
    throw InvalidArgument("requested top " + std::to_string(m) + " of " +
                          std::to_string(scores.size()) + " features");
  }
  std::vector<ConceptScore> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const ConceptScore& x, const ConceptScore& y) {
    if (x.w != y.w) return x.w > y.w;
    return x.feature_index < y.feature_index;
  });
  std::vector<std::size_t> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = sorted[i].feature_index;
  return out;
}

std::vector<std::size_t> rank_by_importance(const ImportanceMap& importance) {
  std::vector<std::pair<std::size_t, double>> items(importance.begin(), importance.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::vector<std::size_t> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) out[i] = items[i].first;
  return out;
}

double avg_w_of_top_importance(std::span<const ConceptScore> scores,
                               const ImportanceMap& importance, std::size_t m) {
  if (importance.empty()) throw InvalidArgument("importance map is empty");
  if (m == 0) throw InvalidArgument("m must be positive");
  const auto ranked = rank_by_importance(importance);
  const std::size_t take = std::min(m, ranked.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t k = ranked[i];
    if (k >= scores.size()) throw InvalidArgument("importance refers to unscored feature");
    sum += scores[k].w;
  }
  return sum / static_cast<double>(take);
}

void write_scores_json(std::ostream& out, std::span<const ConceptScore> scores) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : scores) arr.push_back({{"k", s.feature_index}, {"w", s.w}});
  out << arr.dump(2) << '\n';
}

std::vector<ConceptScore> read_scores_json(std::istream& in) {
  const auto arr = nlohmann::json::parse(in);
  std::vector<ConceptScore> out;
  for (const auto& e : arr) out.push_back({e.at("k").get<std::size_t>(), e.at("w").get<double>()});
  return out;
}

void write_scores_csv(std::ostream& out, std::span<const ConceptScore> scores) {
  out << "k,w\n";
  for (const auto& s : scores) out << s.feature_index << ',' << format_double(s.w) << '\n';
}

}  // namespace concept_tab
