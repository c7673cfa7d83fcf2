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

#include <cmath>
#include <random>
#include <set>

#include "doctest.h"

#include "concept_tab/baselines.hpp"
#include "concept_tab/errors.hpp"
#include "concept_tab/parallel.hpp"

using namespace concept_tab;

namespace {

FeatureMatrix linear_world(std::mt19937_64& rng, std::size_t n, std::size_t d, double noise) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n * d);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) v[i * d + k] = z(rng);
    const double s = 2.0 * v[i * d] - v[i * d + 1] + noise * z(rng);
    y[i] = s > 0.0 ? 1 : 0;
  }
  y[0] = 0;
  y[1] = 1;
  return FeatureMatrix(n, d, v, y);
}

long double logistic_objective_ld(const FeatureMatrix& m, const std::vector<double>& w, double b,
                                  double l2) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < m.count(); ++i) {
    long double z = b;
    for (std::size_t k = 0; k < m.dims(); ++k) z += static_cast<long double>(w[k]) * m.at(i, k);
    total += std::log1p(std::exp(z)) - static_cast<long double>(m.label(i)) * z;
  }
  long double norm = 0.0L;
  for (const double x : w) norm += static_cast<long double>(x) * x;
  return total / static_cast<long double>(m.count()) + 0.5L * l2 * norm;
}

}  // namespace

TEST_CASE("logistic objective matches a direct evaluation") {
  std::mt19937_64 rng(1);
  const FeatureMatrix m = linear_world(rng, 40, 3, 0.5);
  const std::vector<double> w{0.3, -0.2, 0.9};
  const double got = logistic_objective(m, w, 0.1, 0.05);
  CHECK(std::fabs(got - static_cast<double>(logistic_objective_ld(m, w, 0.1, 0.05))) <= 1e-12);
}

TEST_CASE("logistic gradient matches finite differences") {
  std::mt19937_64 rng(2);
  const FeatureMatrix m = linear_world(rng, 50, 4, 0.5);
  std::normal_distribution<double> z(0.0, 0.5);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> w(4);
    for (auto& x : w) x = z(rng);
    const double b = z(rng);
    const double l2 = 0.1;
    const auto g = logistic_gradient(m, w, b, l2);
    const long double e = 1e-5L;
    for (std::size_t k = 0; k < 4; ++k) {
      auto wp = w;
      auto wm = w;
      wp[k] += static_cast<double>(e);
      wm[k] -= static_cast<double>(e);
      const double fd = static_cast<double>(
          (logistic_objective_ld(m, wp, b, l2) - logistic_objective_ld(m, wm, b, l2)) / (2 * e));
      CHECK(std::fabs(fd - g.weights[k]) <= 1e-6 * std::max(1e-3, std::fabs(g.weights[k])));
    }
    const double fdb = static_cast<double>(
        (logistic_objective_ld(m, w, b + static_cast<double>(e), l2) -
         logistic_objective_ld(m, w, b - static_cast<double>(e), l2)) /
        (2 * e));
    CHECK(std::fabs(fdb - g.bias) <= 1e-6 * std::max(1e-3, std::fabs(g.bias)));
  }
}

TEST_CASE("logistic gradient descent decreases the objective") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const FeatureMatrix m = linear_world(rng, 120, 3, 1.0);
    const LinearModel model = train_logistic(m, 0.01, 100, 0.5);
    REQUIRE(model.objective_trace.size() == 100);
    CHECK(model.objective_trace.front() < std::log(2.0));
    for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
      CHECK(model.objective_trace[i] <= model.objective_trace[i - 1] + 1e-15);
    }
  }
}

TEST_CASE("logistic importance is the absolute weight") {
  std::mt19937_64 rng(4);
  const FeatureMatrix m = linear_world(rng, 400, 5, 0.1);
  const LinearModel model = train_logistic(m, 1e-3, 300, 0.5);
  const ImportanceMap imp = linear_importance(model);
  REQUIRE(imp.size() == 5);
  for (const auto& [k, v] : imp) CHECK(v == std::fabs(model.weights[k]));
  CHECK(rank_by_importance(imp).front() == 0);
  CHECK(accuracy(linear_predictor(model), m) > 0.95);
}

TEST_CASE("svm objective matches a direct evaluation") {
  const FeatureMatrix m(3, 1, {1.0, -1.0, 0.2}, {1, 0, 0});
  const std::vector<double> w{2.0};
  // Margins: 2, 2, -0.4 => hinge 0, 0, 1.4.
  CHECK(svm_objective(m, w, 0.0, 3.0) == doctest::Approx(2.0 + 3.0 * 1.4 / 3.0));
}

TEST_CASE("svm subgradient descent improves on the zero model") {
  std::mt19937_64 rng(5);
  const FeatureMatrix m = linear_world(rng, 300, 4, 0.2);
  const LinearModel model = train_linear_svm(m, 1.0, 300, 0.5);
  CHECK(model.kind == LinearKind::kLinearSvm);
  CHECK(model.objective_trace.back() < svm_objective(m, std::vector<double>(4, 0.0), 0.0, 1.0));
  CHECK(accuracy(linear_predictor(model), m) > 0.9);
  CHECK(rank_by_importance(linear_importance(model)).front() == 0);
}

TEST_CASE("linear trainers reject bad input") {
  const FeatureMatrix one(2, 1, {1.0, 2.0}, {1, 1});
  CHECK_THROWS_AS(train_logistic(one, 0.0, 10, 0.1), InvalidArgument);
  const FeatureMatrix two(2, 1, {1.0, 2.0}, {0, 1});
  CHECK_THROWS_AS(train_logistic(two, -1.0, 10, 0.1), InvalidArgument);
  CHECK_THROWS_AS(train_linear_svm(two, 0.0, 10, 0.1), InvalidArgument);
}

TEST_CASE("permutation importance ignores unused features and is reproducible") {
  std::mt19937_64 rng(6);
  const FeatureMatrix m = linear_world(rng, 300, 4, 0.0);
  const Predictor uses_first = [](std::span<const double> r) { return r[0] > 0.0 ? 1 : 0; };
  const ImportanceMap a = permutation_importance(uses_first, m, 5, 99);
  CHECK(a.at(1) == 0.0);
  CHECK(a.at(2) == 0.0);
  CHECK(a.at(3) == 0.0);
  CHECK(a.at(0) > 0.2);
  const std::size_t saved = max_threads();
  set_max_threads(1);
  const ImportanceMap b = permutation_importance(uses_first, m, 5, 99);
  set_max_threads(4);
  const ImportanceMap c = permutation_importance(uses_first, m, 5, 99);
  set_max_threads(saved);
  CHECK(a == b);
  CHECK(b == c);
  CHECK(permutation_importance(uses_first, m, 5, 100) != a);
  CHECK_THROWS_AS(permutation_importance(uses_first, m, 0, 1), InvalidArgument);
}

TEST_CASE("derived seeds are distinct across streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(7, a, b));
  }
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(7, 1, 2) == derive_seed(7, 1, 2));
}

TEST_CASE("gbdt predictor thresholds probability at one half") {
  const FeatureMatrix m(20, 1,
                        {-2, -2, -2, -2, -2, -2, -2, -2, -2, -2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2},
                        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  GbdtParams p;
  p.num_rounds = 10;
  const GbdtModel model = train_gbdt(m, p);
  CHECK(accuracy(gbdt_predictor(model), m) == 1.0);
}

TEST_CASE("strong L2 drives noise weights toward zero") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = 2000;
  const std::size_t d = 64;
  std::vector<double> v(n * d);
  for (auto& x : v) x = z(rng);
  std::vector<int> y(n);
  for (auto& l : y) l = static_cast<int>(rng() & 1U);
  const FeatureMatrix m = standardize(FeatureMatrix(n, d, v, y)).matrix;
  const LinearModel model = train_logistic(m, 1e3, 200, 1e-3);
  double max_w = 0.0;
  for (const double w : model.weights) max_w = std::max(max_w, std::fabs(w));
  CHECK(max_w < 0.05);
}

TEST_CASE("perfectly separating feature dominates the logistic weights") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    const int label = i % 2;
    v.push_back(label == 1 ? 1.0 + std::fabs(z(rng)) : -1.0 - std::fabs(z(rng)));
    v.push_back(z(rng));
    v.push_back(z(rng));
    y.push_back(label);
  }
  const FeatureMatrix m = standardize(FeatureMatrix(200, 3, v, y)).matrix;
  const ImportanceMap imp = linear_importance(train_logistic(m, 0.1, 300, 0.5));
  CHECK(imp.at(0) > imp.at(1));
  CHECK(imp.at(0) > imp.at(2));
}

TEST_CASE("svm separates 1-D data with a margin") {
  const FeatureMatrix m(6, 1, {-3, -2, -1.5, 1.5, 2, 3}, {0, 0, 0, 1, 1, 1});
  const LinearModel model = train_linear_svm(m, 1.0, 200, 0.5);
  CHECK(accuracy(linear_predictor(model), m) == 1.0);
}

TEST_CASE("duplicated columns receive equal svm weights") {
  std::mt19937_64 rng(43);
  FeatureMatrix base = linear_world(rng, 200, 3, 0.3);
  std::vector<double> v;
  for (std::size_t i = 0; i < base.count(); ++i) {
    const auto r = base.row(i);
    v.insert(v.end(), r.begin(), r.end());
    v.push_back(r[0]);
  }
  const FeatureMatrix m(base.count(), 4, v, std::vector<int>(base.labels().begin(), base.labels().end()));
  const LinearModel model = train_linear_svm(m, 1.0, 200, 0.5);
  CHECK(std::fabs(std::fabs(model.weights[0]) - std::fabs(model.weights[3])) <= 1e-6);
}

TEST_CASE("svm objective of the averaged iterate does not increase") {
  std::mt19937_64 rng(44);
  const FeatureMatrix m = linear_world(rng, 60, 3, 0.5);
  const LinearModel model = train_linear_svm(m, 1.0, 200, 0.1);
  for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
    CHECK(model.objective_trace[i] <= model.objective_trace[i - 1] + 1e-12);
  }
}

TEST_CASE("linear importance ranking is permutation equivariant") {
  std::mt19937_64 rng(45);
  const FeatureMatrix m = linear_world(rng, 300, 4, 0.5);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<double> v;
  for (std::size_t i = 0; i < m.count(); ++i) {
    for (const std::size_t k : perm) v.push_back(m.at(i, k));
  }
  const FeatureMatrix p(m.count(), 4, v, std::vector<int>(m.labels().begin(), m.labels().end()));
  const auto a = linear_importance(train_logistic(m, 0.01, 100, 0.5));
  const auto b = linear_importance(train_logistic(p, 0.01, 100, 0.5));
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(b.at(j) == doctest::Approx(a.at(perm[j])).epsilon(1e-9));
  }
}

TEST_CASE("permutation importance magnitudes") {
  std::mt19937_64 rng(46);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = 2000;
  std::vector<double> v;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    v.push_back(label == 1 ? 1.0 : -1.0);
    v.push_back(3.0);
    for (int k = 0; k < 4; ++k) v.push_back(z(rng));
    y.push_back(label);
  }
  const FeatureMatrix m(n, 6, v, y);
  const Predictor perfect = [](std::span<const double> r) { return r[0] > 0.0 ? 1 : 0; };
  const ImportanceMap imp = permutation_importance(perfect, m, 10, 5);
  CHECK(std::fabs(imp.at(0) - 0.5) <= 0.05);
  CHECK(imp.at(1) == 0.0);

  // The fitted model reads the noise columns with small weights.
  const LinearModel lin = train_logistic(standardize(m).matrix, 0.01, 100, 0.5);
  const ImportanceMap noise =
      permutation_importance(linear_predictor(lin), standardize(m).matrix, 10, 5);
  for (std::size_t k = 2; k < 6; ++k) CHECK(std::fabs(noise.at(k)) < 0.02);
}
