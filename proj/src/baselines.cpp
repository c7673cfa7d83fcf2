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

#include "concept_tab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "concept_tab/errors.hpp"
#include "concept_tab/parallel.hpp"
#include "concept_tab/simd.hpp"

namespace concept_tab {

double LinearModel::score(std::span<const double> row) const {
  if (row.size() != weights.size()) throw InvalidArgument("row dimension mismatch");
  return simd::kernels().dot(weights.data(), row.data(), row.size()) + bias;
}

ImportanceMap linear_importance(const LinearModel& model) {
  ImportanceMap out;
  for (std::size_t k = 0; k < model.weights.size(); ++k) out[k] = std::fabs(model.weights[k]);
  return out;
}

namespace {

void require_two_classes(const FeatureMatrix& m) {
  if (!m.is_binary()) throw InvalidArgument("linear baselines expect binary labels");
  const auto pos = std::count(m.labels().begin(), m.labels().end(), 1);
  if (pos == 0 || static_cast<std::size_t>(pos) == m.count()) {
    throw InvalidArgument("training set contains a single class");
  }
}

double squared_norm(std::span<const double> w) {
  return simd::kernels().dot(w.data(), w.data(), w.size());
}

}  // namespace

double logistic_objective(const FeatureMatrix& m, std::span<const double> weights, double bias,
                          double l2) {
  const auto& kern = simd::kernels();
  double loss = 0.0;
  for (std::size_t i = 0; i < m.count(); ++i) {
    const double margin = kern.dot(weights.data(), m.row(i).data(), m.dims()) + bias;
    loss += logistic_loss(margin, m.label(i));
  }
  return loss / static_cast<double>(m.count()) + 0.5 * l2 * squared_norm(weights);
}

LinearGradient logistic_gradient(const FeatureMatrix& m, std::span<const double> weights,
                                 double bias, double l2) {
  const auto& kern = simd::kernels();
  const std::size_t d = m.dims();
  LinearGradient g{std::vector<double>(d, 0.0), 0.0};
  for (std::size_t i = 0; i < m.count(); ++i) {
    const double margin = kern.dot(weights.data(), m.row(i).data(), d) + bias;
    const double r = sigmoid(margin) - static_cast<double>(m.label(i));
    kern.axpy(r, m.row(i).data(), g.weights.data(), d);
    g.bias += r;
  }
  const double inv_n = 1.0 / static_cast<double>(m.count());
  for (std::size_t k = 0; k < d; ++k) g.weights[k] = g.weights[k] * inv_n + l2 * weights[k];
  g.bias *= inv_n;
  return g;
}

LinearModel train_logistic(const FeatureMatrix& m, double l2, int epochs, double step) {
  require_two_classes(m);
  if (!(l2 >= 0.0) || epochs < 1 || !(step > 0.0)) {
    throw InvalidArgument("train_logistic: need l2 >= 0, epochs >= 1, step > 0");
  }
  LinearModel model;
  model.kind = LinearKind::kLogistic;
  model.weights.assign(m.dims(), 0.0);
  for (int e = 0; e < epochs; ++e) {
    const auto g = logistic_gradient(m, model.weights, model.bias, l2);
    simd::kernels().axpy(-step, g.weights.data(), model.weights.data(), m.dims());
    model.bias -= step * g.bias;
    model.objective_trace.push_back(logistic_objective(m, model.weights, model.bias, l2));
  }
  return model;
}

double svm_objective(const FeatureMatrix& m, std::span<const double> weights, double bias,
                     double c) {
  const auto& kern = simd::kernels();
  double hinge = 0.0;
  for (std::size_t i = 0; i < m.count(); ++i) {
    const double y = m.label(i) == 1 ? 1.0 : -1.0;
    const double margin = y * (kern.dot(weights.data(), m.row(i).data(), m.dims()) + bias);
    hinge += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * squared_norm(weights) + c * hinge / static_cast<double>(m.count());
}

LinearModel train_linear_svm(const FeatureMatrix& m, double c, int epochs, double step) {
  require_two_classes(m);
  if (!(c > 0.0) || epochs < 1 || !(step > 0.0)) {
    throw InvalidArgument("train_linear_svm: need c > 0, epochs >= 1, step > 0");
  }
  const auto& kern = simd::kernels();
  const std::size_t d = m.dims();
  const double scale = c / static_cast<double>(m.count());
  std::vector<double> w(d, 0.0), grad(d);
  double b = 0.0;

  LinearModel avg;
  avg.kind = LinearKind::kLinearSvm;
  avg.weights.assign(d, 0.0);
  for (int t = 1; t <= epochs; ++t) {
    std::copy(w.begin(), w.end(), grad.begin());  // d/dw of 0.5 ||w||^2
    double grad_b = 0.0;
    for (std::size_t i = 0; i < m.count(); ++i) {
      const double y = m.label(i) == 1 ? 1.0 : -1.0;
      if (y * (kern.dot(w.data(), m.row(i).data(), d) + b) < 1.0) {
        kern.axpy(-scale * y, m.row(i).data(), grad.data(), d);
        grad_b -= scale * y;
      }
    }
    const double eta = step / std::sqrt(static_cast<double>(t));
    kern.axpy(-eta, grad.data(), w.data(), d);
    b -= eta * grad_b;

    // Running mean of the iterates.
    const double keep = static_cast<double>(t - 1) / static_cast<double>(t);
    const double add = 1.0 / static_cast<double>(t);
    for (std::size_t k = 0; k < d; ++k) avg.weights[k] = keep * avg.weights[k] + add * w[k];
    avg.bias = keep * avg.bias + add * b;
    avg.objective_trace.push_back(svm_objective(m, avg.weights, avg.bias, c));
  }
  return avg;
}

nlohmann::json to_json(const LinearModel& model) {
  nlohmann::json imp = nlohmann::json::array();
  for (const auto& [k, v] : linear_importance(model)) imp.push_back({{"k", k}, {"importance", v}});
  return {{"format", "concept_tab.linear"},
          {"version", 1},
          {"kind", model.kind == LinearKind::kLogistic ? "logistic" : "linear_svm"},
          {"weights", model.weights},
          {"bias", model.bias},
          {"importance", imp}};
}

Predictor gbdt_predictor(const GbdtModel& model) {
  return [&model](std::span<const double> row) { return predict_proba(model, row) >= 0.5 ? 1 : 0; };
}

Predictor linear_predictor(const LinearModel& model) {
  return [&model](std::span<const double> row) { return model.predict(row); };
}

double accuracy(const Predictor& predict, const FeatureMatrix& m) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < m.count(); ++i) {
    if (predict(m.row(i)) == m.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(m.count());
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a simple combination.
  std::uint64_t z = seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xC2B2AE3D27D4EB4Full);
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

ImportanceMap permutation_importance(const Predictor& predict, const FeatureMatrix& m,
                                     int repeats, std::uint64_t seed) {
  if (repeats <= 0) throw InvalidArgument("repeats must be positive");
  const double baseline = accuracy(predict, m);
  const std::size_t n = m.count();
  const std::size_t d = m.dims();
  std::vector<double> drop(d, 0.0);
  parallel_for(d, [&](std::size_t k) {
    std::vector<double> column = m.column(k);
    std::vector<double> row(d);
    double total = 0.0;
    for (int r = 0; r < repeats; ++r) {
      std::vector<double> shuffled = column;
      std::mt19937_64 rng(derive_seed(seed, k, static_cast<std::uint64_t>(r)));
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto src = m.row(i);
        std::copy(src.begin(), src.end(), row.begin());
        row[k] = shuffled[i];
        if (predict(row) == m.label(i)) ++correct;
      }
      total += baseline - static_cast<double>(correct) / static_cast<double>(n);
    }
    drop[k] = total / static_cast<double>(repeats);
  });
  ImportanceMap out;
  for (std::size_t k = 0; k < d; ++k) out[k] = drop[k];
  return out;
}

}  // namespace concept_tab
