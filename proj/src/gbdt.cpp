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

#include "concept_tab/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "concept_tab/errors.hpp"
#include "concept_tab/parallel.hpp"

namespace concept_tab {

void GbdtParams::validate() const {
  if (num_rounds < 1) throw InvalidArgument("num_rounds must be >= 1");
  if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidArgument("learning_rate must be in (0, 1]");
  }
  if (min_samples_leaf < 1) throw InvalidArgument("min_samples_leaf must be >= 1");
  if (!(l2_leaf_reg >= 0.0) || !std::isfinite(l2_leaf_reg)) {
    throw InvalidArgument("l2_leaf_reg must be finite and >= 0");
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logistic_loss(double margin, int y) {
  // softplus(m) - y * m, written to avoid overflow for large |m|.
  const double softplus = std::max(margin, 0.0) + std::log1p(std::exp(-std::fabs(margin)));
  return softplus - static_cast<double>(y) * margin;
}

GradHess logistic_grad_hess(double margin, int y) {
  const double p = sigmoid(margin);
  return {p - static_cast<double>(y), p * (1.0 - p)};
}

double split_gain(double grad_left, double hess_left, double grad_total, double hess_total,
                  double l2) {
  const double grad_right = grad_total - grad_left;
  const double hess_right = hess_total - hess_left;
  return 0.5 * (grad_left * grad_left / (hess_left + l2) +
                grad_right * grad_right / (hess_right + l2) -
                grad_total * grad_total / (hess_total + l2));
}

int Tree::leaf_index(std::span<const double> row) const {
  int idx = 0;
  while (!nodes[idx].is_leaf()) {
    const auto& node = nodes[idx];
    idx = row[node.split_feature] < node.threshold ? node.left : node.right;
  }
  return idx;
}

double Tree::predict(std::span<const double> row) const { return nodes[leaf_index(row)].weight; }

int Tree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes[i].is_leaf()) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
    }
  }
  return deepest;
}

namespace {

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
  std::size_t count = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  double threshold = 0.0;
  int feature = -1;
};

double split_point(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // The midpoint of two adjacent doubles can round onto `lo`, which would
  // send `lo` right.
  return mid > lo ? mid : hi;
}

// Exact greedy tree construction, one level at a time. `node_of[i]` tracks
// the node each training row currently sits in.
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& m, const std::vector<std::vector<std::size_t>>& order,
              const GbdtParams& params, std::span<const double> grad,
              std::span<const double> hess)
      : m_(m), order_(order), params_(params), grad_(grad), hess_(hess) {}

  Tree build(ImportanceMap& importance, std::vector<int>& node_of) {
    const std::size_t n = m_.count();
    node_of.assign(n, 0);
    Tree tree;
    NodeStats root;
    for (std::size_t i = 0; i < n; ++i) {
      root.grad += grad_[i];
      root.hess += hess_[i];
    }
    root.count = n;
    tree.nodes.push_back({});
    stats_.assign(1, root);

    std::vector<int> frontier{0};
    for (int depth = 0; depth < params_.max_depth && !frontier.empty(); ++depth) {
      const auto best = find_splits(frontier, node_of);
      std::vector<int> next;
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (best[s].feature < 0) continue;
        const int id = frontier[s];
        auto& node = tree.nodes[id];
        node.split_feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.gain = best[s].gain;
        const int left = static_cast<int>(tree.nodes.size());
        node.left = left;
        node.right = left + 1;
        importance[static_cast<std::size_t>(best[s].feature)] += best[s].gain;
        tree.nodes.resize(tree.nodes.size() + 2);
        stats_.resize(tree.nodes.size());
        next.push_back(left);
        next.push_back(left + 1);
      }
      if (next.empty()) break;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[node_of[i]];
        if (node.is_leaf()) continue;
        const int child = m_.at(i, node.split_feature) < node.threshold ? node.left : node.right;
        node_of[i] = child;
        auto& st = stats_[child];
        st.grad += grad_[i];
        st.hess += hess_[i];
        ++st.count;
      }
      frontier = std::move(next);
    }

    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      auto& node = tree.nodes[id];
      node.cover = stats_[id].count;
      if (node.is_leaf()) {
        node.weight = -params_.learning_rate * stats_[id].grad /
                      (stats_[id].hess + params_.l2_leaf_reg);
      }
    }
    return tree;
  }

 private:
  std::vector<SplitCandidate> find_splits(const std::vector<int>& frontier,
                                          const std::vector<int>& node_of) const {
    std::vector<int> slot_of(stats_.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[frontier[s]] = static_cast<int>(s);

    const std::size_t d = m_.dims();
    std::vector<std::vector<SplitCandidate>> per_feature(d);
    parallel_for(d, [&](std::size_t k) {
      per_feature[k] = scan_feature(k, frontier, slot_of, node_of);
    });

    // Ordered reduction: strict improvement keeps the lowest feature index.
    std::vector<SplitCandidate> best(frontier.size());
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (per_feature[k][s].feature >= 0 && per_feature[k][s].gain > best[s].gain) {
          best[s] = per_feature[k][s];
        }
      }
    }
    return best;
  }

  std::vector<SplitCandidate> scan_feature(std::size_t k, const std::vector<int>& frontier,
                                           const std::vector<int>& slot_of,
                                           const std::vector<int>& node_of) const {
    struct Running {
      double grad = 0.0;
      double hess = 0.0;
      std::size_t count = 0;
      double last = 0.0;
    };
    std::vector<Running> run(frontier.size());
    std::vector<SplitCandidate> best(frontier.size());
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    for (const std::size_t i : order_[k]) {
      const int slot = slot_of[node_of[i]];
      if (slot < 0) continue;
      const double x = m_.at(i, k);
      auto& r = run[slot];
      if (r.count > 0 && x != r.last) {
        const auto& total = stats_[frontier[slot]];
        if (r.count >= min_leaf && total.count - r.count >= min_leaf) {
          const double gain =
              split_gain(r.grad, r.hess, total.grad, total.hess, params_.l2_leaf_reg);
          // Ascending scan: strict improvement keeps the lowest threshold.
          if (gain > best[slot].gain) {
            best[slot] = {gain, split_point(r.last, x), static_cast<int>(k)};
          }
        }
      }
      r.grad += grad_[i];
      r.hess += hess_[i];
      ++r.count;
      r.last = x;
    }
    return best;
  }

  const FeatureMatrix& m_;
  const std::vector<std::vector<std::size_t>>& order_;
  const GbdtParams& params_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  std::vector<NodeStats> stats_;
};

double mean_loss(std::span<const double> margins, std::span<const int> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) s += logistic_loss(margins[i], labels[i]);
  return s / static_cast<double>(margins.size());
}

}  // namespace

GbdtModel train_gbdt(const FeatureMatrix& m, const GbdtParams& params) {
  params.validate();
  if (m.count() < 2) throw InvalidArgument("training needs at least two rows");
  if (!m.is_binary()) throw InvalidArgument("train_gbdt expects binary labels; use train_gbdt_ovr");
  const std::size_t n = m.count();
  const std::size_t positives =
      static_cast<std::size_t>(std::count(m.labels().begin(), m.labels().end(), 1));
  if (positives == 0 || positives == n) {
    throw InvalidArgument("training set contains a single class");
  }

  GbdtModel model;
  model.dims = m.dims();
  model.params = params;
  const double prevalence = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score = std::log(prevalence / (1.0 - prevalence));

  std::vector<std::vector<std::size_t>> order(m.dims());
  parallel_for(m.dims(), [&](std::size_t k) {
    auto& idx = order[k];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return m.at(a, k) < m.at(b, k); });
  });

  std::vector<double> margin(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<int> node_of;
  model.train_loss.push_back(mean_loss(margin, m.labels()));
  for (int round = 0; round < params.num_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto gh = logistic_grad_hess(margin[i], m.label(i));
      grad[i] = gh.grad;
      hess[i] = gh.hess;
    }
    TreeBuilder builder(m, order, params, grad, hess);
    Tree tree = builder.build(model.importance, node_of);
    for (std::size_t i = 0; i < n; ++i) margin[i] += tree.nodes[node_of[i]].weight;
    model.trees.push_back(std::move(tree));
    model.train_loss.push_back(mean_loss(margin, m.labels()));
  }
  return model;
}

double predict_margin(const GbdtModel& model, std::span<const double> row) {
  if (row.size() != model.dims) {
    throw InvalidArgument("row has " + std::to_string(row.size()) + " features, model expects " +
                          std::to_string(model.dims));
  }
  for (const double v : row) {
    if (!std::isfinite(v)) throw InvalidArgument("row contains a non-finite value");
  }
  double f = model.base_score;
  for (const auto& tree : model.trees) f += tree.predict(row);
  return f;
}

double predict_proba(const GbdtModel& model, std::span<const double> row) {
  return sigmoid(predict_margin(model, row));
}

double evaluate(const GbdtModel& model, const FeatureMatrix& m) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < m.count(); ++i) {
    const int pred = predict_proba(model, m.row(i)) >= 0.5 ? 1 : 0;
    if (pred == m.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(m.count());
}

const ImportanceMap& feature_importance(const GbdtModel& model) { return model.importance; }

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr const char* kModelFormat = "concept_tab.gbdt";
constexpr int kModelVersion = 1;

nlohmann::json node_to_json(const Tree& tree, int idx) {
  const auto& node = tree.nodes[idx];
  if (node.is_leaf()) return {{"leaf", node.weight}, {"cover", node.cover}};
  return {{"split_feature", node.split_feature},
          {"threshold", node.threshold},
          {"gain", node.gain},
          {"cover", node.cover},
          {"left", node_to_json(tree, node.left)},
          {"right", node_to_json(tree, node.right)}};
}

// Rebuilds the breadth-first layout produced by the trainer.
Tree tree_from_json(const nlohmann::json& root, std::size_t dims) {
  Tree tree;
  std::vector<const nlohmann::json*> queue{&root};
  tree.nodes.emplace_back();
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto& j = *queue[head];
    TreeNode node;
    node.cover = j.at("cover").get<std::size_t>();
    if (j.contains("leaf")) {
      node.weight = j.at("leaf").get<double>();
    } else {
      node.split_feature = j.at("split_feature").get<int>();
      if (node.split_feature < 0 || static_cast<std::size_t>(node.split_feature) >= dims) {
        throw InvalidArgument("model split feature out of range");
      }
      node.threshold = j.at("threshold").get<double>();
      node.gain = j.at("gain").get<double>();
      node.left = static_cast<int>(queue.size());
      node.right = node.left + 1;
      queue.push_back(&j.at("left"));
      queue.push_back(&j.at("right"));
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
    }
    tree.nodes[head] = node;
  }
  return tree;
}

}  // namespace

nlohmann::json params_to_json(const GbdtParams& p) {
  return {{"num_rounds", p.num_rounds},       {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate}, {"min_samples_leaf", p.min_samples_leaf},
          {"l2_leaf_reg", p.l2_leaf_reg},     {"seed", p.seed}};
}

GbdtParams params_from_json(const nlohmann::json& j, GbdtParams p) {
  p.num_rounds = j.value("num_rounds", p.num_rounds);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
  p.l2_leaf_reg = j.value("l2_leaf_reg", p.l2_leaf_reg);
  p.seed = j.value("seed", p.seed);
  p.validate();
  return p;
}

nlohmann::json to_json(const GbdtModel& model) {
  nlohmann::json imp = nlohmann::json::array();
  for (const auto& [k, v] : model.importance) imp.push_back({{"k", k}, {"importance", v}});
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) trees.push_back(node_to_json(t, 0));
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"dims", model.dims},
          {"base_score", model.base_score},
          {"params", params_to_json(model.params)},
          {"importance", imp},
          {"train_loss", model.train_loss},
          {"trees", trees}};
}

GbdtModel gbdt_from_json(const nlohmann::json& doc) {
  if (doc.value("format", std::string()) != kModelFormat) {
    throw InvalidArgument("not a concept_tab gbdt model document");
  }
  if (doc.value("version", 0) != kModelVersion) {
    throw InvalidArgument("unsupported model version " + std::to_string(doc.value("version", 0)));
  }
  GbdtModel model;
  model.dims = doc.at("dims").get<std::size_t>();
  model.base_score = doc.at("base_score").get<double>();
  model.params = params_from_json(doc.at("params"));
  for (const auto& e : doc.at("importance")) {
    model.importance[e.at("k").get<std::size_t>()] = e.at("importance").get<double>();
  }
  model.train_loss = doc.value("train_loss", std::vector<double>{});
  for (const auto& t : doc.at("trees")) model.trees.push_back(tree_from_json(t, model.dims));
  return model;
}

void save_model(const GbdtModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(model).dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

GbdtModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return gbdt_from_json(nlohmann::json::parse(in));
}

// ---------------------------------------------------------------------------
// One-vs-rest

MulticlassGbdt train_gbdt_ovr(const FeatureMatrix& m, const GbdtParams& params) {
  MulticlassGbdt out;
  for (int cls = 0; cls < m.num_classes(); ++cls) {
    out.per_class.push_back(train_gbdt(one_vs_rest(m, cls), params));
  }
  return out;
}

int predict_class(const MulticlassGbdt& model, std::span<const double> row) {
  int best = 0;
  double best_p = -1.0;
  for (std::size_t c = 0; c < model.per_class.size(); ++c) {
    const double p = predict_proba(model.per_class[c], row);
    if (p > best_p) {
      best_p = p;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double evaluate(const MulticlassGbdt& model, const FeatureMatrix& m) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < m.count(); ++i) {
    if (predict_class(model, m.row(i)) == m.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(m.count());
}

ImportanceMap feature_importance(const MulticlassGbdt& model) {
  ImportanceMap total;
  for (const auto& m : model.per_class) {
    for (const auto& [k, v] : m.importance) total[k] += v;
  }
  return total;
}

}  // namespace concept_tab
