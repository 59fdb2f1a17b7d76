/*
 * Copyright 2026 The Doris Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Gradient-boosted regression trees for binary classification under
// logistic loss, with exact greedy split finding and Newton leaf values.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "doris/error.hpp"
#include "doris/isotonic.hpp"
#include "doris/util.hpp"
#include "json.hpp"

namespace doris {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// Node 0 is the root. x[feature] < threshold goes left.
class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, int max_depth)
      : nodes_(std::move(nodes)), max_depth_(max_depth) {
    validate();
  }

  double predict(std::span<const double> x) const {
    int i = 0;
    while (!nodes_[i].is_leaf()) {
      const auto& n = nodes_[i];
      i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes_[i].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int max_depth() const { return max_depth_; }

  int depth() const { return depth_from(0); }

  bool operator==(const RegressionTree&) const = default;

 private:
  int depth_from(int i) const {
    const auto& n = nodes_[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  void validate() const {
    if (nodes_.empty()) throw ValidationError("tree has no nodes");
    const int n = static_cast<int>(nodes_.size());
    for (int i = 0; i < n; ++i) {
      const auto& node = nodes_[i];
      if (node.is_leaf()) {
        if (!std::isfinite(node.value)) throw ValidationError("non-finite leaf value");
        continue;
      }
      // Children are always created after their parent.
      if (node.left <= i || node.right <= i || node.left >= n || node.right >= n) {
        throw ValidationError("tree node " + std::to_string(i) + " has invalid children");
      }
      if (!std::isfinite(node.threshold)) throw ValidationError("non-finite threshold");
    }
    if (depth() > max_depth_) throw ValidationError("tree deeper than max_depth");
  }

  std::vector<TreeNode> nodes_;
  int max_depth_ = 0;
};

struct GbtParams {
  int n_trees = 300;
  double learning_rate = 0.1;
  int max_depth = 6;
  int min_leaf = 20;
  double subsample = 1.0;  // fraction of rows drawn (without replacement) per tree
  std::uint64_t subsample_seed = 0;
  double pos_weight = 1.0;
  int threads = 1;  // split search parallelism; the model does not depend on it
};

class BoostedModel {
 public:
  BoostedModel() = default;
  BoostedModel(double base_score, double learning_rate, std::size_t n_features,
               std::vector<RegressionTree> trees)
      : base_score_(base_score),
        learning_rate_(learning_rate),
        n_features_(n_features),
        trees_(std::move(trees)) {}

  // base_score + learning_rate * sum of tree outputs.
  double raw_score(std::span<const double> x) const {
    if (x.size() != n_features_) {
      throw ValidationError("raw_score: expected " + std::to_string(n_features_) +
                            " features, got " + std::to_string(x.size()));
    }
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return base_score_ + learning_rate_ * sum;
  }

  std::vector<double> raw_scores(std::span<const std::vector<double>> rows) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(raw_score(r));
    return out;
  }

  // Uncalibrated readout: positive iff raw score > 0.
  int predict_label(std::span<const double> x) const { return raw_score(x) > 0.0 ? 1 : 0; }

  double base_score() const { return base_score_; }
  double learning_rate() const { return learning_rate_; }
  std::size_t n_features() const { return n_features_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  bool operator==(const BoostedModel&) const = default;

 private:
  double base_score_ = 0.0;
  double learning_rate_ = 0.1;
  std::size_t n_features_ = 0;
  std::vector<RegressionTree> trees_;
};

// Mean logistic loss log(1 + exp(-y' F)), y' in {-1, +1}, weighted.
inline double logistic_loss(std::span<const double> raw, std::span<const int> labels,
                            std::span<const double> weights = {}) {
  double total = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double z = (labels[i] == 1 ? 1.0 : -1.0) * raw[i];
    // log(1 + exp(-z)), stable for large |z|.
    const double l = std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    const double w = weights.empty() ? 1.0 : weights[i];
    total += w * l;
    wsum += w;
  }
  return total / wsum;
}

struct TrainingTrace {
  // loss[0] is the loss of the constant model; loss[m] after m trees.
  std::vector<double> loss;
};

namespace detail {

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

inline constexpr double kMinSplitGain = 1e-12;

inline double sigmoid(double f) {
  if (f >= 0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

// Threshold strictly between a < b such that a goes left and b goes right.
inline double split_point(double a, double b) {
  const double t = a + (b - a) / 2.0;
  return (a < t && t <= b) ? t : b;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& columns,
              const std::vector<std::vector<double>>& sorted_values,
              const std::vector<std::vector<std::uint32_t>>& sorted_index,
              const GbtParams& params)
      : columns_(columns),
        sorted_values_(sorted_values),
        sorted_index_(sorted_index),
        params_(params) {}

  // grad = weighted negative gradient, hess = weighted hessian, weight = sample
  // weight; node_of[i] < 0 excludes row i (out of bag). Returns the tree and
  // leaves node_of[i] pointing at each in-bag row's leaf.
  RegressionTree build(std::span<const double> grad, std::span<const double> hess,
                       std::span<const double> weight, std::vector<int>& node_of) {
    struct NodeStats {
      double g = 0.0, h = 0.0, w = 0.0;
      std::size_t count = 0;
    };
    std::vector<TreeNode> nodes(1);
    std::vector<NodeStats> stats(1);
    const std::size_t n = node_of.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (node_of[i] < 0) continue;
      stats[0].g += grad[i];
      stats[0].h += hess[i];
      stats[0].w += weight[i];
      ++stats[0].count;
    }

    std::vector<int> frontier{0};
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);
    for (int depth = 0; depth < params_.max_depth && !frontier.empty(); ++depth) {
      // Slot per splittable frontier node.
      std::vector<int> slot_of(nodes.size(), -1);
      std::vector<int> active;
      for (int node : frontier) {
        if (stats[node].count >= 2 * min_leaf) {
          slot_of[node] = static_cast<int>(active.size());
          active.push_back(node);
        }
      }
      if (active.empty()) break;

      std::vector<NodeTotals> totals(active.size());
      for (std::size_t s = 0; s < active.size(); ++s) {
        totals[s] = {stats[active[s]].g, stats[active[s]].w, stats[active[s]].count};
      }
      const auto best = find_splits(grad, weight, node_of, slot_of, totals);

      std::vector<int> next_frontier;
      std::vector<int> split_left(nodes.size(), -1);
      for (std::size_t s = 0; s < active.size(); ++s) {
        const auto& cand = best[s];
        if (cand.feature < 0 || !(cand.gain > kMinSplitGain)) continue;
        const int node = active[s];
        const int left = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes.push_back({});
        stats.push_back({});
        stats.push_back({});
        nodes[node].feature = cand.feature;
        nodes[node].threshold = cand.threshold;
        nodes[node].left = left;
        nodes[node].right = left + 1;
        split_left[node] = left;
        next_frontier.push_back(left);
        next_frontier.push_back(left + 1);
      }
      if (next_frontier.empty()) break;

      // Route rows of split nodes to their children.
      for (std::size_t i = 0; i < n; ++i) {
        const int node = node_of[i];
        if (node < 0 || node >= static_cast<int>(split_left.size()) || split_left[node] < 0) continue;
        const auto& parent = nodes[node];
        const double x = value_of(parent.feature, i);
        const int child = x < parent.threshold ? parent.left : parent.right;
        node_of[i] = child;
        stats[child].g += grad[i];
        stats[child].h += hess[i];
        stats[child].w += weight[i];
        ++stats[child].count;
      }
      frontier = std::move(next_frontier);
    }

    // Newton step per leaf.
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (!nodes[k].is_leaf()) continue;
      const auto& s = stats[k];
      nodes[k].value = s.h > 1e-300 ? s.g / s.h : 0.0;
    }
    return RegressionTree(std::move(nodes), params_.max_depth);
  }

 private:
  struct NodeTotals {
    double g = 0.0, w = 0.0;
    std::size_t count = 0;
  };

  double value_of(int feature, std::size_t row) const {
    return columns_[static_cast<std::size_t>(feature)][row];
  }

  // Best split per active slot over features [f_begin, f_end), scanning
  // features and thresholds in ascending order and keeping the first maximum.
  void scan_features(std::size_t f_begin, std::size_t f_end, std::span<const double> grad,
                     std::span<const double> weight, const std::vector<int>& node_of,
                     const std::vector<int>& slot_of, const std::vector<NodeTotals>& totals,
                     std::vector<SplitCandidate>& best) const {
    const std::size_t slots = totals.size();
    const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf);
    std::vector<double> left_g(slots), left_w(slots), last(slots);
    std::vector<std::size_t> left_count(slots);
    std::vector<double> parent_score(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      parent_score[s] = totals[s].w > 0 ? totals[s].g * totals[s].g / totals[s].w : 0.0;
    }
    for (std::size_t f = f_begin; f < f_end; ++f) {
      std::fill(left_g.begin(), left_g.end(), 0.0);
      std::fill(left_w.begin(), left_w.end(), 0.0);
      std::fill(left_count.begin(), left_count.end(), 0);
      const auto& values = sorted_values_[f];
      const auto& index = sorted_index_[f];
      for (std::size_t k = 0; k < index.size(); ++k) {
        const std::uint32_t i = index[k];
        const int node = node_of[i];
        if (node < 0) continue;
        const int s = slot_of[static_cast<std::size_t>(node)];
        if (s < 0) continue;
        const double x = values[k];
        const std::size_t lc = left_count[s];
        if (lc >= min_leaf && totals[s].count - lc >= min_leaf && x != last[s]) {
          const double gl = left_g[s], wl = left_w[s];
          const double gr = totals[s].g - gl, wr = totals[s].w - wl;
          if (wl > 0 && wr > 0) {
            const double gain = gl * gl / wl + gr * gr / wr - parent_score[s];
            if (gain > best[s].gain) {
              best[s] = {gain, static_cast<int>(f), split_point(last[s], x)};
            }
          }
        }
        left_g[s] += grad[i];
        left_w[s] += weight[i];
        ++left_count[s];
        last[s] = x;
      }
    }
  }

  std::vector<SplitCandidate> find_splits(std::span<const double> grad, std::span<const double> weight,
                                          const std::vector<int>& node_of,
                                          const std::vector<int>& slot_of,
                                          const std::vector<NodeTotals>& totals) const {
    const std::size_t n_features = sorted_values_.size();
    const std::size_t threads =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, params_.threads)), 1, n_features);
    std::vector<std::vector<SplitCandidate>> partial(threads,
                                                     std::vector<SplitCandidate>(totals.size()));
    const std::size_t chunk = (n_features + threads - 1) / threads;
    auto run = [&](std::size_t t) {
      const std::size_t b = t * chunk, e = std::min(n_features, b + chunk);
      if (b < e) scan_features(b, e, grad, weight, node_of, slot_of, totals, partial[t]);
    };
    if (threads == 1) {
      run(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run, t);
    }
    // Chunks cover ascending feature ranges, so an in-order strict-max
    // reduction reproduces the serial tie-break.
    std::vector<SplitCandidate> best(totals.size());
    for (const auto& p : partial) {
      for (std::size_t s = 0; s < totals.size(); ++s) {
        if (p[s].feature >= 0 && p[s].gain > best[s].gain) best[s] = p[s];
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& columns_;
  const std::vector<std::vector<double>>& sorted_values_;
  const std::vector<std::vector<std::uint32_t>>& sorted_index_;
  GbtParams params_;
};

}  // namespace detail

inline void validate_params(const GbtParams& p) {
  if (p.n_trees < 0) throw ValidationError("gbt: n_trees must be >= 0");
  if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0)) {
    throw ValidationError("gbt: learning_rate must lie in (0, 1]");
  }
  if (p.max_depth < 1) throw ValidationError("gbt: max_depth must be >= 1");
  if (p.min_leaf < 1) throw ValidationError("gbt: min_leaf must be >= 1");
  if (!(p.subsample > 0.0 && p.subsample <= 1.0)) {
    throw ValidationError("gbt: subsample must lie in (0, 1]");
  }
  if (!(p.pos_weight > 0.0) || !std::isfinite(p.pos_weight)) {
    throw ValidationError("gbt: pos_weight must be positive");
  }
}

inline BoostedModel train(std::span<const std::vector<double>> rows, std::span<const int> labels,
                          const GbtParams& params, TrainingTrace* trace = nullptr) {
  validate_params(params);
  const std::size_t n = rows.size();
  if (labels.size() != n) throw ValidationError("gbt: rows and labels differ in length");
  if (n < 2) throw ValidationError("gbt: need at least 2 training rows");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("gbt: too many rows");
  const std::size_t d = rows.front().size();
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != d) throw ValidationError("gbt: ragged feature matrix");
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("gbt: labels must be 0/1");
    for (double x : rows[i]) {
      if (!std::isfinite(x)) {
        throw ValidationError("gbt: non-finite feature in row " + std::to_string(i));
      }
    }
    positives += static_cast<std::size_t>(labels[i]);
  }
  if (positives == 0 || positives == n) {
    throw ValidationError("gbt: training labels contain a single class");
  }

  std::vector<double> weight(n);
  double wpos = 0.0, wneg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = labels[i] == 1 ? params.pos_weight : 1.0;
    (labels[i] == 1 ? wpos : wneg) += weight[i];
  }
  // Log-odds: the constant minimizer of logistic loss.
  const double base = std::log(wpos / wneg);

  // Column-major copy plus per-feature sort order (ties by row index).
  std::vector<std::vector<double>> columns(d, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < d; ++f) columns[f][i] = rows[i][f];
  std::vector<std::vector<std::uint32_t>> sorted_index(d, std::vector<std::uint32_t>(n));
  std::vector<std::vector<double>> sorted_values(d, std::vector<double>(n));
  for (std::size_t f = 0; f < d; ++f) {
    auto& idx = sorted_index[f];
    std::iota(idx.begin(), idx.end(), 0u);
    const auto& col = columns[f];
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    for (std::size_t k = 0; k < n; ++k) sorted_values[f][k] = col[idx[k]];
  }

  detail::TreeBuilder builder(columns, sorted_values, sorted_index, params);

  std::vector<double> raw(n, base), grad(n), hess(n);
  std::vector<int> node_of(n);
  std::vector<std::uint32_t> rows_order(n);
  std::iota(rows_order.begin(), rows_order.end(), 0u);
  Rng rng(params.subsample_seed);
  const std::size_t bag_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(params.subsample * n)));

  if (trace) {
    trace->loss.clear();
    trace->loss.push_back(logistic_loss(raw, labels, weight));
  }

  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int m = 0; m < params.n_trees; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = detail::sigmoid(raw[i]);
      grad[i] = weight[i] * (labels[i] - p);
      hess[i] = weight[i] * p * (1.0 - p);
    }
    if (bag_size < n) {
      std::fill(node_of.begin(), node_of.end(), -1);
      rng.shuffle(rows_order);
      for (std::size_t k = 0; k < bag_size; ++k) node_of[rows_order[k]] = 0;
    } else {
      std::fill(node_of.begin(), node_of.end(), 0);
    }
    RegressionTree tree = builder.build(grad, hess, weight, node_of);
    for (std::size_t i = 0; i < n; ++i) {
      raw[i] += params.learning_rate * tree.predict(rows[i]);
    }
    trees.push_back(std::move(tree));
    if (trace) trace->loss.push_back(logistic_loss(raw, labels, weight));
  }
  return BoostedModel(base, params.learning_rate, d, std::move(trees));
}

inline BoostedModel train(const std::vector<std::vector<double>>& rows,
                          const std::vector<int>& labels, const GbtParams& params,
                          TrainingTrace* trace = nullptr) {
  return train(std::span<const std::vector<double>>(rows), std::span<const int>(labels),
               params, trace);
}

// ---------------------------------------------------------------------------
// model.json

inline constexpr std::string_view kModelSchemaVersion = "1";

inline nlohmann::json to_json(const RegressionTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back({{"value", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right}});
    }
  }
  return {{"max_depth", t.max_depth()}, {"nodes", std::move(nodes)}};
}

inline RegressionTree tree_from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& nj : j.at("nodes")) {
    TreeNode n;
    if (nj.contains("value")) {
      n.value = nj.at("value").get<double>();
    } else {
      n.feature = nj.at("feature").get<int>();
      n.threshold = nj.at("threshold").get<double>();
      n.left = nj.at("left").get<int>();
      n.right = nj.at("right").get<int>();
      if (n.feature < 0) throw ValidationError("model: negative feature index");
    }
    nodes.push_back(n);
  }
  return RegressionTree(std::move(nodes), j.at("max_depth").get<int>());
}

inline nlohmann::json model_to_json(const BoostedModel& model, const IsotonicCalibrator& cal) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees()) trees.push_back(to_json(t));
  nlohmann::json j;
  j["version"] = kModelSchemaVersion;
  j["base_score"] = model.base_score();
  j["learning_rate"] = model.learning_rate();
  j["n_features"] = model.n_features();
  j["n_trees"] = model.trees().size();
  j["trees"] = std::move(trees);
  j["calibrator"] = cal.fitted() ? to_json(cal) : nlohmann::json(nullptr);
  return j;
}

struct LoadedModel {
  BoostedModel model;
  IsotonicCalibrator calibrator;
};

inline LoadedModel model_from_json(const nlohmann::json& j) {
  try {
    if (!j.contains("version") || !j.at("version").is_string() ||
        j.at("version").get<std::string>() != kModelSchemaVersion) {
      throw ValidationError("model: unsupported or missing schema version (expected \"1\")");
    }
    std::vector<RegressionTree> trees;
    for (const auto& tj : j.at("trees")) trees.push_back(tree_from_json(tj));
    if (trees.size() != j.at("n_trees").get<std::size_t>()) {
      throw ValidationError("model: n_trees is " + std::to_string(j.at("n_trees").get<std::size_t>()) +
                            " but " + std::to_string(trees.size()) + " trees are present");
    }
    const auto n_features = j.at("n_features").get<std::size_t>();
    for (const auto& t : trees) {
      for (const auto& node : t.nodes()) {
        if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= n_features) {
          throw ValidationError("model: split on feature outside n_features");
        }
      }
    }
    LoadedModel out{BoostedModel(j.at("base_score").get<double>(), j.at("learning_rate").get<double>(),
                                 n_features, std::move(trees)),
                    {}};
    if (j.contains("calibrator") && !j.at("calibrator").is_null()) {
      out.calibrator = calibrator_from_json(j.at("calibrator"));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: malformed JSON: ") + e.what());
  }
}

inline void save_model(const BoostedModel& model, const IsotonicCalibrator& cal,
                       const std::string& path) {
  write_file(path, model_to_json(model, cal).dump(1) + "\n");
}

inline LoadedModel load_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("model: " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace doris
