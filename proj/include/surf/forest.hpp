/*
 * Copyright 2026 The SURF Authors.
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

// Fairness-aware survival forest.
//
// Trees are grown on bootstrap samples. At every node a fresh random feature
// subset is drawn and each candidate binary split is scored with the universal
// survival difference
//
//   usd = phi(|z(left, right)|) - phi(|z(left: deprived, rest)|)
//                               - phi(|z(right: deprived, rest)|)
//
// where z is the two-sample log-rank statistic and phi(u) = ln(1 + u). The
// first term rewards separating survival between children; the subtracted
// terms penalise survival gaps between sensitive subgroups inside a child. A
// node is split while it holds more than d0 distinct event times. Leaves store
// the Nelson-Aalen cumulative hazard of their in-bag members and the forest
// predicts the pointwise mean of the leaf hazards an individual reaches.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "surf/data.hpp"
#include "surf/error.hpp"
#include "surf/estimators.hpp"
#include "surf/random.hpp"

namespace surf {

struct SurfConfig {
  std::size_t n_trees = 100;                   // B
  std::size_t min_unique_events = 3;           // d0
  std::optional<std::size_t> mtry;             // default ceil(sqrt(p))
  bool fairness_enabled = true;                // false: plain log-rank splitting
  std::size_t max_thresholds_per_feature = 32;
  bool bootstrap = true;                       // false: every tree sees the data as-is
  std::uint64_t seed = 0;

  std::size_t resolved_mtry(std::size_t n_features) const {
    if (mtry) return *mtry;
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features)))));
  }

  void validate(std::size_t n_features) const {
    if (n_trees < 1) fail(ErrorKind::kArgument, "n_trees must be >= 1");
    if (min_unique_events < 1) fail(ErrorKind::kArgument, "d0 (min unique events) must be >= 1");
    const std::size_t m = resolved_mtry(n_features);
    if (m < 1 || m > n_features) {
      fail(ErrorKind::kArgument, "mtry must lie in [1, " + std::to_string(n_features) + "]");
    }
    if (max_thresholds_per_feature < 1) fail(ErrorKind::kArgument, "max thresholds must be >= 1");
  }

  bool operator==(const SurfConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Split criterion

inline double usd_phi(double abs_z) { return std::log1p(abs_z); }

// Combines the three log-rank statistics of a candidate split. An undefined
// statistic (zero variance, empty subgroup) contributes 0.
inline double usd_combine(std::optional<double> z_children, std::optional<double> z_left_groups,
                          std::optional<double> z_right_groups, bool fairness_enabled) {
  const double minuend = z_children ? usd_phi(std::fabs(*z_children)) : 0.0;
  if (!fairness_enabled) return minuend;
  const double left = z_left_groups ? usd_phi(std::fabs(*z_left_groups)) : 0.0;
  const double right = z_right_groups ? usd_phi(std::fabs(*z_right_groups)) : 0.0;
  return minuend - (left + right);
}

struct UsdBreakdown {
  std::optional<double> z_children;
  std::optional<double> z_left_groups;
  std::optional<double> z_right_groups;
  double score = 0.0;
};

namespace detail {

// Log-rank between sensitive subgroups of one child; absent when a subgroup is
// empty, the child has no events, or the variance vanishes.
inline std::optional<double> subgroup_z(const std::vector<double>& t, const std::vector<bool>& e,
                                        const std::vector<bool>& deprived) {
  std::vector<double> ta, tb;
  std::vector<bool> ea, eb;
  for (std::size_t k = 0; k < t.size(); ++k) {
    (deprived[k] ? ta : tb).push_back(t[k]);
    (deprived[k] ? ea : eb).push_back(e[k]);
  }
  if (ta.empty() || tb.empty()) return std::nullopt;
  if (std::none_of(e.begin(), e.end(), [](bool x) { return x; })) return std::nullopt;
  return log_rank(ta, ea, tb, eb).z;
}

}  // namespace detail

// Reference scoring of one binary partition of a node's members, built on the
// public log_rank. The split search uses an equivalent single-pass kernel.
inline UsdBreakdown usd_score(std::span<const double> times, const std::vector<bool>& events,
                              const std::vector<bool>& deprived, const std::vector<bool>& goes_left,
                              bool fairness_enabled) {
  const std::size_t n = times.size();
  if (events.size() != n || deprived.size() != n || goes_left.size() != n) {
    fail(ErrorKind::kArgument, "usd_score inputs differ in length");
  }
  std::vector<double> tl, tr;
  std::vector<bool> el, er, gl, gr;
  for (std::size_t k = 0; k < n; ++k) {
    if (goes_left[k]) {
      tl.push_back(times[k]);
      el.push_back(events[k]);
      gl.push_back(deprived[k]);
    } else {
      tr.push_back(times[k]);
      er.push_back(events[k]);
      gr.push_back(deprived[k]);
    }
  }
  if (tl.empty() || tr.empty()) fail(ErrorKind::kArgument, "split leaves a child empty");
  UsdBreakdown out;
  if (std::any_of(events.begin(), events.end(), [](bool x) { return x; })) {
    out.z_children = log_rank(tl, el, tr, er).z;
  }
  if (fairness_enabled) {
    out.z_left_groups = detail::subgroup_z(tl, el, gl);
    out.z_right_groups = detail::subgroup_z(tr, er, gr);
  }
  out.score = usd_combine(out.z_children, out.z_left_groups, out.z_right_groups, fairness_enabled);
  return out;
}

// ---------------------------------------------------------------------------
// Trees

struct SplitRule {
  std::size_t feature = 0;
  FeatureKind kind = FeatureKind::kContinuous;
  double threshold = 0.0;                 // continuous: left iff x <= threshold
  std::vector<std::size_t> categories;    // categorical: left iff x is listed

  bool goes_left(double x) const {
    if (kind == FeatureKind::kContinuous) return x <= threshold;
    return std::any_of(categories.begin(), categories.end(),
                       [x](std::size_t c) { return x == static_cast<double>(c); });
  }

  bool operator==(const SplitRule&) const = default;
};

struct SplitCandidate {
  SplitRule rule;
  double usd_score = 0.0;
  std::vector<std::size_t> left;   // positions in the node's member list
  std::vector<std::size_t> right;
};

// Leaf hazard on the forest time grid: step k sits at grid index grid[k].
struct LeafHazard {
  std::vector<std::uint32_t> grid;
  SurvivalCurve chf;

  bool operator==(const LeafHazard& o) const {
    return grid == o.grid && chf.times == o.chf.times && chf.values == o.chf.values &&
           chf.at_risk == o.chf.at_risk && chf.events == o.chf.events;
  }
};

struct TreeNode {
  std::optional<SplitRule> split;
  std::size_t left = 0;
  std::size_t right = 0;
  std::optional<LeafHazard> leaf;

  bool is_leaf() const { return leaf.has_value(); }
  bool operator==(const TreeNode&) const = default;
};

struct SurfTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // Total over all finite-length inputs: every vector reaches one leaf.
  std::size_t leaf_index(std::span<const double> features) const {
    std::size_t id = 0;
    while (!nodes[id].is_leaf()) {
      const SplitRule& r = *nodes[id].split;
      id = r.goes_left(features[r.feature]) ? nodes[id].left : nodes[id].right;
    }
    return id;
  }

  const LeafHazard& leaf_for(std::span<const double> features) const {
    return *nodes[leaf_index(features)].leaf;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  bool operator==(const SurfTree&) const = default;
};

struct SurfForest {
  SurfConfig config;
  Schema schema;
  GroupSpec groups;
  std::vector<double> time_grid;  // sorted distinct training event times
  std::vector<SurfTree> trees;

  bool operator==(const SurfForest&) const = default;
};

namespace detail {

// Column-major copy of the training data.
struct TrainMatrix {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> x;  // x[f * n + i]
  std::vector<double> time;
  std::vector<std::uint8_t> event;
  std::vector<std::uint8_t> deprived;
  std::vector<FeatureKind> kinds;

  explicit TrainMatrix(const Dataset& data)
      : n(data.size()), p(data.feature_count()), x(n * p), time(n), event(n), deprived(n) {
    for (const auto& f : data.schema()) kinds.push_back(f.kind);
    for (std::size_t i = 0; i < n; ++i) {
      const Individual& row = data[i];
      for (std::size_t f = 0; f < p; ++f) x[f * n + i] = row.features[f];
      time[i] = row.time;
      event[i] = row.event ? 1 : 0;
      deprived[i] = row.group == data.groups().deprived_index ? 1 : 0;
    }
  }

  double value(std::size_t f, std::size_t i) const { return x[f * n + i]; }
};

// Per-node view of the members in time order, with distinct-time blocks.
struct NodeView {
  std::vector<std::uint32_t> rows;          // member rows, ascending time
  std::vector<std::uint32_t> block_end;     // exclusive end of each time block
  std::vector<std::uint8_t> event;
  std::vector<std::uint8_t> deprived;
  std::size_t total_events = 0;
  std::size_t distinct_event_times = 0;

  NodeView(const TrainMatrix& m, std::vector<std::uint32_t> members) : rows(std::move(members)) {
    const std::size_t n = rows.size();
    event.resize(n);
    deprived.resize(n);
    bool block_has_event = false;
    for (std::size_t k = 0; k < n; ++k) {
      event[k] = m.event[rows[k]];
      deprived[k] = m.deprived[rows[k]];
      total_events += event[k];
      block_has_event = block_has_event || event[k];
      if (k + 1 == n || m.time[rows[k + 1]] != m.time[rows[k]]) {
        block_end.push_back(static_cast<std::uint32_t>(k + 1));
        if (block_has_event) ++distinct_event_times;
        block_has_event = false;
      }
    }
  }

  std::size_t size() const { return rows.size(); }
};

// Scores a partition (side[k] = 1 for left) in one pass over the time blocks.
// Returns nullopt when either child is empty or has no event.
inline std::optional<double> score_partition(const NodeView& v, std::span<const std::uint8_t> side,
                                             bool fairness_enabled) {
  // Totals per (side, group): index side * 2 + deprived.
  double at_risk[4] = {0, 0, 0, 0};
  double events[2] = {0, 0};
  for (std::size_t k = 0; k < v.size(); ++k) {
    at_risk[side[k] * 2 + v.deprived[k]] += 1.0;
    events[side[k]] += v.event[k];
  }
  if (at_risk[0] + at_risk[1] == 0.0 || at_risk[2] + at_risk[3] == 0.0) return std::nullopt;
  if (events[0] == 0.0 || events[1] == 0.0) return std::nullopt;

  LogRankAccumulator children, left_groups, right_groups;
  std::size_t start = 0;
  for (std::uint32_t end : v.block_end) {
    double d[4] = {0, 0, 0, 0};
    double r[4] = {0, 0, 0, 0};
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t cell = side[k] * 2 + v.deprived[k];
      r[cell] += 1.0;
      d[cell] += v.event[k];
    }
    // cell 0/1: right child, cells 2/3: left child.
    const double d_left = d[2] + d[3];
    const double d_right = d[0] + d[1];
    if (d_left + d_right > 0.0) {
      children.add(d_left, d_right, at_risk[2] + at_risk[3], at_risk[0] + at_risk[1]);
      if (fairness_enabled) {
        left_groups.add(d[3], d[2], at_risk[3], at_risk[2]);
        right_groups.add(d[1], d[0], at_risk[1], at_risk[0]);
      }
    }
    for (std::size_t c = 0; c < 4; ++c) at_risk[c] -= r[c];
    start = end;
  }
  // An empty subgroup or an event-free child leaves the variance at 0, so z()
  // is absent exactly when the reference usd_score treats it as degenerate.
  return usd_combine(children.z(), left_groups.z(), right_groups.z(), fairness_enabled);
}

inline std::vector<double> candidate_thresholds(std::vector<double> values, std::size_t cap) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> out;
  if (values.size() < 2) return out;
  const std::size_t gaps = values.size() - 1;
  auto midpoint = [&](std::size_t i) {
    double m = values[i] + (values[i + 1] - values[i]) / 2.0;
    if (!(m < values[i + 1])) m = values[i];
    return m;
  };
  if (gaps <= cap) {
    for (std::size_t i = 0; i < gaps; ++i) out.push_back(midpoint(i));
  } else {
    // Quantile thinning: gap indices floor((k + 1/2) * gaps / cap) are strictly
    // increasing because gaps > cap.
    for (std::size_t k = 0; k < cap; ++k) {
      const std::size_t i = (2 * k + 1) * gaps / (2 * cap);
      out.push_back(midpoint(i));
    }
  }
  return out;
}

}  // namespace detail

// Best binary split of the node's members over `features` (ascending), or
// nullopt when no candidate leaves at least one event on each side. Ties go to
// the lower feature index, then the lower threshold / category.
inline std::optional<SplitCandidate> best_split(const detail::TrainMatrix& m, const detail::NodeView& v,
                                                std::span<const std::size_t> features,
                                                const SurfConfig& config) {
  std::optional<SplitRule> best_rule;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> side(v.size());
  std::vector<double> values(v.size());

  auto consider = [&](const SplitRule& rule) {
    for (std::size_t k = 0; k < v.size(); ++k) side[k] = rule.goes_left(values[k]) ? 1 : 0;
    const auto score = detail::score_partition(v, side, config.fairness_enabled);
    if (score && *score > best_score) {
      best_score = *score;
      best_rule = rule;
    }
  };

  for (std::size_t f : features) {
    for (std::size_t k = 0; k < v.size(); ++k) values[k] = m.value(f, v.rows[k]);
    if (m.kinds[f] == FeatureKind::kContinuous) {
      for (double thr : detail::candidate_thresholds(values, config.max_thresholds_per_feature)) {
        consider(SplitRule{f, FeatureKind::kContinuous, thr, {}});
      }
    } else {
      std::vector<double> levels = values;
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      if (levels.size() < 2) continue;
      for (double level : levels) {
        consider(SplitRule{f, FeatureKind::kCategorical, 0.0, {static_cast<std::size_t>(level)}});
      }
    }
  }
  if (!best_rule) return std::nullopt;

  SplitCandidate out;
  out.rule = *best_rule;
  out.usd_score = best_score;
  for (std::size_t k = 0; k < v.size(); ++k) {
    (out.rule.goes_left(m.value(out.rule.feature, v.rows[k])) ? out.left : out.right).push_back(k);
  }
  return out;
}

namespace detail {

inline LeafHazard make_leaf(const TrainMatrix& m, const NodeView& v, const std::vector<double>& grid) {
  LeafHazard leaf;
  leaf.chf.kind = CurveKind::kCumulativeHazard;
  std::size_t at_risk = v.size();
  std::size_t start = 0;
  double h = 0.0;
  for (std::uint32_t end : v.block_end) {
    std::size_t d = 0;
    for (std::size_t k = start; k < end; ++k) d += v.event[k];
    if (d > 0) {
      const double t = m.time[v.rows[start]];
      h += static_cast<double>(d) / static_cast<double>(at_risk);
      leaf.grid.push_back(static_cast<std::uint32_t>(
          std::lower_bound(grid.begin(), grid.end(), t) - grid.begin()));
      leaf.chf.times.push_back(t);
      leaf.chf.values.push_back(h);
      leaf.chf.at_risk.push_back(at_risk);
      leaf.chf.events.push_back(d);
    }
    at_risk -= end - start;
    start = end;
  }
  return leaf;
}

inline SurfTree grow_tree(const TrainMatrix& m, const std::vector<double>& grid, const SurfConfig& config,
                          std::size_t tree_index) {
  Rng rng(derive_seed(config.seed, tree_index));
  std::vector<std::uint32_t> sample(m.n);
  if (config.bootstrap) {
    for (auto& s : sample) s = static_cast<std::uint32_t>(rng.bounded(m.n));
  } else {
    std::iota(sample.begin(), sample.end(), 0u);
  }
  std::stable_sort(sample.begin(), sample.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return m.time[a] < m.time[b]; });

  const std::size_t mtry = config.resolved_mtry(m.p);
  std::vector<std::size_t> feature_pool(m.p);

  SurfTree tree;
  struct Pending {
    std::size_t node;
    std::vector<std::uint32_t> members;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, std::move(sample)});
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    NodeView view(m, std::move(job.members));

    std::optional<SplitCandidate> split;
    if (view.distinct_event_times > config.min_unique_events) {
      std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
      for (std::size_t k = 0; k < mtry; ++k) {
        std::swap(feature_pool[k], feature_pool[k + rng.bounded(m.p - k)]);
      }
      std::vector<std::size_t> features(feature_pool.begin(), feature_pool.begin() + mtry);
      std::sort(features.begin(), features.end());
      split = best_split(m, view, features, config);
    }
    if (!split) {
      tree.nodes[job.node].leaf = make_leaf(m, view, grid);
      continue;
    }
    std::vector<std::uint32_t> left, right;
    left.reserve(split->left.size());
    right.reserve(split->right.size());
    for (std::size_t k : split->left) left.push_back(view.rows[k]);
    for (std::size_t k : split->right) right.push_back(view.rows[k]);

    const std::size_t left_id = tree.nodes.size();
    const std::size_t right_id = left_id + 1;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    tree.nodes[job.node].split = std::move(split->rule);
    tree.nodes[job.node].left = left_id;
    tree.nodes[job.node].right = right_id;
    // Right pushed first so the left subtree is grown (and draws RNG) first.
    stack.push_back({right_id, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }
  return tree;
}

}  // namespace detail

// Trains B trees. Tree i depends only on (data, config, i), so the result is
// identical for any worker count.
inline SurfForest train(const Dataset& data, const SurfConfig& config, std::size_t workers = 1) {
  config.validate(data.feature_count());
  if (data.event_count() == 0) fail(ErrorKind::kTraining, "training data has no observed events");

  SurfForest forest;
  forest.config = config;
  forest.config.mtry = config.resolved_mtry(data.feature_count());
  forest.schema = data.schema();
  forest.groups = data.groups();
  for (const auto& x : data.individuals()) {
    if (x.event) forest.time_grid.push_back(x.time);
  }
  std::sort(forest.time_grid.begin(), forest.time_grid.end());
  forest.time_grid.erase(std::unique(forest.time_grid.begin(), forest.time_grid.end()),
                         forest.time_grid.end());

  const detail::TrainMatrix matrix(data);
  forest.trees.resize(config.n_trees);
  workers = std::clamp<std::size_t>(workers, 1, config.n_trees);
  if (workers == 1) {
    for (std::size_t i = 0; i < config.n_trees; ++i) {
      forest.trees[i] = detail::grow_tree(matrix, forest.time_grid, config, i);
    }
    return forest;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < config.n_trees; i = next++) {
        try {
          forest.trees[i] = detail::grow_tree(matrix, forest.time_grid, config, i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return forest;
}

// ---------------------------------------------------------------------------
// Prediction

namespace detail {

inline void check_features(const SurfForest& forest, std::span<const double> features) {
  if (features.size() != forest.schema.size()) {
    fail(ErrorKind::kArgument, "feature vector has " + std::to_string(features.size()) +
                                   " values, model expects " + std::to_string(forest.schema.size()));
  }
  for (double v : features) {
    if (!std::isfinite(v)) fail(ErrorKind::kArgument, "feature value is not finite");
  }
}

}  // namespace detail

// Ensemble cumulative hazard on the forest time grid: pointwise mean of the
// leaf hazards reached in each tree. Only times and values are populated.
inline SurvivalCurve predict_chf(const SurfForest& forest, std::span<const double> features) {
  detail::check_features(forest, features);
  SurvivalCurve out;
  out.kind = CurveKind::kCumulativeHazard;
  out.times = forest.time_grid;
  out.values.assign(forest.time_grid.size(), 0.0);
  for (const auto& tree : forest.trees) {
    const LeafHazard& leaf = tree.leaf_for(features);
    double h = 0.0;
    std::size_t step = 0;
    for (std::size_t g = 0; g < out.values.size(); ++g) {
      while (step < leaf.grid.size() && leaf.grid[step] <= g) h = leaf.chf.values[step++];
      out.values[g] += h;
    }
  }
  const double b = static_cast<double>(forest.trees.size());
  for (double& v : out.values) v /= b;
  return out;
}

inline double predict_chf_at(const SurfForest& forest, std::span<const double> features, double t) {
  detail::check_features(forest, features);
  double sum = 0.0;
  for (const auto& tree : forest.trees) sum += tree.leaf_for(features).chf.value_at(t);
  return sum / static_cast<double>(forest.trees.size());
}

// Risk score: ensemble cumulative hazard at the last grid time.
inline double predict_risk(const SurfForest& forest, std::span<const double> features) {
  detail::check_features(forest, features);
  double sum = 0.0;
  for (const auto& tree : forest.trees) sum += tree.leaf_for(features).chf.final_value();
  return sum / static_cast<double>(forest.trees.size());
}

inline double predict_survival_at(const SurfForest& forest, std::span<const double> features, double t) {
  return std::exp(-predict_chf_at(forest, features, t));
}

}  // namespace surf
