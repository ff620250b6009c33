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

// Line-oriented text format for trained forests.
//
//   surf-model <major> <minor>
//   config n_trees=B min_unique_events=d0 mtry=m fairness_enabled=0|1
//          max_thresholds_per_feature=k bootstrap=0|1 seed=s
//   schema <p>
//   feature <name> continuous
//   feature <name> categorical <cardinality> <level>...
//   groups <attribute> <deprived_index> <count> <label>...
//   time_grid <m> <t_0> ... <t_{m-1}>
//   tree <index> <node_count>
//   node <id> split <feature> le <threshold> <left> <right>
//   node <id> split <feature> in <count> <category>... <left> <right>
//   node <id> leaf <steps> <grid_index>:<events>:<at_risk> ...
//   end
//
// Names are percent-encoded so tokens never contain whitespace. Doubles use the
// shortest round-trip representation, and leaf hazards are stored as the
// integer counts they are built from, so save/load is bit-exact.

#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "surf/data.hpp"
#include "surf/error.hpp"
#include "surf/forest.hpp"

namespace surf {

inline constexpr int kModelFormatMajor = 1;
inline constexpr int kModelFormatMinor = 0;

namespace detail {

inline std::string encode_token(std::string_view s) {
  if (s.empty()) return "%";
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (c > 0x20 && c < 0x7f && c != '%') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xf];
    }
  }
  return out;
}

inline std::string decode_token(std::string_view s) {
  if (s == "%") return {};
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out += s[i];
      continue;
    }
    unsigned value = 0;
    if (i + 2 >= s.size()) fail(ErrorKind::kParse, "bad escape in model token");
    const auto [ptr, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, value, 16);
    if (ec != std::errc() || ptr != s.data() + i + 3) fail(ErrorKind::kParse, "bad escape in model token");
    out += static_cast<char>(value);
    i += 2;
  }
  return out;
}

class ModelReader {
 public:
  explicit ModelReader(std::string_view text) {
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) lines_.push_back(line);
      start = end + 1;
    }
  }

  // Tokens of the next line, which must start with `keyword`.
  std::vector<std::string_view> expect(std::string_view keyword) {
    if (pos_ >= lines_.size()) fail(ErrorKind::kParse, "model file truncated, expected '" + std::string(keyword) + "'");
    line_no_ = pos_ + 1;
    std::vector<std::string_view> tokens;
    std::string_view line = lines_[pos_++];
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && line[i] == ' ') ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ') ++j;
      if (j > i) tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty() || tokens[0] != keyword) {
      error("expected '" + std::string(keyword) + "'");
    }
    return tokens;
  }

  bool at_end() const { return pos_ >= lines_.size(); }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::kParse, "model line " + std::to_string(line_no_) + ": " + what);
  }

  template <class T>
  T number(std::string_view token) const {
    T value{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      error("malformed number '" + std::string(token) + "'");
    }
    return value;
  }

  void require_count(const std::vector<std::string_view>& tokens, std::size_t n) const {
    if (tokens.size() != n) error("expected " + std::to_string(n) + " fields, got " + std::to_string(tokens.size()));
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace detail

inline std::string serialize_forest(const SurfForest& forest) {
  const SurfConfig& c = forest.config;
  std::ostringstream out;
  out << "surf-model " << kModelFormatMajor << ' ' << kModelFormatMinor << '\n';
  out << "config n_trees=" << c.n_trees << " min_unique_events=" << c.min_unique_events
      << " mtry=" << c.resolved_mtry(forest.schema.size())
      << " fairness_enabled=" << (c.fairness_enabled ? 1 : 0)
      << " max_thresholds_per_feature=" << c.max_thresholds_per_feature
      << " bootstrap=" << (c.bootstrap ? 1 : 0) << " seed=" << c.seed << '\n';
  out << "schema " << forest.schema.size() << '\n';
  for (const auto& f : forest.schema) {
    out << "feature " << detail::encode_token(f.name);
    if (f.kind == FeatureKind::kContinuous) {
      out << " continuous\n";
    } else {
      out << " categorical " << f.levels.size();
      for (const auto& l : f.levels) out << ' ' << detail::encode_token(l);
      out << '\n';
    }
  }
  out << "groups " << detail::encode_token(forest.groups.attribute_name) << ' '
      << forest.groups.deprived_index << ' ' << forest.groups.labels.size();
  for (const auto& l : forest.groups.labels) out << ' ' << detail::encode_token(l);
  out << '\n';
  out << "time_grid " << forest.time_grid.size();
  for (double t : forest.time_grid) out << ' ' << detail::format_double(t);
  out << '\n';
  for (std::size_t i = 0; i < forest.trees.size(); ++i) {
    const SurfTree& tree = forest.trees[i];
    out << "tree " << i << ' ' << tree.nodes.size() << '\n';
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const TreeNode& node = tree.nodes[id];
      out << "node " << id;
      if (node.is_leaf()) {
        const LeafHazard& leaf = *node.leaf;
        out << " leaf " << leaf.grid.size();
        for (std::size_t k = 0; k < leaf.grid.size(); ++k) {
          out << ' ' << leaf.grid[k] << ':' << leaf.chf.events[k] << ':' << leaf.chf.at_risk[k];
        }
      } else {
        const SplitRule& r = *node.split;
        out << " split " << r.feature;
        if (r.kind == FeatureKind::kContinuous) {
          out << " le " << detail::format_double(r.threshold);
        } else {
          out << " in " << r.categories.size();
          for (std::size_t cat : r.categories) out << ' ' << cat;
        }
        out << ' ' << node.left << ' ' << node.right;
      }
      out << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

inline SurfForest parse_forest(std::string_view text) {
  detail::ModelReader in(text);
  SurfForest forest;

  auto header = in.expect("surf-model");
  in.require_count(header, 3);
  const int major = in.number<int>(header[1]);
  if (major != kModelFormatMajor) {
    fail(ErrorKind::kVersion, "model format major version " + std::to_string(major) +
                                  " is not supported (expected " + std::to_string(kModelFormatMajor) + ")");
  }

  auto cfg = in.expect("config");
  in.require_count(cfg, 8);
  auto kv = [&](std::string_view token, std::string_view key) {
    if (token.substr(0, key.size()) != key || token.size() <= key.size() || token[key.size()] != '=') {
      in.error("expected config key '" + std::string(key) + "'");
    }
    return token.substr(key.size() + 1);
  };
  SurfConfig& c = forest.config;
  c.n_trees = in.number<std::size_t>(kv(cfg[1], "n_trees"));
  c.min_unique_events = in.number<std::size_t>(kv(cfg[2], "min_unique_events"));
  c.mtry = in.number<std::size_t>(kv(cfg[3], "mtry"));
  c.fairness_enabled = in.number<int>(kv(cfg[4], "fairness_enabled")) != 0;
  c.max_thresholds_per_feature = in.number<std::size_t>(kv(cfg[5], "max_thresholds_per_feature"));
  c.bootstrap = in.number<int>(kv(cfg[6], "bootstrap")) != 0;
  c.seed = in.number<std::uint64_t>(kv(cfg[7], "seed"));

  auto schema = in.expect("schema");
  in.require_count(schema, 2);
  const auto p = in.number<std::size_t>(schema[1]);
  for (std::size_t f = 0; f < p; ++f) {
    auto tok = in.expect("feature");
    if (tok.size() < 3) in.error("truncated feature line");
    FeatureSpec spec{detail::decode_token(tok[1]), FeatureKind::kContinuous, {}};
    if (tok[2] == "categorical") {
      spec.kind = FeatureKind::kCategorical;
      if (tok.size() < 4) in.error("truncated feature line");
      const auto card = in.number<std::size_t>(tok[3]);
      in.require_count(tok, 4 + card);
      for (std::size_t l = 0; l < card; ++l) spec.levels.push_back(detail::decode_token(tok[4 + l]));
    } else if (tok[2] != "continuous") {
      in.error("unknown feature kind '" + std::string(tok[2]) + "'");
    } else {
      in.require_count(tok, 3);
    }
    forest.schema.push_back(std::move(spec));
  }
  c.validate(forest.schema.size());

  auto groups = in.expect("groups");
  if (groups.size() < 4) in.error("truncated groups line");
  forest.groups.attribute_name = detail::decode_token(groups[1]);
  forest.groups.deprived_index = in.number<std::size_t>(groups[2]);
  const auto g_count = in.number<std::size_t>(groups[3]);
  in.require_count(groups, 4 + g_count);
  for (std::size_t g = 0; g < g_count; ++g) forest.groups.labels.push_back(detail::decode_token(groups[4 + g]));
  forest.groups.validate();

  auto grid = in.expect("time_grid");
  if (grid.size() < 2) in.error("truncated time_grid line");
  const auto m = in.number<std::size_t>(grid[1]);
  in.require_count(grid, 2 + m);
  for (std::size_t k = 0; k < m; ++k) forest.time_grid.push_back(in.number<double>(grid[2 + k]));
  for (std::size_t k = 1; k < m; ++k) {
    if (!(forest.time_grid[k - 1] < forest.time_grid[k])) in.error("time_grid is not strictly increasing");
  }

  for (std::size_t i = 0; i < c.n_trees; ++i) {
    auto tree_tok = in.expect("tree");
    in.require_count(tree_tok, 3);
    if (in.number<std::size_t>(tree_tok[1]) != i) in.error("trees out of order");
    const auto node_count = in.number<std::size_t>(tree_tok[2]);
    if (node_count == 0) in.error("tree has no nodes");
    SurfTree tree;
    tree.nodes.resize(node_count);
    for (std::size_t id = 0; id < node_count; ++id) {
      auto tok = in.expect("node");
      if (tok.size() < 4 || in.number<std::size_t>(tok[1]) != id) in.error("nodes out of order");
      TreeNode& node = tree.nodes[id];
      if (tok[2] == "leaf") {
        const auto steps = in.number<std::size_t>(tok[3]);
        in.require_count(tok, 4 + steps);
        LeafHazard leaf;
        leaf.chf.kind = CurveKind::kCumulativeHazard;
        double h = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
          const std::string_view s = tok[4 + k];
          const std::size_t a = s.find(':');
          const std::size_t b = a == std::string_view::npos ? a : s.find(':', a + 1);
          if (b == std::string_view::npos) in.error("malformed leaf step");
          const auto gi = in.number<std::uint32_t>(s.substr(0, a));
          const auto d = in.number<std::size_t>(s.substr(a + 1, b - a - 1));
          const auto n = in.number<std::size_t>(s.substr(b + 1));
          if (gi >= forest.time_grid.size() || d == 0 || n < d) in.error("leaf step out of range");
          if (k > 0 && gi <= leaf.grid.back()) in.error("leaf steps not increasing");
          h += static_cast<double>(d) / static_cast<double>(n);
          leaf.grid.push_back(gi);
          leaf.chf.times.push_back(forest.time_grid[gi]);
          leaf.chf.values.push_back(h);
          leaf.chf.at_risk.push_back(n);
          leaf.chf.events.push_back(d);
        }
        node.leaf = std::move(leaf);
      } else if (tok[2] == "split") {
        if (tok.size() < 7) in.error("truncated split line");
        SplitRule rule;
        rule.feature = in.number<std::size_t>(tok[3]);
        if (rule.feature >= forest.schema.size()) in.error("split feature out of range");
        std::size_t next = 0;
        if (tok[4] == "le") {
          in.require_count(tok, 8);
          rule.kind = FeatureKind::kContinuous;
          rule.threshold = in.number<double>(tok[5]);
          next = 6;
        } else if (tok[4] == "in") {
          rule.kind = FeatureKind::kCategorical;
          const auto count = in.number<std::size_t>(tok[5]);
          in.require_count(tok, 8 + count);
          for (std::size_t k = 0; k < count; ++k) rule.categories.push_back(in.number<std::size_t>(tok[6 + k]));
          next = 6 + count;
        } else {
          in.error("unknown split kind");
        }
        if (rule.kind != forest.schema[rule.feature].kind) in.error("split kind disagrees with schema");
        node.left = in.number<std::size_t>(tok[next]);
        node.right = in.number<std::size_t>(tok[next + 1]);
        if (node.left <= id || node.right <= id || node.left >= node_count || node.right >= node_count) {
          in.error("child id out of range");
        }
        node.split = std::move(rule);
      } else {
        in.error("unknown node kind '" + std::string(tok[2]) + "'");
      }
    }
    forest.trees.push_back(std::move(tree));
  }
  in.expect("end");
  if (!in.at_end()) fail(ErrorKind::kParse, "trailing content after model 'end'");
  return forest;
}

inline void save_forest(const SurfForest& forest, const std::string& path) {
  detail::write_file(path, serialize_forest(forest));
}

inline SurfForest load_forest(const std::string& path) { return parse_forest(detail::read_file(path)); }

}  // namespace surf
