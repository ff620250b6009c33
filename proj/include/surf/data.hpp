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

// Dataset model: right-censored, group-annotated tabular observations, CSV
// ingestion driven by a key=value schema config, a seeded generator of biased
// censored data and stratified k-fold splitting.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <vector>

#include "surf/error.hpp"
#include "surf/random.hpp"

namespace surf {

enum class FeatureKind { kContinuous, kCategorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  // Level labels of a categorical feature; the encoded value is the index.
  std::vector<std::string> levels;

  std::size_t cardinality() const { return levels.size(); }
  bool operator==(const FeatureSpec&) const = default;
};

using Schema = std::vector<FeatureSpec>;

struct Individual {
  std::vector<double> features;
  double time = 0.0;
  bool event = false;
  std::size_t group = 0;

  bool operator==(const Individual&) const = default;
};

struct GroupSpec {
  std::string attribute_name;
  std::vector<std::string> labels;  // index = group id
  std::size_t deprived_index = 0;

  std::size_t size() const { return labels.size(); }

  void validate() const {
    if (labels.size() < 2) {
      fail(ErrorKind::kSchema, "sensitive attribute '" + attribute_name +
                                   "' needs at least 2 groups, found " +
                                   std::to_string(labels.size()));
    }
    if (deprived_index >= labels.size()) {
      fail(ErrorKind::kSchema, "deprived group index out of range");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = i + 1; j < labels.size(); ++j) {
        if (labels[i] == labels[j]) {
          fail(ErrorKind::kSchema, "duplicate group label '" + labels[i] + "'");
        }
      }
    }
  }

  bool operator==(const GroupSpec&) const = default;
};

// Immutable after construction; the constructor enforces every row invariant.
class Dataset {
 public:
  Dataset(Schema schema, std::vector<Individual> individuals, GroupSpec groups)
      : schema_(std::move(schema)),
        individuals_(std::move(individuals)),
        groups_(std::move(groups)) {
    groups_.validate();
    if (individuals_.empty()) fail(ErrorKind::kArgument, "dataset is empty");
    for (std::size_t i = 0; i < individuals_.size(); ++i) check_row(i);
  }

  const Schema& schema() const { return schema_; }
  const GroupSpec& groups() const { return groups_; }
  const std::vector<Individual>& individuals() const { return individuals_; }
  const Individual& operator[](std::size_t i) const { return individuals_[i]; }
  std::size_t size() const { return individuals_.size(); }
  std::size_t feature_count() const { return schema_.size(); }

  std::size_t event_count() const {
    return static_cast<std::size_t>(std::count_if(
        individuals_.begin(), individuals_.end(), [](const Individual& x) { return x.event; }));
  }
  std::size_t censored_count() const { return size() - event_count(); }
  double censored_rate() const {
    return static_cast<double>(censored_count()) / static_cast<double>(size());
  }
  std::size_t group_count(std::size_t g) const {
    return static_cast<std::size_t>(std::count_if(
        individuals_.begin(), individuals_.end(),
        [g](const Individual& x) { return x.group == g; }));
  }

  // Rows at `indices`, in that order (duplicates allowed).
  Dataset subset(const std::vector<std::size_t>& indices) const {
    std::vector<Individual> rows;
    rows.reserve(indices.size());
    for (std::size_t i : indices) rows.push_back(individuals_.at(i));
    return Dataset(schema_, std::move(rows), groups_);
  }

  bool operator==(const Dataset&) const = default;

 private:
  void check_row(std::size_t i) const {
    const Individual& x = individuals_[i];
    const std::string where = "row " + std::to_string(i + 1);
    if (!(x.time > 0.0) || !std::isfinite(x.time)) {
      fail(ErrorKind::kParse, where + ": time must be positive and finite");
    }
    if (x.group >= groups_.size()) fail(ErrorKind::kSchema, where + ": group index out of range");
    if (x.features.size() != schema_.size()) {
      fail(ErrorKind::kSchema, where + ": expected " + std::to_string(schema_.size()) +
                                   " features, got " + std::to_string(x.features.size()));
    }
    for (std::size_t f = 0; f < schema_.size(); ++f) {
      const double v = x.features[f];
      if (!std::isfinite(v)) fail(ErrorKind::kParse, where + ": non-finite feature value");
      if (schema_[f].kind == FeatureKind::kCategorical) {
        if (v != std::floor(v) || v < 0.0 ||
            v >= static_cast<double>(schema_[f].cardinality())) {
          fail(ErrorKind::kSchema, where + ": categorical '" + schema_[f].name +
                                       "' value outside [0, cardinality)");
        }
      }
    }
  }

  Schema schema_;
  std::vector<Individual> individuals_;
  GroupSpec groups_;
};

// ---------------------------------------------------------------------------
// Text helpers

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    const std::string_view item =
        trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorKind::kIo, "write to '" + path + "' failed");
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t require_column(std::string_view name) const {
    auto c = column(name);
    if (!c) fail(ErrorKind::kSchema, "missing column '" + std::string(name) + "'");
    return *c;
  }
};

// RFC 4180 style: comma separated, double-quote quoting, header row required.
inline CsvTable parse_csv_table(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;

  auto end_field = [&] {
    record.push_back(was_quoted ? field : std::string(detail::trim(field)));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c != '"') {
        field += c;
      } else if (i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else {
        in_quotes = false;
      }
    } else if (c == '"' && !was_quoted && detail::trim(field).empty()) {
      field.clear();
      in_quotes = was_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (in_quotes) fail(ErrorKind::kParse, "unterminated quoted field");
  if (!field.empty() || !record.empty() || was_quoted) end_record();

  CsvTable table;
  if (records.empty()) fail(ErrorKind::kParse, "CSV has no header row");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      fail(ErrorKind::kParse, "row " + std::to_string(r) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, got " +
                                  std::to_string(records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Schema config

// Flat key=value file. Required keys: time_col, event_col, group_col,
// deprived_value, feature_cols. Optional: categorical_cols, group_labels
// (pins group order), binarize_group (true collapses all non-deprived values
// into one favored group), favored_label, levels.<col> (pins level order).
struct SchemaConfig {
  std::string time_col;
  std::string event_col;
  std::string group_col;
  std::string deprived_value;
  std::vector<std::string> feature_cols;
  std::vector<std::string> categorical_cols;
  std::vector<std::string> group_labels;
  bool binarize_group = false;
  std::string favored_label = "other";
  std::map<std::string, std::vector<std::string>> levels;

  bool is_categorical(std::string_view col) const {
    return std::find(categorical_cols.begin(), categorical_cols.end(), col) != categorical_cols.end();
  }
};

inline SchemaConfig parse_schema_config(std::string_view text) {
  SchemaConfig cfg;
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = detail::trim(line);
    if (s.empty() || s.front() == '#') continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::kConfig, "schema config line " + std::to_string(line_no) + ": expected key=value");
    }
    kv[std::string(detail::trim(s.substr(0, eq)))] = std::string(detail::trim(s.substr(eq + 1)));
  }
  auto required = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) {
      fail(ErrorKind::kConfig, std::string("schema config missing key '") + key + "'");
    }
    return it->second;
  };
  cfg.time_col = required("time_col");
  cfg.event_col = required("event_col");
  cfg.group_col = required("group_col");
  cfg.deprived_value = required("deprived_value");
  cfg.feature_cols = detail::split_list(required("feature_cols"));
  if (cfg.feature_cols.empty()) fail(ErrorKind::kConfig, "feature_cols lists no columns");
  if (auto it = kv.find("categorical_cols"); it != kv.end()) {
    cfg.categorical_cols = detail::split_list(it->second);
  }
  for (const auto& c : cfg.categorical_cols) {
    if (std::find(cfg.feature_cols.begin(), cfg.feature_cols.end(), c) == cfg.feature_cols.end()) {
      fail(ErrorKind::kConfig, "categorical column '" + c + "' is not in feature_cols");
    }
  }
  if (auto it = kv.find("group_labels"); it != kv.end()) cfg.group_labels = detail::split_list(it->second);
  if (auto it = kv.find("binarize_group"); it != kv.end()) {
    if (it->second == "true" || it->second == "1") {
      cfg.binarize_group = true;
    } else if (it->second != "false" && it->second != "0") {
      fail(ErrorKind::kConfig, "binarize_group must be true or false");
    }
  }
  if (auto it = kv.find("favored_label"); it != kv.end() && !it->second.empty()) {
    cfg.favored_label = it->second;
  }
  for (const auto& [key, value] : kv) {
    if (key.rfind("levels.", 0) == 0) {
      const std::string col = key.substr(7);
      if (!cfg.is_categorical(col)) {
        fail(ErrorKind::kConfig, "'" + key + "' names a column that is not categorical");
      }
      cfg.levels[col] = detail::split_list(value);
    }
  }
  return cfg;
}

inline SchemaConfig load_schema_config(const std::string& path) {
  return parse_schema_config(detail::read_file(path));
}

inline std::string format_schema_config(const SchemaConfig& cfg) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  std::string out;
  out += "time_col=" + cfg.time_col + "\n";
  out += "event_col=" + cfg.event_col + "\n";
  out += "group_col=" + cfg.group_col + "\n";
  out += "deprived_value=" + cfg.deprived_value + "\n";
  out += "feature_cols=" + join(cfg.feature_cols) + "\n";
  if (!cfg.categorical_cols.empty()) out += "categorical_cols=" + join(cfg.categorical_cols) + "\n";
  if (!cfg.group_labels.empty()) out += "group_labels=" + join(cfg.group_labels) + "\n";
  if (cfg.binarize_group) out += "binarize_group=true\nfavored_label=" + cfg.favored_label + "\n";
  for (const auto& [col, lv] : cfg.levels) out += "levels." + col + "=" + join(lv) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Dataset <-> CSV

inline Dataset dataset_from_table(const CsvTable& table, const SchemaConfig& cfg) {
  const std::size_t time_c = table.require_column(cfg.time_col);
  const std::size_t event_c = table.require_column(cfg.event_col);
  const std::size_t group_c = table.require_column(cfg.group_col);
  std::vector<std::size_t> feature_c;
  for (const auto& name : cfg.feature_cols) feature_c.push_back(table.require_column(name));
  if (table.rows.empty()) fail(ErrorKind::kParse, "CSV has no data rows");

  Schema schema;
  std::vector<std::unordered_map<std::string, std::size_t>> level_index(cfg.feature_cols.size());
  std::vector<bool> pinned(cfg.feature_cols.size(), false);
  for (std::size_t f = 0; f < cfg.feature_cols.size(); ++f) {
    FeatureSpec spec{cfg.feature_cols[f], FeatureKind::kContinuous, {}};
    if (cfg.is_categorical(spec.name)) {
      spec.kind = FeatureKind::kCategorical;
      if (auto it = cfg.levels.find(spec.name); it != cfg.levels.end()) {
        spec.levels = it->second;
        pinned[f] = true;
        for (std::size_t l = 0; l < spec.levels.size(); ++l) level_index[f][spec.levels[l]] = l;
      }
    }
    schema.push_back(std::move(spec));
  }

  GroupSpec groups;
  groups.attribute_name = cfg.group_col;
  std::unordered_map<std::string, std::size_t> group_index;
  const bool pinned_groups = !cfg.group_labels.empty();
  if (cfg.binarize_group) {
    groups.labels = {cfg.deprived_value, cfg.favored_label};
  } else if (pinned_groups) {
    groups.labels = cfg.group_labels;
    if (std::find(groups.labels.begin(), groups.labels.end(), cfg.deprived_value) == groups.labels.end()) {
      fail(ErrorKind::kConfig, "deprived_value '" + cfg.deprived_value + "' is not in group_labels");
    }
  } else {
    groups.labels = {cfg.deprived_value};
  }
  for (std::size_t g = 0; g < groups.labels.size(); ++g) group_index[groups.labels[g]] = g;
  groups.deprived_index = group_index.at(cfg.deprived_value);

  std::vector<Individual> rows;
  rows.reserve(table.rows.size());
  bool saw_deprived = false;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const std::string where = "row " + std::to_string(r + 1);
    auto cell = [&](std::size_t c, const std::string& col) -> const std::string& {
      if (cells[c].empty()) fail(ErrorKind::kParse, where + ": missing value in column '" + col + "'");
      return cells[c];
    };
    Individual x;
    auto t = detail::parse_double(cell(time_c, cfg.time_col));
    if (!t) fail(ErrorKind::kParse, where + ": time '" + cells[time_c] + "' is not numeric");
    if (!(*t > 0.0) || !std::isfinite(*t)) fail(ErrorKind::kParse, where + ": time must be > 0");
    x.time = *t;
    auto e = detail::parse_double(cell(event_c, cfg.event_col));
    if (!e || (*e != 0.0 && *e != 1.0)) {
      fail(ErrorKind::kParse, where + ": event value '" + cells[event_c] + "' is not 0 or 1");
    }
    x.event = *e == 1.0;

    const std::string& label = cell(group_c, cfg.group_col);
    if (label == cfg.deprived_value) saw_deprived = true;
    if (auto it = group_index.find(label); it != group_index.end()) {
      x.group = it->second;
    } else if (cfg.binarize_group) {
      x.group = group_index.at(cfg.favored_label);
    } else if (pinned_groups) {
      fail(ErrorKind::kParse, where + ": group value '" + label + "' not in group_labels");
    } else {
      x.group = groups.labels.size();
      group_index[label] = x.group;
      groups.labels.push_back(label);
    }

    x.features.reserve(feature_c.size());
    for (std::size_t f = 0; f < feature_c.size(); ++f) {
      const std::string& raw = cell(feature_c[f], schema[f].name);
      if (schema[f].kind == FeatureKind::kCategorical) {
        auto it = level_index[f].find(raw);
        if (it == level_index[f].end()) {
          if (pinned[f]) {
            fail(ErrorKind::kParse, where + ": level '" + raw + "' of '" + schema[f].name + "' not declared");
          }
          it = level_index[f].emplace(raw, schema[f].levels.size()).first;
          schema[f].levels.push_back(raw);
        }
        x.features.push_back(static_cast<double>(it->second));
      } else {
        auto v = detail::parse_double(raw);
        if (!v || !std::isfinite(*v)) {
          fail(ErrorKind::kParse, where + ": value '" + raw + "' of '" + schema[f].name + "' is not numeric");
        }
        x.features.push_back(*v);
      }
    }
    rows.push_back(std::move(x));
  }
  if (!saw_deprived && !pinned_groups) {
    fail(ErrorKind::kSchema, "deprived_value '" + cfg.deprived_value + "' never occurs in column '" +
                                 cfg.group_col + "'");
  }
  return Dataset(std::move(schema), std::move(rows), std::move(groups));
}

inline Dataset parse_csv(std::string_view text, const SchemaConfig& cfg) {
  return dataset_from_table(parse_csv_table(text), cfg);
}

inline Dataset load_csv(const std::string& path, const SchemaConfig& cfg) {
  return parse_csv(detail::read_file(path), cfg);
}

// Config that reloads a written dataset to an identical Dataset.
inline SchemaConfig schema_config_for(const Dataset& data, std::string time_col = "time",
                                      std::string event_col = "event") {
  SchemaConfig cfg;
  cfg.time_col = std::move(time_col);
  cfg.event_col = std::move(event_col);
  cfg.group_col = data.groups().attribute_name;
  cfg.deprived_value = data.groups().labels[data.groups().deprived_index];
  cfg.group_labels = data.groups().labels;
  for (const auto& f : data.schema()) {
    cfg.feature_cols.push_back(f.name);
    if (f.kind == FeatureKind::kCategorical) {
      cfg.categorical_cols.push_back(f.name);
      cfg.levels[f.name] = f.levels;
    }
  }
  return cfg;
}

inline std::string format_csv(const Dataset& data, const std::string& time_col = "time",
                              const std::string& event_col = "event") {
  std::string out;
  for (const auto& f : data.schema()) out += detail::csv_quote(f.name) + ",";
  out += detail::csv_quote(time_col) + "," + detail::csv_quote(event_col) + "," +
         detail::csv_quote(data.groups().attribute_name) + "\n";
  for (const auto& x : data.individuals()) {
    for (std::size_t f = 0; f < x.features.size(); ++f) {
      const auto& spec = data.schema()[f];
      out += spec.kind == FeatureKind::kCategorical
                 ? detail::csv_quote(spec.levels[static_cast<std::size_t>(x.features[f])])
                 : detail::format_double(x.features[f]);
      out += ',';
    }
    out += detail::format_double(x.time) + (x.event ? ",1," : ",0,") +
           detail::csv_quote(data.groups().labels[x.group]) + "\n";
  }
  return out;
}

inline void write_csv(const Dataset& data, const std::string& path) {
  detail::write_file(path, format_csv(data));
}

// ---------------------------------------------------------------------------
// Synthetic biased, censored data

struct SynthConfig {
  std::size_t n = 1000;
  std::size_t n_features = 5;
  double group_fraction_deprived = 0.3;
  double hazard_ratio_deprived = 3.0;
  double censor_rate_target = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) fail(ErrorKind::kArgument, "synthetic n must be >= 2");
    if (n_features < 2) fail(ErrorKind::kArgument, "synthetic data needs >= 2 features");
    if (!(group_fraction_deprived > 0.0 && group_fraction_deprived < 1.0)) {
      fail(ErrorKind::kArgument, "group_fraction_deprived must lie in (0, 1)");
    }
    if (!(hazard_ratio_deprived > 0.0) || !std::isfinite(hazard_ratio_deprived)) {
      fail(ErrorKind::kArgument, "hazard_ratio_deprived must be positive");
    }
    if (!(censor_rate_target >= 0.0 && censor_rate_target < 1.0)) {
      fail(ErrorKind::kArgument, "censor_rate_target must lie in [0, 1)");
    }
  }
};

namespace detail {

// Censoring rate mu such that the mean of mu / (mu + rate_i), the probability
// that an exponential censoring time precedes an exponential event time, hits
// `target`.
inline double calibrate_censoring_rate(const std::vector<double>& rates, double target) {
  if (target <= 0.0) return 0.0;
  auto expected = [&](double mu) {
    double s = 0.0;
    for (double r : rates) s += mu / (mu + r);
    return s / static_cast<double>(rates.size());
  };
  double lo = 0.0;
  double hi = 1.0;
  while (expected(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (expected(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double positive_exponential(Rng& rng, double rate) {
  double t = rng.exponential(rate);
  while (!(t > 0.0)) t = rng.exponential(rate);
  return t;
}

}  // namespace detail

// Group 0 is deprived. Features are standard normal except deprived x0, which
// is centred at -1.6 * ln(HR) / ln(3) (so -1.6 at HR = 3 and 0 at HR = 1).
// The hazard is base * HR^deprived * exp(0.5 x0 - 1.5 x1), so a model that
// sees only the features underrates deprived risk.
inline Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  constexpr double kBaseRate = 0.1;
  constexpr double kCoef0 = 0.5;
  constexpr double kCoef1 = -1.5;
  constexpr double kDeprivedShift0 = -1.6;
  const double shift = kDeprivedShift0 * std::log(cfg.hazard_ratio_deprived) / std::log(3.0);

  Rng rng(derive_seed(cfg.seed, 0x5e7));
  std::vector<Individual> rows(cfg.n);
  std::vector<double> rates(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    Individual& x = rows[i];
    const bool deprived = rng.uniform() < cfg.group_fraction_deprived;
    x.group = deprived ? 0 : 1;
    x.features.resize(cfg.n_features);
    for (double& v : x.features) v = rng.normal();
    if (deprived) x.features[0] += shift;
    rates[i] = kBaseRate * (deprived ? cfg.hazard_ratio_deprived : 1.0) *
               std::exp(kCoef0 * x.features[0] + kCoef1 * x.features[1]);
  }
  const double censor_rate = detail::calibrate_censoring_rate(rates, cfg.censor_rate_target);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double event_time = detail::positive_exponential(rng, rates[i]);
    if (censor_rate > 0.0) {
      const double censor_time = detail::positive_exponential(rng, censor_rate);
      rows[i].time = std::min(event_time, censor_time);
      rows[i].event = event_time <= censor_time;
    } else {
      rows[i].time = event_time;
      rows[i].event = true;
    }
  }

  Schema schema;
  for (std::size_t f = 0; f < cfg.n_features; ++f) {
    schema.push_back({"x" + std::to_string(f), FeatureKind::kContinuous, {}});
  }
  GroupSpec groups{"group", {"deprived", "favored"}, 0};
  return Dataset(std::move(schema), std::move(rows), std::move(groups));
}

// ---------------------------------------------------------------------------
// Stratified k-fold

struct Fold {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  Dataset train;
  Dataset test;
};

// Stratifies on (group, event): each stratum is shuffled and dealt round-robin
// so every fold holds floor or ceil of its proportional share of each stratum,
// and fold sizes differ by at most one.
inline std::vector<std::size_t> assign_folds(const Dataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::kArgument, "k-fold requires k >= 2, got " + std::to_string(k));
  if (k > data.size()) {
    fail(ErrorKind::kArgument, "k-fold requires k <= n (k=" + std::to_string(k) +
                                   ", n=" + std::to_string(data.size()) + ")");
  }
  const std::size_t n_groups = data.groups().size();
  std::vector<std::vector<std::size_t>> strata(n_groups * 2);
  for (std::size_t i = 0; i < data.size(); ++i) {
    strata[data[i].group * 2 + (data[i].event ? 1 : 0)].push_back(i);
  }
  Rng rng(derive_seed(seed, 0xf01d));
  std::vector<std::size_t> fold_of(data.size());
  std::size_t position = 0;
  for (auto& stratum : strata) {
    for (std::size_t i = stratum.size(); i > 1; --i) std::swap(stratum[i - 1], stratum[rng.bounded(i)]);
    for (std::size_t idx : stratum) fold_of[idx] = position++ % k;
  }
  return fold_of;
}

inline std::vector<Fold> split_k_fold(const Dataset& data, std::size_t k, std::uint64_t seed) {
  const auto fold_of = assign_folds(data, k, seed);
  std::vector<Fold> folds;
  folds.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? test_idx : train_idx).push_back(i);
    Dataset train = data.subset(train_idx);
    Dataset test = data.subset(test_idx);
    folds.push_back({std::move(train_idx), std::move(test_idx), std::move(train), std::move(test)});
  }
  return folds;
}

}  // namespace surf
