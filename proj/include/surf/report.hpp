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

// Structured reports. An audit bundles concordance imparity, fair calibration,
// the confusion tensor with its floor/ceiling outcomes and the evaluation
// metrics into one JSON document. A section that cannot be computed on the
// given cohort carries {"error": {"kind", "message"}} instead of values.
// Percentages are rounded to two decimals; raw fractions are kept as well.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "surf/ablation.hpp"
#include "surf/error.hpp"
#include "surf/evaluation.hpp"
#include "surf/fairness.hpp"
#include "surf/interplay.hpp"

namespace surf {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

inline double round_percent(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

struct RunManifest {
  std::string command;
  Json parameters = Json::object();
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> input_digests;  // (path, sha256 hex)
  std::string tool_version = kToolVersion;
  std::optional<double> duration_seconds;                          // omitted for reproducible output
};

inline Json to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["parameters"] = m.parameters;
  j["seed"] = m.seed;
  Json digests = Json::array();
  for (const auto& [path, digest] : m.input_digests) digests.push_back({{"path", path}, {"sha256", digest}});
  j["input_digests"] = digests;
  j["tool_version"] = m.tool_version;
  if (m.duration_seconds) j["duration_seconds"] = *m.duration_seconds;
  return j;
}

// A report section: a value, or the error that prevented it.
template <class T>
struct Section {
  std::optional<T> value;
  ErrorKind error_kind = ErrorKind::kUndefined;
  std::string error;

  bool ok() const { return value.has_value(); }
};

template <class Fn>
auto compute_section(Fn&& fn) -> Section<decltype(fn())> {
  Section<decltype(fn())> s;
  try {
    s.value = fn();
  } catch (const Error& e) {
    s.error_kind = e.kind();
    s.error = e.what();
  }
  return s;
}

inline Json error_json(ErrorKind kind, const std::string& message) {
  return {{"error", {{"kind", std::string(to_string(kind))}, {"message", message}}}};
}

struct AuditReport {
  double horizon = 0.0;
  std::size_t bin_count = 10;
  std::vector<std::string> group_labels;
  Section<ConcordanceSummary> concordance;
  Section<CalibrationReport> calibration;
  Section<ConfusionTensor> tensor;
  Section<BoundsReport> bounds;
  EvalReport evaluation;
};

inline AuditReport audit(const ScoredCohort& c, const std::vector<std::string>& group_labels,
                         std::optional<double> horizon = std::nullopt, std::size_t bin_count = 10) {
  c.validate();
  if (group_labels.size() != c.group_count) {
    fail(ErrorKind::kArgument, "audit needs one label per group");
  }
  AuditReport r;
  r.horizon = horizon ? *horizon : default_horizon(c);
  r.bin_count = bin_count;
  r.group_labels = group_labels;
  r.concordance = compute_section([&] { return concordance_summary(c); });
  if (c.survival_probs) {
    r.calibration = compute_section([&] { return fair_calibration(c, r.horizon, bin_count); });
  } else {
    r.calibration.error_kind = ErrorKind::kArgument;
    r.calibration.error = "no predicted survival probabilities supplied";
  }
  r.tensor = compute_section([&] { return build_tensor(c); });
  if (r.tensor.ok()) {
    r.bounds = compute_section([&] { return bounds_report(*r.tensor.value); });
  } else {
    r.bounds.error_kind = r.tensor.error_kind;
    r.bounds.error = r.tensor.error;
  }
  r.evaluation = evaluate_cohort(c, r.horizon);
  return r;
}

namespace detail {

inline Json metric_json(const Metric& m) {
  if (m.ok()) return *m.value;
  return {{"error", m.error}};
}

inline Json metric_set_json(const MetricSet& m) {
  Json j;
  j["c_index"] = metric_json(m.c_index);
  if (m.c_index.ok()) j["c_index_percent"] = round_percent(*m.c_index.value);
  j["brier"] = metric_json(m.brier);
  j["td_auc"] = metric_json(m.td_auc);
  return j;
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json cells_json(const std::array<std::size_t, 4>& cells) {
  return {{"a", cells[kA]}, {"b", cells[kB]}, {"c", cells[kC]}, {"d", cells[kD]}};
}

template <class T, class Fn>
Json section_json(const Section<T>& s, Fn&& fn) {
  return s.ok() ? fn(*s.value) : error_json(s.error_kind, s.error);
}

}  // namespace detail

inline Json to_json(const ConcordanceSummary& s, const std::vector<std::string>& labels) {
  Json j;
  j["ci"] = s.ci;
  j["ci_percent"] = round_percent(s.ci);
  Json groups = Json::array();
  for (std::size_t g = 0; g < s.per_group.size(); ++g) {
    groups.push_back({{"group", labels[g]},
                      {"concordance", s.per_group[g]},
                      {"concordance_percent", round_percent(s.per_group[g])},
                      {"permissible_pairs", s.tallies[g].permissible},
                      {"concordant_pairs", static_cast<double>(s.tallies[g].concordant_halves) / 2.0}});
  }
  j["per_group"] = groups;
  return j;
}

inline Json to_json(const CalibrationReport& r, const std::vector<std::string>& labels) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["alpha"] = r.alpha;
  j["horizon"] = r.horizon;
  j["bins"] = r.bin_count;
  Json groups = Json::array();
  for (const GroupCalibration& g : r.per_group) {
    groups.push_back({{"group", labels[g.group]},
                      {"statistic", g.statistic},
                      {"p_value", g.p_value},
                      {"skipped_bins", g.skipped_bins}});
  }
  j["per_group"] = groups;
  return j;
}

// One row per (group, bin): predicted against Kaplan-Meier observed, both as
// survival and as event probability at the horizon.
inline Json calibration_table(const CalibrationReport& r, const std::vector<std::string>& labels) {
  Json rows = Json::array();
  for (const GroupCalibration& g : r.per_group) {
    for (std::size_t b = 0; b < g.bins.size(); ++b) {
      const CalibrationBin& bin = g.bins[b];
      rows.push_back({{"group", labels[g.group]},
                      {"bin", b + 1},
                      {"size", bin.size},
                      {"predicted_survival", bin.mean_survival_prob},
                      {"observed_survival", bin.km_survival},
                      {"predicted_event_prob", bin.mean_event_prob},
                      {"observed_event_prob", 1.0 - bin.km_survival},
                      {"skipped", bin.skipped}});
    }
  }
  return rows;
}

inline Json to_json(const ConfusionTensor& t, const std::vector<std::string>& labels) {
  Json j;
  Json planes = Json::array();
  for (std::size_t g = 0; g < 2; ++g) {
    const TensorPlane& p = t.planes[g];
    planes.push_back({{"group", labels[g]},
                      {"permissible", detail::cells_json(p.permissible)},
                      {"impermissible", detail::cells_json(p.impermissible)},
                      {"impermissible_later_censored", detail::cells_json(p.impermissible_later_censored)},
                      {"P", p.P()},
                      {"I", p.I()},
                      {"C", p.C()}});
  }
  j["planes"] = planes;
  j["excluded_time_ties"] = t.excluded_time_ties;
  j["excluded_risk_ties"] = t.excluded_risk_ties;
  const Metric ci = guarded([&] { return ci_from_tensor(t); });
  j["ci"] = detail::metric_json(ci);
  return j;
}

inline Json to_json(const BoundsReport& b) {
  Json j;
  j["ci"] = b.ci;
  j["ci_floor"] = b.ci_floor;
  j["ci_ceiling"] = b.ci_ceiling;
  j["ci_ceiling_order_preserving"] = b.ci_ceiling_order_preserving;
  j["ci_percent"] = round_percent(b.ci);
  j["ci_floor_percent"] = round_percent(b.ci_floor);
  j["ci_ceiling_percent"] = round_percent(b.ci_ceiling);
  j["floor_gain"] = b.floor_gain;
  j["ceiling_gain"] = b.ceiling_gain;
  j["sub_scenario"] = {{"proportional", b.sub_scenario.proportional},
                       {"extreme_split", b.sub_scenario.extreme_split},
                       {"uniform_direction", b.sub_scenario.uniform_direction},
                       {"general", b.sub_scenario.general},
                       {"distributional_interval_supported", b.sub_scenario.distributional_interval_supported}};
  j["excluded_pairs"] = b.excluded_pairs;
  return j;
}

inline Json to_json(const EvalReport& r, const std::vector<std::string>& labels) {
  Json j;
  j["horizon"] = r.horizon;
  j["overall"] = detail::metric_set_json(r.overall);
  Json groups = Json::object();
  for (const auto& [g, m] : r.per_group) groups[labels[g]] = detail::metric_set_json(m);
  j["per_group"] = groups;
  return j;
}

inline Json to_json(const AuditReport& r) {
  const auto& labels = r.group_labels;
  Json j;
  j["horizon"] = r.horizon;
  Json fairness = detail::section_json(r.concordance, [&](const auto& s) { return to_json(s, labels); });
  fairness["calibration"] = detail::section_json(r.calibration, [&](const auto& c) { return to_json(c, labels); });
  j["fairness"] = fairness;
  j["tensor"] = detail::section_json(r.tensor, [&](const auto& t) { return to_json(t, labels); });
  j["bounds"] = detail::section_json(r.bounds, [](const auto& b) { return to_json(b); });
  j["evaluation"] = to_json(r.evaluation, labels);
  j["calibration_table"] = r.calibration.ok() ? calibration_table(*r.calibration.value, labels) : Json::array();
  return j;
}

namespace detail {

inline Json medians_json(const MetricMedians& m) {
  Json j;
  j["c_index"] = optional_json(m.c_index);
  j["c_index_percent"] = m.c_index ? Json(round_percent(*m.c_index)) : Json(nullptr);
  j["brier"] = optional_json(m.brier);
  j["td_auc"] = optional_json(m.td_auc);
  return j;
}

inline Json arm_json(const AblationArm& arm, const std::vector<std::string>& labels, bool timing) {
  Json j;
  j["fairness_enabled"] = arm.fairness_enabled;
  j["median_ci"] = optional_json(arm.median_ci);
  j["median_ci_percent"] = arm.median_ci ? Json(round_percent(*arm.median_ci)) : Json(nullptr);
  j["overall"] = medians_json(arm.overall);
  Json groups = Json::object();
  for (const auto& [g, m] : arm.per_group) groups[labels[g]] = medians_json(m);
  j["per_group"] = groups;
  if (timing) j["runtime_seconds"] = arm.runtime_seconds;
  Json folds = Json::array();
  for (const FoldOutcome& f : arm.folds) {
    Json row;
    row["seed"] = f.seed;
    row["fold"] = f.fold;
    row["ci"] = optional_json(f.ci);
    row["c_index"] = optional_json(f.overall.c_index.value);
    for (const auto& [g, m] : f.per_group) row["c_index_" + labels[g]] = optional_json(m.c_index.value);
    folds.push_back(row);
  }
  j["folds"] = folds;
  return j;
}

}  // namespace detail

inline Json to_json(const AblationResult& r, const std::vector<std::string>& labels, bool timing = true) {
  Json j;
  j["folds"] = r.folds;
  j["seeds"] = r.seeds;
  j["surf_minus"] = detail::arm_json(r.without_fairness, labels, timing);
  j["surf"] = detail::arm_json(r.with_fairness, labels, timing);
  return j;
}

}  // namespace surf
