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

// Censorship-aware group fairness metrics.
//
// Concordance imparity compares, across sensitive groups, the share of
// correctly ordered permissible pairs anchored in each group. Fair calibration
// runs a Hosmer-Lemeshow test per group on decile bins of predicted survival,
// with each bin's observed event count replaced by its Kaplan-Meier estimate so
// that censored members still count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "surf/data.hpp"
#include "surf/error.hpp"
#include "surf/estimators.hpp"

namespace surf {

// Outcomes plus model scores for one cohort. `risks` order individuals (higher
// = earlier expected event); `survival_probs` are predicted S(horizon | x).
struct ScoredCohort {
  std::vector<double> times;
  std::vector<bool> events;
  std::vector<std::size_t> groups;
  std::size_t group_count = 2;
  std::vector<double> risks;
  std::optional<std::vector<double>> survival_probs;
  std::optional<double> horizon;

  std::size_t size() const { return times.size(); }

  void validate() const {
    const std::size_t n = times.size();
    if (n == 0) fail(ErrorKind::kArgument, "cohort is empty");
    if (events.size() != n || groups.size() != n || risks.size() != n) {
      fail(ErrorKind::kArgument, "cohort columns differ in length");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(risks[i])) fail(ErrorKind::kArgument, "risk score is not finite");
      if (!(times[i] > 0.0) || !std::isfinite(times[i])) {
        fail(ErrorKind::kArgument, "cohort times must be positive and finite");
      }
      if (groups[i] >= group_count) fail(ErrorKind::kArgument, "group id out of range");
    }
    if (survival_probs) {
      if (survival_probs->size() != n) fail(ErrorKind::kArgument, "survival_probs length mismatch");
      for (double p : *survival_probs) {
        if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::kArgument, "survival probability outside [0, 1]");
      }
    }
  }

  // Members of group g as a sub-cohort (same group ids, same group_count).
  ScoredCohort restrict_to_group(std::size_t g) const {
    ScoredCohort out;
    out.group_count = group_count;
    out.horizon = horizon;
    if (survival_probs) out.survival_probs.emplace();
    for (std::size_t i = 0; i < size(); ++i) {
      if (groups[i] != g) continue;
      out.times.push_back(times[i]);
      out.events.push_back(events[i]);
      out.groups.push_back(g);
      out.risks.push_back(risks[i]);
      if (survival_probs) out.survival_probs->push_back((*survival_probs)[i]);
    }
    return out;
  }
};

inline ScoredCohort make_cohort(const Dataset& data, std::vector<double> risks,
                                std::optional<std::vector<double>> survival_probs = std::nullopt,
                                std::optional<double> horizon = std::nullopt) {
  ScoredCohort c;
  c.group_count = data.groups().size();
  for (const auto& x : data.individuals()) {
    c.times.push_back(x.time);
    c.events.push_back(x.event);
    c.groups.push_back(x.group);
  }
  c.risks = std::move(risks);
  c.survival_probs = std::move(survival_probs);
  c.horizon = horizon;
  c.validate();
  return c;
}

// Median observed event time; the default evaluation horizon.
inline double median_event_time(const std::vector<double>& times, const std::vector<bool>& events) {
  std::vector<double> t;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (events[i]) t.push_back(times[i]);
  }
  if (t.empty()) fail(ErrorKind::kUndefined, "no observed events, horizon undefined");
  std::sort(t.begin(), t.end());
  const std::size_t m = t.size() / 2;
  return t.size() % 2 == 1 ? t[m] : 0.5 * (t[m - 1] + t[m]);
}

inline double default_horizon(const ScoredCohort& c) { return median_event_time(c.times, c.events); }

// ---------------------------------------------------------------------------
// Pair semantics shared by concordance imparity, the c-index and the tensor.

// The member with the shorter time must have an observed event; tied times
// are permissible only when both are events.
inline bool is_permissible(const ScoredCohort& c, std::size_t i, std::size_t j) {
  if (c.times[i] < c.times[j]) return c.events[i];
  if (c.times[j] < c.times[i]) return c.events[j];
  return c.events[i] && c.events[j];
}

// Concordance of a permissible pair in half units: 2 when the earlier member
// has the strictly higher risk, 1 for a risk tie or a time tie, 0 otherwise.
inline unsigned concordance_halves(const ScoredCohort& c, std::size_t i, std::size_t j) {
  if (c.times[i] == c.times[j]) return 1;
  const std::size_t early = c.times[i] < c.times[j] ? i : j;
  const std::size_t late = early == i ? j : i;
  if (c.risks[early] > c.risks[late]) return 2;
  if (c.risks[early] == c.risks[late]) return 1;
  return 0;
}

// Visits every permissible pair (i, j) anchored at group g, in (i, j) index
// order.
template <class Fn>
void for_each_permissible_pair(const ScoredCohort& c, std::size_t group, Fn&& fn) {
  if (group >= c.group_count) {
    fail(ErrorKind::kArgument, "unknown group id " + std::to_string(group));
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.groups[i] != group) continue;
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j != i && is_permissible(c, i, j)) fn(i, j);
    }
  }
}

inline std::size_t count_permissible_pairs(const ScoredCohort& c, std::size_t group) {
  std::size_t count = 0;
  for_each_permissible_pair(c, group, [&](std::size_t, std::size_t) { ++count; });
  return count;
}

inline std::vector<std::pair<std::size_t, std::size_t>> permissible_pairs(const ScoredCohort& c,
                                                                          std::size_t group) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for_each_permissible_pair(c, group, [&](std::size_t i, std::size_t j) { out.emplace_back(i, j); });
  return out;
}

struct PairTally {
  std::size_t permissible = 0;
  std::size_t concordant_halves = 0;  // twice the concordant count

  double fraction() const {
    return static_cast<double>(concordant_halves) / (2.0 * static_cast<double>(permissible));
  }
};

// Anchored pair tallies for every group in one O(n^2) pass.
inline std::vector<PairTally> tally_by_group(const ScoredCohort& c) {
  c.validate();
  std::vector<PairTally> tally(c.group_count);
  for (std::size_t i = 0; i < c.size(); ++i) {
    PairTally& t = tally[c.groups[i]];
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j == i || !is_permissible(c, i, j)) continue;
      ++t.permissible;
      t.concordant_halves += concordance_halves(c, i, j);
    }
  }
  return tally;
}

inline double concordance_fraction(const ScoredCohort& c, std::size_t group) {
  if (group >= c.group_count) fail(ErrorKind::kArgument, "unknown group id " + std::to_string(group));
  const PairTally t = tally_by_group(c)[group];
  if (t.permissible == 0) {
    fail(ErrorKind::kUndefined, "group " + std::to_string(group) +
                                    " has no permissible pairs; concordance fraction undefined");
  }
  return t.fraction();
}

struct ConcordanceSummary {
  std::vector<double> per_group;   // F(g)
  std::vector<PairTally> tallies;
  double ci = 0.0;                 // max_{g != g'} |F(g) - F(g')|
  double ci_percent = 0.0;
};

inline ConcordanceSummary concordance_summary(const ScoredCohort& c) {
  ConcordanceSummary s;
  s.tallies = tally_by_group(c);
  for (std::size_t g = 0; g < c.group_count; ++g) {
    if (s.tallies[g].permissible == 0) {
      fail(ErrorKind::kUndefined, "group " + std::to_string(g) +
                                      " has no permissible pairs; concordance imparity undefined");
    }
    s.per_group.push_back(s.tallies[g].fraction());
  }
  for (std::size_t g = 0; g < s.per_group.size(); ++g) {
    for (std::size_t h = g + 1; h < s.per_group.size(); ++h) {
      s.ci = std::max(s.ci, std::fabs(s.per_group[g] - s.per_group[h]));
    }
  }
  s.ci_percent = 100.0 * s.ci;
  return s;
}

inline double concordance_imparity(const ScoredCohort& c) { return concordance_summary(c).ci; }

// ---------------------------------------------------------------------------
// Fair calibration

struct CalibrationBin {
  std::size_t size = 0;               // n_ig
  double observed_events = 0.0;       // O_ig = n_ig (1 - K_ig(t))
  double mean_event_prob = 0.0;       // p_ig, mean predicted 1 - S(t | x)
  double mean_survival_prob = 0.0;    // mean predicted S(t | x)
  double km_survival = 1.0;           // K_ig(t)
  bool skipped = false;               // p_ig in {0, 1}: zero variance
};

struct GroupCalibration {
  std::size_t group = 0;
  double statistic = 0.0;             // L_g
  double p_value = 1.0;
  std::size_t skipped_bins = 0;
  std::vector<CalibrationBin> bins;
};

enum class CalibrationVerdict { kFairCalibrated, kNotFairCalibrated };

inline const char* to_string(CalibrationVerdict v) {
  return v == CalibrationVerdict::kFairCalibrated ? "fair_calibrated" : "not_fair_calibrated";
}

struct CalibrationReport {
  std::vector<GroupCalibration> per_group;
  CalibrationVerdict verdict = CalibrationVerdict::kFairCalibrated;
  double horizon = 0.0;
  std::size_t bin_count = 10;
  double alpha = 0.05;
};

// Hosmer-Lemeshow statistic over prepared bins. Bins with a degenerate mean
// probability are flagged and contribute nothing.
inline double hosmer_lemeshow_statistic(std::vector<CalibrationBin>& bins) {
  double stat = 0.0;
  std::size_t used = 0;
  for (auto& b : bins) {
    const double p = b.mean_event_prob;
    b.skipped = b.size == 0 || p <= 0.0 || p >= 1.0;
    if (b.skipped) continue;
    const double n = static_cast<double>(b.size);
    const double diff = b.observed_events - n * p;
    stat += diff * diff / (n * p * (1.0 - p));
    ++used;
  }
  if (used == 0) fail(ErrorKind::kDegenerate, "all calibration bins are degenerate; statistic undefined");
  return stat;
}

// p-value of a Hosmer-Lemeshow statistic with `bin_count` bins (df = bins - 1).
inline double calibration_p_value(double statistic, std::size_t bin_count) {
  if (bin_count < 2) fail(ErrorKind::kArgument, "calibration needs at least 2 bins");
  return chi_square_sf(statistic, bin_count - 1);
}

// Splits `count` sorted members into `bins` contiguous runs whose sizes differ
// by at most one; the first count % bins runs get the extra member.
inline std::vector<std::size_t> bin_sizes(std::size_t count, std::size_t bins) {
  std::vector<std::size_t> sizes(bins, count / bins);
  for (std::size_t b = 0; b < count % bins; ++b) ++sizes[b];
  return sizes;
}

inline GroupCalibration calibrate_group(const ScoredCohort& c, std::size_t group, double horizon,
                                        std::size_t bin_count) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.groups[i] == group) members.push_back(i);
  }
  if (members.size() < 2 * bin_count) {
    fail(ErrorKind::kSize, "group " + std::to_string(group) + " has " + std::to_string(members.size()) +
                               " members; fair calibration needs at least " +
                               std::to_string(2 * bin_count));
  }
  const auto& probs = *c.survival_probs;
  std::stable_sort(members.begin(), members.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

  GroupCalibration out;
  out.group = group;
  std::size_t start = 0;
  for (std::size_t size : bin_sizes(members.size(), bin_count)) {
    std::vector<double> t;
    std::vector<bool> e;
    CalibrationBin bin;
    bin.size = size;
    double surv_sum = 0.0;
    for (std::size_t k = start; k < start + size; ++k) {
      const std::size_t i = members[k];
      t.push_back(c.times[i]);
      e.push_back(c.events[i]);
      surv_sum += probs[i];
    }
    bin.mean_survival_prob = surv_sum / static_cast<double>(size);
    bin.mean_event_prob = 1.0 - bin.mean_survival_prob;
    bin.km_survival = kaplan_meier(t, e).value_at(horizon);
    bin.observed_events = static_cast<double>(size) * (1.0 - bin.km_survival);
    out.bins.push_back(bin);
    start += size;
  }
  out.statistic = hosmer_lemeshow_statistic(out.bins);
  out.skipped_bins = static_cast<std::size_t>(
      std::count_if(out.bins.begin(), out.bins.end(), [](const CalibrationBin& b) { return b.skipped; }));
  out.p_value = calibration_p_value(out.statistic, bin_count);
  return out;
}

// Fair calibrated iff every group's p-value is >= alpha (0.05). Degrees of
// freedom stay at bins - 1 even when degenerate bins are skipped.
inline CalibrationReport fair_calibration(const ScoredCohort& c, double horizon,
                                          std::size_t bin_count = 10) {
  c.validate();
  if (!c.survival_probs) fail(ErrorKind::kArgument, "fair calibration needs predicted survival probabilities");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorKind::kArgument, "horizon must be > 0");
  if (bin_count < 2) fail(ErrorKind::kArgument, "calibration needs at least 2 bins");
  CalibrationReport report;
  report.horizon = horizon;
  report.bin_count = bin_count;
  for (std::size_t g = 0; g < c.group_count; ++g) {
    report.per_group.push_back(calibrate_group(c, g, horizon, bin_count));
    if (report.per_group.back().p_value < report.alpha) {
      report.verdict = CalibrationVerdict::kNotFairCalibrated;
    }
  }
  return report;
}

}  // namespace surf
