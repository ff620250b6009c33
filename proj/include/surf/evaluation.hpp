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

// Survival evaluation metrics: Harrell's c-index, single-horizon Brier score
// and cumulative/dynamic time-dependent AUC. Brier and AUC weight observations
// by the inverse Kaplan-Meier probability of remaining uncensored (IPCW).

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surf/error.hpp"
#include "surf/estimators.hpp"
#include "surf/fairness.hpp"
#include "surf/forest.hpp"

namespace surf {

// Group-blind concordance over unordered permissible pairs; risk ties and
// time ties count one half.
inline double c_index(const ScoredCohort& c) {
  c.validate();
  std::size_t pairs = 0;
  std::size_t halves = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      if (!is_permissible(c, i, j)) continue;
      ++pairs;
      halves += concordance_halves(c, i, j);
    }
  }
  if (pairs == 0) fail(ErrorKind::kUndefined, "no permissible pairs; c-index undefined");
  return static_cast<double>(halves) / (2.0 * static_cast<double>(pairs));
}

// Kaplan-Meier estimate of the censoring survival G(t), events flipped.
inline SurvivalCurve censoring_survival(const ScoredCohort& c) {
  std::vector<bool> censored(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) censored[i] = !c.events[i];
  return kaplan_meier(c.times, censored);
}

namespace detail {

inline double inverse_weight(double g, const char* what) {
  if (!(g > 0.0)) {
    fail(ErrorKind::kDegenerate, std::string("censoring survival is 0 at ") + what +
                                     "; IPCW weight undefined");
  }
  return 1.0 / g;
}

}  // namespace detail

// Events at or before t score (0 - S)^2 / G(T_i-), individuals still under
// observation after t score (1 - S)^2 / G(t), and those censored at or before
// t carry no weight. Without censoring this is the plain mean squared error.
inline double brier_score(const ScoredCohort& c, double horizon) {
  c.validate();
  if (!c.survival_probs) fail(ErrorKind::kArgument, "Brier score needs predicted survival probabilities");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorKind::kArgument, "horizon must be > 0");
  const SurvivalCurve g = censoring_survival(c);
  const auto& s = *c.survival_probs;
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.times[i] <= horizon && c.events[i]) {
      sum += s[i] * s[i] * detail::inverse_weight(g.value_before(c.times[i]), "an event time");
    } else if (c.times[i] > horizon) {
      sum += (1.0 - s[i]) * (1.0 - s[i]) * detail::inverse_weight(g.value_at(horizon), "the horizon");
    }
  }
  return sum / static_cast<double>(c.size());
}

// Probability that a case (event at or before t) has a higher risk than a
// control (time after t), cases weighted by 1 / G(T_i-). Control weights are
// the constant 1 / G(t) and cancel.
inline double time_dependent_auc(const ScoredCohort& c, double horizon) {
  c.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail(ErrorKind::kArgument, "horizon must be > 0");
  std::vector<std::size_t> cases, controls;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.times[i] <= horizon && c.events[i]) cases.push_back(i);
    if (c.times[i] > horizon) controls.push_back(i);
  }
  if (cases.empty() || controls.empty()) {
    fail(ErrorKind::kUndefined, "time-dependent AUC needs at least one case and one control at the horizon");
  }
  const SurvivalCurve g = censoring_survival(c);
  double numerator = 0.0;
  double weight_sum = 0.0;
  for (std::size_t i : cases) {
    const double w = detail::inverse_weight(g.value_before(c.times[i]), "a case time");
    double wins = 0.0;
    for (std::size_t j : controls) {
      if (c.risks[i] > c.risks[j]) {
        wins += 1.0;
      } else if (c.risks[i] == c.risks[j]) {
        wins += 0.5;
      }
    }
    numerator += w * wins;
    weight_sum += w;
  }
  return numerator / (weight_sum * static_cast<double>(controls.size()));
}

// ---------------------------------------------------------------------------
// Model evaluation

// A metric that may be undefined on a particular cohort; the reason is kept.
struct Metric {
  std::optional<double> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

template <class Fn>
Metric guarded(Fn&& fn) {
  try {
    return {fn(), {}};
  } catch (const Error& e) {
    return {std::nullopt, std::string(to_string(e.kind())) + ": " + e.what()};
  }
}

struct MetricSet {
  Metric c_index;
  Metric brier;
  Metric td_auc;
};

struct EvalReport {
  MetricSet overall;
  std::map<std::size_t, MetricSet> per_group;  // groups present in the cohort
  double horizon = 0.0;
};

inline MetricSet metric_set(const ScoredCohort& c, double horizon) {
  MetricSet m;
  m.c_index = guarded([&] { return c_index(c); });
  if (c.survival_probs) {
    m.brier = guarded([&] { return brier_score(c, horizon); });
  } else {
    m.brier.error = "argument: no predicted survival probabilities";
  }
  m.td_auc = guarded([&] { return time_dependent_auc(c, horizon); });
  return m;
}

inline EvalReport evaluate_cohort(const ScoredCohort& c, std::optional<double> horizon = std::nullopt) {
  c.validate();
  EvalReport r;
  r.horizon = horizon ? *horizon : default_horizon(c);
  r.overall = metric_set(c, r.horizon);
  for (std::size_t g = 0; g < c.group_count; ++g) {
    const ScoredCohort sub = c.restrict_to_group(g);
    if (sub.size() == 0) continue;
    r.per_group[g] = metric_set(sub, r.horizon);
  }
  return r;
}

// Risks and survival probabilities at `horizon` for every row of `data`.
inline ScoredCohort score_dataset(const SurfForest& forest, const Dataset& data, double horizon) {
  std::vector<double> risks, probs;
  risks.reserve(data.size());
  probs.reserve(data.size());
  for (const auto& x : data.individuals()) {
    risks.push_back(predict_risk(forest, x.features));
    probs.push_back(predict_survival_at(forest, x.features, horizon));
  }
  return make_cohort(data, std::move(risks), std::move(probs), horizon);
}

inline EvalReport evaluate(const SurfForest& forest, const Dataset& test,
                           std::optional<double> horizon = std::nullopt) {
  std::vector<double> times;
  std::vector<bool> events;
  for (const auto& x : test.individuals()) {
    times.push_back(x.time);
    events.push_back(x.event);
  }
  const double t = horizon ? *horizon : median_event_time(times, events);
  return evaluate_cohort(score_dataset(forest, test, t), t);
}

}  // namespace surf
