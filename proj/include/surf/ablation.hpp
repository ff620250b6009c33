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

// Fairness on/off ablation: k-fold cross-validation repeated over several
// seeds, once with the fairness term in the split criterion and once without.
// Run r uses seed base_seed + r for both the folds and the forest, so the two
// configurations see identical splits of the data.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surf/data.hpp"
#include "surf/error.hpp"
#include "surf/evaluation.hpp"
#include "surf/fairness.hpp"
#include "surf/forest.hpp"

namespace surf {

struct AblationConfig {
  SurfConfig forest;                 // fairness_enabled is overridden per arm
  std::size_t folds = 5;
  std::size_t seeds = 10;
  std::optional<double> horizon;     // default: median event time of each test fold
  std::size_t workers = 1;

  void validate(std::size_t n) const {
    if (folds < 2) fail(ErrorKind::kArgument, "ablation needs k >= 2 folds");
    if (folds > n) fail(ErrorKind::kArgument, "more folds than rows");
    if (seeds < 1) fail(ErrorKind::kArgument, "ablation needs at least one seed");
  }
};

// Held-out metrics of one fold. Undefined metrics stay empty.
struct FoldOutcome {
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  std::optional<double> ci;
  MetricSet overall;
  std::map<std::size_t, MetricSet> per_group;
};

struct MetricMedians {
  std::optional<double> c_index;
  std::optional<double> brier;
  std::optional<double> td_auc;
};

struct AblationArm {
  bool fairness_enabled = true;
  std::vector<FoldOutcome> folds;
  std::optional<double> median_ci;
  MetricMedians overall;
  std::map<std::size_t, MetricMedians> per_group;
  double runtime_seconds = 0.0;      // training and scoring, all folds
};

struct AblationResult {
  AblationArm without_fairness;      // SURF-
  AblationArm with_fairness;
  std::size_t folds = 0;
  std::size_t seeds = 0;
};

// Median of the defined values; empty when none are.
inline std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

namespace detail {

inline MetricMedians medians(const std::vector<const MetricSet*>& sets) {
  std::vector<double> c, b, a;
  for (const MetricSet* s : sets) {
    if (s->c_index.ok()) c.push_back(*s->c_index.value);
    if (s->brier.ok()) b.push_back(*s->brier.value);
    if (s->td_auc.ok()) a.push_back(*s->td_auc.value);
  }
  return {median_of(c), median_of(b), median_of(a)};
}

inline void summarize(AblationArm& arm) {
  std::vector<double> ci;
  std::vector<const MetricSet*> overall;
  std::map<std::size_t, std::vector<const MetricSet*>> groups;
  for (const FoldOutcome& f : arm.folds) {
    if (f.ci) ci.push_back(*f.ci);
    overall.push_back(&f.overall);
    for (const auto& [g, m] : f.per_group) groups[g].push_back(&m);
  }
  arm.median_ci = median_of(ci);
  arm.overall = medians(overall);
  for (const auto& [g, sets] : groups) arm.per_group[g] = medians(sets);
}

inline FoldOutcome run_fold(const Fold& fold, const SurfConfig& forest_config, std::uint64_t seed,
                            std::size_t index, std::optional<double> horizon, std::size_t workers) {
  const SurfForest forest = train(fold.train, forest_config, workers);
  std::vector<double> times;
  std::vector<bool> events;
  for (const auto& x : fold.test.individuals()) {
    times.push_back(x.time);
    events.push_back(x.event);
  }
  FoldOutcome out;
  out.seed = seed;
  out.fold = index;
  const double t = horizon ? *horizon : median_event_time(times, events);
  const ScoredCohort cohort = score_dataset(forest, fold.test, t);
  const Metric ci = guarded([&] { return concordance_imparity(cohort); });
  out.ci = ci.value;
  const EvalReport eval = evaluate_cohort(cohort, t);
  out.overall = eval.overall;
  out.per_group = eval.per_group;
  return out;
}

}  // namespace detail

inline AblationResult run_ablation(const Dataset& data, const AblationConfig& config) {
  config.validate(data.size());
  config.forest.validate(data.feature_count());
  AblationResult result;
  result.folds = config.folds;
  result.seeds = config.seeds;
  result.without_fairness.fairness_enabled = false;
  result.with_fairness.fairness_enabled = true;
  for (std::size_t r = 0; r < config.seeds; ++r) {
    const std::uint64_t seed = config.forest.seed + r;
    const std::vector<Fold> folds = split_k_fold(data, config.folds, seed);
    for (AblationArm* arm : {&result.without_fairness, &result.with_fairness}) {
      SurfConfig fc = config.forest;
      fc.seed = seed;
      fc.fairness_enabled = arm->fairness_enabled;
      const auto start = std::chrono::steady_clock::now();
      for (std::size_t k = 0; k < folds.size(); ++k) {
        arm->folds.push_back(detail::run_fold(folds[k], fc, seed, k, config.horizon, config.workers));
      }
      arm->runtime_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  }
  detail::summarize(result.without_fairness);
  detail::summarize(result.with_fairness);
  return result;
}

}  // namespace surf
