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

// Train a fair forest and a plain one on synthetic data, then audit both on
// a held-out fold.

#include <iostream>
#include <vector>

#include "surf/surf.hpp"

int main() {
  surf::SynthConfig sc;
  sc.n = 1500;
  sc.seed = 3;
  const surf::Dataset data = surf::generate_synthetic(sc);
  const auto folds = surf::split_k_fold(data, 5, 3);
  const surf::Fold& fold = folds.front();

  for (bool fair : {false, true}) {
    surf::SurfConfig cfg;
    cfg.n_trees = 50;
    cfg.seed = 3;
    cfg.fairness_enabled = fair;
    const surf::SurfForest forest = surf::train(fold.train, cfg);

    std::vector<double> times;
    std::vector<bool> events;
    for (const auto& row : fold.test.individuals()) {
      times.push_back(row.time);
      events.push_back(row.event);
    }
    const double horizon = surf::median_event_time(times, events);
    const surf::ScoredCohort cohort = surf::score_dataset(forest, fold.test, horizon);
    const auto report = surf::audit(cohort, data.groups().labels, horizon);
    const surf::Json j = surf::to_json(report);

    std::cout << (fair ? "fairness on:  " : "fairness off: ") << "CI = " << j["fairness"]["ci"]
              << ", C-index = " << j["evaluation"]["overall"]["c_index"] << '\n';
  }
  return 0;
}
