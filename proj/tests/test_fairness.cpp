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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "surf/fairness.hpp"

namespace {

using surf::ErrorKind;
using surf::ScoredCohort;

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const surf::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected surf::Error";
  return ErrorKind::kArgument;
}

// (g0,t=1,e) (g0,t=3,e) (g1,t=2,e) (g1,t=4,censored)
ScoredCohort four(std::vector<double> risks) {
  ScoredCohort c;
  c.times = {1, 3, 2, 4};
  c.events = {true, true, true, false};
  c.groups = {0, 0, 1, 1};
  c.risks = std::move(risks);
  return c;
}

// Independent enumeration: returns (concordant, permissible) for anchors in g.
// Written from the definitions, sharing no code with the library.
std::pair<double, double> enumerate(const ScoredCohort& c, std::size_t g) {
  double conc = 0, perm = 0;
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    if (c.groups[i] != g) continue;
    for (std::size_t j = 0; j < c.times.size(); ++j) {
      if (i == j) continue;
      if (c.times[i] == c.times[j]) {
        if (c.events[i] && c.events[j]) perm += 1, conc += 0.5;
        continue;
      }
      const std::size_t a = c.times[i] < c.times[j] ? i : j;  // earlier
      const std::size_t b = a == i ? j : i;
      if (!c.events[a]) continue;
      perm += 1;
      if (c.risks[a] > c.risks[b]) conc += 1;
      if (c.risks[a] == c.risks[b]) conc += 0.5;
    }
  }
  return {conc, perm};
}

ScoredCohort random_cohort(std::mt19937_64& gen, std::size_t n, bool ties) {
  std::uniform_int_distribution<int> tie_t(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScoredCohort c;
  for (std::size_t i = 0; i < n; ++i) {
    c.times.push_back(ties ? tie_t(gen) : 0.1 + u(gen));
    c.events.push_back(u(gen) < 0.65);
    c.groups.push_back(i % 2);
    c.risks.push_back(ties ? std::floor(u(gen) * 4.0) : u(gen));
  }
  return c;
}

TEST(PermissiblePairs, FourIndividualCohort) {
  const ScoredCohort c = four({0.9, 0.2, 0.5, 0.1});
  EXPECT_EQ(surf::count_permissible_pairs(c, 0), 6u);
  const auto pairs = surf::permissible_pairs(c, 0);
  const std::vector<std::pair<std::size_t, std::size_t>> expected = {{0, 1}, {0, 2}, {0, 3},
                                                                     {1, 0}, {1, 2}, {1, 3}};
  EXPECT_EQ(pairs, expected);
}

TEST(PermissiblePairs, AllCensoredHasNone) {
  ScoredCohort c = four({1, 2, 3, 4});
  c.events = {false, false, false, false};
  EXPECT_EQ(surf::count_permissible_pairs(c, 0), 0u);
  EXPECT_EQ(surf::count_permissible_pairs(c, 1), 0u);
}

TEST(PermissiblePairs, CensoredAnchorWithEarlierEvent) {
  ScoredCohort c;
  c.times = {5, 2};
  c.events = {false, true};
  c.groups = {0, 1};
  c.risks = {0.1, 0.2};
  EXPECT_EQ(surf::count_permissible_pairs(c, 0), 1u);
}

TEST(PermissiblePairs, NoCensoringGivesAllOrderedPairsMinusTimeTies) {
  std::mt19937_64 gen(2);
  for (int rep = 0; rep < 50; ++rep) {
    ScoredCohort c = random_cohort(gen, 9, true);
    std::fill(c.events.begin(), c.events.end(), true);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j)
        if (i != j) ++expected;
    // Time ties between two events stay permissible, so nothing is excluded.
    EXPECT_EQ(surf::count_permissible_pairs(c, 0) + surf::count_permissible_pairs(c, 1), expected);
  }
}

TEST(PermissiblePairs, UnknownGroupIsArgumentError) {
  const ScoredCohort c = four({1, 2, 3, 4});
  EXPECT_EQ(kind_of([&] { surf::count_permissible_pairs(c, 2); }), ErrorKind::kArgument);
  EXPECT_EQ(kind_of([&] { surf::concordance_fraction(c, 7); }), ErrorKind::kArgument);
}

TEST(Concordance, AllConcordantCohort) {
  const ScoredCohort c = four({0.9, 0.2, 0.5, 0.1});
  EXPECT_EQ(surf::concordance_fraction(c, 0), 1.0);
  EXPECT_EQ(surf::concordance_fraction(c, 1), 1.0);
  EXPECT_EQ(surf::concordance_imparity(c), 0.0);
}

TEST(Concordance, WorkedCohortAgainstEnumeration) {
  const ScoredCohort c = four({0.9, 0.95, 0.5, 0.1});
  const auto [c0, p0] = enumerate(c, 0);
  const auto [c1, p1] = enumerate(c, 1);
  EXPECT_EQ(c0, 3.0);
  EXPECT_EQ(p0, 6.0);
  EXPECT_EQ(c1, 5.0);
  EXPECT_EQ(p1, 6.0);
  EXPECT_NEAR(surf::concordance_fraction(c, 0), 0.5, 1e-12);
  EXPECT_NEAR(surf::concordance_fraction(c, 1), 5.0 / 6.0, 1e-12);
  const auto s = surf::concordance_summary(c);
  EXPECT_NEAR(s.ci, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.ci_percent, 100.0 / 3.0, 1e-10);
  EXPECT_EQ(s.tallies[0].concordant_halves, 6u);
  EXPECT_EQ(s.tallies[1].concordant_halves, 10u);
}

TEST(Concordance, EqualRisksGiveOneHalf) {
  const ScoredCohort c = four({0.3, 0.3, 0.3, 0.3});
  EXPECT_EQ(surf::concordance_fraction(c, 0), 0.5);
  EXPECT_EQ(surf::concordance_fraction(c, 1), 0.5);
}

TEST(Concordance, TimeTiedEventsScoreOneHalf) {
  ScoredCohort c;
  c.times = {2, 2, 5};
  c.events = {true, true, false};
  c.groups = {0, 1, 1};
  c.risks = {0.9, 0.1, 0.0};
  // Anchor 0: (0,1) tie -> 0.5, (0,2) concordant -> 1. F(0) = 1.5 / 2.
  EXPECT_EQ(surf::concordance_fraction(c, 0), 0.75);
}

TEST(Concordance, MatchesEnumerationOnRandomCohorts) {
  std::mt19937_64 gen(19);
  for (int rep = 0; rep < 300; ++rep) {
    const ScoredCohort c = random_cohort(gen, 3 + rep % 14, rep % 2 == 0);
    const auto tallies = surf::tally_by_group(c);
    for (std::size_t g = 0; g < 2; ++g) {
      const auto [conc, perm] = enumerate(c, g);
      EXPECT_EQ(static_cast<double>(tallies[g].permissible), perm);
      EXPECT_EQ(static_cast<double>(tallies[g].concordant_halves), 2.0 * conc);
    }
  }
}

TEST(Concordance, BoundsHold) {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 200; ++rep) {
    const ScoredCohort c = random_cohort(gen, 12, rep % 3 == 0);
    const auto t = surf::tally_by_group(c);
    if (t[0].permissible == 0 || t[1].permissible == 0) continue;
    const auto s = surf::concordance_summary(c);
    for (double f : s.per_group) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
    EXPECT_GE(s.ci, 0.0);
    EXPECT_LE(s.ci, 1.0);
  }
}

TEST(Concordance, MonotoneRiskTransformInvariance) {
  std::mt19937_64 gen(29);
  for (int rep = 0; rep < 200; ++rep) {
    const ScoredCohort c = random_cohort(gen, 10, rep % 2 == 0);
    const auto t = surf::tally_by_group(c);
    if (t[0].permissible == 0 || t[1].permissible == 0) continue;
    ScoredCohort d = c;
    for (double& r : d.risks) r = std::exp(3.0 * r) - 7.0;
    const auto a = surf::concordance_summary(c);
    const auto b = surf::concordance_summary(d);
    EXPECT_EQ(a.per_group, b.per_group);
    EXPECT_EQ(a.ci, b.ci);
  }
}

TEST(Concordance, GroupRelabelInvariance) {
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 200; ++rep) {
    ScoredCohort c = random_cohort(gen, 11, rep % 2 == 0);
    c.group_count = 3;
    for (std::size_t i = 0; i < c.size(); ++i) c.groups[i] = i % 3;
    const auto t = surf::tally_by_group(c);
    if (t[0].permissible == 0 || t[1].permissible == 0 || t[2].permissible == 0) continue;
    ScoredCohort d = c;
    const std::size_t perm[3] = {2, 0, 1};
    for (auto& g : d.groups) g = perm[g];
    EXPECT_EQ(surf::concordance_imparity(c), surf::concordance_imparity(d));
  }
}

TEST(Concordance, SymmetricCohortHasZeroImparity) {
  // Group 1 mirrors group 0 exactly.
  ScoredCohort c;
  c.times = {1, 4, 2, 6, 1, 4, 2, 6};
  c.events = {true, false, true, true, true, false, true, true};
  c.groups = {0, 0, 0, 0, 1, 1, 1, 1};
  c.risks = {0.8, 0.1, 0.3, 0.4, 0.8, 0.1, 0.3, 0.4};
  EXPECT_EQ(surf::concordance_imparity(c), 0.0);
}

TEST(Concordance, GroupWithoutPermissiblePairsIsUndefined) {
  // Group 0 has no members.
  ScoredCohort c;
  c.times = {1, 2, 3};
  c.events = {true, false, false};
  c.groups = {1, 1, 1};
  c.risks = {0.5, 0.4, 0.3};
  EXPECT_EQ(kind_of([&] { surf::concordance_imparity(c); }), ErrorKind::kUndefined);
  EXPECT_EQ(kind_of([&] { surf::concordance_fraction(c, 0); }), ErrorKind::kUndefined);

  ScoredCohort censored = four({1, 2, 3, 4});
  censored.events = {false, false, false, false};
  EXPECT_EQ(kind_of([&] { surf::concordance_imparity(censored); }), ErrorKind::kUndefined);
}

// ---------------------------------------------------------------------------
// Fair calibration

// Group g: bins of 20 members, bin b has predicted survival 1 - k_b/20 and
// exactly k_b members with an event before the horizon, the rest event-free
// until after it. No censoring before the horizon.
void add_calibrated_group(ScoredCohort& c, std::size_t g, bool reversed) {
  for (int b = 0; b < 10; ++b) {
    const int k = 2 * b + 1;
    const double s = 1.0 - k / 20.0;
    for (int m = 0; m < 20; ++m) {
      c.times.push_back(m < k ? 1.0 + 0.01 * m : 10.0 + m);
      c.events.push_back(m < k || m % 2 == 0);
      c.groups.push_back(g);
      c.risks.push_back(1.0 - s);
      c.survival_probs->push_back(reversed ? 1.0 - s : s);
    }
  }
}

TEST(FairCalibration, PerfectlyCalibratedCohort) {
  ScoredCohort c;
  c.survival_probs.emplace();
  add_calibrated_group(c, 0, false);
  add_calibrated_group(c, 1, false);
  const auto r = surf::fair_calibration(c, 5.0);
  ASSERT_EQ(r.per_group.size(), 2u);
  for (const auto& g : r.per_group) {
    EXPECT_NEAR(g.statistic, 0.0, 1e-20);
    EXPECT_NEAR(g.p_value, 1.0, 1e-12);
    EXPECT_EQ(g.bins.size(), 10u);
    for (const auto& b : g.bins) {
      EXPECT_EQ(b.size, 20u);
      EXPECT_NEAR(b.observed_events, 20.0 * b.mean_event_prob, 1e-12);
    }
  }
  EXPECT_EQ(r.verdict, surf::CalibrationVerdict::kFairCalibrated);
  EXPECT_EQ(r.horizon, 5.0);
}

TEST(FairCalibration, AntiCalibratedGroupFails) {
  ScoredCohort c;
  c.survival_probs.emplace();
  add_calibrated_group(c, 0, false);
  add_calibrated_group(c, 1, true);
  const auto r = surf::fair_calibration(c, 5.0);
  EXPECT_GT(r.per_group[0].p_value, 0.99);
  // Oracle: after reversal, the bin predicting event probability k/20 holds
  // the members whose observed event fraction is (20 - k)/20.
  double oracle = 0.0;
  for (int b = 0; b < 10; ++b) {
    const double p = (2 * b + 1) / 20.0;
    const double o = 20.0 * (1.0 - p);
    oracle += (o - 20.0 * p) * (o - 20.0 * p) / (20.0 * p * (1.0 - p));
  }
  EXPECT_NEAR(r.per_group[1].statistic, oracle, 1e-9);
  EXPECT_LT(r.per_group[1].p_value, 0.05);
  EXPECT_EQ(r.verdict, surf::CalibrationVerdict::kNotFairCalibrated);
}

TEST(FairCalibration, BoundaryPValue) {
  // One informative bin: n = 100, p = 0.5, O chosen so that L = 16.919.
  std::vector<surf::CalibrationBin> bins(10);
  for (auto& b : bins) {
    b.size = 10;
    b.mean_event_prob = 0.0;  // degenerate, skipped
  }
  bins[3].size = 100;
  bins[3].mean_event_prob = 0.5;
  bins[3].observed_events = 50.0 + std::sqrt(16.919 * 25.0);
  const double l = surf::hosmer_lemeshow_statistic(bins);
  EXPECT_NEAR(l, 16.919, 1e-9);
  EXPECT_EQ(std::count_if(bins.begin(), bins.end(), [](const auto& b) { return b.skipped; }), 9);
  const double p = surf::calibration_p_value(l, 10);
  EXPECT_NEAR(p, 0.0500, 1e-3);
  // 16.919 sits a hair above the 95% quantile of chi-square(9), 16.91898.
  EXPECT_GT(surf::calibration_p_value(16.9189, 10), 0.05);
  EXPECT_LT(surf::calibration_p_value(16.9191, 10), 0.05);
}

TEST(FairCalibration, BinsDifferByAtMostOne) {
  for (std::size_t n : {20u, 21u, 29u, 37u, 100u}) {
    const auto sizes = surf::bin_sizes(n, 10);
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    EXPECT_LE(*hi - *lo, 1u);
    std::size_t total = 0;
    for (auto s : sizes) total += s;
    EXPECT_EQ(total, n);
  }
}

TEST(FairCalibration, VerdictInvariantToWithinBinOrder) {
  ScoredCohort c;
  c.survival_probs.emplace();
  add_calibrated_group(c, 0, false);
  add_calibrated_group(c, 1, true);
  const auto a = surf::fair_calibration(c, 5.0);
  // Reverse the row order: members with equal predictions keep their bins.
  ScoredCohort d;
  d.survival_probs.emplace();
  for (std::size_t i = c.size(); i-- > 0;) {
    d.times.push_back(c.times[i]);
    d.events.push_back(c.events[i]);
    d.groups.push_back(c.groups[i]);
    d.risks.push_back(c.risks[i]);
    d.survival_probs->push_back((*c.survival_probs)[i]);
  }
  const auto b = surf::fair_calibration(d, 5.0);
  EXPECT_EQ(a.verdict, b.verdict);
  for (std::size_t g = 0; g < 2; ++g) EXPECT_NEAR(a.per_group[g].statistic, b.per_group[g].statistic, 1e-9);
}

TEST(FairCalibration, Errors) {
  ScoredCohort c;
  c.survival_probs.emplace();
  add_calibrated_group(c, 0, false);
  add_calibrated_group(c, 1, false);
  EXPECT_EQ(kind_of([&] { surf::fair_calibration(c, 5.0, 101); }), ErrorKind::kSize);
  EXPECT_EQ(kind_of([&] { surf::fair_calibration(c, 0.0); }), ErrorKind::kArgument);
  ScoredCohort no_probs = c;
  no_probs.survival_probs.reset();
  EXPECT_EQ(kind_of([&] { surf::fair_calibration(no_probs, 5.0); }), ErrorKind::kArgument);

  // Every prediction 0 or 1: all bins degenerate.
  ScoredCohort flat = c;
  for (auto& p : *flat.survival_probs) p = 1.0;
  EXPECT_EQ(kind_of([&] { surf::fair_calibration(flat, 5.0); }), ErrorKind::kDegenerate);
}

TEST(Cohort, ValidationRejectsBadColumns) {
  ScoredCohort c = four({1, 2, 3, 4});
  c.risks.pop_back();
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kArgument);
  ScoredCohort nan = four({1, 2, std::nan(""), 4});
  EXPECT_EQ(kind_of([&] { surf::concordance_imparity(nan); }), ErrorKind::kArgument);
}

}  // namespace
