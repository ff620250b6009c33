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

#include <cmath>
#include <random>
#include <vector>

#include "surf/estimators.hpp"

namespace {

using surf::CurveKind;
using surf::ErrorKind;

const std::vector<double> kToyTimes = {1, 2, 3, 4, 5, 6};
const std::vector<bool> kToyEvents = {true, false, true, true, false, true};

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

// Composite Simpson on [0, x] of the chi-square density, subtracted from 1.
// Substituting u = sqrt(t) removes the t^(-1/2) singularity for odd df.
double chi_square_sf_by_integration(double x, int df) {
  const double k = df / 2.0;
  const double norm = std::exp(-std::lgamma(k) - k * std::log(2.0));
  auto integrand = [&](double u) {
    if (u == 0.0) return df == 1 ? 2.0 * norm : 0.0;
    const double t = u * u;
    return 2.0 * u * norm * std::pow(t, k - 1.0) * std::exp(-t / 2.0);
  };
  const int n = 200000;
  const double b = std::sqrt(x);
  const double h = b / n;
  double s = integrand(0.0) + integrand(b);
  for (int i = 1; i < n; ++i) s += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return 1.0 - s * h / 3.0;
}

TEST(KaplanMeier, ToySampleMatchesProductLimit) {
  const auto km = surf::kaplan_meier(kToyTimes, kToyEvents);
  ASSERT_EQ(km.times, (std::vector<double>{1, 3, 4, 6}));
  // Hand product limit: (5/6), (5/6)(3/4), (5/6)(3/4)(2/3), then 0.
  const std::vector<double> expected = {5.0 / 6, 5.0 / 6 * 3 / 4, 5.0 / 6 * 3 / 4 * 2 / 3, 0.0};
  for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(km.values[j], expected[j], 1e-12);
  EXPECT_NEAR(km.values[0], 0.8333, 1e-4);
  EXPECT_NEAR(km.values[1], 0.6250, 1e-4);
  EXPECT_NEAR(km.values[2], 0.4167, 1e-4);
  EXPECT_EQ(km.at_risk, (std::vector<std::size_t>{6, 4, 3, 1}));
}

TEST(KaplanMeier, AllCensoredHasNoSteps) {
  const auto km = surf::kaplan_meier(std::vector<double>{1, 2, 3}, std::vector<bool>{false, false, false});
  EXPECT_TRUE(km.empty());
  EXPECT_EQ(km.value_at(100.0), 1.0);
}

TEST(KaplanMeier, SingleEventDropsToZero) {
  const auto km = surf::kaplan_meier(std::vector<double>{5}, std::vector<bool>{true});
  EXPECT_EQ(km.value_at(5.0), 0.0);
  EXPECT_EQ(km.value_at(4.9), 1.0);
}

TEST(KaplanMeier, CensoredAtEventTimeStaysInRiskSet) {
  // Two at risk at t = 2: the event and the censoring share the timestamp.
  const auto km = surf::kaplan_meier(std::vector<double>{2, 2}, std::vector<bool>{true, false});
  ASSERT_EQ(km.size(), 1u);
  EXPECT_EQ(km.at_risk[0], 2u);
  EXPECT_EQ(km.values[0], 0.5);
}

TEST(KaplanMeier, RejectsEmptyAndInvalidInput) {
  EXPECT_EQ(kind_of([] { surf::kaplan_meier(std::vector<double>{}, std::vector<bool>{}); }),
            ErrorKind::kArgument);
  EXPECT_EQ(kind_of([] { surf::kaplan_meier(std::vector<double>{1, 2}, std::vector<bool>{true}); }),
            ErrorKind::kArgument);
  EXPECT_EQ(kind_of([] { surf::kaplan_meier(std::vector<double>{0.0}, std::vector<bool>{true}); }),
            ErrorKind::kArgument);
}

TEST(NelsonAalen, ToySampleMatchesHandSum) {
  const auto na = surf::nelson_aalen(kToyTimes, kToyEvents);
  ASSERT_EQ(na.kind, CurveKind::kCumulativeHazard);
  const std::vector<double> expected = {1.0 / 6, 1.0 / 6 + 1.0 / 4, 1.0 / 6 + 1.0 / 4 + 1.0 / 3,
                                         1.0 / 6 + 1.0 / 4 + 1.0 / 3 + 1.0};
  for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(na.values[j], expected[j], 1e-12);
  EXPECT_NEAR(na.values[3], 1.75, 1e-4);
}

TEST(NelsonAalen, FirstIncrementIsOneOverAtRisk) {
  const auto na =
      surf::nelson_aalen(std::vector<double>{1, 2, 3, 4}, std::vector<bool>{true, false, false, false});
  EXPECT_EQ(na.values[0], 0.25);
}

TEST(NelsonAalen, AllCensoredIsZero) {
  const auto na = surf::nelson_aalen(std::vector<double>{1, 2}, std::vector<bool>{false, false});
  EXPECT_EQ(na.value_at(10.0), 0.0);
}

TEST(NelsonAalen, StepIncrementsAreEventsOverAtRisk) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> t(1, 20);
  std::bernoulli_distribution e(0.6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> times(30);
    std::vector<bool> events(30);
    for (std::size_t i = 0; i < times.size(); ++i) {
      times[i] = t(gen);
      events[i] = e(gen);
    }
    const auto na = surf::nelson_aalen(times, events);
    double prev = 0.0;
    for (std::size_t j = 0; j < na.size(); ++j) {
      EXPECT_NEAR(na.values[j] - prev,
                  static_cast<double>(na.events[j]) / static_cast<double>(na.at_risk[j]), 1e-12);
      prev = na.values[j];
    }
  }
}

TEST(Estimators, HazardBoundDominatesProductLimit) {
  std::mt19937_64 gen(11);
  std::exponential_distribution<double> t(0.3);
  std::bernoulli_distribution e(0.7);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rep % 40;
    std::vector<double> times(n);
    std::vector<bool> events(n);
    for (std::size_t i = 0; i < n; ++i) {
      times[i] = 0.01 + std::round(t(gen) * 4.0) / 4.0;
      events[i] = e(gen);
    }
    const auto km = surf::kaplan_meier(times, events);
    const auto na = surf::nelson_aalen(times, events);
    ASSERT_EQ(km.times, na.times);
    for (std::size_t j = 0; j < km.size(); ++j) EXPECT_GE(std::exp(-na.values[j]) + 1e-15, km.values[j]);
  }
}

TEST(CurveConvert, HazardToSurvival) {
  surf::SurvivalCurve h{CurveKind::kCumulativeHazard, {1, 3}, {1.0 / 6, 1.0 / 6 + 1.0 / 4}, {6, 4}, {1, 1}};
  const auto s = surf::curve_convert(h);
  EXPECT_EQ(s.kind, CurveKind::kSurvival);
  EXPECT_NEAR(s.values[0], 0.8465, 1e-4);
  EXPECT_NEAR(s.values[1], 0.6592, 1e-4);
  EXPECT_NEAR(s.values[1], std::exp(-(1.0 / 6 + 1.0 / 4)), 1e-15);

  surf::SurvivalCurve zero{CurveKind::kCumulativeHazard, {1}, {0.0}, {1}, {0}};
  EXPECT_EQ(surf::curve_convert(zero).values[0], 1.0);
}

TEST(CurveConvert, RoundTripAndZeroSurvivalDomainError) {
  const auto km = surf::kaplan_meier(std::vector<double>{1, 2, 3}, std::vector<bool>{true, true, false});
  const auto back = surf::curve_convert(surf::curve_convert(km));
  for (std::size_t j = 0; j < km.size(); ++j) EXPECT_NEAR(back.values[j], km.values[j], 1e-15);

  const auto dead = surf::kaplan_meier(kToyTimes, kToyEvents);
  EXPECT_EQ(kind_of([&] { surf::curve_convert(dead); }), ErrorKind::kDomain);
}

TEST(LogRank, ToyTabulation) {
  // Hand table over event times 1..4:
  //   t=1: n_a=2 n_b=2 d=1 (a)  E_a=1/2  V=1/4
  //   t=2: n_a=1 n_b=2 d=1 (a)  E_a=1/3  V=2/9
  //   t=3: n_a=0 n_b=2 d=1 (b)  E_a=0    V=0
  //   t=4: n_a=0 n_b=1 d=1 (b)  E_a=0    V=0 (n=1 guard)
  const auto r = surf::log_rank(std::vector<double>{1, 2}, std::vector<bool>{true, true},
                                std::vector<double>{3, 4}, std::vector<bool>{true, true});
  const double e_a = 0.5 + 1.0 / 3.0;
  const double v = 0.25 + 2.0 / 9.0;
  ASSERT_TRUE(r.z.has_value());
  EXPECT_NEAR(*r.z, (2.0 - e_a) / std::sqrt(v), 1e-12);
  EXPECT_NEAR(*r.z, 1.6977, 1e-3);
  EXPECT_EQ(r.observed[0], 2.0);
  EXPECT_NEAR(r.expected[0], 0.8333, 1e-4);
  EXPECT_NEAR(r.variance, 0.4722, 1e-4);
}

TEST(LogRank, IdenticalSamplesGiveZero) {
  const std::vector<double> t = {1, 2, 3, 5, 8};
  const std::vector<bool> e = {true, false, true, true, false};
  const auto r = surf::log_rank(t, e, t, e);
  ASSERT_TRUE(r.z.has_value());
  EXPECT_EQ(*r.z, 0.0);
}

TEST(LogRank, SwappingSamplesNegatesExactly) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> t(1, 15);
  std::bernoulli_distribution e(0.6);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> ta(8), tb(11);
    std::vector<bool> ea(8), eb(11);
    for (std::size_t i = 0; i < ta.size(); ++i) ta[i] = t(gen), ea[i] = e(gen);
    for (std::size_t i = 0; i < tb.size(); ++i) tb[i] = t(gen), eb[i] = e(gen);
    ea[0] = true;
    const auto ab = surf::log_rank(ta, ea, tb, eb);
    const auto ba = surf::log_rank(tb, eb, ta, ea);
    ASSERT_EQ(ab.z.has_value(), ba.z.has_value());
    if (ab.z) EXPECT_EQ(*ab.z, -*ba.z);
  }
}

TEST(LogRank, TimeRescalingLeavesStatisticsUnchanged) {
  const std::vector<double> ta = {1.5, 2, 4, 7}, tb = {1, 3, 3, 6, 9};
  const std::vector<bool> ea = {true, false, true, true}, eb = {true, true, false, true, false};
  std::vector<double> sa, sb;
  for (double x : ta) sa.push_back(x * 3.25);
  for (double x : tb) sb.push_back(x * 3.25);
  EXPECT_EQ(*surf::log_rank(ta, ea, tb, eb).z, *surf::log_rank(sa, ea, sb, eb).z);
  EXPECT_EQ(surf::kaplan_meier(ta, ea).values, surf::kaplan_meier(sa, ea).values);
  EXPECT_EQ(surf::nelson_aalen(tb, eb).values, surf::nelson_aalen(sb, eb).values);
}

TEST(LogRank, ZeroVarianceIsUndefinedNotNaN) {
  // Every event happens with a single member at risk: V = 0.
  const auto r = surf::log_rank(std::vector<double>{5}, std::vector<bool>{true}, std::vector<double>{1},
                                std::vector<bool>{false});
  EXPECT_FALSE(r.z.has_value());
  EXPECT_EQ(r.variance, 0.0);
}

TEST(LogRank, PreconditionErrors) {
  EXPECT_EQ(kind_of([] {
              surf::log_rank(std::vector<double>{1}, std::vector<bool>{false}, std::vector<double>{2},
                             std::vector<bool>{false});
            }),
            ErrorKind::kArgument);
  EXPECT_EQ(kind_of([] {
              surf::log_rank(std::vector<double>{}, std::vector<bool>{}, std::vector<double>{2},
                             std::vector<bool>{true});
            }),
            ErrorKind::kArgument);
}

TEST(ChiSquare, ZeroHasFullMass) {
  for (std::size_t df = 1; df < 30; ++df) EXPECT_EQ(surf::chi_square_sf(0.0, df), 1.0);
}

TEST(ChiSquare, TwoDegreesIsExponential) {
  for (double x : {0.01, 0.5, 1.0, 2.5, 3.0, 7.7, 20.0, 60.0}) {
    EXPECT_NEAR(surf::chi_square_sf(x, 2), std::exp(-x / 2.0), 1e-12) << x;
  }
}

TEST(ChiSquare, OneDegreeMatchesNormalTail) {
  EXPECT_NEAR(surf::chi_square_sf(3.8415, 1), 0.05, 1e-3);
  for (double x : {0.1, 1.0, 3.8415, 9.0, 25.0}) {
    EXPECT_NEAR(surf::chi_square_sf(x, 1), std::erfc(std::sqrt(x / 2.0)), 1e-10) << x;
  }
}

TEST(ChiSquare, NineDegreesAgainstNumericIntegration) {
  const double oracle = chi_square_sf_by_integration(16.919, 9);
  EXPECT_NEAR(surf::chi_square_sf(16.919, 9), oracle, 1e-9);
  EXPECT_NEAR(surf::chi_square_sf(16.919, 9), 0.0500, 1e-3);
  for (int df : {3, 4, 9, 15}) {
    for (double x : {0.5, 2.0, df + 0.7, 3.0 * df}) {
      EXPECT_NEAR(surf::chi_square_sf(x, static_cast<std::size_t>(df)), chi_square_sf_by_integration(x, df),
                  1e-9)
          << "df=" << df << " x=" << x;
    }
  }
}

TEST(ChiSquare, NonIncreasingInX) {
  for (std::size_t df : {1u, 2u, 5u, 9u, 40u}) {
    double prev = 1.0;
    for (double x = 0.0; x < 120.0; x += 0.37) {
      const double p = surf::chi_square_sf(x, df);
      EXPECT_LE(p, prev);
      EXPECT_GE(p, 0.0);
      prev = p;
    }
  }
}

TEST(ChiSquare, RejectsZeroDegreesAndNegativeStatistic) {
  EXPECT_EQ(kind_of([] { surf::chi_square_sf(1.0, 0); }), ErrorKind::kArgument);
  EXPECT_EQ(kind_of([] { surf::chi_square_sf(-1.0, 3); }), ErrorKind::kArgument);
}

}  // namespace
