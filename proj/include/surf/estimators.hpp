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

// Nonparametric survival estimators (Kaplan-Meier, Nelson-Aalen), survival /
// cumulative-hazard conversion, the two-sample log-rank statistic and the
// chi-square upper tail.
//
// Tie convention throughout: at a shared timestamp events precede censorings,
// so an individual censored at t is still at risk for events at t.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <ranges>
#include <vector>

#include "surf/error.hpp"

namespace surf {

enum class CurveKind { kSurvival, kCumulativeHazard };

// Right-continuous step function over distinct event times. Censoring times
// shape the risk sets but never add steps.
struct SurvivalCurve {
  CurveKind kind = CurveKind::kSurvival;
  std::vector<double> times;          // strictly increasing
  std::vector<double> values;         // S(t_j) or H(t_j)
  std::vector<std::size_t> at_risk;   // n_j
  std::vector<std::size_t> events;    // d_j

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }

  // Value before the first step: S = 1, H = 0.
  double initial_value() const { return kind == CurveKind::kSurvival ? 1.0 : 0.0; }

  double value_at(double t) const {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return initial_value();
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
  }

  // Left limit, value just before t.
  double value_before(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return initial_value();
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
  }

  double final_value() const { return values.empty() ? initial_value() : values.back(); }
};

template <class R>
concept TimeRange = std::ranges::random_access_range<R> && std::ranges::sized_range<R>;

namespace detail {

struct RiskTable {
  std::vector<double> times;
  std::vector<std::size_t> at_risk;
  std::vector<std::size_t> events;
};

template <TimeRange Times, TimeRange Events>
RiskTable risk_table(const Times& times, const Events& events) {
  const std::size_t n = std::ranges::size(times);
  if (n == 0) fail(ErrorKind::kArgument, "survival estimator needs at least one observation");
  if (std::ranges::size(events) != n) {
    fail(ErrorKind::kArgument, "times and events differ in length");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::ranges::begin(times)[a] < std::ranges::begin(times)[b];
  });
  RiskTable table;
  std::size_t removed = 0;
  for (std::size_t k = 0; k < n;) {
    const double t = std::ranges::begin(times)[order[k]];
    if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorKind::kArgument, "times must be positive and finite");
    std::size_t d = 0;
    std::size_t m = k;
    for (; m < n && std::ranges::begin(times)[order[m]] == t; ++m) {
      if (std::ranges::begin(events)[order[m]]) ++d;
    }
    if (d > 0) {
      table.times.push_back(t);
      table.at_risk.push_back(n - removed);
      table.events.push_back(d);
    }
    removed += m - k;
    k = m;
  }
  return table;
}

}  // namespace detail

template <TimeRange Times, TimeRange Events>
SurvivalCurve kaplan_meier(const Times& times, const Events& events) {
  auto table = detail::risk_table(times, events);
  SurvivalCurve curve{CurveKind::kSurvival, std::move(table.times), {}, std::move(table.at_risk),
                      std::move(table.events)};
  double s = 1.0;
  curve.values.reserve(curve.times.size());
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    s *= 1.0 - static_cast<double>(curve.events[j]) / static_cast<double>(curve.at_risk[j]);
    curve.values.push_back(s);
  }
  return curve;
}

template <TimeRange Times, TimeRange Events>
SurvivalCurve nelson_aalen(const Times& times, const Events& events) {
  auto table = detail::risk_table(times, events);
  SurvivalCurve curve{CurveKind::kCumulativeHazard, std::move(table.times), {},
                      std::move(table.at_risk), std::move(table.events)};
  double h = 0.0;
  curve.values.reserve(curve.times.size());
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    h += static_cast<double>(curve.events[j]) / static_cast<double>(curve.at_risk[j]);
    curve.values.push_back(h);
  }
  return curve;
}

// S = exp(-H) for a hazard curve, H = -ln S for a survival curve.
inline SurvivalCurve curve_convert(const SurvivalCurve& curve) {
  SurvivalCurve out = curve;
  if (curve.kind == CurveKind::kCumulativeHazard) {
    out.kind = CurveKind::kSurvival;
    for (double& v : out.values) v = std::exp(-v);
  } else {
    out.kind = CurveKind::kCumulativeHazard;
    for (std::size_t j = 0; j < out.values.size(); ++j) {
      if (!(curve.values[j] > 0.0)) {
        fail(ErrorKind::kDomain, "cannot convert survival 0 at t=" + std::to_string(curve.times[j]) +
                                     " to a finite cumulative hazard");
      }
      out.values[j] = -std::log(curve.values[j]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Log-rank

struct LogRankResult {
  std::optional<double> z;             // absent when the variance is zero
  std::array<double, 2> observed{};    // O for sample a, b
  std::array<double, 2> expected{};    // E for sample a, b
  double variance = 0.0;               // V, shared by both samples

  bool defined() const { return z.has_value(); }
};

namespace detail {

// Running sums over pooled distinct event times. The numerator is accumulated
// as (d_a n_b - d_b n_a) / n, which equals O_a - E_a per time and flips sign
// exactly when a and b are swapped.
struct LogRankAccumulator {
  double numerator = 0.0;
  double variance = 0.0;
  double observed_a = 0.0;
  double observed_b = 0.0;
  double expected_a = 0.0;
  double expected_b = 0.0;

  void add(double d_a, double d_b, double n_a, double n_b) {
    const double d = d_a + d_b;
    const double n = n_a + n_b;
    if (d <= 0.0) return;
    numerator += (d_a * n_b - d_b * n_a) / n;
    observed_a += d_a;
    observed_b += d_b;
    expected_a += d * n_a / n;
    expected_b += d * n_b / n;
    if (n > 1.0) variance += d * (n_a * n_b) * (n - d) / (n * n * (n - 1.0));
  }

  std::optional<double> z() const {
    if (!(variance > 0.0)) return std::nullopt;
    return numerator / std::sqrt(variance);
  }

  LogRankResult result() const {
    return {z(), {observed_a, observed_b}, {expected_a, expected_b}, variance};
  }
};

}  // namespace detail

// Two-sample log-rank. Positive z means sample a has more events than expected
// under a common hazard.
template <TimeRange TimesA, TimeRange EventsA, TimeRange TimesB, TimeRange EventsB>
LogRankResult log_rank(const TimesA& times_a, const EventsA& events_a, const TimesB& times_b,
                       const EventsB& events_b) {
  const std::size_t na = std::ranges::size(times_a);
  const std::size_t nb = std::ranges::size(times_b);
  if (na == 0 || nb == 0) fail(ErrorKind::kArgument, "log-rank needs two non-empty samples");
  if (std::ranges::size(events_a) != na || std::ranges::size(events_b) != nb) {
    fail(ErrorKind::kArgument, "times and events differ in length");
  }
  struct Obs {
    double time;
    bool event;
    bool in_a;
  };
  std::vector<Obs> pooled;
  pooled.reserve(na + nb);
  for (std::size_t i = 0; i < na; ++i) {
    pooled.push_back({std::ranges::begin(times_a)[i], static_cast<bool>(std::ranges::begin(events_a)[i]), true});
  }
  for (std::size_t i = 0; i < nb; ++i) {
    pooled.push_back({std::ranges::begin(times_b)[i], static_cast<bool>(std::ranges::begin(events_b)[i]), false});
  }
  std::sort(pooled.begin(), pooled.end(), [](const Obs& x, const Obs& y) { return x.time < y.time; });

  detail::LogRankAccumulator acc;
  double at_risk_a = static_cast<double>(na);
  double at_risk_b = static_cast<double>(nb);
  bool any_event = false;
  for (std::size_t k = 0; k < pooled.size();) {
    double d_a = 0, d_b = 0, r_a = 0, r_b = 0;
    std::size_t m = k;
    for (; m < pooled.size() && pooled[m].time == pooled[k].time; ++m) {
      (pooled[m].in_a ? r_a : r_b) += 1.0;
      if (pooled[m].event) (pooled[m].in_a ? d_a : d_b) += 1.0;
    }
    if (d_a + d_b > 0.0) any_event = true;
    acc.add(d_a, d_b, at_risk_a, at_risk_b);
    at_risk_a -= r_a;
    at_risk_b -= r_b;
    k = m;
  }
  if (!any_event) fail(ErrorKind::kArgument, "log-rank needs at least one event");
  return acc.result();
}

// ---------------------------------------------------------------------------
// Chi-square upper tail

namespace detail {

// ln Gamma(df / 2) for integer df, computed from the factorial recurrences so
// no global state (signgam) is touched.
inline double log_gamma_half_integer(std::size_t df) {
  double s = 0.0;
  if (df % 2 == 0) {
    for (std::size_t i = 2; i < df / 2; ++i) s += std::log(static_cast<double>(i));
  } else {
    s = 0.5 * std::log(3.14159265358979323846);
    for (std::size_t i = 0; i < df / 2; ++i) s += std::log(static_cast<double>(i) + 0.5);
  }
  return s;
}

// Regularized lower incomplete gamma P(a, x) by its power series, x < a + 1.
inline double gamma_p_series(double a, double x, double log_gamma_a) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
}

// Regularized upper incomplete gamma Q(a, x) by continued fraction (modified
// Lentz), x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x, double log_gamma_a) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-17) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma_a) * h;
}

}  // namespace detail

// P(X > x) for X ~ chi-square with df degrees of freedom.
inline double chi_square_sf(double x, std::size_t df) {
  if (df == 0) fail(ErrorKind::kArgument, "chi-square needs df >= 1");
  if (!(x >= 0.0)) fail(ErrorKind::kArgument, "chi-square statistic must be >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double a = 0.5 * static_cast<double>(df);
  const double y = 0.5 * x;
  const double lg = detail::log_gamma_half_integer(df);
  const double q = y < a + 1.0 ? 1.0 - detail::gamma_p_series(a, y, lg)
                               : detail::gamma_q_continued_fraction(a, y, lg);
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace surf
