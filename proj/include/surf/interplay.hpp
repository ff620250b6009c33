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

// Fairness-with-uncertainty confusion tensor for a binary sensitive attribute,
// and the concordance imparity it implies under two extreme resolutions of
// censorship:
//   floor   - every censored individual has the event at its censoring time;
//   ceiling - every censored individual's event time is pushed past the
//             largest observed time.
// These are specific resolutions, not bounds over all possible resolutions.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "surf/error.hpp"
#include "surf/fairness.hpp"

namespace surf {

// Column/row letters follow the tensor layout: for an anchored pair (i, j)
// with i in the plane's group,
//   a: anchor later,  anchor risk higher      b: anchor later,  anchor risk lower
//   c: anchor earlier, anchor risk higher     d: anchor earlier, anchor risk lower
// M cells hold pairs whose earlier member had the event, N cells the rest.
enum Cell : std::size_t { kA = 0, kB = 1, kC = 2, kD = 3 };

struct TensorPlane {
  std::array<std::size_t, 4> permissible{};    // M^a..M^d
  std::array<std::size_t, 4> impermissible{};  // N^a..N^d
  // Subset of each N cell whose later member is also censored. Needed only by
  // the order-preserving ceiling resolution.
  std::array<std::size_t, 4> impermissible_later_censored{};

  std::size_t P() const { return permissible[kA] + permissible[kB] + permissible[kC] + permissible[kD]; }
  std::size_t I() const {
    return impermissible[kA] + impermissible[kB] + impermissible[kC] + impermissible[kD];
  }
  std::size_t C() const { return permissible[kB] + permissible[kC]; }

  // Pairs that become concordant when censored members have the event now.
  std::size_t floor_gain() const { return impermissible[kB] + impermissible[kC]; }

  // Pairs that become concordant when censored members move past every
  // observed time, with censored members' relative order reversed.
  std::size_t ceiling_gain() const { return impermissible[kA] + impermissible[kD]; }

  // Same, keeping censored members' relative order.
  std::size_t ceiling_gain_order_preserving() const {
    const auto& lc = impermissible_later_censored;
    return (impermissible[kA] - lc[kA]) + (impermissible[kD] - lc[kD]) + lc[kB] + lc[kC];
  }
};

struct ConfusionTensor {
  std::array<TensorPlane, 2> planes{};
  std::size_t excluded_time_ties = 0;  // anchored pairs with equal times
  std::size_t excluded_risk_ties = 0;  // anchored pairs with distinct times, equal risks
};

inline ConfusionTensor build_tensor(const ScoredCohort& c) {
  c.validate();
  if (c.group_count != 2) {
    fail(ErrorKind::kUnsupported, "confusion tensor is defined for a binary sensitive attribute, got " +
                                      std::to_string(c.group_count) + " groups");
  }
  ConfusionTensor tensor;
  for (std::size_t i = 0; i < c.size(); ++i) {
    TensorPlane& plane = tensor.planes[c.groups[i]];
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j == i) continue;
      if (c.times[i] == c.times[j]) {
        ++tensor.excluded_time_ties;
        continue;
      }
      if (c.risks[i] == c.risks[j]) {
        ++tensor.excluded_risk_ties;
        continue;
      }
      const bool anchor_later = c.times[i] > c.times[j];
      const bool anchor_higher = c.risks[i] > c.risks[j];
      const Cell cell = anchor_later ? (anchor_higher ? kA : kB) : (anchor_higher ? kC : kD);
      const bool earlier_event = anchor_later ? c.events[j] : c.events[i];
      if (earlier_event) {
        ++plane.permissible[cell];
      } else {
        ++plane.impermissible[cell];
        const bool later_event = anchor_later ? c.events[i] : c.events[j];
        if (!later_event) ++plane.impermissible_later_censored[cell];
      }
    }
  }
  return tensor;
}

namespace detail {

inline double ratio(std::size_t num, std::size_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

inline void require_resolvable(const ConfusionTensor& t) {
  for (std::size_t g = 0; g < 2; ++g) {
    if (t.planes[g].P() + t.planes[g].I() == 0) {
      fail(ErrorKind::kUndefined, "group " + std::to_string(g) +
                                      " has no strictly ordered pairs; floor/ceiling undefined");
    }
  }
}

}  // namespace detail

// |C_0/P_0 - C_1/P_1|
inline double ci_from_tensor(const ConfusionTensor& t) {
  for (std::size_t g = 0; g < 2; ++g) {
    if (t.planes[g].P() == 0) {
      fail(ErrorKind::kUndefined, "group " + std::to_string(g) + " has no permissible pairs in the tensor");
    }
  }
  return std::fabs(detail::ratio(t.planes[0].C(), t.planes[0].P()) -
                   detail::ratio(t.planes[1].C(), t.planes[1].P()));
}

inline double floor_ci(const ConfusionTensor& t) {
  detail::require_resolvable(t);
  const auto& p0 = t.planes[0];
  const auto& p1 = t.planes[1];
  return std::fabs(detail::ratio(p0.C() + p0.floor_gain(), p0.P() + p0.I()) -
                   detail::ratio(p1.C() + p1.floor_gain(), p1.P() + p1.I()));
}

enum class CeilingOrder {
  kReversed,   // gains N^a + N^d
  kPreserved,  // needs the later-censored split of each N cell
};

inline double ceiling_ci(const ConfusionTensor& t, CeilingOrder order = CeilingOrder::kReversed) {
  detail::require_resolvable(t);
  auto gain = [order](const TensorPlane& p) {
    return order == CeilingOrder::kReversed ? p.ceiling_gain() : p.ceiling_gain_order_preserving();
  };
  const auto& p0 = t.planes[0];
  const auto& p1 = t.planes[1];
  return std::fabs(detail::ratio(p0.C() + gain(p0), p0.P() + p0.I()) -
                   detail::ratio(p1.C() + gain(p1), p1.P() + p1.I()));
}

struct SubScenario {
  bool proportional = false;          // 1: C_g/P_g = I_g^con/I_g for both groups
  bool extreme_split = false;         // 2: C_0/P_0 = 0 and C_1/P_1 = 1
  bool uniform_direction = false;     // 3: C_0/P_0 = 0 and C_1/P_1 = 0
  bool general = false;               // none of the above
  bool distributional_interval_supported = false;  // 4: not implemented
};

inline SubScenario classify_subscenario(const ConfusionTensor& t) {
  detail::require_resolvable(t);
  constexpr double kTol = 1e-9;
  const auto& p0 = t.planes[0];
  const auto& p1 = t.planes[1];
  SubScenario s;
  if (p0.P() > 0 && p1.P() > 0) {
    const double r0 = detail::ratio(p0.C(), p0.P());
    const double r1 = detail::ratio(p1.C(), p1.P());
    if (p0.I() > 0 && p1.I() > 0) {
      s.proportional = std::fabs(r0 - detail::ratio(p0.floor_gain(), p0.I())) <= kTol &&
                       std::fabs(r1 - detail::ratio(p1.floor_gain(), p1.I())) <= kTol;
    }
    s.extreme_split = p0.C() == 0 && p1.C() == p1.P();
    s.uniform_direction = p0.C() == 0 && p1.C() == 0;
  }
  s.general = !s.proportional && !s.extreme_split && !s.uniform_direction;
  return s;
}

struct BoundsReport {
  double ci = 0.0;
  double ci_floor = 0.0;
  double ci_ceiling = 0.0;
  double ci_ceiling_order_preserving = 0.0;
  std::array<std::size_t, 2> floor_gain{};    // I_g^con
  std::array<std::size_t, 2> ceiling_gain{};  // N_g^con
  SubScenario sub_scenario;
  std::size_t excluded_pairs = 0;
};

inline BoundsReport bounds_report(const ConfusionTensor& t) {
  BoundsReport r;
  r.ci = ci_from_tensor(t);
  r.ci_floor = floor_ci(t);
  r.ci_ceiling = ceiling_ci(t, CeilingOrder::kReversed);
  r.ci_ceiling_order_preserving = ceiling_ci(t, CeilingOrder::kPreserved);
  for (std::size_t g = 0; g < 2; ++g) {
    r.floor_gain[g] = t.planes[g].floor_gain();
    r.ceiling_gain[g] = t.planes[g].ceiling_gain();
  }
  r.sub_scenario = classify_subscenario(t);
  r.excluded_pairs = t.excluded_time_ties + t.excluded_risk_ties;
  return r;
}

}  // namespace surf
