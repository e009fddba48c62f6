// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "privshare/error.hpp"
#include "privshare/instance.hpp"
#include "privshare/privacy_function.hpp"
#include "privshare/solution.hpp"

namespace privshare {

/// Region {gamma : lower <= z . gamma <= upper} of the alpha-beta plane in
/// which category `index` discloses in the interior of [0, 1].
struct Slab {
  std::size_t index = 0;
  double a = 0.0;  // z = (a, w)
  double w = 0.0;
  double lower = 0.0;  // f_i'(0)
  double upper = 0.0;  // f_i'(1)

  double dot(DualPoint g) const { return a * g.alpha + w * g.beta; }
};

inline std::vector<Slab> slabs(Kind kind, const Instance& instance) {
  std::vector<Slab> out;
  out.reserve(instance.size());
  for (std::size_t i = 0; i < instance.size(); ++i) {
    const auto c = component(kind, instance, i);
    out.push_back({i, c.difference(), instance.w[i], c.deriv(0.0),
                   c.deriv(1.0)});
  }
  return out;
}

namespace detail {

inline std::optional<DualPoint> solve2(double a1, double b1, double c1,
                                       double a2, double b2, double c2) {
  const double det = a1 * b2 - a2 * b1;
  if (det == 0.0) return std::nullopt;
  return DualPoint{(c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det};
}

inline double level(const Slab& s, int at) { return at ? s.upper : s.lower; }

}  // namespace detail

/// Common point O of all lower hyperplanes, when the lower bounds are
/// proportional to the differences (a_i f_j'(0) = a_j f_i'(0) for all pairs).
inline std::optional<DualPoint> origin(Kind kind, const Instance& instance) {
  const auto s = slabs(kind, instance);
  double scale = 0.0;
  for (const auto& x : s) scale = std::max(scale, std::abs(x.a) + std::abs(x.lower));
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (std::abs(s[i].a * s[j].lower - s[j].a * s[i].lower) >
          1e-12 * scale * scale) {
        return std::nullopt;
      }
    }
  }
  // Any independent pair pins O; take the best conditioned one.
  std::size_t bi = 0, bj = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double det = std::abs(s[i].a * s[j].w - s[j].a * s[i].w);
      if (det > best) {
        best = det;
        bi = i;
        bj = j;
      }
    }
  }
  return detail::solve2(s[bi].a, s[bi].w, s[bi].lower, s[bj].a, s[bj].w,
                        s[bj].lower);
}

/// Intersection of hyperplane i at level f_i'(at_i) with hyperplane j at
/// level f_j'(at_j); levels are 0 (lower) or 1 (upper).
inline DualPoint vertex(Kind kind, const Instance& instance, std::size_t i,
                        std::size_t j, int at_i, int at_j) {
  if (i == j || i >= instance.size() || j >= instance.size()) {
    throw Error(ErrorCode::kInvalidArgument, "vertex needs two distinct slabs");
  }
  const auto s = slabs(kind, instance);
  const auto g = detail::solve2(s[i].a, s[i].w, detail::level(s[i], at_i),
                                s[j].a, s[j].w, detail::level(s[j], at_j));
  if (!g) {
    throw Error(ErrorCode::kParallel, "slabs " + std::to_string(i + 1) +
                                          " and " + std::to_string(j + 1) +
                                          " are parallel");
  }
  return *g;
}

/// Permutation sorting categories by strictly decreasing a_i / w_i (that is,
/// decreasing 1/m_i). order[r] is the original index at rank r.
inline std::vector<std::size_t> inverse_slope_order(const Instance& instance) {
  const auto a = difference(instance);
  std::vector<std::size_t> order(a.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x] / instance.w[x] > a[y] / instance.w[y];
  });
  for (std::size_t r = 0; r + 1 < order.size(); ++r) {
    const double u = a[order[r]] / instance.w[order[r]];
    const double v = a[order[r + 1]] / instance.w[order[r + 1]];
    if (!(u > v)) {
      throw Error(ErrorCode::kTiedSlopes,
                  "categories " + std::to_string(order[r] + 1) + " and " +
                      std::to_string(order[r + 1] + 1) + " share a slope");
    }
  }
  return order;
}

struct ConicalCheck {
  std::size_t rank = 0;       // 1-based position i = 3..n in sorted order
  double residual = 0.0;      // normalized residual of the b_i system
  double residual_prime = 0.0;  // same for the b'_i system
  bool ok = false;
};

struct ConicalReport {
  bool conical = false;
  std::vector<std::size_t> order;
  std::vector<ConicalCheck> checks;
};

inline constexpr double kConicalTolerance = 1e-9;

/// Tests whether each 3x2 system with rows z_i, z_{i-1}, z_1 (sorted order)
/// is consistent, once with right-hand side (f_i'(0), f_{i-1}'(1), f_1'(1))
/// and once with (f_i'(1), f_{i-1}'(1), f_1'(0)), for i = 3..n.
inline ConicalReport is_conical_regular(Kind kind, const Instance& instance) {
  ConicalReport rep;
  rep.order = inverse_slope_order(instance);
  const auto all = slabs(kind, instance);
  std::vector<Slab> s;
  for (std::size_t r : rep.order) s.push_back(all[r]);

  auto consistent = [&](const Slab& row, double rhs, const Slab& r2,
                        double rhs2, const Slab& r3, double rhs3) {
    const auto g = detail::solve2(r2.a, r2.w, rhs2, r3.a, r3.w, rhs3);
    if (!g) return std::numeric_limits<double>::infinity();
    const double scale = std::hypot(row.a, row.w) * std::hypot(g->alpha, g->beta) +
                         std::abs(rhs) + 1e-300;
    return std::abs(row.dot(*g) - rhs) / scale;
  };

  rep.conical = s.size() >= 3;
  for (std::size_t i = 2; i < s.size(); ++i) {
    ConicalCheck c;
    c.rank = i + 1;
    c.residual = consistent(s[i], s[i].lower, s[i - 1], s[i - 1].upper, s[0],
                            s[0].upper);
    c.residual_prime = consistent(s[i], s[i].upper, s[i - 1], s[i - 1].upper,
                                  s[0], s[0].lower);
    c.ok = c.residual <= kConicalTolerance &&
           c.residual_prime <= kConicalTolerance;
    rep.conical = rep.conical && c.ok;
    rep.checks.push_back(c);
  }
  return rep;
}

/// Per-component form of the strategy at gamma from the slab tests.
inline std::vector<Activity> classify_region(Kind kind, const Instance& instance,
                                             DualPoint gamma) {
  std::vector<Activity> out;
  for (const auto& s : slabs(kind, instance)) {
    const double y = s.dot(gamma);
    out.push_back(y <= s.lower   ? Activity::kZero
                  : y >= s.upper ? Activity::kOne
                                 : Activity::kInterior);
  }
  return out;
}

/// Polar description of a conical regular layout around O. Angles and
/// segment indices refer to the sorted order `order` (1-based in the
/// formulas, 0-based in the vectors).
struct PolarLayout {
  DualPoint origin;
  std::vector<std::size_t> order;
  std::vector<Slab> sorted;  // slabs in sorted order
  std::vector<double> phi;   // phi_1 .. phi_{2n+1}

  std::size_t n() const { return sorted.size(); }

  /// Distance from O along direction phi to the upper hyperplane of the
  /// slab at sorted rank j (1-based); +inf if the ray never reaches it.
  double radius_to_upper(std::size_t j, double angle) const {
    const Slab& s = sorted.at(j - 1);
    const double proj = s.a * std::cos(angle) + s.w * std::sin(angle);
    if (!(proj > 0.0)) return std::numeric_limits<double>::infinity();
    return (s.upper - s.lower) / proj;
  }
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double x) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  x = std::remainder(x, kTwoPi);
  if (x <= -std::numbers::pi) x += kTwoPi;
  return x;
}

inline PolarLayout polar_thresholds(Kind kind, const Instance& instance) {
  const auto rep = is_conical_regular(kind, instance);
  if (!rep.conical) {
    throw Error(ErrorCode::kNotConical, "layout is not conical regular");
  }
  const auto o = origin(kind, instance);
  if (!o) throw Error(ErrorCode::kNotConical, "lower hyperplanes share no point");

  PolarLayout lay;
  lay.origin = *o;
  lay.order = rep.order;
  const auto all = slabs(kind, instance);
  for (std::size_t r : lay.order) lay.sorted.push_back(all[r]);
  const std::size_t n = lay.n();
  for (std::size_t k = 0; k < n; ++k) {
    lay.phi.push_back(std::atan(-lay.sorted[k].a / lay.sorted[k].w));
  }
  // Angular coordinate of the vertex of the upper hyperplanes 1 and n.
  const auto v = detail::solve2(lay.sorted[0].a, lay.sorted[0].w,
                                lay.sorted[0].upper, lay.sorted[n - 1].a,
                                lay.sorted[n - 1].w, lay.sorted[n - 1].upper);
  lay.phi.push_back(std::atan2(v->beta - o->beta, v->alpha - o->alpha));
  for (std::size_t k = 0; k < n; ++k) {
    lay.phi.push_back(lay.phi[k] + std::numbers::pi);
  }
  return lay;
}

/// Activity pattern predicted by the polar case analysis for gamma inside a
/// cone phi_k <= phi < phi_{k+1}, k = n+2..2n (the cones opposite the lower
/// hyperplanes). Returns nullopt for gamma in any other cone. The result is
/// in original category order.
inline std::optional<std::vector<Activity>> classify_polar(
    const PolarLayout& lay, DualPoint gamma) {
  const std::size_t n = lay.n();
  const double dx = gamma.alpha - lay.origin.alpha;
  const double dy = gamma.beta - lay.origin.beta;
  const double r = std::hypot(dx, dy);
  double angle = std::atan2(dy, dx);
  // Bring angle into [phi_{n+2}, phi_{n+2} + 2 pi).
  const double base = lay.phi[n + 1];
  while (angle < base) angle += 2.0 * std::numbers::pi;
  while (angle >= base + 2.0 * std::numbers::pi) angle -= 2.0 * std::numbers::pi;

  std::size_t k = 0;  // 1-based cone index
  for (std::size_t c = n + 2; c <= 2 * n; ++c) {
    if (lay.phi[c - 1] <= angle && angle < lay.phi[c]) {
      k = c;
      break;
    }
  }
  if (k == 0) return std::nullopt;

  const std::size_t jmax = 2 * (n + 1) - k;
  std::size_t j = 1;
  if (r >= lay.radius_to_upper(n, angle)) {
    j = jmax;
    for (std::size_t cand = 2; cand < jmax; ++cand) {
      if (lay.radius_to_upper(n - cand + 2, angle) <= r &&
          r < lay.radius_to_upper(n - cand + 1, angle)) {
        j = cand;
        break;
      }
    }
  }

  std::vector<Activity> sorted(n, Activity::kInterior);
  for (std::size_t i = 1; i <= k - n - 1; ++i) sorted[i - 1] = Activity::kZero;
  for (std::size_t i = n - j + 2; i <= n; ++i) sorted[i - 1] = Activity::kOne;
  std::vector<Activity> out(n);
  for (std::size_t rnk = 0; rnk < n; ++rnk) out[lay.order[rnk]] = sorted[rnk];
  return out;
}

}  // namespace privshare
