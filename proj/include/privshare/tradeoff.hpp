// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "privshare/error.hpp"
#include "privshare/solve_auto.hpp"

namespace privshare {

struct CurvePoint {
  Solution solution;
  bool on_grid = true;

  double mu() const { return solution.mu; }
  double risk() const { return solution.risk; }
};

struct TradeoffCurve {
  Kind kind = Kind::kSed;
  Instance instance;
  std::vector<CurvePoint> points;
  std::vector<double> breakpoints;
};

inline constexpr double kBreakpointResolution = 1e-9;
inline constexpr std::size_t kDefaultCurvePoints = 200;

namespace detail {

// Narrows (lo, hi] down to each activity change. The all-ZERO and all-ONE
// patterns at the two ends of the offer range are not breakpoints.
template <typename Solve>
void find_breakpoints(Solve& solve_at, const Solution& lo, const Solution& hi,
                      double top, std::vector<Solution>& out) {
  if (lo.activity == hi.activity) return;
  if (hi.mu - lo.mu <= kBreakpointResolution) {
    if (lo.mu > 0.0 && hi.mu < top) out.push_back(hi);
    return;
  }
  const Solution mid = solve_at(0.5 * (lo.mu + hi.mu));
  find_breakpoints(solve_at, lo, mid, top, out);
  find_breakpoints(solve_at, mid, hi, top, out);
}

}  // namespace detail

/// Samples R(mu) at n_points uniform offers over [0, mu_max] and inserts
/// the offers where the activity pattern changes, located to 1e-9.
inline TradeoffCurve sweep(Kind kind, const Instance& instance,
                           std::size_t n_points = kDefaultCurvePoints,
                           MethodChoice method = MethodChoice::kAuto) {
  if (n_points < 2) {
    throw Error(ErrorCode::kInvalidArgument, "a curve needs at least 2 points");
  }
  TradeoffCurve curve;
  curve.kind = kind;
  curve.instance = instance;
  const double top = mu_max(instance);
  auto solve_at = [&](double mu) {
    return solve_with(kind, instance, mu, method);
  };

  std::vector<Solution> grid;
  grid.reserve(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double mu = k + 1 == n_points
                          ? top
                          : top * static_cast<double>(k) /
                                static_cast<double>(n_points - 1);
    grid.push_back(solve_at(mu));
  }

  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k > 0) {
      std::vector<Solution> extra;
      detail::find_breakpoints(solve_at, grid[k - 1], grid[k], top, extra);
      for (auto& s : extra) {
        curve.breakpoints.push_back(s.mu);
        if (s.mu != grid[k].mu) curve.points.push_back({std::move(s), false});
      }
    }
    curve.points.push_back({grid[k], true});
  }
  return curve;
}

struct ShapeReport {
  bool pass = true;
  double worst = 0.0;  // most negative difference seen
  std::size_t index = 0;
};

/// Risk nondecreasing across consecutive points, up to `slack`.
inline ShapeReport check_monotone(const TradeoffCurve& curve,
                                  double slack = 1e-10) {
  ShapeReport r;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const double d = curve.points[k].risk() - curve.points[k - 1].risk();
    if (d < r.worst) {
      r.worst = d;
      r.index = k;
    }
  }
  r.pass = r.worst >= -slack;
  return r;
}

/// Second differences of the risk over the uniform grid points.
inline ShapeReport check_convex(const TradeoffCurve& curve,
                                double slack = 1e-9) {
  std::vector<double> risk;
  for (const auto& p : curve.points) {
    if (p.on_grid) risk.push_back(p.risk());
  }
  ShapeReport r;
  for (std::size_t k = 1; k + 1 < risk.size(); ++k) {
    const double d = risk[k - 1] - 2.0 * risk[k] + risk[k + 1];
    if (d < r.worst) {
      r.worst = d;
      r.index = k;
    }
  }
  r.pass = r.worst >= -slack;
  return r;
}

inline std::vector<std::pair<double, DualPoint>> gamma_path(
    const TradeoffCurve& curve) {
  std::vector<std::pair<double, DualPoint>> out;
  out.reserve(curve.points.size());
  for (const auto& p : curve.points) out.emplace_back(p.mu(), p.solution.gamma);
  return out;
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string activity_string(const std::vector<Activity>& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += ';';
    s += to_string(a[i]);
  }
  return s;
}

inline std::string to_csv(const TradeoffCurve& curve) {
  const std::size_t n = curve.instance.size();
  std::string out = "mu,risk";
  for (std::size_t i = 1; i <= n; ++i) out += ",delta_" + std::to_string(i);
  out += ",alpha,beta,activity\n";
  for (const auto& p : curve.points) {
    const auto& s = p.solution;
    out += format_double(s.mu) + ',' + format_double(s.risk);
    for (double d : s.delta) out += ',' + format_double(d);
    out += ',' + format_double(s.gamma.alpha) + ',' +
           format_double(s.gamma.beta) + ',' + activity_string(s.activity) +
           '\n';
  }
  return out;
}

}  // namespace privshare
