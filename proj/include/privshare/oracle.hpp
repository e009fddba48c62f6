// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

#include "privshare/dual_solver.hpp"
#include "privshare/error.hpp"
#include "privshare/instance.hpp"
#include "privshare/privacy_function.hpp"
#include "privshare/solution.hpp"

namespace privshare {

enum class OracleMethod { kExactPoint, kSegmentGrid, kProjectedDescent };

constexpr std::string_view to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::kExactPoint: return "exact-point";
    case OracleMethod::kSegmentGrid: return "segment-grid";
    case OracleMethod::kProjectedDescent: return "projected-descent";
  }
  return "exact-point";
}

struct OracleResult {
  Strategy delta;
  double risk = 0.0;
  OracleMethod method = OracleMethod::kExactPoint;
  std::size_t resolution = 0;
};

inline constexpr std::size_t kDefaultOracleResolution = 100000;
inline constexpr int kDescentStarts = 16;
inline constexpr std::uint64_t kDescentSeed = 0x5eed5eedULL;

namespace detail {

/// Objective evaluated term by term, with delta clamped into the box.
class Objective {
 public:
  Objective(Kind kind, const Instance& instance)
      : comps_(components(kind, instance)) {}

  double value(const std::vector<double>& d) const {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      s += comps_[i].value(std::clamp(d[i], 0.0, 1.0));
    }
    return s;
  }
  void gradient(const std::vector<double>& d, std::vector<double>& g) const {
    for (std::size_t i = 0; i < d.size(); ++i) {
      g[i] = comps_[i].deriv(std::clamp(d[i], 0.0, 1.0));
    }
  }

 private:
  std::vector<ComponentTriple> comps_;
};

/// Orthogonal projection onto {x : A x = b} for the 2 x n matrix with rows
/// a and w, via the 2 x 2 Gram system.
class AffineProjector {
 public:
  AffineProjector(std::vector<double> a, std::vector<double> w, double mu)
      : a_(std::move(a)), w_(std::move(w)), mu_(mu) {
    for (std::size_t i = 0; i < a_.size(); ++i) {
      g11_ += a_[i] * a_[i];
      g12_ += a_[i] * w_[i];
      g22_ += w_[i] * w_[i];
    }
    det_ = g11_ * g22_ - g12_ * g12_;
  }

  void project(std::vector<double>& x) const {
    double r1 = 0.0, r2 = -mu_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r1 += a_[i] * x[i];
      r2 += w_[i] * x[i];
    }
    const double l1 = (g22_ * r1 - g12_ * r2) / det_;
    const double l2 = (g11_ * r2 - g12_ * r1) / det_;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= l1 * a_[i] + l2 * w_[i];
  }

  /// Removes the row-space component (projection onto the null space).
  void project_direction(std::vector<double>& x) const {
    double r1 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r1 += a_[i] * x[i];
      r2 += w_[i] * x[i];
    }
    const double l1 = (g22_ * r1 - g12_ * r2) / det_;
    const double l2 = (g11_ * r2 - g12_ * r1) / det_;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= l1 * a_[i] + l2 * w_[i];
  }

  double violation(const std::vector<double>& x) const {
    double r1 = 0.0, r2 = -mu_;
    double box = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r1 += a_[i] * x[i];
      r2 += w_[i] * x[i];
      box = std::max({box, -x[i], x[i] - 1.0});
    }
    return std::max({std::abs(r1), std::abs(r2), box});
  }

 private:
  std::vector<double> a_, w_;
  double mu_;
  double g11_ = 0.0, g12_ = 0.0, g22_ = 0.0, det_ = 0.0;
};

/// Dykstra's alternating projection onto the intersection of the affine set
/// and the unit box.
inline void dykstra(const AffineProjector& aff, std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> p(n, 0.0), q(n, 0.0), y(n), prev(n);
  for (int it = 0; it < 20000; ++it) {
    prev = x;
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + p[i];
    std::vector<double> ya = y;
    aff.project(ya);
    for (std::size_t i = 0; i < n; ++i) p[i] = y[i] - ya[i];
    for (std::size_t i = 0; i < n; ++i) {
      const double z = ya[i] + q[i];
      x[i] = std::clamp(z, 0.0, 1.0);
      q[i] = z - x[i];
    }
    double step = 0.0;
    for (std::size_t i = 0; i < n; ++i) step = std::max(step, std::abs(x[i] - prev[i]));
    if (step < 1e-15 && aff.violation(x) < 1e-13) break;
  }
}

inline double dot(const std::vector<double>& u, const std::vector<double>& v) {
  return std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
}

/// Spectral projected gradient from a feasible start.
inline std::vector<double> projected_descent(const Objective& f,
                                             const AffineProjector& aff,
                                             std::vector<double> x) {
  const std::size_t n = x.size();
  std::vector<double> g(n), gn(n), y(n), xn(n), s(n), dg(n);
  double fx = f.value(x);
  f.gradient(x, g);
  double step = 1.0;
  for (int it = 0; it < 10000; ++it) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - step * g[i];
    dykstra(aff, y);
    for (std::size_t i = 0; i < n; ++i) s[i] = y[i] - x[i];
    const double gs = dot(g, s);
    if (std::sqrt(dot(s, s)) < 1e-12 || gs >= 0.0) break;
    double t = 1.0;
    double fn = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + t * s[i];
      fn = f.value(xn);
      if (fn <= fx + 1e-4 * t * gs) break;
      t *= 0.5;
    }
    if (!(fn <= fx)) break;
    f.gradient(xn, gn);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      dg[i] = gn[i] - g[i];
    }
    const double ss = dot(s, s);
    const double sy = dot(s, dg);
    const double move = std::sqrt(ss);
    x.swap(xn);
    g.swap(gn);
    fx = fn;
    if (move < 1e-12) break;
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1.0;
  }
  return x;
}

}  // namespace detail

/// Minimizes the risk over the feasible strategies without the dual
/// machinery: the single feasible point for n = 2, a scan of the feasible
/// segment for n = 3, multi-start projected descent for n >= 4.
inline OracleResult brute_force(Kind kind, const Instance& instance, double mu,
                                std::size_t resolution =
                                    kDefaultOracleResolution) {
  const double top = mu_max(instance);
  if (!(mu >= 0.0) || mu > top * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kInfeasible, "offer outside [0, mu_max]");
  }
  mu = std::min(mu, top);
  const std::size_t n = instance.size();
  const auto a = difference(instance);
  const detail::Objective f(kind, instance);
  OracleResult out;
  out.resolution = resolution;

  if (mu == 0.0 || mu == top || n == 2) {
    const double s = mu == top ? 1.0 : mu / top;
    out.delta.assign(n, s);
    out.risk = f.value(out.delta);
    out.method = OracleMethod::kExactPoint;
    return out;
  }

  if (n == 3) {
    // Pivot pair with the largest determinant; delta_c is the parameter.
    std::size_t pa = 0, pb = 1, pc = 2;
    double best = -1.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t x = c == 0 ? 1 : 0;
      const std::size_t y = c == 2 ? 1 : 2;
      const double det = std::abs(a[x] * instance.w[y] - a[y] * instance.w[x]);
      if (det > best) {
        best = det;
        pa = x;
        pb = y;
        pc = c;
      }
    }
    const double det = a[pa] * instance.w[pb] - a[pb] * instance.w[pa];
    // [a_a a_b; w_a w_b] (d_a, d_b) = (-a_c t, mu - w_c t)
    auto point = [&](double t) {
      std::vector<double> d(3);
      const double r1 = -a[pc] * t;
      const double r2 = mu - instance.w[pc] * t;
      d[pa] = (r1 * instance.w[pb] - r2 * a[pb]) / det;
      d[pb] = (a[pa] * r2 - instance.w[pa] * r1) / det;
      d[pc] = t;
      return d;
    };
    // Interval of t keeping d_a and d_b inside [0, 1].
    double lo = 0.0, hi = 1.0;
    const auto d0 = point(0.0), d1 = point(1.0);
    for (std::size_t i : {pa, pb}) {
      const double slope = d1[i] - d0[i];
      const double base = d0[i];
      if (slope == 0.0) {
        if (base < -1e-12 || base > 1.0 + 1e-12) lo = 1.0, hi = 0.0;
        continue;
      }
      double t0 = (0.0 - base) / slope, t1 = (1.0 - base) / slope;
      if (t0 > t1) std::swap(t0, t1);
      lo = std::max(lo, t0);
      hi = std::min(hi, t1);
    }
    if (lo > hi) throw Error(ErrorCode::kInfeasible, "empty feasible segment");

    const std::size_t samples = std::max<std::size_t>(resolution, 2);
    const double h = (hi - lo) / static_cast<double>(samples - 1);
    double best_t = lo, best_v = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples; ++k) {
      const double t = k + 1 == samples ? hi : lo + h * static_cast<double>(k);
      const double v = f.value(point(t));
      if (v < best_v) {
        best_v = v;
        best_t = t;
      }
    }
    // Golden-section refinement on the neighbouring cells.
    double x0 = std::max(lo, best_t - h), x1 = std::min(hi, best_t + h);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = x1 - g * (x1 - x0), d = x0 + g * (x1 - x0);
    double fc = f.value(point(c)), fd = f.value(point(d));
    for (int it = 0; it < 200 && x1 - x0 > 1e-15; ++it) {
      if (fc < fd) {
        x1 = d;
        d = c;
        fd = fc;
        c = x1 - g * (x1 - x0);
        fc = f.value(point(c));
      } else {
        x0 = c;
        c = d;
        fc = fd;
        d = x0 + g * (x1 - x0);
        fd = f.value(point(d));
      }
    }
    const double tm = 0.5 * (x0 + x1);
    const double vm = f.value(point(tm));
    if (vm < best_v) {
      best_v = vm;
      best_t = tm;
    }
    out.delta = point(best_t);
    for (double& x : out.delta) x = std::clamp(x, 0.0, 1.0);
    out.risk = f.value(out.delta);
    out.method = OracleMethod::kSegmentGrid;
    return out;
  }

  const detail::AffineProjector aff(a, instance.w, mu);
  const std::vector<double> center(n, mu / top);
  std::mt19937_64 rng(kDescentSeed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.method = OracleMethod::kProjectedDescent;
  out.risk = std::numeric_limits<double>::infinity();
  for (int start = 0; start < kDescentStarts; ++start) {
    std::vector<double> x = center;
    if (start > 0) {
      std::vector<double> dir(n);
      for (double& v : dir) v = normal(rng);
      aff.project_direction(dir);
      double reach = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (dir[i] > 0.0) reach = std::min(reach, (1.0 - x[i]) / dir[i]);
        if (dir[i] < 0.0) reach = std::min(reach, -x[i] / dir[i]);
      }
      if (std::isfinite(reach)) {
        const double t = reach * unit(rng);
        for (std::size_t i = 0; i < n; ++i) x[i] += t * dir[i];
      }
    }
    x = detail::projected_descent(f, aff, std::move(x));
    const double v = f.value(x);
    if (v < out.risk) {
      out.risk = v;
      out.delta = x;
    }
  }
  return out;
}

struct CertifyReport {
  bool pass = false;
  double gap = 0.0;  // solution risk minus oracle risk
  double oracle_risk = 0.0;
  double solution_risk = 0.0;
  KktReport kkt;
};

inline CertifyReport certify(Kind kind, const Instance& instance, double mu,
                             const Solution& solution,
                             std::size_t resolution = kDefaultOracleResolution) {
  CertifyReport r;
  const auto oracle = brute_force(kind, instance, mu, resolution);
  r.oracle_risk = oracle.risk;
  r.solution_risk =
      risk(kind, apparent_profile(instance, solution.delta), instance.p);
  r.gap = r.solution_risk - oracle.risk;
  Solution checked = solution;
  checked.mu = mu;
  r.kkt = kkt_check(kind, instance, checked);
  r.pass = r.gap <= 1e-6 + 1e-6 * oracle.risk && r.kkt.pass;
  return r;
}

}  // namespace privshare
