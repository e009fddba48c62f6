// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "privshare/error.hpp"
#include "privshare/instance.hpp"
#include "privshare/privacy_function.hpp"
#include "privshare/solution.hpp"

namespace privshare {

struct SolverOptions {
  double pmf_tolerance = 1e-10;
  double money_tolerance = 1e-10;  // scaled by max(1, mu)
  int max_iterations = 200;        // per bisection level
};

struct ClampedStrategy {
  Strategy delta;
  std::vector<Activity> activity;
};

struct Residual {
  double pmf = 0.0;    // sum_i a_i delta_i
  double money = 0.0;  // sum_i w_i delta_i - mu
};

namespace detail {

/// Precomputed slab data for the dual iteration.
class SlabSet {
 public:
  SlabSet(Kind kind, const Instance& instance)
      : a_(difference(instance)), w_(instance.w) {
    comps_ = components(kind, instance);
    lower_.reserve(comps_.size());
    upper_.reserve(comps_.size());
    for (const auto& c : comps_) {
      lower_.push_back(c.deriv(0.0));
      upper_.push_back(c.deriv(1.0));
    }
  }

  std::size_t size() const noexcept { return a_.size(); }
  const std::vector<double>& a() const noexcept { return a_; }
  const std::vector<double>& w() const noexcept { return w_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

  // Slab test: ties at the bounds go to ZERO / ONE.
  double delta_at(std::size_t i, DualPoint g, Activity* tag = nullptr) const {
    const double y = g.alpha * a_[i] + g.beta * w_[i];
    if (y <= lower_[i]) {
      if (tag) *tag = Activity::kZero;
      return 0.0;
    }
    if (y >= upper_[i]) {
      if (tag) *tag = Activity::kOne;
      return 1.0;
    }
    if (tag) *tag = Activity::kInterior;
    return std::clamp(comps_[i].inv_deriv(y), 0.0, 1.0);
  }

  Residual residual(DualPoint g, double mu) const {
    Residual r;
    for (std::size_t i = 0; i < size(); ++i) {
      const double d = delta_at(i, g);
      r.pmf += a_[i] * d;
      r.money += w_[i] * d;
    }
    r.money -= mu;
    return r;
  }

  double initial_bound() const {
    double num = 0.0;
    double den = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
      num = std::max(num, std::abs(upper_[i]) + std::abs(lower_[i]));
      den = std::min({den, std::abs(a_[i]), w_[i]});
    }
    const double b = num / den;
    return std::isfinite(b) && b > 0.0 ? b : 1.0;
  }

 private:
  std::vector<double> a_;
  std::vector<double> w_;
  std::vector<ComponentTriple> comps_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

struct RootResult {
  double x = 0.0;
  double value = 0.0;
  bool monotone = true;
};

/// Bisection for a nondecreasing function on [lo, hi] with f(lo) <= 0 <=
/// f(hi). Stops at |f| <= tol, when the bracket stops shrinking, or after
/// max_iterations. Flags observed violations of monotonicity.
template <typename F>
RootResult bisect(F&& f, double lo, double hi, double f_lo, double f_hi,
                  double tol, int max_iterations) {
  RootResult best{std::abs(f_lo) <= std::abs(f_hi) ? lo : hi,
                  std::abs(f_lo) <= std::abs(f_hi) ? f_lo : f_hi, true};
  for (int it = 0; it < max_iterations; ++it) {
    if (std::abs(best.value) <= tol) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm < f_lo - tol || fm > f_hi + tol) best.monotone = false;
    if (std::abs(fm) < std::abs(best.value)) best = {mid, fm, best.monotone};
    if (fm < 0.0) {
      lo = mid;
      f_lo = fm;
    } else if (fm > 0.0) {
      hi = mid;
      f_hi = fm;
    } else {
      break;
    }
  }
  return best;
}

/// Golden-section minimisation of |f| on [lo, hi]; used when bisection saw a
/// non-monotone residual.
template <typename F>
RootResult golden_abs(F&& f, double lo, double hi, int max_iterations) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < max_iterations && x1 < x2; ++it) {
    if (std::abs(f1) <= std::abs(f2)) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::abs(f1) <= std::abs(f2) ? RootResult{x1, f1, false}
                                      : RootResult{x2, f2, false};
}

/// Grows [-b, b] by a factor of four until f(-b) <= 0 <= f(b).
template <typename F>
bool grow_bracket(F&& f, double& b, double& f_lo, double& f_hi) {
  for (int it = 0; it < 400; ++it) {
    f_lo = f(-b);
    f_hi = f(b);
    if (f_lo <= 0.0 && f_hi >= 0.0) return true;
    b *= 4.0;
    if (!std::isfinite(b)) break;
  }
  return false;
}

// Point where every lower hyperplane is tight (all components at zero). It
// is the common intersection of the lower hyperplanes when one exists; the
// two most independent rows are used.
inline DualPoint lower_vertex(const SlabSet& s) {
  std::size_t bi = 0, bj = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double det = std::abs(s.a()[i] * s.w()[j] - s.a()[j] * s.w()[i]);
      if (det > best) {
        best = det;
        bi = i;
        bj = j;
      }
    }
  }
  const double det = s.a()[bi] * s.w()[bj] - s.a()[bj] * s.w()[bi];
  return {(s.lower()[bi] * s.w()[bj] - s.lower()[bj] * s.w()[bi]) / det,
          (s.a()[bi] * s.lower()[bj] - s.a()[bj] * s.lower()[bi]) / det};
}

}  // namespace detail

inline ClampedStrategy clamp_strategy(Kind kind, const Instance& instance,
                                      DualPoint gamma) {
  const detail::SlabSet slabs(kind, instance);
  ClampedStrategy out{Strategy(slabs.size()),
                      std::vector<Activity>(slabs.size())};
  for (std::size_t i = 0; i < slabs.size(); ++i) {
    out.delta[i] = slabs.delta_at(i, gamma, &out.activity[i]);
  }
  return out;
}

inline Residual residual(Kind kind, const Instance& instance, DualPoint gamma,
                         double mu) {
  return detail::SlabSet(kind, instance).residual(gamma, mu);
}

/// Fills t, risk and the activity tags of `s` from its delta and gamma.
inline void finish_solution(Kind kind, const Instance& instance, Solution& s) {
  s.t = apparent_profile(instance, s.delta);
  s.risk = risk(kind, s.t, instance.p);
  const detail::SlabSet slabs(kind, instance);
  s.activity.resize(slabs.size());
  for (std::size_t i = 0; i < slabs.size(); ++i) {
    slabs.delta_at(i, s.gamma, &s.activity[i]);
  }
}

/// Checks an offer against [0, mu_max]; offers above mu_max by rounding are
/// snapped to mu_max.
inline double checked_offer(const Instance& instance, double mu) {
  const double top = mu_max(instance);
  if (!(mu >= 0.0) || mu > top * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kOfferOutOfRange,
                "offer " + std::to_string(mu) + " outside [0, " +
                    std::to_string(top) + "]");
  }
  return std::min(mu, top);
}

/// Minimises the separable risk subject to sum a_i delta_i = 0,
/// sum w_i delta_i = mu and the unit box, by nested bisection on the dual
/// point: the inner loop zeroes the PMF residual in alpha, the outer loop
/// zeroes the money residual in beta along alpha*(beta).
inline Solution solve(Kind kind, const Instance& instance, double mu,
                           const SolverOptions& opt = {}) {
  mu = checked_offer(instance, mu);
  const detail::SlabSet slabs(kind, instance);
  const std::size_t n = slabs.size();
  const double top = mu_max(instance);

  Solution sol;
  sol.mu = mu;
  sol.method = Method::kDual;
  if (mu == 0.0) {
    sol.delta.assign(n, 0.0);
    sol.gamma = detail::lower_vertex(slabs);
    finish_solution(kind, instance, sol);
    return sol;
  }
  if (mu == top) {
    sol.delta.assign(n, 1.0);
    double beta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      beta = std::max(beta, slabs.upper()[i] / slabs.w()[i]);
    }
    sol.gamma = {0.0, beta * (1.0 + 1e-12) + 1e-300};
    finish_solution(kind, instance, sol);
    return sol;
  }

  double scale_a = 0.0;
  for (double x : slabs.a()) scale_a += std::abs(x);
  const double tol_pmf = 1e-15 * scale_a;
  const double tol_money = 1e-14 * std::max(1.0, top);
  const double b0 = slabs.initial_bound();

  auto alpha_star = [&](double beta) {
    auto r1 = [&](double alpha) {
      return slabs.residual({alpha, beta}, mu).pmf;
    };
    double b = b0 + std::abs(beta) * b0;
    double lo_v = 0.0, hi_v = 0.0;
    if (!detail::grow_bracket(r1, b, lo_v, hi_v)) {
      throw NoConvergence("no alpha bracket", lo_v, 0.0);
    }
    return detail::bisect(r1, -b, b, lo_v, hi_v, tol_pmf, opt.max_iterations)
        .x;
  };
  auto r2 = [&](double beta) {
    return slabs.residual({alpha_star(beta), beta}, mu).money;
  };

  double b = b0;
  double lo_v = 0.0, hi_v = 0.0;
  if (!detail::grow_bracket(r2, b, lo_v, hi_v)) {
    throw NoConvergence("no beta bracket", 0.0, hi_v);
  }
  auto root = detail::bisect(r2, -b, b, lo_v, hi_v, tol_money,
                             opt.max_iterations);
  if (!root.monotone && std::abs(root.value) > tol_money) {
    // Locate a sign change on a grid, then refine |r2| by golden section.
    constexpr int kGrid = 64;
    double prev_x = -b, prev_v = lo_v;
    for (int k = 1; k <= kGrid; ++k) {
      const double x = -b + 2.0 * b * k / kGrid;
      const double v = r2(x);
      if ((prev_v <= 0.0 && v >= 0.0) || (prev_v >= 0.0 && v <= 0.0)) {
        const auto g = detail::golden_abs(r2, prev_x, x, opt.max_iterations);
        if (std::abs(g.value) < std::abs(root.value)) root = g;
        break;
      }
      prev_x = x;
      prev_v = v;
    }
  }

  sol.gamma = {alpha_star(root.x), root.x};
  const auto clamped = clamp_strategy(kind, instance, sol.gamma);
  sol.delta = clamped.delta;
  const Residual res = slabs.residual(sol.gamma, mu);
  if (!(std::abs(res.pmf) <= opt.pmf_tolerance) ||
      !(std::abs(res.money) <= opt.money_tolerance * std::max(1.0, mu))) {
    throw NoConvergence("dual bisection did not meet tolerances", res.pmf,
                        res.money);
  }
  finish_solution(kind, instance, sol);
  return sol;
}

struct KktTolerances {
  double stationarity = 1e-8;
  double primal = 1e-8;  // money residual scaled by max(1, mu)
};

struct KktReport {
  bool pass = false;
  double stationarity = 0.0;  // worst per-component violation
  double pmf_residual = 0.0;
  double money_residual = 0.0;
  double box_violation = 0.0;
  std::size_t worst_index = 0;
};

/// Checks the optimality conditions of a candidate solution: for each
/// component, delta_i = 0 needs z_i.gamma <= f_i'(0), delta_i = 1 needs
/// z_i.gamma >= f_i'(1), and an interior delta_i needs f_i'(delta_i) =
/// z_i.gamma; plus both equality constraints and the box.
inline KktReport kkt_check(Kind kind, const Instance& instance,
                           const Solution& s, const KktTolerances& tol = {}) {
  const auto comps = components(kind, instance);
  const auto a = difference(instance);
  KktReport r;
  double money = -s.mu;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double d = s.delta.at(i);
    r.box_violation = std::max({r.box_violation, -d, d - 1.0});
    r.pmf_residual += a[i] * d;
    money += instance.w[i] * d;

    const double y = s.gamma.alpha * a[i] + s.gamma.beta * instance.w[i];
    double v = 0.0;
    if (d <= 0.0) {
      v = std::max(0.0, y - comps[i].deriv(0.0));
    } else if (d >= 1.0) {
      v = std::max(0.0, comps[i].deriv(1.0) - y);
    } else {
      v = std::abs(comps[i].deriv(d) - y);
    }
    if (!(v <= r.stationarity)) {
      r.stationarity = v;
      r.worst_index = i;
    }
  }
  r.money_residual = money;
  r.pass = r.stationarity <= tol.stationarity &&
           std::abs(r.pmf_residual) <= tol.primal &&
           std::abs(r.money_residual) <= tol.primal * std::max(1.0, s.mu) &&
           r.box_violation <= 0.0;
  return r;
}

}  // namespace privshare
