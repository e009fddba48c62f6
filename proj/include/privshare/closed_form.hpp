// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "privshare/dual_solver.hpp"
#include "privshare/error.hpp"
#include "privshare/geometry.hpp"
#include "privshare/instance.hpp"
#include "privshare/privacy_function.hpp"
#include "privshare/solution.hpp"

namespace privshare {

using ClosedResult = std::variant<Solution, Fallback>;

/// Slopes m_i = w_i / a_i of the slab normals and their moments.
/// Statistics exclude one category (by original index) or none.
class SlopeStats {
 public:
  explicit SlopeStats(const Instance& instance) : m_(instance.size()) {
    const auto a = difference(instance);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        throw Error(ErrorCode::kZeroDifference,
                    "category " + std::to_string(i + 1) + " has q = p");
      }
      m_[i] = instance.w[i] / a[i];
    }
    order_.resize(m_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t x, std::size_t y) { return m_[x] > m_[y]; });
  }

  const std::vector<double>& m() const { return m_; }
  /// Descending-slope permutation: order()[r] is the category at rank r.
  const std::vector<std::size_t>& order() const { return order_; }

  bool has_ties() const {
    for (std::size_t r = 0; r + 1 < order_.size(); ++r) {
      if (!(m_[order_[r]] > m_[order_[r + 1]])) return true;
    }
    return false;
  }

  double mean_excluding(std::optional<std::size_t> j = std::nullopt) const {
    double s = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < m_.size(); ++i) {
      if (j && *j == i) continue;
      s += m_[i];
      ++c;
    }
    return s / static_cast<double>(c);
  }

  double var_excluding(std::optional<std::size_t> j = std::nullopt) const {
    const double mean = mean_excluding(j);
    double s = 0.0;
    std::size_t c = 0;
    for (std::size_t i = 0; i < m_.size(); ++i) {
      if (j && *j == i) continue;
      s += (m_[i] - mean) * (m_[i] - mean);
      ++c;
    }
    return s / static_cast<double>(c);
  }

  /// Relative coefficient of variation (m_i - mean) / variance.
  double v(std::size_t i, std::optional<std::size_t> j = std::nullopt) const {
    return (m_.at(i) - mean_excluding(j)) / var_excluding(j);
  }

 private:
  std::vector<double> m_;
  std::vector<std::size_t> order_;
};

inline SlopeStats slope_stats(const Instance& instance) {
  return SlopeStats(instance);
}

/// n = 2: both components disclose the same fraction mu / mu_max.
inline ClosedResult solve_n2(Kind kind, const Instance& instance, double mu) {
  if (instance.size() != 2) {
    throw Error(ErrorCode::kWrongArity, "closed form needs n = 2");
  }
  mu = checked_offer(instance, mu);
  const double s = mu == mu_max(instance) ? 1.0 : mu / mu_max(instance);
  const auto c0 = component(kind, instance, 0);
  const auto c1 = component(kind, instance, 1);

  Solution sol;
  sol.mu = mu;
  sol.method = Method::kClosedN2;
  sol.delta = {s, s};
  const auto g = detail::solve2(c0.difference(), instance.w[0], c0.deriv(s),
                                c1.difference(), instance.w[1], c1.deriv(s));
  if (!g) return Fallback{"parallel slabs"};
  sol.gamma = *g;
  finish_solution(kind, instance, sol);

  const auto a = difference(instance);
  switch (kind) {
    case Kind::kSed:
      sol.risk = 2.0 * (a[0] * s) * (a[0] * s);
      break;
    case Kind::kKl:
      sol.risk = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        const double p = instance.p[i];
        sol.risk += (a[i] * s + p) * std::log1p(a[i] * s / p);
      }
      break;
    case Kind::kIsd:
      break;
  }
  return sol;
}

/// Offer up to which the n = 3 SED closed form holds in case j (1: the
/// middle slope is inactive, 2: all three active).
inline double money_threshold_n3(const Instance& instance, int j) {
  if (instance.size() != 3) {
    throw Error(ErrorCode::kWrongArity, "threshold needs n = 3");
  }
  if (j != 1 && j != 2) {
    throw Error(ErrorCode::kInvalidArgument, "j must be 1 or 2");
  }
  const SlopeStats st(instance);
  if (st.has_ties()) {
    throw Error(ErrorCode::kDegenerate, "tied slopes");
  }
  const auto a = difference(instance);
  std::optional<std::size_t> excl;
  if (j == 1) excl = st.order()[1];
  const double mean = st.mean_excluding(excl);
  const double var = st.var_excluding(excl);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 3; ++i) {
    if (excl && *excl == i) continue;
    const double den = st.m()[i] - mean;
    if (den == 0.0) {
      throw Error(ErrorCode::kDegenerate,
                  "slope " + std::to_string(i + 1) + " equals the mean");
    }
    const double cand = (j + 1) * a[i] * var / den;
    best = std::min(best, cand);
  }
  return best;
}

/// Case selected by the n = 3 SED closed form.
inline int n3_case(const Instance& instance) {
  const SlopeStats st(instance);
  const auto a = difference(instance);
  const std::size_t mid = st.order()[1];
  const bool spread = st.m()[st.order()[0]] > st.m()[st.order()[2]];
  return instance.w[mid] <= a[mid] * st.mean_excluding(mid) && spread ? 1 : 2;
}

inline ClosedResult solve_n3_sed(Kind kind, const Instance& instance,
                                 double mu) {
  if (instance.size() != 3) {
    throw Error(ErrorCode::kWrongArity, "closed form needs n = 3");
  }
  if (kind != Kind::kSed) {
    throw Error(ErrorCode::kWrongKind, "closed form needs sed");
  }
  mu = checked_offer(instance, mu);
  const SlopeStats st(instance);
  if (st.has_ties()) return Fallback{"DEGENERATE: tied slopes"};

  const int j = n3_case(instance);
  double top = 0.0;
  try {
    top = money_threshold_n3(instance, j);
  } catch (const Error& e) {
    return Fallback{std::string(to_string(e.code())) + ": " + e.detail()};
  }
  if (mu > top) return Fallback{"offer above the closed-form threshold"};

  const auto a = difference(instance);
  std::optional<std::size_t> excl;
  if (j == 1) excl = st.order()[1];
  const double mean = st.mean_excluding(excl);
  const double var = st.var_excluding(excl);

  Solution sol;
  sol.mu = mu;
  sol.method = Method::kClosedN3;
  sol.delta.assign(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    if (excl && *excl == i) continue;
    const double d = st.v(i, excl) * mu / ((j + 1) * a[i]);
    sol.delta[i] = std::clamp(d, 0.0, 1.0);
  }
  sol.gamma.beta = 2.0 * mu / ((j + 1) * var);
  sol.gamma.alpha = -mean * sol.gamma.beta;
  finish_solution(kind, instance, sol);
  return sol;
}

/// Risk of the n = 3 SED closed form, mu^2 / ((j+1) variance).
inline double risk_n3_sed(const Instance& instance, double mu) {
  const SlopeStats st(instance);
  const int j = n3_case(instance);
  std::optional<std::size_t> excl;
  if (j == 1) excl = st.order()[1];
  return mu * mu / ((j + 1) * st.var_excluding(excl));
}

struct ConicalCell {
  std::size_t k = 0;
  std::size_t j = 0;
  double mu = 0.0;
  std::size_t free_count = 0;
};

struct ConicalTable {
  std::vector<std::size_t> order;  // inverse-slope sorted order
  std::vector<ConicalCell> cells;

  const ConicalCell* find(std::size_t k, std::size_t j) const {
    for (const auto& c : cells) {
      if (c.k == k && c.j == j) return &c;
    }
    return nullptr;
  }
};

namespace detail {

/// Sorted-order quantities for the conical cells.
struct ConicalData {
  std::vector<std::size_t> order;
  std::vector<double> a, w, m;  // sorted
  std::size_t n() const { return a.size(); }

  // Sums over sorted ranks i..n (1-based); zero for i = n + 1.
  double tail_a(std::size_t i) const {
    double s = 0.0;
    for (std::size_t r = i; r <= n(); ++r) s += a[r - 1];
    return s;
  }
  double tail_w(std::size_t i) const {
    double s = 0.0;
    for (std::size_t r = i; r <= n(); ++r) s += w[r - 1];
    return s;
  }
  // Free ranks k-n .. n-j+1.
  std::pair<std::size_t, std::size_t> free_range(std::size_t k,
                                                 std::size_t j) const {
    return {k - n(), n() + 1 - j};
  }
  std::pair<double, double> free_moments(std::size_t k, std::size_t j) const {
    const auto [lo, hi] = free_range(k, j);
    double s = 0.0;
    for (std::size_t r = lo; r <= hi; ++r) s += m[r - 1];
    const double c = static_cast<double>(hi - lo + 1);
    const double mean = s / c;
    double v = 0.0;
    for (std::size_t r = lo; r <= hi; ++r) {
      v += (m[r - 1] - mean) * (m[r - 1] - mean);
    }
    return {mean, v / c};
  }
};

inline ConicalData conical_data(const Instance& instance) {
  ConicalData d;
  try {
    d.order = inverse_slope_order(instance);
  } catch (const Error& e) {
    throw Error(ErrorCode::kDegenerate, e.detail());
  }
  const auto a = difference(instance);
  for (std::size_t r : d.order) {
    d.a.push_back(a[r]);
    d.w.push_back(instance.w[r]);
    d.m.push_back(instance.w[r] / a[r]);
  }
  return d;
}

inline double conical_mu(const ConicalData& d, std::size_t k, std::size_t j) {
  const std::size_t n = d.n();
  const auto [mean, var] = d.free_moments(k, j);
  const double den = mean - d.m[k - n - 2];
  if (den == 0.0) {
    throw Error(ErrorCode::kDegenerate,
                "zero denominator in cell (" + std::to_string(k) + ", " +
                    std::to_string(j) + ")");
  }
  const std::size_t t = n - j + 2;
  return d.tail_w(t) - d.tail_a(t) * (mean + var / den);
}

}  // namespace detail

/// Money thresholds mu_{k,j} of the conical SED cells, k = n+2..2n,
/// j = 1..2(n+1)-k, skipping cells with no free component. Ranks refer to
/// categories sorted by decreasing a_i / w_i. Raw values are reported.
inline ConicalTable conical_thresholds(const Instance& instance) {
  const auto d = detail::conical_data(instance);
  const std::size_t n = d.n();
  ConicalTable t;
  t.order = d.order;
  for (std::size_t k = n + 2; k <= 2 * n; ++k) {
    for (std::size_t j = 1; j <= 2 * (n + 1) - k; ++j) {
      const std::size_t free = 2 * n + 2 - k - j;
      if (free == 0) continue;
      t.cells.push_back({k, j, detail::conical_mu(d, k, j), free});
    }
  }
  return t;
}

/// Candidate strategy of cell (k, j) at offer mu, in original order, with
/// its dual point. No feasibility or optimality check is applied.
inline Solution conical_candidate(const Instance& instance, std::size_t k,
                                  std::size_t j, double mu) {
  const auto d = detail::conical_data(instance);
  const std::size_t n = d.n();
  const auto [lo, hi] = d.free_range(k, j);
  const auto [mean, var] = d.free_moments(k, j);
  const double nf = static_cast<double>(hi - lo + 1);
  const std::size_t t = n - j + 2;
  const double big_a = d.tail_a(t);
  const double shift = mu - d.tail_w(t) + big_a * mean;

  std::vector<double> sorted(n, 0.0);
  for (std::size_t r = lo; r <= hi; ++r) {
    const double v = (d.m[r - 1] - mean) / var;
    sorted[r - 1] = (v * shift - big_a) / (d.a[r - 1] * nf);
  }
  for (std::size_t r = t; r <= n; ++r) sorted[r - 1] = 1.0;

  Solution sol;
  sol.mu = mu;
  sol.method = Method::kClosedConical;
  sol.delta.assign(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) sol.delta[d.order[r]] = sorted[r];
  sol.gamma.beta = 2.0 * shift / (nf * var);
  sol.gamma.alpha = -mean * sol.gamma.beta - 2.0 * big_a / nf;
  return sol;
}

/// Covering cell (k, j) for mu: mu_{k+1,j} < mu <= mu_{k,j}, with at
/// least two free components.
inline std::optional<std::pair<std::size_t, std::size_t>> covering_cell(
    const ConicalTable& table, std::size_t n, double mu) {
  for (const auto& c : table.cells) {
    if (c.free_count < 2) continue;
    const auto* below = table.find(c.k + 1, c.j);
    if (below == nullptr) continue;
    if (below->mu < mu && mu <= c.mu) return std::pair{c.k, c.j};
  }
  (void)n;
  return std::nullopt;
}

/// Conical SED closed form. The candidate from the covering cell is
/// returned only if it is feasible and satisfies the optimality conditions;
/// otherwise the caller is directed to the dual solver.
inline ClosedResult solve_conical_sed(Kind kind, const Instance& instance,
                                      double mu) {
  if (kind != Kind::kSed) {
    throw Error(ErrorCode::kWrongKind, "closed form needs sed");
  }
  if (instance.size() < 3) {
    throw Error(ErrorCode::kNotConical, "conical layouts need n >= 3");
  }
  mu = checked_offer(instance, mu);
  ConicalReport rep;
  try {
    rep = is_conical_regular(kind, instance);
  } catch (const Error&) {
    return Fallback{"DEGENERATE: tied slopes"};
  }
  if (!rep.conical) {
    throw Error(ErrorCode::kNotConical, "layout is not conical regular");
  }
  ConicalTable table;
  try {
    table = conical_thresholds(instance);
  } catch (const Error& e) {
    return Fallback{std::string(to_string(e.code())) + ": " + e.detail()};
  }
  const auto cell = covering_cell(table, instance.size(), mu);
  if (!cell) return Fallback{"NO_COVERING_CELL"};

  Solution sol = conical_candidate(instance, cell->first, cell->second, mu);
  const auto kkt = kkt_check(kind, instance, sol);
  if (!kkt.pass) return Fallback{"cell formula fails the optimality check"};
  finish_solution(kind, instance, sol);
  return sol;
}

}  // namespace privshare
