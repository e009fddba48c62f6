// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "privshare/geometry.hpp"
#include "privshare/instance.hpp"

namespace privshare::testing {

inline Instance ex1() {
  return validate_instance({{"c1", "c2", "c3"},
                            {0.620, 0.270, 0.110},
                            {0.259, 0.414, 0.327},
                            {0.404, 0.044, 0.552}},
                           ValidationMode::kStrict)
      .instance;
}

inline Instance ex2() {
  return validate_instance({{"c1", "c2"}, {0.7, 0.3}, {0.4, 0.6}, {2.0, 1.0}},
                           ValidationMode::kStrict)
      .instance;
}

inline std::vector<double> random_pmf(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (double& x : v) {
    x = 0.05 + e(rng);
    s += x;
  }
  for (double& x : v) x /= s;
  return v;
}

/// Random strict instance with entries bounded away from zero.
inline Instance random_instance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> rate(0.05, 1.0);
  for (;;) {
    Instance in;
    in.q = random_pmf(rng, n);
    in.p = random_pmf(rng, n);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(in.q[i] - in.p[i]) < 1e-3) ok = false;
      in.w.push_back(rate(rng));
    }
    if (ok) return validate_instance(in, ValidationMode::kStrict).instance;
  }
}

/// Roots t of 1 + sum_{k=0}^{n-2} 1 / (t - k) = 0.
inline std::vector<double> arithmetic_roots(std::size_t n) {
  auto f = [&](double t) {
    double s = 1.0;
    for (std::size_t k = 0; k + 1 < n; ++k) s += 1.0 / (t - static_cast<double>(k));
    return s;
  };
  std::vector<double> knots{-1e4};
  for (std::size_t k = 0; k + 1 < n; ++k) knots.push_back(static_cast<double>(k));
  knots.push_back(1e4);
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double lo = knots[i] + (i ? 1e-12 : 0.0);
    double hi = knots[i + 1] - (i + 2 < knots.size() ? 1e-12 : 0.0);
    if (f(lo) * f(hi) >= 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (lo + hi);
      (f(m) * f(lo) > 0.0 ? lo : hi) = m;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

/// Conical regular SED instance. With upper levels 2 a_i^2 and lower levels
/// 0, the defining systems are consistent exactly when 1/a_i is arithmetic
/// from the second category on (with step -1/a_1) and m_i - m_1 is
/// proportional to a_i; the categories are shuffled afterwards.
inline Instance conical_instance(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const auto roots = arithmetic_roots(n);
    const double t = roots[rng() % roots.size()];
    const double sign = rng() % 2 ? 1.0 : -1.0;
    std::vector<double> a(n), m(n);
    a[0] = sign;
    for (std::size_t i = 2; i <= n; ++i) a[i - 1] = sign / (t - static_cast<double>(i - 2));
    const double m1 = normal(rng), x = normal(rng);
    m[0] = m1;
    for (std::size_t i = 1; i < n; ++i) m[i] = m1 + (a[i] / a[1]) * x;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      if ((m[i] > 0.0) != (a[i] > 0.0)) ok = false;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(1.0 / m[i] > 1.0 / m[i + 1])) ok = false;
    }
    if (!ok) continue;

    const auto p = random_pmf(rng, n);
    double scale = 1e9;
    for (std::size_t i = 0; i < n; ++i) scale = std::min(scale, 0.5 * p[i] / std::abs(a[i]));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Instance in;
    in.q.resize(n);
    in.p.resize(n);
    in.w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = perm[i];
      in.p[i] = p[r];
      in.q[i] = p[r] + a[r] * scale;
      in.w[i] = a[r] * scale * m[r];
    }
    in = validate_instance(in, ValidationMode::kStrict).instance;
    if (is_conical_regular(Kind::kSed, in).conical) return in;
  }
}

}  // namespace privshare::testing
