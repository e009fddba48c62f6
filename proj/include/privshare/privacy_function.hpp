// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "privshare/error.hpp"
#include "privshare/instance.hpp"

namespace privshare {

enum class Kind { kSed, kKl, kIsd };

constexpr std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::kSed: return "sed";
    case Kind::kKl: return "kl";
    case Kind::kIsd: return "isd";
  }
  return "sed";
}

inline std::optional<Kind> parse_kind(std::string_view s) {
  if (s == "sed") return Kind::kSed;
  if (s == "kl") return Kind::kKl;
  if (s == "isd") return Kind::kIsd;
  return std::nullopt;
}

inline constexpr Kind kAllKinds[] = {Kind::kSed, Kind::kKl, Kind::kIsd};

// Separable divergences restricted to one category. Each policy is written in
// terms of the difference a = q_i - p_i, the initial mass p = p_i and the
// disclosure x = delta_i, so that t_i = p + a x.
//
//   value(a, p, x)      f_i(x)
//   deriv(a, p, x)      f_i'(x), strictly increasing when a != 0
//   inv_deriv(a, p, y)  (f_i')^{-1}(y), extended-real valued
//   term(t, p)          the whole-profile summand at t_i = t

struct SquaredEuclidean {
  static double value(double a, double, double x) { return a * a * x * x; }
  static double deriv(double a, double, double x) { return 2.0 * a * a * x; }
  static double inv_deriv(double a, double, double y) {
    return y / (2.0 * a * a);
  }
  static double term(double t, double p) { return (t - p) * (t - p); }
};

struct KullbackLeibler {
  static double value(double a, double p, double x) {
    const double u = p + a * x;
    return u * std::log(u / p);
  }
  static double deriv(double a, double p, double x) {
    return a * (std::log1p(a * x / p) + 1.0);
  }
  static double inv_deriv(double a, double p, double y) {
    return (p / a) * std::expm1(y / a - 1.0);
  }
  static double term(double t, double p) { return t * std::log(t / p); }
};

struct ItakuraSaito {
  static double value(double a, double p, double x) {
    const double r = (p + a * x) / p;
    return r - std::log(r) - 1.0;
  }
  static double deriv(double a, double p, double x) {
    return a / p - a / (p + a * x);
  }
  // f' approaches a/p as t grows without bound and diverges as t -> 0+, so the
  // inverse has a pole at y = a/p. Beyond it the inverse is +inf for a > 0
  // and -inf for a < 0.
  static double inv_deriv(double a, double p, double y) {
    const double pole = a / p;
    if (a > 0.0 && y >= pole) return std::numeric_limits<double>::infinity();
    if (a < 0.0 && y <= pole) return -std::numeric_limits<double>::infinity();
    return y * p * p / (a * (a - y * p));
  }
  static double term(double t, double p) {
    const double r = t / p;
    return r - std::log(r) - 1.0;
  }
};

template <typename F>
decltype(auto) dispatch(Kind kind, F&& f) {
  switch (kind) {
    case Kind::kKl: return std::forward<F>(f)(KullbackLeibler{});
    case Kind::kIsd: return std::forward<F>(f)(ItakuraSaito{});
    case Kind::kSed: break;
  }
  return std::forward<F>(f)(SquaredEuclidean{});
}

/// f_i, f_i' and (f_i')^{-1} for one category of a bound instance.
class ComponentTriple {
 public:
  ComponentTriple(Kind kind, double a, double p) : kind_(kind), a_(a), p_(p) {}

  Kind kind() const noexcept { return kind_; }
  double difference() const noexcept { return a_; }

  double value(double x) const {
    return dispatch(kind_, [&](auto f) { return f.value(a_, p_, x); });
  }
  double deriv(double x) const {
    return dispatch(kind_, [&](auto f) { return f.deriv(a_, p_, x); });
  }
  double inv_deriv(double y) const {
    return dispatch(kind_, [&](auto f) { return f.inv_deriv(a_, p_, y); });
  }

 private:
  Kind kind_;
  double a_;
  double p_;
};

inline ComponentTriple component(Kind kind, const Instance& instance,
                                 std::size_t i) {
  const double a = instance.q.at(i) - instance.p.at(i);
  if (a == 0.0) {
    throw Error(ErrorCode::kZeroDifference,
                "category " + std::to_string(i + 1) + " has q_i = p_i");
  }
  return ComponentTriple(kind, a, instance.p[i]);
}

inline std::vector<ComponentTriple> components(Kind kind,
                                               const Instance& instance) {
  std::vector<ComponentTriple> out;
  out.reserve(instance.size());
  for (std::size_t i = 0; i < instance.size(); ++i) {
    out.push_back(component(kind, instance, i));
  }
  return out;
}

/// Privacy risk f(t, p) of disclosing t against the initial profile p.
inline double risk(Kind kind, std::span<const double> t,
                   std::span<const double> p) {
  if (t.size() != p.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "t and p differ in length");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !(p[i] > 0.0)) {
      throw Error(ErrorCode::kDomain, "profiles must be strictly positive");
    }
  }
  return dispatch(kind, [&](auto f) {
    double r = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) r += f.term(t[i], p[i]);
    return r;
  });
}

struct GradientEndpoints {
  std::vector<double> at_zero;
  std::vector<double> at_one;
};

inline GradientEndpoints gradient_endpoints(Kind kind,
                                            const Instance& instance) {
  GradientEndpoints g;
  for (const auto& c : components(kind, instance)) {
    g.at_zero.push_back(c.deriv(0.0));
    g.at_one.push_back(c.deriv(1.0));
  }
  return g;
}

}  // namespace privshare
