// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "privshare/closed_form.hpp"
#include "privshare/dual_solver.hpp"
#include "privshare/geometry.hpp"

namespace privshare {

enum class MethodChoice { kAuto, kDual, kClosed };

inline std::optional<MethodChoice> parse_method(std::string_view s) {
  if (s == "auto") return MethodChoice::kAuto;
  if (s == "dual") return MethodChoice::kDual;
  if (s == "closed") return MethodChoice::kClosed;
  return std::nullopt;
}

/// Closed form that applies to the request, if any.
inline std::optional<Solution> try_closed_form(Kind kind,
                                               const Instance& instance,
                                               double mu) {
  const std::size_t n = instance.size();
  if (n == 2) {
    auto r = solve_n2(kind, instance, mu);
    if (auto* s = std::get_if<Solution>(&r)) return *s;
    return std::nullopt;
  }
  if (kind != Kind::kSed) return std::nullopt;
  if (n == 3) {
    auto r = solve_n3_sed(kind, instance, mu);
    if (auto* s = std::get_if<Solution>(&r)) return *s;
  }
  try {
    if (!is_conical_regular(kind, instance).conical) return std::nullopt;
  } catch (const Error&) {
    return std::nullopt;
  }
  auto r = solve_conical_sed(kind, instance, mu);
  if (auto* s = std::get_if<Solution>(&r)) return *s;
  return std::nullopt;
}

/// Solves with the requested method. kAuto tries the closed forms first and
/// falls back to the dual solver; kClosed throws if no closed form applies.
inline Solution solve_with(Kind kind, const Instance& instance, double mu,
                           MethodChoice method = MethodChoice::kAuto,
                           const SolverOptions& opt = {}) {
  if (method != MethodChoice::kDual) {
    if (auto s = try_closed_form(kind, instance, mu)) return *s;
    if (method == MethodChoice::kClosed) {
      throw Error(ErrorCode::kNoCoveringCell,
                  "no closed form covers this request");
    }
  }
  return solve(kind, instance, mu, opt);
}

}  // namespace privshare
