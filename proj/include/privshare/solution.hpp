// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "privshare/instance.hpp"

namespace privshare {

/// Which of the three forms a component of the optimum takes.
enum class Activity { kZero, kInterior, kOne };

constexpr std::string_view to_string(Activity a) {
  switch (a) {
    case Activity::kZero: return "ZERO";
    case Activity::kInterior: return "INTERIOR";
    case Activity::kOne: return "ONE";
  }
  return "ZERO";
}

/// Lagrange multipliers: alpha for the PMF constraint, beta for the money
/// constraint.
struct DualPoint {
  double alpha = 0.0;
  double beta = 0.0;

  friend bool operator==(const DualPoint&, const DualPoint&) = default;
};

enum class Method { kDual, kClosedN2, kClosedN3, kClosedConical };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::kDual: return "dual";
    case Method::kClosedN2: return "closed-n2";
    case Method::kClosedN3: return "closed-n3-sed";
    case Method::kClosedConical: return "closed-conical-sed";
  }
  return "dual";
}

struct Solution {
  Strategy delta;
  Profile t;
  double risk = 0.0;
  DualPoint gamma;
  std::vector<Activity> activity;
  double mu = 0.0;
  Method method = Method::kDual;
};

/// Signal returned by a closed form whose theorem does not cover the request.
struct Fallback {
  std::string reason;
};

}  // namespace privshare
