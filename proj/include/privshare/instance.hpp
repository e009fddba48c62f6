// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privshare/error.hpp"

namespace privshare {

using Profile = std::vector<double>;
using Strategy = std::vector<double>;

/// One seller's problem: the actual profile q, the initial (decoy) profile p,
/// and the per-category rates w, all indexed by the same category list.
struct Instance {
  std::vector<std::string> categories;
  Profile q;
  Profile p;
  std::vector<double> w;

  std::size_t size() const noexcept { return q.size(); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class ValidationMode { kStrict, kLenient };

/// Result of validation. `zero_set` lists categories whose difference
/// q_i - p_i is numerically zero; it is always empty in strict mode.
struct ValidatedInstance {
  Instance instance;
  std::vector<std::size_t> zero_set;
};

inline constexpr double kPmfInputTolerance = 1e-9;
inline constexpr double kZeroDifference = 1e-12;

namespace detail {

inline double sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

inline void normalize_pmf(Profile& v, const char* name) {
  const double s = sum(v);
  if (!(std::abs(s - 1.0) <= kPmfInputTolerance)) {
    throw Error(ErrorCode::kNonPmf,
                std::string(name) + " sums to " + std::to_string(s));
  }
  // Only rescale when off by more than accumulated rounding so that
  // re-validating a validated instance is a no-op.
  if (std::abs(s - 1.0) > 1e-15 * static_cast<double>(v.size())) {
    for (double& x : v) x /= s;
  }
}

}  // namespace detail

/// Componentwise difference q - p.
inline std::vector<double> difference(const Instance& instance) {
  std::vector<double> a(instance.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = instance.q[i] - instance.p[i];
  return a;
}

inline ValidatedInstance validate_instance(Instance raw, ValidationMode mode) {
  const std::size_t n = raw.q.size();
  if (raw.p.size() != n || raw.w.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "q, p and w must have the same length");
  }
  if (raw.categories.empty()) {
    raw.categories.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      raw.categories.push_back("c" + std::to_string(i + 1));
    }
  } else if (raw.categories.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "categories and profiles differ in length");
  }
  if (n < 2) {
    throw Error(ErrorCode::kDimensionMismatch, "need at least two categories");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(raw.q[i]) || !std::isfinite(raw.p[i]) ||
        raw.q[i] <= 0.0 || raw.p[i] <= 0.0) {
      throw Error(ErrorCode::kNonPositiveEntry,
                  "q and p must be strictly positive at category " +
                      std::to_string(i + 1));
    }
    if (!std::isfinite(raw.w[i]) || raw.w[i] <= 0.0) {
      throw Error(ErrorCode::kNonPositiveRate,
                  "rate must be positive at category " + std::to_string(i + 1));
    }
  }
  detail::normalize_pmf(raw.q, "q");
  detail::normalize_pmf(raw.p, "p");

  ValidatedInstance out;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(raw.q[i] - raw.p[i]) < kZeroDifference) {
      if (mode == ValidationMode::kStrict) {
        throw Error(ErrorCode::kEqualProfiles,
                    "q and p coincide at category " + std::to_string(i + 1));
      }
      out.zero_set.push_back(i);
    }
  }
  out.instance = std::move(raw);
  return out;
}

/// t = (1 - delta) p + delta q, componentwise.
inline Profile apparent_profile(const Instance& instance,
                                std::span<const double> delta) {
  Profile t(instance.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = (1.0 - delta[i]) * instance.p[i] + delta[i] * instance.q[i];
  }
  return t;
}

inline double mu_max(const Instance& instance) {
  return detail::sum(instance.w);
}

/// Outcome of folding zero-difference categories into the offer.
struct Absorption {
  Instance restricted;                // categories outside the zero set
  std::vector<std::size_t> kept;      // original index of each restricted category
  std::vector<std::pair<std::size_t, double>> prefilled;  // (index, delta)
  double residual_mu = 0.0;
};

/// Categories with q_i = p_i disclose at no privacy cost, so they take the
/// offer first, highest rate first. The remaining categories are passed on
/// verbatim (q and p are not renormalized).
inline Absorption absorb_zero_difference(const Instance& instance,
                                         std::span<const std::size_t> zero_set,
                                         double mu) {
  if (mu < 0.0 || mu > mu_max(instance)) {
    throw Error(ErrorCode::kOfferExceedsMax,
                "offer " + std::to_string(mu) + " outside [0, mu_max]");
  }
  Absorption out;
  std::vector<bool> in_zero(instance.size(), false);
  for (std::size_t i : zero_set) in_zero.at(i) = true;

  std::vector<std::size_t> order(zero_set.begin(), zero_set.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return instance.w[a] > instance.w[b];
  });
  double remaining = mu;
  for (std::size_t i : order) {
    const double take = std::min(remaining, instance.w[i]);
    const double d = take >= instance.w[i] ? 1.0 : take / instance.w[i];
    out.prefilled.emplace_back(i, d);
    remaining -= take;
  }
  out.residual_mu = std::max(remaining, 0.0);

  for (std::size_t i = 0; i < instance.size(); ++i) {
    if (in_zero[i]) continue;
    out.kept.push_back(i);
    out.restricted.categories.push_back(instance.categories.empty()
                                            ? std::string()
                                            : instance.categories[i]);
    out.restricted.q.push_back(instance.q[i]);
    out.restricted.p.push_back(instance.p[i]);
    out.restricted.w.push_back(instance.w[i]);
  }
  // Offer beyond what the restricted problem can absorb is rounding noise.
  out.residual_mu = std::min(out.residual_mu, mu_max(out.restricted));
  return out;
}

}  // namespace privshare
