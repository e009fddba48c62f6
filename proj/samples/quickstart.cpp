// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>

#include "privshare/solve_auto.hpp"
#include "privshare/tradeoff.hpp"

int main() {
  using namespace privshare;
  const Instance instance = validate_instance(
      {{"c1", "c2", "c3"}, {0.620, 0.270, 0.110}, {0.259, 0.414, 0.327},
       {0.404, 0.044, 0.552}},
      ValidationMode::kStrict).instance;

  for (double mu : {0.25, 0.5, 0.8974, 1.0}) {
    const Solution s = solve_with(Kind::kSed, instance, mu);
    std::printf("mu=%.4f  delta=(%.4f, %.4f, %.4f)  risk=%.6f  [%s]\n", mu,
                s.delta[0], s.delta[1], s.delta[2], s.risk,
                std::string(to_string(s.method)).c_str());
  }

  const TradeoffCurve curve = sweep(Kind::kSed, instance, 50);
  for (double b : curve.breakpoints) std::printf("breakpoint at mu=%.6f\n", b);
  std::printf("monotone: %s, convex: %s\n",
              check_monotone(curve).pass ? "yes" : "no",
              check_convex(curve).pass ? "yes" : "no");
}
