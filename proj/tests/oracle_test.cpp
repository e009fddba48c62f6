// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "privshare/closed_form.hpp"
#include "privshare/dual_solver.hpp"
#include "privshare/oracle.hpp"
#include "support.hpp"

namespace privshare {
namespace {

double feasibility(const Instance& in, const Strategy& d, double mu) {
  const auto a = difference(in);
  double pmf = 0, money = -mu, box = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    pmf += a[i] * d[i];
    money += in.w[i] * d[i];
    box = std::max({box, -d[i], d[i] - 1});
  }
  return std::max({std::abs(pmf), std::abs(money), box});
}

TEST(BruteForce, Ex1Segment) {
  const auto in = testing::ex1();
  const auto r = brute_force(Kind::kSed, in, 0.7948);
  EXPECT_EQ(r.method, OracleMethod::kSegmentGrid);
  EXPECT_NEAR(r.risk, 0.0942, 1e-4);
  EXPECT_LE(feasibility(in, r.delta, 0.7948), 1e-8);
}

TEST(BruteForce, Endpoints) {
  std::mt19937_64 rng(1);
  for (Kind kind : kAllKinds) {
    const auto in = testing::random_instance(rng, 5);
    const auto z = brute_force(kind, in, 0);
    EXPECT_EQ(z.risk, 0);
    for (double d : z.delta) EXPECT_EQ(d, 0);
    const auto f = brute_force(kind, in, mu_max(in));
    for (double d : f.delta) EXPECT_EQ(d, 1);
    EXPECT_NEAR(f.risk, risk(kind, in.q, in.p), 1e-12);
  }
}

TEST(BruteForce, Infeasible) {
  try {
    brute_force(Kind::kSed, testing::ex1(), 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

TEST(BruteForce, DescentFeasibleAndNotBetterThanSolver) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (Kind kind : kAllKinds) {
    for (int k = 0; k < 8; ++k) {
      const auto in = testing::random_instance(rng, 4 + k % 3);
      const double mu = mu_max(in) * unit(rng);
      const auto r = brute_force(kind, in, mu);
      EXPECT_EQ(r.method, OracleMethod::kProjectedDescent);
      EXPECT_LE(feasibility(in, r.delta, mu), 1e-8);
      const auto s = solve(kind, in, mu);
      EXPECT_GE(r.risk, s.risk - 1e-9);
      EXPECT_LE(r.risk, s.risk + 1e-7);
    }
  }
}

TEST(BruteForce, PermutationInvariant) {
  std::mt19937_64 rng(3);
  for (std::size_t n : {3u, 5u}) {
    const auto in = testing::random_instance(rng, n);
    Instance rev = in;
    std::reverse(rev.q.begin(), rev.q.end());
    std::reverse(rev.p.begin(), rev.p.end());
    std::reverse(rev.w.begin(), rev.w.end());
    const double mu = 0.4 * mu_max(in);
    EXPECT_NEAR(brute_force(Kind::kKl, in, mu).risk, brute_force(Kind::kKl, rev, mu).risk, 1e-9);
  }
}

TEST(Certify, Examples) {
  const auto in = testing::ex1();
  EXPECT_TRUE(certify(Kind::kSed, in, 0.8974, solve(Kind::kSed, in, 0.8974)).pass);
  const auto closed = std::get<Solution>(solve_n3_sed(Kind::kSed, in, 0.5));
  EXPECT_TRUE(certify(Kind::kSed, in, 0.5, closed).pass);

  auto bad = solve(Kind::kSed, in, 0.8974);
  std::swap(bad.delta[0], bad.delta[1]);
  const auto r = certify(Kind::kSed, in, 0.8974, bad);
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.gap > 0 || !r.kkt.pass);
}

}  // namespace
}  // namespace privshare
