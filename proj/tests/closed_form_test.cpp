// Copyright 2026 The privshare Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <variant>

#include "privshare/closed_form.hpp"
#include "privshare/dual_solver.hpp"
#include "privshare/oracle.hpp"
#include "support.hpp"

namespace privshare {
namespace {

ErrorCode error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kInvalidArgument;
}

double max_dev(const Strategy& a, const Strategy& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

TEST(SlopeStats, Ex1) {
  const auto in = testing::ex1();
  const auto st = slope_stats(in);
  // Reference values straight from the raw fixture numbers.
  const double m1 = 0.404 / 0.361, m2 = 0.044 / -0.144, m3 = 0.552 / -0.217;
  EXPECT_NEAR(st.m()[0], m1, 1e-12);
  EXPECT_NEAR(st.m()[1], m2, 1e-12);
  EXPECT_NEAR(st.m()[2], m3, 1e-12);
  EXPECT_NEAR(st.m()[0], 1.1191, 1e-4);
  EXPECT_NEAR(st.m()[2], -2.5438, 1e-4);
  EXPECT_EQ(st.order(), (std::vector<std::size_t>{0, 1, 2}));
  const double mean = (m1 + m3) / 2;
  const double var = ((m1 - mean) * (m1 - mean) + (m3 - mean) * (m3 - mean)) / 2;
  EXPECT_NEAR(st.mean_excluding(1), mean, 1e-12);
  EXPECT_NEAR(st.var_excluding(1), var, 1e-12);
  EXPECT_NEAR(st.mean_excluding(1), -0.7123, 1e-4);
  EXPECT_NEAR(st.var_excluding(1), 3.3542, 1e-4);
  const std::vector<double> want{1.513, -0.842, 2.516};
  const auto a = difference(in);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(st.v(i, 1) / a[i], want[i], 1e-3);
}

TEST(SlopeStats, AllSlopesWhenNothingExcluded) {
  const auto st = slope_stats(testing::ex1());
  const auto& m = st.m();
  EXPECT_NEAR(st.mean_excluding(), (m[0] + m[1] + m[2]) / 3, 1e-15);
  EXPECT_GT(st.var_excluding(), 0);
}

TEST(MoneyThreshold, Ex1) {
  const auto in = testing::ex1();
  EXPECT_NEAR(money_threshold_n3(in, 1), 0.7948, 5e-5);
  const auto st = slope_stats(in);
  const double other = 2 * 0.361 * st.var_excluding(1) / (st.m()[0] - st.mean_excluding(1));
  EXPECT_NEAR(other, 1.3224, 2e-4);
  EXPECT_GT(other, money_threshold_n3(in, 1));
}

TEST(MoneyThreshold, Degenerate) {
  // Tied slopes m_1 = m_2.
  const Instance tied{{}, {0.5, 0.25, 0.25}, {0.25, 0.125, 0.625}, {0.5, 0.25, 0.75}};
  EXPECT_EQ(error_of([&] { money_threshold_n3(tied, 1); }), ErrorCode::kDegenerate);
  // m_2 equals the mean of all three slopes.
  const Instance centred{{}, {0.5, 0.25, 0.25}, {0.25, 0.125, 0.625}, {1, 0.125, 0.75}};
  EXPECT_EQ(error_of([&] { money_threshold_n3(centred, 2); }), ErrorCode::kDegenerate);
  EXPECT_EQ(error_of([&] { money_threshold_n3(testing::ex2(), 1); }), ErrorCode::kWrongArity);
  EXPECT_TRUE(std::holds_alternative<Fallback>(solve_n3_sed(Kind::kSed, tied, 0.1)));
}

TEST(SolveN3, Ex1) {
  const auto in = testing::ex1();
  const double mu1 = money_threshold_n3(in, 1);
  const auto s = std::get<Solution>(solve_n3_sed(Kind::kSed, in, mu1));
  EXPECT_NEAR(s.delta[0], 0.6011, 1e-4);
  EXPECT_EQ(s.delta[1], 0.0);
  EXPECT_NEAR(s.delta[2], 1.0, 1e-12);
  EXPECT_NEAR(s.risk, 0.0942, 5e-5);
  EXPECT_NEAR(s.risk / 0.198146, 0.4753, 1e-4);
  EXPECT_EQ(s.method, Method::kClosedN3);

  const auto small = std::get<Solution>(solve_n3_sed(Kind::kSed, in, 0.01));
  EXPECT_NEAR(small.risk, 1.4907e-5, 1e-9);
  EXPECT_NEAR(small.risk, risk_n3_sed(in, 0.01), 1e-15);

  EXPECT_TRUE(std::holds_alternative<Fallback>(solve_n3_sed(Kind::kSed, in, 0.9)));
  EXPECT_EQ(error_of([&] { solve_n3_sed(Kind::kKl, in, 0.1); }), ErrorCode::kWrongKind);
  EXPECT_EQ(error_of([&] { solve_n3_sed(Kind::kSed, testing::ex2(), 0.1); }),
            ErrorCode::kWrongArity);
}

TEST(SolveN3, AgreesWithSolverAndOracle) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int covered = 0;
  for (int k = 0; k < 400 && covered < 100; ++k) {
    const auto in = testing::random_instance(rng, 3);
    double top = 0;
    try {
      top = std::min(money_threshold_n3(in, n3_case(in)), mu_max(in));
    } catch (const Error&) {
      continue;
    }
    if (!(top > 0)) continue;
    ++covered;
    const double mu = top * unit(rng);
    const auto s = std::get<Solution>(solve_n3_sed(Kind::kSed, in, mu));
    const auto d = solve(Kind::kSed, in, mu);
    EXPECT_LE(max_dev(s.delta, d.delta), 1e-8);
    EXPECT_NEAR(s.risk, d.risk, 1e-8);
    EXPECT_NEAR(s.risk, risk_n3_sed(in, mu), 1e-12);
    EXPECT_TRUE(certify(Kind::kSed, in, mu, s).pass);
    // Quadratic growth and never a single positive component.
    if (mu > 0) {
      const double mu2 = 0.5 * mu;
      const auto h = std::get<Solution>(solve_n3_sed(Kind::kSed, in, mu2));
      EXPECT_NEAR(s.risk / (mu * mu), h.risk / (mu2 * mu2), 1e-9);
      int positive = 0;
      for (double x : s.delta) positive += x > 0;
      EXPECT_GE(positive, 2);
    }
  }
  EXPECT_EQ(covered, 100);
}

TEST(SolveN2, Ex2) {
  const auto in = testing::ex2();
  const auto s = std::get<Solution>(solve_n2(Kind::kSed, in, 1.5));
  EXPECT_EQ(s.delta, (std::vector<double>{0.5, 0.5}));
  EXPECT_NEAR(s.t[0], 0.55, 1e-15);
  EXPECT_NEAR(s.t[1], 0.45, 1e-15);
  EXPECT_NEAR(s.risk, 0.045, 1e-15);
  const auto z = std::get<Solution>(solve_n2(Kind::kSed, in, 0));
  EXPECT_EQ(z.risk, 0);
  const auto f = std::get<Solution>(solve_n2(Kind::kSed, in, 3));
  EXPECT_EQ(f.delta, (std::vector<double>{1, 1}));
  EXPECT_NEAR(f.risk, 0.18, 1e-15);
  EXPECT_EQ(error_of([&] { solve_n2(Kind::kSed, testing::ex1(), 0.1); }),
            ErrorCode::kWrongArity);
  EXPECT_EQ(error_of([&] { solve_n2(Kind::kSed, in, 3.5); }),
            ErrorCode::kOfferOutOfRange);
}

TEST(SolveN2, KlRiskMatchesFormulaAndOracleGrid) {
  const auto in = testing::ex2();
  for (double mu : {0.3, 1.5, 2.7}) {
    const auto s = std::get<Solution>(solve_n2(Kind::kKl, in, mu));
    const double x = mu / 3.0;
    const double want = (0.3 * x + 0.4) * std::log(0.3 * x / 0.4 + 1) +
                        (-0.3 * x + 0.6) * std::log(-0.3 * x / 0.6 + 1);
    EXPECT_NEAR(s.risk, want, 1e-15);
    EXPECT_NEAR(s.risk, brute_force(Kind::kKl, in, mu).risk, 1e-15);
  }
}

TEST(SolveN2, AgreesWithSolverAllKinds) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Kind kind : kAllKinds) {
    for (int k = 0; k < 100; ++k) {
      const auto in = testing::random_instance(rng, 2);
      for (int j = 0; j < 10; ++j) {
        const double mu = mu_max(in) * unit(rng);
        const auto s = std::get<Solution>(solve_n2(kind, in, mu));
        const auto d = solve(kind, in, mu);
        EXPECT_LE(max_dev(s.delta, d.delta), 1e-8);
        EXPECT_NEAR(s.risk, d.risk, 1e-8);
      }
    }
  }
}

TEST(ConicalThresholds, TelescopingSums) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto in = testing::random_instance(rng, 3 + k % 4);
    const auto d = detail::conical_data(in);
    EXPECT_NEAR(d.tail_a(1), 0.0, 1e-15);
    EXPECT_NEAR(d.tail_w(1), mu_max(in), 1e-15);
  }
}

TEST(ConicalThresholds, TableShape) {
  std::mt19937_64 rng(3);
  const auto in = testing::conical_instance(rng, 5);
  const auto t = conical_thresholds(in);
  // (k, j) with k = 7..10, j = 1..12-k, minus the cells with no free slot.
  EXPECT_EQ(t.cells.size(), 10u);
  for (const auto& c : t.cells) {
    EXPECT_EQ(c.free_count, 12 - c.k - c.j);
    if (c.j == 1) EXPECT_NEAR(c.mu, 0.0, 1e-12);
  }
}

// The cells below pin down what the cell formulas actually produce; see the
// project notes on the conical closed form.
TEST(ConicalThresholds, N3CellsDoNotReproduceTheTwoActiveThreshold) {
  const auto in = testing::ex1();
  const double mu1 = money_threshold_n3(in, 1);
  for (const auto& c : conical_thresholds(in).cells) {
    EXPECT_GT(std::abs(c.mu - mu1), 0.1);
  }
}

TEST(SolveConical, GuardedAgainstInfeasibleCells) {
  std::mt19937_64 rng(11);
  int covered = 0;
  for (int k = 0; k < 600; ++k) {
    const auto in = testing::conical_instance(rng, 4 + k % 2);
    const auto t = conical_thresholds(in);
    for (const auto& c : t.cells) {
      const auto* below = t.find(c.k + 1, c.j);
      if (c.free_count < 2 || !below) continue;
      const double lo = std::max(below->mu, 0.0), hi = std::min(c.mu, mu_max(in));
      if (!(lo < hi)) continue;
      const double mu = 0.5 * (lo + hi);
      ++covered;
      const auto r = solve_conical_sed(Kind::kSed, in, mu);
      const auto d = solve(Kind::kSed, in, mu);
      if (const auto* s = std::get_if<Solution>(&r)) {
        EXPECT_LE(max_dev(s->delta, d.delta), 1e-8);
      } else {
        // The raw cell strategy is not the optimum.
        EXPECT_GT(max_dev(conical_candidate(in, c.k, c.j, mu).delta, d.delta), 1e-3);
      }
    }
  }
  EXPECT_GT(covered, 0);
}

TEST(SolveConical, CandidateSatisfiesItsOwnConstraints) {
  std::mt19937_64 rng(12);
  const auto in = testing::conical_instance(rng, 5);
  const auto a = difference(in);
  for (const auto& c : conical_thresholds(in).cells) {
    if (c.free_count < 2) continue;
    const double mu = 0.3 * mu_max(in);
    const auto s = conical_candidate(in, c.k, c.j, mu);
    double pmf = 0, money = -mu;
    for (std::size_t i = 0; i < in.size(); ++i) {
      pmf += a[i] * s.delta[i];
      money += in.w[i] * s.delta[i];
    }
    EXPECT_NEAR(pmf, 0, 1e-12);
    EXPECT_NEAR(money, 0, 1e-12);
  }
}

TEST(SolveConical, ScopeAndErrors) {
  std::mt19937_64 rng(13);
  const auto in = testing::conical_instance(rng, 4);
  EXPECT_EQ(error_of([&] { solve_conical_sed(Kind::kKl, in, 0.1); }), ErrorCode::kWrongKind);
  std::mt19937_64 r2(14);
  const auto generic = testing::random_instance(r2, 4);
  EXPECT_EQ(error_of([&] { solve_conical_sed(Kind::kSed, generic, 0.1); }),
            ErrorCode::kNotConical);
  // Offers above every cell fall back to the dual solver.
  EXPECT_TRUE(std::holds_alternative<Fallback>(
      solve_conical_sed(Kind::kSed, in, mu_max(in))));
}

}  // namespace
}  // namespace privshare
