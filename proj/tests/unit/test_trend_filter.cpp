#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tsr/error.hpp"
#include "tsr/trend_filter.hpp"
#include "tv2_instances.hpp"

using namespace tsr;

namespace {

Eigen::VectorXd as_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> ols_line(const std::vector<double>& x) {
  const double slope = oracle::ols_slope(x);
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  const double tbar = (n - 1.0) / 2.0;
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = mean + slope * (t - tbar);
  return out;
}

// Builds g from the multiplier and checks the stationarity residual.
double kkt_residual(const std::vector<double>& x, const Tv2Solution& sol, double lambda) {
  const auto d2 = second_diff(sol.u);
  std::vector<double> g(d2.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = std::clamp(sol.dual[i] / lambda, -1.0, 1.0);
    if (std::abs(d2[i]) > 1e-6) g[i] = d2[i] > 0 ? 1.0 : -1.0;
  }
  const auto dtg = second_diff_transpose(g);
  double worst = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    worst = std::max(worst, std::abs(2.0 * (sol.u[t] - x[t]) + lambda * dtg[t]));
  }
  return worst;
}

class BothMethods : public ::testing::TestWithParam<Tv2Method> {};

}  // namespace

TEST(SecondDiff, Examples) {
  EXPECT_EQ(second_diff(std::vector<double>{0, 1, 2, 3}), (std::vector<double>{0, 0}));
  EXPECT_EQ(second_diff(std::vector<double>{0, 1, 0}), (std::vector<double>{-2}));
  EXPECT_EQ(second_diff(std::vector<double>{1, 1, 1, 1, 1}), (std::vector<double>{0, 0, 0}));
  EXPECT_THROW(second_diff(std::vector<double>{1, 2}), InvalidInput);
}

TEST(SecondDiff, TransposeIsAdjoint) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> u(30), v(28);
  for (double& e : u) e = g(rng);
  for (double& e : v) e = g(rng);
  const auto du = second_diff(u);
  const auto dtv = second_diff_transpose(v);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) lhs += du[i] * v[i];
  for (std::size_t i = 0; i < u.size(); ++i) rhs += u[i] * dtv[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(Tv2Objective, Examples) {
  EXPECT_EQ(tv2_objective(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 4}, 7.0), 0.0);
  EXPECT_EQ(tv2_objective(std::vector<double>{0, 0, 0}, std::vector<double>{0, 1, 0}, 1.0), 3.0);
  EXPECT_EQ(tv2_objective(std::vector<double>{0, 1, 0}, std::vector<double>{0, 0, 0}, 0.5), 1.0);
  EXPECT_THROW(tv2_objective(std::vector<double>{0, 1, 0}, std::vector<double>{0, 0}, 1.0), InvalidInput);
}

TEST_P(BothMethods, ZeroLambdaReturnsInput) {
  const auto x = testdata::random_signal(50, 1);
  const auto sol = solve_tv2({x, 0.0}, {.method = GetParam()});
  EXPECT_EQ(sol.u, x);
  EXPECT_EQ(sol.objective, 0.0);
  EXPECT_TRUE(sol.converged);
}

TEST_P(BothMethods, HugeLambdaGivesOlsLine) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> x(64);
  for (int t = 0; t < 64; ++t) x[t] = 0.3 + 0.01 * t + g(rng);
  const auto sol = solve_tv2({x, 1e9}, {.method = GetParam()});
  const auto line = ols_line(x);
  for (int t = 0; t < 64; ++t) EXPECT_NEAR(sol.u[t], line[t], 1e-4);
}

TEST_P(BothMethods, MatchesBarrierOracleAtDefaultLambda) {
  for (int k = 0; k < 20; ++k) {
    const auto x = testdata::random_signal(32, 100 + k);
    const auto sol = solve_tv2({x, 100.0}, {.method = GetParam()});
    const auto ref = oracle::tv2_barrier(as_eigen(x), 100.0);
    ASSERT_LE(ref.primal - ref.dual, 1e-9 * std::max(1.0, ref.primal));
    EXPECT_TRUE(sol.converged);
    EXPECT_NEAR(sol.objective, ref.primal, 1e-6 * ref.primal) << "instance " << k;
  }
}

TEST_P(BothMethods, KktCertificate) {
  for (double lambda : {1.0, 10.0, 100.0, 1000.0}) {
    for (int k = 0; k < 5; ++k) {
      const auto x = testdata::random_signal(16 + 12 * k, 300 + k);
      const auto sol = solve_tv2({x, lambda}, {.method = GetParam()});
      ASSERT_TRUE(sol.converged) << "lambda " << lambda << " k " << k << " iterations " << sol.iterations;
      EXPECT_LE(kkt_residual(x, sol, lambda), 1e-4) << "lambda " << lambda << " k " << k;
      for (double y : sol.dual) EXPECT_LE(std::abs(y) / lambda, 1.0 + 1e-6);
    }
  }
}

TEST_P(BothMethods, NoWorseThanInputOrLine) {
  for (int k = 0; k < 10; ++k) {
    const auto x = testdata::random_signal(40, 500 + k);
    for (double lambda : {0.5, 5.0, 50.0}) {
      const auto sol = solve_tv2({x, lambda}, {.method = GetParam()});
      EXPECT_LE(sol.objective, tv2_objective(x, x, lambda) + 1e-12);
      EXPECT_LE(sol.objective, tv2_objective(x, ols_line(x), lambda) * (1.0 + 1e-6));
    }
  }
}

TEST_P(BothMethods, ShiftEquivariant) {
  const auto x = testdata::random_signal(48, 77);
  auto shifted = x;
  for (double& v : shifted) v += 3.25;
  const auto a = solve_tv2({x, 20.0}, {.method = GetParam()});
  const auto b = solve_tv2({shifted, 20.0}, {.method = GetParam()});
  for (std::size_t t = 0; t < x.size(); ++t) EXPECT_NEAR(b.u[t] - 3.25, a.u[t], 1e-6);
}

TEST_P(BothMethods, Deterministic) {
  const auto x = testdata::random_signal(64, 8);
  const auto a = solve_tv2({x, 30.0}, {.method = GetParam()});
  const auto b = solve_tv2({x, 30.0}, {.method = GetParam()});
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.dual, b.dual);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST_P(BothMethods, StoredObjectiveMatchesRecomputed) {
  const auto x = testdata::random_signal(64, 9);
  const auto sol = solve_tv2({x, 10.0}, {.method = GetParam()});
  EXPECT_NEAR(sol.objective, tv2_objective(x, sol.u, 10.0), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Tv2, BothMethods, ::testing::Values(Tv2Method::kAdmm, Tv2Method::kDualNewton),
                         [](const auto& info) {
                           return info.param == Tv2Method::kAdmm ? std::string("Admm") : std::string("DualNewton");
                         });

TEST(SolveTv2, RejectsBadProblems) {
  EXPECT_THROW(solve_tv2({{1.0, 2.0}, 1.0}), InvalidInput);
  EXPECT_THROW(solve_tv2({{1.0, 2.0, 3.0}, -1.0}), InvalidInput);
  EXPECT_THROW(solve_tv2({{1.0, NAN, 3.0}, 1.0}), InvalidInput);
}

TEST(SolveTv2, IterationCapReportsNotConverged) {
  const auto x = testdata::random_signal(200, 10);
  Tv2Options opts;
  opts.max_iter = 3;
  const auto sol = solve_tv2({x, 100.0}, opts);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 3);
}

TEST(SolveTv2, DualNewtonHandlesFullWindows) {
  const auto x = testdata::random_signal(1024, 12, 0.02);
  const auto sol = solve_tv2({x, 100.0}, {.method = Tv2Method::kDualNewton});
  EXPECT_TRUE(sol.converged);
  EXPECT_LE(kkt_residual(x, sol, 100.0), 1e-4);
}

TEST(Tv2SystemFactor, CachedPerLengthAndRho) {
  const auto a = tv2_system_factor(100, 5.0);
  const auto b = tv2_system_factor(100, 5.0);
  const auto c = tv2_system_factor(100, 6.0);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_NE(a.get(), c.get());
}
