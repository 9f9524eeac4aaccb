#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "magnonfit/least_squares.hpp"
#include "oracles.hpp"

using namespace magnonfit;

TEST(LeastSquares, LinearFitMatchesOlsOracle) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(0.25 * i);
    y.push_back(1.7 * x.back() - 4.0 + noise(rng));
  }
  LeastSquaresProblem p;
  p.n_residuals = static_cast<int>(x.size());
  p.initial = Eigen::Vector2d(1.0, 0.0);
  p.residuals = [&](std::span<const double> q, std::span<double> r) {
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = q[0] * x[i] + q[1] - y[i];
  };
  const auto sol = solve_least_squares(p);
  const auto ref = oracle::ols(x, y);
  EXPECT_TRUE(sol.converged);
  EXPECT_NEAR(sol.params[0], ref.slope, 1e-9);
  EXPECT_NEAR(sol.params[1], ref.intercept, 1e-9);
  EXPECT_NEAR(sol.std_errors[0], ref.slope_err, 1e-6 * ref.slope_err);
  EXPECT_NEAR(sol.std_errors[1], ref.intercept_err, 1e-6 * ref.intercept_err);
  EXPECT_NEAR(sol.covariance(0, 1), sol.covariance(1, 0), 1e-15);
}

TEST(LeastSquares, RecoversExponentialExactly) {
  std::vector<double> t, v;
  for (int i = 0; i < 200; ++i) {
    t.push_back(i * 1e-9);
    v.push_back(2.5 * std::exp(-t.back() / 30e-9));
  }
  LeastSquaresProblem p;
  p.n_residuals = 200;
  p.initial = Eigen::Vector2d(1.0, 10e-9);
  p.residuals = [&](std::span<const double> q, std::span<double> r) {
    for (int i = 0; i < 200; ++i) r[i] = q[0] * std::exp(-t[i] / q[1]) - v[i];
  };
  const auto sol = solve_least_squares(p);
  EXPECT_NEAR(sol.params[0], 2.5, 1e-9);
  EXPECT_NEAR(sol.params[1], 30e-9, 1e-17);
  EXPECT_LT(sol.ssr, 1e-20);
}

TEST(LeastSquares, MultistartIsDeterministicAndNoWorse) {
  LeastSquaresProblem p;
  p.n_residuals = 2;
  p.initial = Eigen::Vector2d(-1.2, 1.0);
  p.residuals = [](std::span<const double> q, std::span<double> r) {
    r[0] = 10.0 * (q[1] - q[0] * q[0]);
    r[1] = 1.0 - q[0];
  };
  const auto single = solve_least_squares(p);
  const auto a = solve_multistart(p);
  const auto b = solve_multistart(p);
  EXPECT_LE(a.ssr, single.ssr);
  EXPECT_EQ(a.params, b.params);
  EXPECT_NEAR(a.params[0], 1.0, 1e-6);
  EXPECT_NEAR(a.params[1], 1.0, 1e-6);
}

TEST(LeastSquares, RejectsBadProblems) {
  LeastSquaresProblem p;
  p.n_residuals = 1;
  p.initial = Eigen::Vector2d(0.0, 0.0);
  p.residuals = [](std::span<const double>, std::span<double> r) { r[0] = 0.0; };
  EXPECT_THROW(solve_least_squares(p), std::invalid_argument);
  p.n_residuals = 3;
  p.residuals = nullptr;
  EXPECT_THROW(solve_least_squares(p), std::invalid_argument);
}
