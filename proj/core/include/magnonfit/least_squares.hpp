#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace magnonfit {

/// residuals = f(params). The residual count is fixed per problem.
using ResidualFunction = std::function<void(std::span<const double> params, std::span<double> residuals)>;

struct LeastSquaresProblem {
  ResidualFunction residuals;
  int n_residuals = 0;
  Eigen::VectorXd initial;  ///< physical units
  /// Natural scale of each parameter; the optimiser works on (p − p0)/scale.
  /// Empty means |p0|, or 1 where p0 is zero.
  Eigen::VectorXd scale;
};

struct LeastSquaresOptions {
  int max_evaluations = 20000;
  double xtol = 1e-12;
  double ftol = 1e-14;
  /// Relative step of the central-difference Jacobian, in scaled units.
  double jacobian_step = 1e-6;
};

struct LeastSquaresSolution {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  /// (JᵀJ)⁻¹ · SSR/(m − n), as returned by scipy's curve_fit.
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  double ssr = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::string status;
};

LeastSquaresSolution solve_least_squares(const LeastSquaresProblem& problem,
                                         const LeastSquaresOptions& options = {});

/// Runs the unperturbed start plus (n_starts − 1) starts perturbed uniformly
/// by ±spread·scale per parameter (seeded), and keeps the lowest SSR.
LeastSquaresSolution solve_multistart(const LeastSquaresProblem& problem, int n_starts = 5, double spread = 0.2,
                                      std::uint64_t seed = 0x5eed, const LeastSquaresOptions& options = {});

/// Covariance at params, using the same convention as the solver.
Eigen::MatrixXd covariance_at(const LeastSquaresProblem& problem, const Eigen::VectorXd& params,
                              double jacobian_step = 1e-6);

}  // namespace magnonfit
