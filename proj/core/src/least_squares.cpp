#include "magnonfit/least_squares.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/LevenbergMarquardt>

namespace magnonfit {

namespace {

Eigen::VectorXd resolve_scale(const LeastSquaresProblem& p) {
  if (p.scale.size() == p.initial.size()) return p.scale.cwiseAbs();
  Eigen::VectorXd s(p.initial.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = p.initial(i) != 0.0 ? std::abs(p.initial(i)) : 1.0;
  return s;
}

// Works in scaled coordinates x = (p − origin)/scale.
struct ScaledFunctor : Eigen::DenseFunctor<double> {
  ScaledFunctor(const LeastSquaresProblem& problem, Eigen::VectorXd origin, Eigen::VectorXd scale, double step)
      : Eigen::DenseFunctor<double>(static_cast<int>(problem.initial.size()), problem.n_residuals),
        problem_(problem),
        origin_(std::move(origin)),
        scale_(std::move(scale)),
        step_(step) {}

  Eigen::VectorXd to_physical(const InputType& x) const { return origin_ + scale_.cwiseProduct(x); }

  int operator()(const InputType& x, ValueType& fvec) const {
    const Eigen::VectorXd p = to_physical(x);
    fvec.resize(values());
    problem_.residuals(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                       std::span<double>(fvec.data(), static_cast<std::size_t>(fvec.size())));
    ++evaluations;
    for (Eigen::Index i = 0; i < fvec.size(); ++i) {
      if (!std::isfinite(fvec(i))) return -1;
    }
    return 0;
  }

  int df(const InputType& x, JacobianType& jac) const {
    jac.resize(values(), inputs());
    ValueType fp, fm;
    InputType xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double h = step_ * (1.0 + std::abs(x(j)));
      xp(j) = x(j) + h;
      if ((*this)(xp, fp) < 0) return -1;
      xp(j) = x(j) - h;
      if ((*this)(xp, fm) < 0) return -1;
      xp(j) = x(j);
      jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return 0;
  }

  const LeastSquaresProblem& problem_;
  Eigen::VectorXd origin_;
  Eigen::VectorXd scale_;
  double step_;
  mutable int evaluations = 0;
};

std::string status_text(Eigen::LevenbergMarquardtSpace::Status s) {
  using namespace Eigen::LevenbergMarquardtSpace;
  switch (s) {
    case RelativeReductionTooSmall: return "relative reduction below ftol";
    case RelativeErrorTooSmall: return "relative step below xtol";
    case RelativeErrorAndReductionTooSmall: return "step and reduction below tolerance";
    case CosinusTooSmall: return "residual orthogonal to Jacobian";
    case TooManyFunctionEvaluation: return "evaluation budget exhausted";
    case FtolTooSmall: return "no further reduction possible (ftol at machine precision)";
    case XtolTooSmall: return "no further improvement possible (xtol at machine precision)";
    case GtolTooSmall: return "gradient orthogonal at machine precision";
    case ImproperInputParameters: return "improper input parameters";
    case UserAsked: return "residual evaluation failed (non-finite value)";
    default: return "not started";
  }
}

bool is_converged(Eigen::LevenbergMarquardtSpace::Status s) {
  using namespace Eigen::LevenbergMarquardtSpace;
  switch (s) {
    case RelativeReductionTooSmall:
    case RelativeErrorTooSmall:
    case RelativeErrorAndReductionTooSmall:
    case CosinusTooSmall:
    case FtolTooSmall:
    case XtolTooSmall:
    case GtolTooSmall:
      return true;
    default:
      return false;
  }
}

Eigen::MatrixXd covariance_from(const ScaledFunctor& f, const Eigen::VectorXd& x, double ssr, int m) {
  const auto n = x.size();
  Eigen::MatrixXd jac;
  if (f.df(x, jac) < 0) {
    return Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  }
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  const double dof = static_cast<double>(m - n);
  if (cod.rank() < n || dof <= 0.0) {
    return Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  }
  const Eigen::MatrixXd cov_scaled = cod.pseudoInverse() * (ssr / dof);
  const auto& s = f.scale_;
  return s.asDiagonal() * cov_scaled * s.asDiagonal();
}

}  // namespace

LeastSquaresSolution solve_least_squares(const LeastSquaresProblem& problem, const LeastSquaresOptions& options) {
  const auto n = problem.initial.size();
  if (n == 0) throw std::invalid_argument("least squares: no parameters");
  if (problem.n_residuals < n) throw std::invalid_argument("least squares: fewer residuals than parameters");
  if (!problem.residuals) throw std::invalid_argument("least squares: residual function not set");

  ScaledFunctor functor(problem, problem.initial, resolve_scale(problem), options.jacobian_step);
  Eigen::LevenbergMarquardt<ScaledFunctor> lm(functor);
  lm.setXtol(options.xtol);
  lm.setFtol(options.ftol);
  lm.setGtol(0.0);
  lm.setMaxfev(options.max_evaluations);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const auto status = lm.minimize(x);

  LeastSquaresSolution sol;
  sol.params = functor.to_physical(x);
  Eigen::VectorXd fvec;
  const bool finite = functor(x, fvec) == 0;
  sol.residuals = fvec;
  sol.ssr = finite ? fvec.squaredNorm() : std::numeric_limits<double>::infinity();
  sol.converged = finite && is_converged(status);
  sol.status = status_text(status);
  sol.covariance = covariance_from(functor, x, sol.ssr, problem.n_residuals);
  sol.std_errors = sol.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  sol.evaluations = functor.evaluations;
  return sol;
}

LeastSquaresSolution solve_multistart(const LeastSquaresProblem& problem, int n_starts, double spread,
                                      std::uint64_t seed, const LeastSquaresOptions& options) {
  if (n_starts < 1) throw std::invalid_argument("multistart: need at least one start");
  const Eigen::VectorXd scale = resolve_scale(problem);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  LeastSquaresSolution best;
  best.ssr = std::numeric_limits<double>::infinity();
  int total_evaluations = 0;
  for (int start = 0; start < n_starts; ++start) {
    LeastSquaresProblem trial = problem;
    trial.scale = scale;
    if (start > 0) {
      for (Eigen::Index i = 0; i < trial.initial.size(); ++i) trial.initial(i) += spread * scale(i) * unit(rng);
    }
    auto sol = solve_least_squares(trial, options);
    total_evaluations += sol.evaluations;
    const bool better = (sol.converged && !best.converged) ||
                        (sol.converged == best.converged && sol.ssr < best.ssr);
    if (better) best = std::move(sol);
  }
  best.evaluations = total_evaluations;
  return best;
}

Eigen::MatrixXd covariance_at(const LeastSquaresProblem& problem, const Eigen::VectorXd& params,
                              double jacobian_step) {
  ScaledFunctor functor(problem, params, resolve_scale(problem), jacobian_step);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd fvec;
  functor(x, fvec);
  return covariance_from(functor, x, fvec.squaredNorm(), problem.n_residuals);
}

}  // namespace magnonfit
