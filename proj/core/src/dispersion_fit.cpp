#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/least_squares.hpp"
#include "magnonfit/spectro_fit.hpp"

namespace magnonfit {

namespace {

FitResult to_fit_result(const LeastSquaresSolution& sol, std::initializer_list<const char*> names) {
  FitResult r;
  int i = 0;
  for (const char* n : names) {
    r.params.push_back({n, sol.params(i), sol.std_errors(i)});
    ++i;
  }
  r.covariance = sol.covariance;
  r.residual_rms = sol.residuals.size() > 0 ? std::sqrt(sol.ssr / static_cast<double>(sol.residuals.size())) : 0.0;
  r.evaluations = sol.evaluations;
  r.converged = sol.converged;
  r.diagnostics = sol.status;
  return r;
}

double kittel(double b0, double gamma, double meff) {
  MagnonParams m;
  m.gamma = gamma;
  m.mu0_meff = meff;
  m.thickness = 1.0;
  return kittel_frequency(b0, m);
}

}  // namespace

CrossingFit fit_avoided_crossing(std::span<const SplittingPoint> points) {
  if (points.size() < 4) throw std::invalid_argument("fit_avoided_crossing: need at least 4 field points");
  std::vector<SplittingPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.field < b.field; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].field == pts[i - 1].field) throw std::invalid_argument("fit_avoided_crossing: duplicate field");
  }
  const bool weighted = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.error > 0.0; });

  const auto imin = static_cast<std::size_t>(
      std::min_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.splitting < b.splitting; }) -
      pts.begin());
  const double g0 = 0.5 * pts[imin].splitting;
  const double b0 = pts[imin].field;
  const double b_lo = pts.front().field;
  const double b_hi = pts.back().field;

  // Slope guess from the point farthest from the minimum.
  const auto& far = std::abs(pts.front().field - b0) > std::abs(pts.back().field - b0) ? pts.front() : pts.back();
  double slope0 = std::sqrt(std::max(0.0, far.splitting * far.splitting - 4.0 * g0 * g0)) /
                  std::max(std::abs(far.field - b0), 1e-12);
  if (!(slope0 > 0.0)) slope0 = 2.0 * g0 / std::max(b_hi - b_lo, 1e-12);

  LeastSquaresProblem problem;
  problem.n_residuals = static_cast<int>(pts.size());
  problem.initial = Eigen::Vector3d(g0, b0, slope0);
  problem.scale = Eigen::Vector3d(std::max(std::abs(g0), 1.0), std::max(b_hi - b_lo, 1e-9) * 0.1, std::abs(slope0));
  problem.residuals = [pts, weighted](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = p[2] * (pts[i].field - p[1]);
      const double model = std::sqrt(d * d + 4.0 * p[0] * p[0]);
      r[i] = (model - pts[i].splitting) / (weighted ? pts[i].error : 1.0);
    }
  };
  const auto sol = solve_multistart(problem);

  CrossingFit out;
  out.fit = to_fit_result(sol, {"g", "b_res", "gamma_rm"});
  out.g = std::abs(sol.params(0));
  out.b_res = sol.params(1);
  out.gamma_rm = std::abs(sol.params(2));
  out.g_error = sol.std_errors(0);
  out.b_res_error = sol.std_errors(1);
  out.gamma_rm_error = sol.std_errors(2);
  out.fit.params[0].value = out.g;
  out.fit.params[2].value = out.gamma_rm;

  const bool one_sided = imin == 0 || imin + 1 == pts.size() || out.b_res <= b_lo || out.b_res >= b_hi;
  if (one_sided) {
    out.warning = "ill-conditioned: all fields lie on one side of the fitted resonance field";
  }
  return out;
}

double DispersionFit::resonance_field(double gamma, double b_lo, double b_hi) const {
  auto f = [&](double b) { return kittel(b, gamma, mu0_meff) - (omega_r0 + gamma_r * b); };
  double lo = std::max(0.0, b_lo), hi = b_hi;
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0.0) {
    throw std::runtime_error("resonance_field: magnon and resonator frequencies do not cross in the field range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

DispersionFit fit_branch_dispersion(const BranchTable& branches, const DispersionFitOptions& options) {
  if (!(options.gamma > 0.0)) throw std::invalid_argument("fit_branch_dispersion: gamma must be positive");
  const auto& pts = branches.points;
  if (pts.size() < 5) throw std::invalid_argument("fit_branch_dispersion: need at least 5 branch points");
  const bool has_up = std::any_of(pts.begin(), pts.end(), [](const auto& p) { return p.branch == Branch::Upper; });
  const bool has_lo = std::any_of(pts.begin(), pts.end(), [](const auto& p) { return p.branch == Branch::Lower; });
  if (!has_up || !has_lo) throw std::invalid_argument("fit_branch_dispersion: both branches must be present");

  const bool weighted =
      options.weighted && std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.omega_error > 0.0; });
  const double gamma = options.gamma;
  const auto& init = options.initial;

  LeastSquaresProblem problem;
  problem.n_residuals = static_cast<int>(pts.size());
  problem.initial = Eigen::Vector4d(init.mu0_meff, init.g, init.omega_r0, init.gamma_r);
  const double w_scale = std::max(std::abs(init.g), 1e-6 * std::abs(init.omega_r0));
  problem.scale = Eigen::Vector4d(std::max(0.1 * std::abs(init.mu0_meff), 1e-3), w_scale, w_scale,
                                  std::max(std::abs(init.gamma_r), w_scale / 0.1));
  problem.residuals = [&pts, weighted, gamma](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double b = pts[i].field;
      const double wm = b >= 0.0 && b + p[0] >= 0.0 ? kittel(b, gamma, p[0]) : 0.0;
      const auto f = coupled_branch_frequencies(p[2] + p[3] * b, wm, std::abs(p[1]));
      const double model = pts[i].branch == Branch::Upper ? f.plus : f.minus;
      r[i] = (model - pts[i].omega) / (weighted ? pts[i].omega_error : 1.0);
    }
  };
  const auto sol = solve_least_squares(problem);

  DispersionFit out;
  out.fit = to_fit_result(sol, {"mu0_meff", "g", "omega_r0", "gamma_r"});
  out.mu0_meff = sol.params(0);
  out.g = std::abs(sol.params(1));
  out.fit.params[1].value = out.g;
  out.omega_r0 = sol.params(2);
  out.gamma_r = sol.params(3);
  out.mu0_meff_error = sol.std_errors(0);
  out.g_error = sol.std_errors(1);
  out.omega_r0_error = sol.std_errors(2);
  out.gamma_r_error = sol.std_errors(3);
  return out;
}

double LinewidthFit::kappa_r_error(double b0) const {
  const double d = b0 - b_ref;
  if (fit.covariance.rows() < 2) return 0.0;
  const auto& c = fit.covariance;
  return std::sqrt(std::max(0.0, c(0, 0) + d * d * c(1, 1) + 2.0 * d * c(0, 1)));
}

LinewidthFit fit_branch_linewidths(const BranchTable& branches, const DispersionFit& dispersion, double gamma,
                                   double b_ref, double kappa_m_guess) {
  const auto& pts = branches.points;
  if (pts.size() < 4) throw std::invalid_argument("fit_branch_linewidths: need at least 4 branch points");
  if (!(gamma > 0.0)) throw std::invalid_argument("fit_branch_linewidths: gamma must be positive");
  const bool weighted = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.kappa_error > 0.0; });

  double k0 = std::numeric_limits<double>::infinity();
  double b_lo = std::numeric_limits<double>::infinity(), b_hi = -b_lo;
  for (const auto& p : pts) {
    k0 = std::min(k0, p.kappa);
    b_lo = std::min(b_lo, p.field);
    b_hi = std::max(b_hi, p.field);
  }
  k0 = std::max(k0, 1e-9 * std::abs(dispersion.omega_r0));
  const double km0 = kappa_m_guess > 0.0 ? kappa_m_guess : 10.0 * k0;
  const double span = std::max(b_hi - b_lo, 1e-6);

  LeastSquaresProblem problem;
  problem.n_residuals = static_cast<int>(pts.size());
  problem.initial = Eigen::Vector3d(k0, 0.0, km0);
  problem.scale = Eigen::Vector3d(k0, k0 / span, km0);
  const DispersionFit d = dispersion;
  problem.residuals = [&pts, d, gamma, b_ref, weighted](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double b = pts[i].field;
      const double wr = d.omega_r0 + d.gamma_r * b;
      const double wm = kittel(b, gamma, d.mu0_meff);
      const double kr = p[0] + p[1] * (b - b_ref);
      const auto k = branch_linewidths(wr, kr, wm, p[2], d.g);
      const double model = pts[i].branch == Branch::Upper ? k.plus : k.minus;
      r[i] = (model - pts[i].kappa) / (weighted ? pts[i].kappa_error : 1.0);
    }
  };
  const auto sol = solve_multistart(problem);

  LinewidthFit out;
  out.fit = to_fit_result(sol, {"kappa_r0", "kappa_r_slope", "kappa_m"});
  out.kappa_r0 = sol.params(0);
  out.kappa_r_slope = sol.params(1);
  out.kappa_m = sol.params(2);
  out.kappa_r0_error = sol.std_errors(0);
  out.kappa_r_slope_error = sol.std_errors(1);
  out.kappa_m_error = sol.std_errors(2);
  out.b_ref = b_ref;
  return out;
}

double interpolate_kappa_r(std::span<const std::pair<double, double>> anchors, double b_target) {
  if (anchors.size() < 2) throw std::invalid_argument("interpolate_kappa_r: need at least 2 anchors");
  std::set<double> seen;
  double sx = 0.0, sy = 0.0;
  for (const auto& [b, k] : anchors) {
    if (!seen.insert(b).second) throw std::invalid_argument("interpolate_kappa_r: duplicate anchor field");
    sx += b;
    sy += k;
  }
  const double n = static_cast<double>(anchors.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [b, k] : anchors) {
    sxx += (b - mx) * (b - mx);
    sxy += (b - mx) * (k - my);
  }
  return my + sxy / sxx * (b_target - mx);
}

KappaMEstimate kappa_m_from_branches(double kappa_plus, double kappa_minus, double kappa_r) {
  if (kappa_plus < 0.0 || kappa_minus < 0.0 || kappa_r < 0.0) {
    throw std::invalid_argument("kappa_m_from_branches: linewidths must be non-negative");
  }
  KappaMEstimate out;
  out.kappa_m = kappa_plus + kappa_minus - kappa_r;
  if (out.kappa_m < 0.0) {
    out.physical = false;
    out.diagnostic = "unphysical: kappa_+ + kappa_- is smaller than kappa_r";
  }
  return out;
}

}  // namespace magnonfit
