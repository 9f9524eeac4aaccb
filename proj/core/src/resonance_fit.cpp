#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "magnonfit/least_squares.hpp"
#include "magnonfit/spectro_fit.hpp"
#include "trace_stats.hpp"

namespace magnonfit {

namespace {

using cd = std::complex<double>;

constexpr const char* kNames[] = {"a", "Ql", "abs_Qc", "phi", "omega_res"};

struct InitialGuess {
  double a = 1.0;
  double omega_res = 0.0;
  double fwhm = 0.0;
  double depth = 0.0;
  double noise = 0.0;
  double significance = 0.0;
};

InitialGuess initial_guess(std::span<const double> w, std::span<const double> mag) {
  const std::size_t n = w.size();
  InitialGuess g;
  const std::size_t edge = std::max<std::size_t>(2, n / 10);
  std::vector<double> edges(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(edge));
  edges.insert(edges.end(), mag.end() - static_cast<std::ptrdiff_t>(edge), mag.end());
  g.a = detail::median(edges);

  const std::size_t box = std::max<std::size_t>(1, n / 60);
  const auto smooth = detail::boxcar(mag, box);
  const auto imin = static_cast<std::size_t>(std::min_element(smooth.begin(), smooth.end()) - smooth.begin());
  g.omega_res = w[imin];
  g.depth = 1.0 - smooth[imin] / g.a;
  g.noise = detail::noise_sigma(mag);

  const double half = g.a * (1.0 - 0.5 * g.depth);
  std::size_t lo = imin, hi = imin;
  while (lo > 0 && smooth[lo] < half) --lo;
  while (hi + 1 < n && smooth[hi] < half) ++hi;
  const bool lo_found = smooth[lo] >= half;
  const bool hi_found = smooth[hi] >= half;
  const double span = std::abs(w[n - 1] - w[0]);
  if (lo_found && hi_found) {
    g.fwhm = std::abs(w[hi] - w[lo]);
  } else if (lo_found) {
    g.fwhm = 2.0 * std::abs(w[imin] - w[lo]);
  } else if (hi_found) {
    g.fwhm = 2.0 * std::abs(w[hi] - w[imin]);
  } else {
    g.fwhm = span / 3.0;
  }
  const double step = span / static_cast<double>(n - 1);
  g.fwhm = std::max(g.fwhm, step);

  // Deepest excursion pure noise would reach in the smoothed trace.
  const double sigma_box = g.noise / std::sqrt(static_cast<double>(box));
  const double n_box = std::max(2.0, static_cast<double>(n) / static_cast<double>(box));
  const double floor = sigma_box * std::sqrt(2.0 * std::log(n_box));
  g.significance = floor > 0.0 ? g.depth * g.a / floor : std::numeric_limits<double>::infinity();
  return g;
}

ResonanceFit fit_impl(std::span<const double> w, std::span<const double> mag, std::span<const cd> complex_data,
                      const ResonanceFitOptions& opt) {
  if (w.size() != mag.size()) throw std::invalid_argument("fit_resonance: frequency and data lengths differ");
  if (w.size() < 7) throw std::invalid_argument("fit_resonance: need at least 7 points");
  for (double v : mag) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_resonance: non-finite sample");
  }

  const InitialGuess g = initial_guess(w, mag);
  if (!(g.depth > 0.0) || g.significance < opt.min_significance) {
    throw NoResonanceError("no resonance found: dip depth " + std::to_string(g.depth) +
                           " does not clear the noise floor (significance " + std::to_string(g.significance) + ")");
  }
  const double span = std::abs(w.back() - w.front());
  if (span < 3.0 * g.fwhm) {
    throw std::invalid_argument("fit_resonance: trace spans fewer than 3 linewidths");
  }

  const double depth = std::clamp(g.depth, 1e-4, 0.999);
  const double ql0 = g.omega_res / g.fwhm;
  Eigen::VectorXd p0(5);
  p0 << g.a, ql0, ql0 / depth, 0.0, g.omega_res;
  Eigen::VectorXd scale(5);
  scale << g.a, ql0, ql0 / depth, 1.0, g.fwhm;

  const bool complex_mode = opt.mode == ResidualMode::Complex;
  if (complex_mode && complex_data.size() != w.size()) {
    throw std::invalid_argument("fit_resonance: complex residuals need complex data");
  }
  LeastSquaresProblem problem;
  problem.initial = p0;
  problem.scale = scale;
  problem.n_residuals = static_cast<int>(complex_mode ? 2 * w.size() : w.size());
  problem.residuals = [w, mag, complex_data, complex_mode](std::span<const double> p, std::span<double> r) {
    // Same lineshape as s21_bare, expanded by hand for speed.
    const double a = p[0], ql = p[1], w0 = p[4];
    const double cr = ql / p[2] * std::cos(p[3]), ci = ql / p[2] * std::sin(p[3]);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double x = 2.0 * ql * (w[i] / w0 - 1.0);
      const double inv = 1.0 / (1.0 + x * x);
      const cd m(a * (1.0 - (cr + ci * x) * inv), -a * (ci - cr * x) * inv);
      if (complex_mode) {
        r[2 * i] = m.real() - complex_data[i].real();
        r[2 * i + 1] = m.imag() - complex_data[i].imag();
      } else {
        r[i] = std::sqrt(m.real() * m.real() + m.imag() * m.imag()) - mag[i];
      }
    }
  };

  LeastSquaresSolution sol = solve_multistart(problem, opt.n_starts, opt.start_spread, opt.seed);

  Eigen::VectorXd p = sol.params;
  std::string diag = sol.status;
  // |Qc| < 0 is the same lineshape as |Qc| > 0 with phi shifted by pi.
  if (p(2) < 0.0) {
    p(2) = -p(2);
    p(3) += std::numbers::pi;
  }
  p(3) = std::remainder(p(3), 2.0 * std::numbers::pi);
  bool converged = sol.converged;
  if (!(p(1) > 0.0) || !(p(0) > 0.0)) {
    converged = false;
    diag += "; non-physical solution (Ql or a not positive)";
  }

  ResonanceFit out;
  out.fit.covariance = sol.covariance;
  out.fit.residual_rms = std::sqrt(sol.ssr / problem.n_residuals);
  out.fit.evaluations = sol.evaluations;
  out.fit.converged = converged;
  out.fit.diagnostics = diag;
  for (int i = 0; i < 5; ++i) out.fit.params.push_back({kNames[i], p(i), sol.std_errors(i)});
  out.model = BareResonanceModel{p(4), p(1), p(2), p(3), p(0)};
  out.kappa = p(4) / p(1);
  const double rel_w = sol.std_errors(4) / p(4);
  const double rel_q = sol.std_errors(1) / p(1);
  const double cross = sol.covariance(4, 1) / (p(4) * p(1));
  out.kappa_error = std::abs(out.kappa) * std::sqrt(std::max(0.0, rel_w * rel_w + rel_q * rel_q - 2.0 * cross));
  out.depth = g.depth;
  out.noise = g.noise;
  out.depth_significance = g.significance;
  return out;
}

}  // namespace

ResonanceFit fit_resonance(std::span<const double> omegas, std::span<const cd> s21,
                           const ResonanceFitOptions& options) {
  std::vector<double> mag(s21.size());
  std::transform(s21.begin(), s21.end(), mag.begin(), [](cd v) { return std::abs(v); });
  return fit_impl(omegas, mag, s21, options);
}

ResonanceFit fit_resonance(std::span<const double> omegas, std::span<const double> magnitude,
                           const ResonanceFitOptions& options) {
  if (options.mode == ResidualMode::Complex) {
    throw std::invalid_argument("fit_resonance: complex residual mode needs complex data");
  }
  return fit_impl(omegas, magnitude, {}, options);
}

}  // namespace magnonfit
