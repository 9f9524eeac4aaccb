#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "magnonfit/least_squares.hpp"
#include "magnonfit/ringdown.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit {

namespace {

struct Window {
  std::vector<double> t;  ///< relative to t_start
  std::vector<double> v;
};

Window post_drive(const RingdownTrace& tr, double t_start) {
  if (tr.times.size() != tr.voltage.size()) throw std::invalid_argument("ringdown trace: ragged columns");
  if (t_start < tr.drive_on_until) throw std::invalid_argument("decay fit: t_start precedes drive switch-off");
  Window w;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    if (tr.times[k] >= t_start) {
      w.t.push_back(tr.times[k] - t_start);
      w.v.push_back(tr.voltage[k]);
    }
  }
  if (w.t.size() < 10) throw std::invalid_argument("decay fit: need at least 10 samples after t_start");
  return w;
}

/// Slope and intercept of ln|v| against t, or nullopt-like NaN when the trace changes sign.
std::pair<double, double> log_linear(const Window& w) {
  const bool pos = std::all_of(w.v.begin(), w.v.end(), [](double x) { return x > 0.0; });
  const bool neg = std::all_of(w.v.begin(), w.v.end(), [](double x) { return x < 0.0; });
  if (!pos && !neg) return {std::nan(""), std::nan("")};
  const double n = static_cast<double>(w.t.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < w.t.size(); ++i) {
    mx += w.t[i];
    my += std::log(std::abs(w.v[i]));
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < w.t.size(); ++i) {
    sxx += (w.t[i] - mx) * (w.t[i] - mx);
    sxy += (w.t[i] - mx) * (std::log(std::abs(w.v[i])) - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

FitResult make_result(const LeastSquaresSolution& sol, std::initializer_list<const char*> names) {
  FitResult r;
  int i = 0;
  for (const char* n : names) {
    r.params.push_back({n, sol.params(i), sol.std_errors(i)});
    ++i;
  }
  r.covariance = sol.covariance;
  r.residual_rms = std::sqrt(sol.ssr / static_cast<double>(sol.residuals.size()));
  r.evaluations = sol.evaluations;
  r.converged = sol.converged;
  r.diagnostics = sol.status;
  return r;
}

DecayFit no_decay(double amplitude) {
  DecayFit out;
  out.tau_voltage = std::numeric_limits<double>::infinity();
  out.tau_error = std::numeric_limits<double>::infinity();
  out.decay_detected = false;
  out.warning = "no decay detected";
  out.fit.params = {{"amplitude", amplitude, 0.0}, {"tau_voltage", out.tau_voltage, out.tau_error}};
  out.fit.converged = false;
  out.fit.diagnostics = out.warning;
  return out;
}

DecayFit fit_decay_window(const Window& w) {
  const double span = w.t.back() - w.t.front();
  double vmax = 0.0;
  for (double x : w.v) vmax = std::max(vmax, std::abs(x));
  if (vmax == 0.0) return no_decay(0.0);

  const auto [slope, icpt] = log_linear(w);
  double a0, tau0;
  if (std::isfinite(slope)) {
    // Decay shorter than 1e-9 of the window relative change counts as flat.
    if (!(slope * span < -1e-9)) return no_decay(std::copysign(std::exp(icpt), w.v.front()));
    a0 = std::copysign(std::exp(icpt), w.v.front());
    tau0 = -1.0 / slope;
  } else {
    // Sign changes: seed from the first and last quarter RMS.
    const std::size_t q = std::max<std::size_t>(2, w.t.size() / 4);
    double r1 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      r1 += w.v[i] * w.v[i];
      r2 += w.v[w.v.size() - 1 - i] * w.v[w.v.size() - 1 - i];
    }
    a0 = w.v.front();
    tau0 = r2 > 0.0 && r1 > r2 ? 2.0 * (w.t[w.t.size() - q / 2 - 1] - w.t[q / 2]) / std::log(r1 / r2) : span;
  }

  LeastSquaresProblem problem;
  problem.n_residuals = static_cast<int>(w.t.size());
  problem.initial = Eigen::Vector2d(a0, tau0);
  problem.scale = Eigen::Vector2d(std::max(std::abs(a0), 1e-300), tau0);
  problem.residuals = [&w](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < w.t.size(); ++i) r[i] = p[0] * std::exp(-w.t[i] / p[1]) - w.v[i];
  };
  const auto sol = solve_least_squares(problem);
  DecayFit out;
  out.fit = make_result(sol, {"amplitude", "tau_voltage"});
  out.tau_voltage = sol.params(1);
  out.tau_error = sol.std_errors(1);
  if (!(out.tau_voltage > 0.0) || out.tau_voltage > 1e9 * span) {
    auto nd = no_decay(sol.params(0));
    nd.fit = out.fit;
    nd.fit.converged = false;
    nd.fit.diagnostics = nd.warning;
    return nd;
  }
  return out;
}

}  // namespace

DecayFit fit_exponential_decay(const RingdownTrace& trace, double t_start) {
  return fit_decay_window(post_drive(trace, t_start));
}

double SinusoidFit::beat_freq_hz() const { return angular_to_hz(beat_omega); }

SinusoidFit fit_decaying_sinusoid(const RingdownTrace& trace, double t_start) {
  const Window w = post_drive(trace, t_start);
  const std::size_t n = w.t.size();
  const double span = w.t.back() - w.t.front();
  const double dt = span / static_cast<double>(n - 1);

  // Periodogram scan with a decay-free DFT; resolution 1/span, oversampled 8x.
  const double resolution = kTwoPi / span;
  const double nyquist = std::numbers::pi / dt;
  const double step = resolution / 8.0;
  const double mean = [&] {
    double s = 0.0;
    for (double x : w.v) s += x;
    return s / static_cast<double>(n);
  }();
  double best_w = 0.0, best_p = -1.0;
  std::vector<double> power;
  for (double om = 0.0; om < nyquist; om += step) {
    std::complex<double> acc{};
    for (std::size_t i = 0; i < n; ++i) acc += (w.v[i] - mean) * std::polar(1.0, -om * w.t[i]);
    const double p = std::norm(acc);
    power.push_back(p);
    if (p > best_p) {
      best_p = p;
      best_w = om;
    }
  }

  // The pure decay is both the fallback and the bar a beat has to clear.
  const DecayFit decay = fit_decay_window(w);
  double v2 = 0.0;
  for (double x : w.v) v2 += x * x;
  const double decay_ssr = std::isfinite(decay.tau_voltage)
                               ? std::pow(decay.fit.residual_rms, 2) * static_cast<double>(n)
                               : [&] {
                                   double s2 = 0.0;
                                   for (double x : w.v) s2 += (x - mean) * (x - mean);
                                   return s2;
                                 }();

  // Parabolic refinement of the peak.
  const auto ib = static_cast<std::size_t>(std::llround(best_w / step));
  if (ib > 0 && ib + 1 < power.size()) {
    const double pl = power[ib - 1], pc = power[ib], pr = power[ib + 1];
    const double den = pl - 2.0 * pc + pr;
    if (den < 0.0) best_w += 0.5 * step * (pl - pr) / den;
  }

  // A beat that decays within a period smears its peak into DC, so a log grid
  // of seeds is tried besides the periodogram peak.
  std::vector<double> seeds;
  if (best_w >= resolution) seeds.push_back(best_w);
  const double top = 0.25 * nyquist;
  for (int k = 0; k < 24 && resolution < top; ++k) {
    seeds.push_back(resolution * std::pow(top / resolution, k / 23.0));
  }

  std::vector<double> taus{span / 3.0, span / 10.0, span / 30.0};
  if (std::isfinite(decay.tau_voltage) && decay.tau_voltage > 0.0) taus.push_back(decay.tau_voltage);
  double a0 = std::abs(decay.fit.value("amplitude"));
  if (!(a0 > 0.0)) a0 = std::sqrt(v2 / static_cast<double>(n));

  LeastSquaresProblem problem;
  problem.n_residuals = static_cast<int>(n);
  problem.residuals = [&w](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < w.t.size(); ++i) {
      r[i] = p[0] * std::exp(-w.t[i] / p[1]) * std::cos(p[2] * w.t[i] + p[3]) + p[4] - w.v[i];
    }
  };
  auto seeded = [&](double om, double tau0) {
    std::complex<double> ph{};
    for (std::size_t i = 0; i < n; ++i) ph += w.v[i] * std::exp(-w.t[i] / tau0) * std::polar(1.0, -om * w.t[i]);
    Eigen::VectorXd p0(5), sc(5);
    p0 << a0, tau0, om, std::arg(ph), 0.0;
    sc << std::max(a0, 1e-300), tau0, std::min(resolution, om), 1.0, std::max(a0, 1e-300) * 0.1;
    LeastSquaresProblem pr = problem;
    pr.initial = p0;
    pr.scale = sc;
    return pr;
  };

  auto usable = [&](const LeastSquaresSolution& t) {
    const double om = std::abs(t.params(2));
    return std::isfinite(t.ssr) && om >= resolution && om < nyquist && t.params(1) > 0.0;
  };
  LeastSquaresOptions quick;
  quick.max_evaluations = 400;
  LeastSquaresSolution sol;
  sol.ssr = std::numeric_limits<double>::infinity();
  double seed_w = 0.0;
  for (double om : seeds) {
    for (double tau0 : taus) {
      const auto trial = solve_least_squares(seeded(om, tau0), quick);
      if (usable(trial) && trial.ssr < sol.ssr) {
        sol = trial;
        seed_w = om;
      }
    }
  }
  if (std::isfinite(sol.ssr)) {
    LeastSquaresOptions capped;
    capped.max_evaluations = 4000;
    const auto refined = solve_multistart(seeded(std::abs(sol.params(2)), sol.params(1)), 5, 0.2, 0x5eed, capped);
    if (usable(refined) && refined.ssr <= sol.ssr) sol = refined;
  }

  SinusoidFit out;
  const bool beat = std::isfinite(sol.ssr) && seed_w > 0.0 && decay_ssr > 1e-20 * v2 && sol.ssr < 0.25 * decay_ssr;
  if (!beat) {
    out.fit = decay.fit;
    out.fit.params.push_back({"beat_omega", 0.0, 0.0});
    out.fit.params.push_back({"phase", 0.0, 0.0});
    out.fit.params.push_back({"offset", 0.0, 0.0});
    out.tau_voltage = decay.tau_voltage;
    out.tau_error = decay.tau_error;
    out.warning = "degenerate fit: beat frequency below spectral resolution; fitted as pure decay";
    if (!decay.warning.empty()) out.warning += "; " + decay.warning;
    return out;
  }

  out.fit = make_result(sol, {"amplitude", "tau_voltage", "beat_omega", "phase", "offset"});
  out.tau_voltage = sol.params(1);
  out.tau_error = sol.std_errors(1);
  out.beat_omega = std::abs(sol.params(2));
  out.beat_omega_error = sol.std_errors(2);
  out.fit.params[2].value = out.beat_omega;
  if (out.beat_omega * span / kTwoPi < 3.0) {
    out.warning = "fewer than 3 beat periods in the fit window";
  }
  return out;
}

}  // namespace magnonfit
