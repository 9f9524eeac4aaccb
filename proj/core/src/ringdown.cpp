#include "magnonfit/ringdown.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "magnonfit/dispersion.hpp"

namespace magnonfit {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

struct State {
  cd a;
  cd b;
};

State operator+(const State& x, const State& y) { return {x.a + y.a, x.b + y.b}; }
State operator*(double s, const State& x) { return {s * x.a, s * x.b}; }

}  // namespace

double max_ringdown_step(const ResonatorParams& res, const MagnonParams& mag, double g, const RingdownDrive& d) {
  const double wr = res.omega_r(d.b0);
  const double wm = kittel_frequency(d.b0, mag);
  const double fastest = std::max({std::abs(wr - d.drive_freq), std::abs(wm - d.drive_freq), std::abs(g),
                                   res.kappa_r(d.b0), mag.kappa_m});
  return fastest > 0.0 ? 0.05 / fastest : std::numeric_limits<double>::infinity();
}

RingdownTrace simulate_ringdown(const ResonatorParams& res, const MagnonParams& mag, double g,
                                const RingdownDrive& d) {
  if (!(d.dt > 0.0)) throw std::invalid_argument("simulate_ringdown: dt must be positive");
  if (!(d.t_total > 0.0)) throw std::invalid_argument("simulate_ringdown: t_total must be positive");
  if (d.t_on < 0.0 || d.t_on > d.t_total) {
    throw std::invalid_argument("simulate_ringdown: t_on must lie within [0, t_total]");
  }
  if (d.sample_dt < 0.0) throw std::invalid_argument("simulate_ringdown: sample_dt must not be negative");
  const double bound = max_ringdown_step(res, mag, g, d);
  if (d.dt > bound) {
    std::ostringstream msg;
    msg << "simulate_ringdown: dt = " << d.dt << " s does not resolve the fastest rate; need dt <= " << bound
        << " s";
    throw StepTooLargeError(msg.str(), bound);
  }

  const double kr = res.kappa_r(d.b0);
  const double km = mag.kappa_m;
  const double dr = d.drive_freq - res.omega_r(d.b0);
  const double dm = d.drive_freq - kittel_frequency(d.b0, mag);
  const double root_ext = std::sqrt(0.5 * res.kappa_ext);
  const cd eps = root_ext * d.drive_amplitude;
  const cd lr = kI * dr - 0.5 * kr;
  const cd lm = kI * dm - 0.5 * km;

  auto rhs = [&](const State& s, bool on) -> State {
    return {lr * s.a - kI * g * s.b + (on ? eps : cd{}), lm * s.b - kI * g * s.a};
  };

  const auto n_steps = static_cast<std::size_t>(std::llround(d.t_total / d.dt));
  const auto every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(d.sample_dt / d.dt)));
  RingdownTrace tr;
  tr.drive_freq = d.drive_freq;
  // The drive is gated per step, so it really stops at the first grid time >= t_on.
  tr.drive_on_until = std::ceil(d.t_on / d.dt) * d.dt;
  while (tr.drive_on_until - d.dt >= d.t_on) tr.drive_on_until -= d.dt;
  while (tr.drive_on_until < d.t_on) tr.drive_on_until += d.dt;
  tr.dt = static_cast<double>(every) * d.dt;

  State s{};
  cd last_on_output{};
  double prev_energy = 0.0;
  bool prev_on = true;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * d.dt;
    const bool on = t < d.t_on;
    const double energy = std::norm(s.a) + std::norm(s.b);
    const cd out = (on ? cd{d.drive_amplitude} : cd{}) - root_ext * s.a;
    if (on) last_on_output = out;
    // Only steps taken entirely without drive must lose energy.
    if (!prev_on && energy > prev_energy * (1.0 + 1e-9) + 1e-300) {
      throw IntegrationError("simulate_ringdown: amplitude grew after drive switch-off at t = " +
                             std::to_string(t) + " s (unstable step)");
    }
    prev_energy = energy;
    prev_on = on;
    if (k % every == 0) {
      tr.times.push_back(t);
      tr.energy.push_back(energy);
      tr.output.push_back(out);
    }
    if (k == n_steps) break;
    // The drive is held constant across each step.
    const State k1 = rhs(s, on);
    const State k2 = rhs(s + 0.5 * d.dt * k1, on);
    const State k3 = rhs(s + 0.5 * d.dt * k2, on);
    const State k4 = rhs(s + d.dt * k3, on);
    s = s + (d.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(s.a.real()) || !std::isfinite(s.b.real())) {
      throw IntegrationError("simulate_ringdown: non-finite amplitude");
    }
  }

  const double theta = d.t_on > 0.0 ? std::arg(last_on_output) : 0.0;
  const cd rot = std::polar(1.0, -theta);
  tr.voltage.resize(tr.output.size());
  for (std::size_t k = 0; k < tr.output.size(); ++k) tr.voltage[k] = (tr.output[k] * rot).real();
  tr.meta = {{"field_t", d.b0}, {"drive_amplitude", d.drive_amplitude}, {"homodyne_phase_rad", theta},
             {"integration_dt_s", d.dt}};
  return tr;
}

DecayRates decay_rate_conversion(double tau_voltage) {
  if (!(tau_voltage > 0.0)) throw std::invalid_argument("decay_rate_conversion: tau must be positive");
  DecayRates r;
  r.tau_energy = 0.5 * tau_voltage;
  r.kappa = 1.0 / r.tau_energy;
  return r;
}

}  // namespace magnonfit
