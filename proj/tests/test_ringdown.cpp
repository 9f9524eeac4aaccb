#include <gtest/gtest.h>

#include <cmath>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/ringdown.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"

using namespace magnonfit;

namespace {

RingdownTrace synthetic(double t0, double t1, double dt, const std::function<double(double)>& f) {
  RingdownTrace tr;
  tr.drive_on_until = t0;
  tr.dt = dt;
  for (double t = 0.0; t <= t1 + 0.5 * dt; t += dt) {
    tr.times.push_back(t);
    tr.voltage.push_back(t < t0 ? 1.0 : f(t - t0));
  }
  return tr;
}

}  // namespace

TEST(Ringdown, UncoupledResonatorMatchesAnalyticDecay) {
  auto d = reference_device("3.6GHz");
  const double b = 0.09;
  const double kr = d.resonator.kappa_r(b), ke = d.resonator.kappa_ext;
  RingdownDrive drv;
  drv.b0 = b;
  drv.drive_freq = d.resonator.omega_r(b);
  drv.t_on = 40.0 / kr;
  drv.t_total = drv.t_on + 10.0 / kr;
  drv.dt = max_ringdown_step(d.resonator, d.magnon, 0.0, drv);
  const auto tr = simulate_ringdown(d.resonator, d.magnon, 0.0, drv);
  ASSERT_EQ(tr.times.size(), tr.voltage.size());
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    if (t < tr.drive_on_until) continue;
    const double expected = -(ke / kr) * std::exp(-0.5 * kr * (t - tr.drive_on_until));
    EXPECT_NEAR(tr.voltage[k], expected, 1e-6) << "t=" << t;
  }
  EXPECT_GE(tr.drive_on_until, drv.t_on);
  EXPECT_LT(tr.drive_on_until - drv.t_on, drv.dt);
  const auto fit = fit_exponential_decay(tr, drv.t_on + 1.0 / kr);
  EXPECT_NEAR(fit.tau_voltage * kr, 2.0, 1e-6);
}

TEST(Ringdown, EnergyNeverGrowsAfterSwitchOff) {
  const auto d = reference_device("3.6GHz");
  const double b = 0.101;
  RingdownDrive drv;
  drv.b0 = b;
  drv.drive_freq = d.resonator.omega_r(b) + mhz_to_angular(20.0);
  drv.t_on = 500e-9;
  drv.t_total = 900e-9;
  drv.dt = max_ringdown_step(d.resonator, d.magnon, d.coupling.g_uniform, drv);
  drv.sample_dt = 1e-9;
  const auto tr = simulate_ringdown(d.resonator, d.magnon, d.coupling.g_uniform, drv);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    if (tr.times[k] <= drv.t_on) continue;
    EXPECT_LE(tr.energy[k], prev * (1.0 + 1e-12));
    prev = tr.energy[k];
  }
  EXPECT_NEAR(tr.dt, 1e-9, 0.6 * drv.dt);
  EXPECT_LT(tr.energy.back(), 1e-6 * tr.energy[tr.energy.size() / 2]);
}

TEST(Ringdown, StepBoundIsEnforced) {
  const auto d = reference_device("3.6GHz");
  RingdownDrive drv;
  drv.b0 = 0.1;
  drv.drive_freq = d.resonator.omega_r(0.1);
  drv.t_on = 100e-9;
  drv.t_total = 200e-9;
  const double bound = max_ringdown_step(d.resonator, d.magnon, d.coupling.g_uniform, drv);
  EXPECT_GT(bound, 0.0);
  drv.dt = 2.0 * bound;
  try {
    simulate_ringdown(d.resonator, d.magnon, d.coupling.g_uniform, drv);
    FAIL() << "expected StepTooLargeError";
  } catch (const StepTooLargeError& e) {
    EXPECT_DOUBLE_EQ(e.bound(), bound);
  }
  drv.dt = bound;
  drv.t_on = 300e-9;
  EXPECT_THROW(simulate_ringdown(d.resonator, d.magnon, d.coupling.g_uniform, drv), std::invalid_argument);
  drv.t_on = 100e-9;
  drv.sample_dt = -1.0;
  EXPECT_THROW(simulate_ringdown(d.resonator, d.magnon, d.coupling.g_uniform, drv), std::invalid_argument);
}

TEST(DecayFit, ExactExponential) {
  const double tau = 170e-9;
  const auto tr = synthetic(1e-6, 2.5e-6, 1e-9, [tau](double s) { return 0.37 * std::exp(-s / tau); });
  const auto f = fit_exponential_decay(tr, 1.05e-6);
  EXPECT_TRUE(f.decay_detected);
  EXPECT_NEAR(f.tau_voltage / tau, 1.0, 1e-8);
  EXPECT_NEAR(f.fit.value("amplitude"), 0.37 * std::exp(-0.05e-6 / tau), 1e-9);
  EXPECT_THROW(fit_exponential_decay(tr, 0.5e-6), std::invalid_argument);
  EXPECT_THROW(fit_exponential_decay(tr, 2.499e-6), std::invalid_argument);
}

TEST(DecayFit, ConstantTraceHasNoDecay) {
  const auto tr = synthetic(1e-6, 2e-6, 1e-9, [](double) { return 0.25; });
  const auto f = fit_exponential_decay(tr, 1.1e-6);
  EXPECT_FALSE(f.decay_detected);
  EXPECT_FALSE(f.warning.empty());
}

TEST(SinusoidFit, ExactDecayingSinusoid) {
  const double tau = 60e-9, wb = hz_to_angular(5e6);
  const auto tr = synthetic(1e-6, 2e-6, 1e-9,
                            [&](double s) { return 0.8 * std::exp(-s / tau) * std::cos(wb * s + 0.4); });
  const auto f = fit_decaying_sinusoid(tr, 1e-6);
  EXPECT_NEAR(f.tau_voltage / tau, 1.0, 1e-6);
  EXPECT_NEAR(f.beat_freq_hz() / 5e6, 1.0, 1e-6);
  EXPECT_TRUE(f.warning.empty()) << f.warning;
}

TEST(SinusoidFit, ZeroBeatFallsBackToExponential) {
  const double tau = 170e-9;
  const auto tr = synthetic(1e-6, 2e-6, 1e-9, [tau](double s) { return std::exp(-s / tau); });
  const auto s = fit_decaying_sinusoid(tr, 1.02e-6);
  const auto e = fit_exponential_decay(tr, 1.02e-6);
  EXPECT_EQ(s.beat_omega, 0.0);
  EXPECT_NE(s.warning.find("degenerate"), std::string::npos);
  EXPECT_NEAR(s.tau_voltage, e.tau_voltage, 1e-9 * tau);
}

TEST(Ringdown, DrivenBranchDecaysAtBranchLinewidth) {
  const auto d = reference_device("3.6GHz");
  const double b = 0.12, g = d.coupling.g_uniform;
  const double wr = d.resonator.omega_r(b), wm = kittel_frequency(b, d.magnon);
  const double kr = d.resonator.kappa_r(b), km = d.magnon.kappa_m;
  const auto w = branch_resonator_weights(wr, wm, g);
  const auto f = damped_branch_frequencies(wr, kr, wm, km, g);
  const auto k = branch_linewidths(wr, kr, wm, km, g);
  const bool upper = w.plus >= w.minus;
  const double kappa = upper ? k.plus : k.minus;
  RingdownDrive drv;
  drv.b0 = b;
  drv.drive_freq = upper ? f.plus : f.minus;
  drv.t_on = 24.0 / kappa;
  drv.t_total = drv.t_on + 8.0 / kappa;
  drv.dt = max_ringdown_step(d.resonator, d.magnon, g, drv);
  drv.sample_dt = 1.0 / (50.0 * kappa);
  const auto tr = simulate_ringdown(d.resonator, d.magnon, g, drv);
  const auto fit = fit_exponential_decay(tr, drv.t_on + 1.0 / kappa);
  const auto rates = decay_rate_conversion(fit.tau_voltage);
  EXPECT_NEAR(rates.kappa / kappa, 1.0, 0.01);
}
