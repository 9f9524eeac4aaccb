#include <cmath>
#include <random>
#include <stdexcept>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/estimators.hpp"
#include "magnonfit/spectro_fit.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit {

namespace {

struct DatasetLayout {
  double field_lo, field_hi, field_step;  // T
  double f_lo_ghz, f_hi_ghz, f_step_mhz;
  double split_ghz;  // background segment boundary
  double ripple, ripple_period_mhz, delay_ns;
};

DatasetLayout layout_for(const std::string& id) {
  if (id == "3.6GHz") return {0.080, 0.128, 0.001, 3.40, 3.76, 0.1, 3.5675, 0.02, 150.0, 20.0};
  if (id == "9.2GHz") return {0.249, 0.344, 0.001, 8.95, 9.55, 0.25, 9.2315, 0.02, 180.0, 20.0};
  throw std::invalid_argument("unknown acceptance dataset '" + id + "' (expected 3.6GHz or 9.2GHz)");
}

double kittel_at(double b, const MagnonParams& m) { return kittel_frequency(b, m); }

double crossing_field(const DeviceParams& d, double lo, double hi) {
  DispersionFit f;
  f.mu0_meff = d.magnon.mu0_meff;
  f.omega_r0 = d.resonator.omega_r0;
  f.gamma_r = d.resonator.gamma_r;
  return f.resonance_field(d.magnon.gamma, lo, hi);
}

}  // namespace

DeviceParams reference_device(const std::string& id) {
  DeviceParams d;
  d.device_id = id;
  auto& r = d.resonator;
  auto& m = d.magnon;
  m.gamma = ghz_to_angular(28.0);
  m.thickness = 300e-9;
  m.volume = 300e-9 * 6e-6 * 600e-6;
  r.zr = 17.0;
  r.wire_width = 10e-6;
  if (id == "3.6GHz") {
    const double b_res = 0.103429;
    m.mu0_meff = 53.614e-3;
    m.kappa_m = mhz_to_angular(30.62);
    m.n_spins = 2.195e12;
    m.lambda_ex_sq = 0.25e-16;
    r.gamma_r = mhz_to_angular(-1044.8);
    r.omega_r0 = kittel_at(b_res, m) - r.gamma_r * b_res;
    r.b_ref = 0.080;
    r.kappa_r_slope = mhz_to_angular(2.854);
    r.kappa_r0 = mhz_to_angular(0.902) - r.kappa_r_slope * (b_res - r.b_ref);
    r.kappa_ext = ghz_to_angular(3.604) / 11200.0;
    r.phi = 0.1;
    r.attenuation_a = 0.5;
    d.coupling.g_uniform = mhz_to_angular(90.31);
    d.field_range = {{0.080, 0.128}};
  } else if (id == "9.2GHz") {
    m.mu0_meff = 72.40e-3;
    m.kappa_m = mhz_to_angular(117.7);
    m.lambda_ex_sq = 0.25e-16;
    r.omega_r0 = ghz_to_angular(9.2529);
    r.gamma_r = mhz_to_angular(-71.7);
    r.b_ref = 0.249;
    r.kappa_r_slope = 0.0;
    r.kappa_r0 = mhz_to_angular(7.917);
    r.kappa_ext = ghz_to_angular(9.23) / 3000.0;
    r.phi = 0.05;
    r.attenuation_a = 0.5;
    d.coupling.g_uniform = mhz_to_angular(147.21);
    d.field_range = {{0.249, 0.344}};
  } else if (id == "fig4") {
    m.mu0_meff = 53.7e-3;
    m.kappa_m = mhz_to_angular(30.62);
    m.lambda_ex_sq = 0.25e-16;
    m.n_spins = 2.195e12;
    r.omega_r0 = ghz_to_angular(3.593);
    r.gamma_r = 0.0;
    r.b_ref = 0.08;
    r.kappa_r0 = mhz_to_angular(0.902);
    r.kappa_ext = ghz_to_angular(3.593) / 11200.0;
    r.attenuation_a = 1.0;
    d.coupling.g_uniform = mhz_to_angular(90.0);
    d.coupling.n_max = 4;
    d.field_range = {{0.08, 0.13}};
  } else {
    throw std::invalid_argument("unknown reference device '" + id + "' (expected 3.6GHz, 9.2GHz or fig4)");
  }
  return d;
}

AcceptanceDataset synthesize_acceptance_dataset(const std::string& id, std::uint64_t seed, double noise) {
  const DatasetLayout L = layout_for(id);
  AcceptanceDataset ds;
  ds.device = reference_device(id);
  const auto& dev = ds.device;

  SweepPlan plan;
  plan.field_start = L.field_lo;
  plan.field_stop = L.field_hi;
  plan.field_step = L.field_step;
  plan.freq_start = ghz_to_angular(L.f_lo_ghz);
  plan.freq_stop = ghz_to_angular(L.f_hi_ghz);
  plan.freq_step = mhz_to_angular(L.f_step_mhz);
  plan.model = SweepModel::Coupled;
  plan.noise_fraction = noise;
  plan.seed = seed;

  const double a = dev.resonator.attenuation_a;
  const double w0 = plan.freq_start;
  const double period = mhz_to_angular(L.ripple_period_mhz);
  const double delay = L.delay_ns * 1e-9;
  const double ripple = L.ripple;
  BackgroundFn bg = [=](double w) {
    return a * (1.0 + ripple * std::cos(kTwoPi * (w - w0) / period)) * std::polar(1.0, -w * delay);
  };
  ds.sweep = run_sweep(plan, dev, bg);

  const auto& fields = ds.sweep.fields();
  const auto& freqs = ds.sweep.freqs();
  const double split = ghz_to_angular(L.split_ghz);
  ds.segments = {{freqs.front(), split, fields.front()}, {split, freqs.back(), fields.back()}};
  ds.sweep.meta()["background_segments"] = background_segments_to_json(ds.segments);
  ds.sweep.meta()["dataset"] = id;

  const double b_res = crossing_field(dev, fields.front(), fields.back());
  const double kr = dev.resonator.kappa_r(b_res);
  const double g = dev.coupling.g_uniform;
  ds.truth = {{"device_id", id},
              {"seed", seed},
              {"noise_fraction", noise},
              {"g_mhz", angular_to_mhz(g)},
              {"kappa_r_mhz", angular_to_mhz(kr)},
              {"kappa_m_mhz", angular_to_mhz(dev.magnon.kappa_m)},
              {"mu0_meff_mt", tesla_to_mt(dev.magnon.mu0_meff)},
              {"b_res_t", b_res},
              {"omega_r0_ghz", angular_to_ghz(dev.resonator.omega_r0)},
              {"gamma_r_mhz_per_t", angular_to_mhz(dev.resonator.gamma_r)},
              {"kappa_r0_mhz", angular_to_mhz(dev.resonator.kappa_r0)},
              {"kappa_r_slope_mhz_per_t", angular_to_mhz(dev.resonator.kappa_r_slope)},
              {"b_ref_t", dev.resonator.b_ref},
              {"kappa_ext_mhz", angular_to_mhz(dev.resonator.kappa_ext)},
              {"phi_rad", dev.resonator.phi},
              {"gamma_ghz_per_t", angular_to_ghz(dev.magnon.gamma)},
              {"cooperativity", cooperativity(g, kr, dev.magnon.kappa_m)},
              {"background",
               {{"amplitude", a}, {"ripple", ripple}, {"ripple_period_mhz", L.ripple_period_mhz},
                {"delay_ns", L.delay_ns}}},
              {"device", device_config_to_json(dev)}};
  return ds;
}

std::vector<CalibrationPoint> synthesize_field_calibration(double g_factor, double slope, double offset,
                                                           double f_start, double f_stop, double f_step,
                                                           double field_noise, std::uint64_t seed,
                                                           const PhysicalConstants& k) {
  if (!(g_factor > 0.0) || slope == 0.0 || !(f_step > 0.0) || f_stop < f_start) {
    throw std::invalid_argument("synthesize_field_calibration: invalid arguments");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, field_noise > 0.0 ? field_noise : 1.0);
  std::vector<CalibrationPoint> pts;
  const auto n = static_cast<std::size_t>(std::floor((f_stop - f_start) / f_step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = f_start + static_cast<double>(i) * f_step;
    const double w = hz_to_angular(f);
    const double b = k.hbar() * w / (g_factor * k.mu_b());
    const double b_meas = b + (field_noise > 0.0 ? jitter(rng) : 0.0);
    pts.push_back({(b_meas - offset) / slope, w});
  }
  return pts;
}

}  // namespace magnonfit
