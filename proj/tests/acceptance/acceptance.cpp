// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero if any selected criterion fails.
//
//   magnonfit_acceptance                 run everything
//   magnonfit_acceptance --criterion 7b  run one

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/estimators.hpp"
#include "magnonfit/hamiltonian.hpp"
#include "magnonfit/pipeline.hpp"
#include "magnonfit/ringdown.hpp"
#include "magnonfit/spectro_fit.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"
#include "oracles.hpp"

using namespace magnonfit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  double runtime_limit_s = 0.0;  // 0: none
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool near_rel(double v, double target, double rel) { return std::abs(v - target) <= rel * std::abs(target); }

// ---------------------------------------------------------------- 1, 2

Outcome criterion_1() {
  const double c = cooperativity(mhz_to_angular(90.31), mhz_to_angular(0.902), mhz_to_angular(30.62));
  return {std::abs(c - 1181.0) <= 2.0, fmt("C = %.2f (target 1181 +/- 2)", c)};
}

Outcome criterion_2() {
  const double c = cooperativity(mhz_to_angular(147.21), mhz_to_angular(7.917), mhz_to_angular(117.7));
  return {std::abs(c - 93.0) <= 1.0, fmt("C = %.2f (target 93.0 +/- 1)", c)};
}

// ---------------------------------------------------------------- 3, 4

Outcome criterion_3() {
  const double w = ghz_to_angular(3.6), g = mhz_to_angular(90.31);
  const auto f0 = coupled_branch_frequencies(w, w, g);
  bool ok = f0.splitting() == 2.0 * g;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> fr(1e9, 1e11), det(-5e9, 5e9), gg(0.0, 2e9);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double wr = fr(rng), wm = std::max(1e8, wr + det(rng)), gv = gg(rng);
    const auto f = coupled_branch_frequencies(wr, wm, gv);
    const auto e = oracle::jacobi_eigen({{wr, gv}, {gv, wm}});
    worst = std::max({worst, std::abs(f.minus - e.values[0]) / std::abs(e.values[0]),
                      std::abs(f.plus - e.values[1]) / std::abs(e.values[1])});
  }
  ok = ok && worst <= 1e-9;
  return {ok, fmt("splitting at zero detuning = 2g exactly: %s; worst relative deviation from eigenvalues = %.2e (limit 1e-9)",
                  f0.splitting() == 2.0 * g ? "yes" : "no", worst),
          1.0};
}

Outcome criterion_4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> fr(1e9, 1e11), det(-5e9, 5e9), gg(0.0, 2e9), kk(1e5, 1e9);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double wr = fr(rng), wm = wr + det(rng), g = gg(rng), kr = kk(rng), km = kk(rng);
    const auto k = branch_linewidths(wr, kr, wm, km, g);
    worst = std::max(worst, std::abs(k.plus + k.minus - (kr + km)) / (kr + km));
  }
  const double w = ghz_to_angular(3.6), kr = mhz_to_angular(0.902), km = mhz_to_angular(30.62);
  const auto k0 = branch_linewidths(w, kr, w, km, mhz_to_angular(90.31));
  const double avg = 0.5 * (kr + km);
  const bool resonant = near_rel(k0.plus, avg, 1e-12) && near_rel(k0.minus, avg, 1e-12);
  const auto inv = kappa_m_from_branches(mhz_to_angular(15.15), mhz_to_angular(16.37), mhz_to_angular(0.902));
  const double km_mhz = angular_to_mhz(inv.kappa_m);
  const bool inverse = std::abs(km_mhz - 30.62) < 0.005;
  return {worst <= 1e-9 && resonant && inverse,
          fmt("sum rule worst %.2e (limit 1e-9); zero-detuning average %s; kappa_m from branches = %.3f MHz (target 30.62)",
              worst, resonant ? "ok" : "off", km_mhz)};
}

// ---------------------------------------------------------------- 5

Outcome criterion_5() {
  const double gs = angular_to_hz(estimate_single_spin_coupling(ghz_to_angular(3.6), 17.0, 10e-6));
  const double g = angular_to_mhz(estimate_collective_coupling(hz_to_angular(gs), 2.195e12));
  const double p = dbm_to_watts(-75.0);
  const double n1 = photon_number(p, 4302.0, 11200.0, ghz_to_angular(3.604));
  const double n2 = photon_number(p, 242.1, 23000.0, ghz_to_angular(3.669));
  const double theta = cone_angle(n2 / 2.0, 2.195e12);
  const bool ok = std::abs(gs - 36.0) <= 5.0 && std::abs(g - 54.0) <= 8.0 && near_rel(n1, 3.9e6, 0.1) &&
                  near_rel(n2, 5800.0, 0.1) && near_rel(theta, 7.2e-5, 0.02);
  return {ok, fmt("g_s = %.1f Hz, g = %.1f MHz, <n> = %.3g and %.0f, theta = %.3g rad", gs, g, n1, n2, theta)};
}

// ---------------------------------------------------------------- 6

Outcome criterion_6() {
  const auto ds = synthesize_acceptance_dataset("3.6GHz", 2024, 0.01);
  const auto rep = run_pipeline(ds.sweep);
  const double g = angular_to_mhz(rep.dispersion.g);
  const double meff = tesla_to_mt(rep.dispersion.mu0_meff);
  const double c = rep.cooperativity;
  const bool ok = std::abs(g - 90.31) <= 1.0 && std::abs(meff - 53.614) <= 0.5 &&
                  std::abs(rep.b_res - 0.103429) <= 0.5e-3 && near_rel(c, 1181.0, 0.10);
  return {ok,
          fmt("g = %.3f MHz, mu0 Meff = %.3f mT, B_res = %.6f T, C = %.1f +/- %.1f", g, meff, rep.b_res, c,
              rep.cooperativity_error),
          60.0};
}

// ---------------------------------------------------------------- 7

struct DrivenBranch {
  double omega = 0.0;  // damped eigenfrequency
  double kappa = 0.0;
  bool upper = true;
};

DrivenBranch resonator_like_branch(const DeviceParams& d, double b) {
  const double wr = d.resonator.omega_r(b), wm = kittel_frequency(b, d.magnon), g = d.coupling.g_uniform;
  const double kr = d.resonator.kappa_r(b), km = d.magnon.kappa_m;
  const auto w = branch_resonator_weights(wr, wm, g);
  const auto f = damped_branch_frequencies(wr, kr, wm, km, g);
  const auto k = branch_linewidths(wr, kr, wm, km, g);
  const bool up = w.plus >= w.minus;
  return {up ? f.plus : f.minus, up ? k.plus : k.minus, up};
}

Outcome criterion_7a() {
  const auto d = reference_device("3.6GHz");
  const double g = d.coupling.g_uniform;
  double worst = 0.0;
  int n = 0;
  for (int i = 0; i < 9; ++i) {
    const double b = 0.081 + (0.128 - 0.081) * i / 8.0;
    const auto br = resonator_like_branch(d, b);
    RingdownDrive drv;
    drv.b0 = b;
    drv.drive_freq = br.omega;
    drv.t_on = 24.0 / br.kappa;
    drv.t_total = drv.t_on + 8.0 / br.kappa;
    drv.dt = max_ringdown_step(d.resonator, d.magnon, g, drv);
    drv.sample_dt = 1.0 / (50.0 * br.kappa);
    const auto tr = simulate_ringdown(d.resonator, d.magnon, g, drv);
    const auto fit = fit_exponential_decay(tr, drv.t_on + 1.0 / br.kappa);
    const double kappa = decay_rate_conversion(fit.tau_voltage).kappa;
    worst = std::max(worst, std::abs(kappa / br.kappa - 1.0));
    ++n;
  }
  return {n >= 8 && worst <= 0.01,
          fmt("%d fields 0.081-0.128 T, worst |kappa_ringdown/kappa_branch - 1| = %.4f (limit 0.01)", n, worst), 30.0};
}

RingdownTrace run_at_0101(double detuning, double t_total) {
  const auto d = reference_device("3.6GHz");
  const double b = 0.101, g = d.coupling.g_uniform;
  const double wr = d.resonator.omega_r(b), wm = kittel_frequency(b, d.magnon);
  const auto f = damped_branch_frequencies(wr, d.resonator.kappa_r(b), wm, d.magnon.kappa_m, g);
  RingdownDrive drv;
  drv.b0 = b;
  drv.drive_freq = f.plus + detuning;
  drv.t_on = 2e-6;
  drv.t_total = t_total;
  drv.dt = max_ringdown_step(d.resonator, d.magnon, g, drv);
  drv.sample_dt = 1e-9;
  return simulate_ringdown(d.resonator, d.magnon, g, drv);
}

Outcome criterion_7b() {
  const auto tr = run_at_0101(0.0, 2.5e-6);
  const auto fit = fit_exponential_decay(tr, tr.drive_on_until + 60e-9);
  const double tau_ns = fit.tau_voltage * 1e9;
  const double kappa = angular_to_mhz(decay_rate_conversion(fit.tau_voltage).kappa);
  const bool ok = near_rel(tau_ns, 170.0, 0.02) && near_rel(kappa, 1.872, 0.02);
  return {ok, fmt("B0 = 0.101 T upper branch: tau_V = %.2f ns (target 170 +/- 2%%), kappa+/2pi = %.4f MHz (target 1.872 +/- 2%%)",
                  tau_ns, kappa),
          30.0};
}

Outcome criterion_7c() {
  const auto tr = run_at_0101(mhz_to_angular(5.0), 2.8e-6);
  const auto fit = fit_decaying_sinusoid(tr, tr.drive_on_until + 80e-9);
  const double fb = fit.beat_freq_hz() * 1e-6;
  return {std::abs(fb - 5.0) <= 0.1 && fit.warning.empty(),
          fmt("f_beat = %.4f MHz (target 5 +/- 0.1), tau_V = %.2f ns%s", fb, fit.tau_voltage * 1e9,
              fit.warning.empty() ? "" : (" [" + fit.warning + "]").c_str()),
          30.0};
}

// ---------------------------------------------------------------- 8

oracle::Matrix rows_of(const Eigen::MatrixXd& h) {
  oracle::Matrix m(h.rows(), std::vector<double>(h.cols()));
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j) m[i][j] = h(i, j);
  return m;
}

struct SpectrumCheck {
  double oracle_dev = 0.0;
  double min_gap = 1e300;         // between the two dominant branches
  double faint_weight_max = 0.0;  // away from the crossing
  double faint_to_kittel = 0.0;   // max |ω_faint − ω_Kittel| / ω_Kittel at the far fields
};

SpectrumCheck check_spectrum(const DeviceParams& d, double b_cross) {
  SpectrumCheck out;
  const int n = d.coupling.n_max + 2;
  for (double b = 0.08; b <= 0.13 + 1e-12; b += 0.0001) {
    const auto h = build_hamiltonian(b, d.resonator, d.magnon, d.coupling);
    const auto s = eigenspectrum(h, b);
    const auto ref = oracle::jacobi_eigen(rows_of(h));
    for (int k = 0; k < n; ++k)
      out.oracle_dev = std::max(out.oracle_dev, std::abs(s.eigenvalues[k] - ref.values[k]) / std::abs(ref.values[k]));
    // dominant = the two largest resonator weights
    std::vector<int> idx(n);
    for (int k = 0; k < n; ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(), [&](int a, int c) { return s.resonator_weights[a] > s.resonator_weights[c]; });
    out.min_gap = std::min(out.min_gap, std::abs(s.eigenvalues[idx[0]] - s.eigenvalues[idx[1]]));
    if (std::abs(b - b_cross) >= 0.01) {
      // The faint lines are the four states with the least resonator character.
      const double wk = kittel_frequency(b, d.magnon);
      for (int k = n - 4; k < n; ++k) {
        out.faint_weight_max = std::max(out.faint_weight_max, s.resonator_weights[idx[k]]);
        out.faint_to_kittel = std::max(out.faint_to_kittel, std::abs(s.eigenvalues[idx[k]] - wk) / wk);
      }
    }
  }
  return out;
}

Outcome criterion_8() {
  auto d = reference_device("fig4");
  const double g = d.coupling.g_uniform;
  DispersionFit cross;
  cross.mu0_meff = d.magnon.mu0_meff;
  cross.omega_r0 = d.resonator.omega_r0;
  cross.gamma_r = d.resonator.gamma_r;
  const double bc = cross.resonance_field(d.magnon.gamma, 0.08, 0.13);

  const auto h = build_hamiltonian(bc, d.resonator, d.magnon, d.coupling);
  const auto s = eigenspectrum(h, bc);
  std::vector<int> idx(s.eigenvalues.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
  std::sort(idx.begin(), idx.end(), [&](int a, int c) { return s.resonator_weights[a] > s.resonator_weights[c]; });
  const double split = std::abs(s.eigenvalues[idx[0]] - s.eigenvalues[idx[1]]);

  const auto base = check_spectrum(d, bc);
  std::vector<double> conv;
  for (double f : {1.0, 1e-2, 1e-4, 1e-8}) {
    auto dd = d;
    dd.magnon.lambda_ex_sq = d.magnon.lambda_ex_sq * f;
    conv.push_back(check_spectrum(dd, bc).faint_to_kittel);
  }
  bool converging = conv.back() < 1e-6;
  for (std::size_t k = 1; k < conv.size(); ++k) converging = converging && conv[k] < conv[k - 1];

  const bool faint = static_cast<int>(s.eigenvalues.size()) - 2 == 4 && base.faint_weight_max < 0.5;
  const bool ok = split >= 2.0 * g && base.min_gap > 2.0 * g && faint && converging && base.oracle_dev <= 1e-10;
  return {ok,
          fmt("B_cross = %.5f T, splitting %.2f MHz vs 2g = %.2f MHz, min gap %.2f MHz; 4 faint lines with max weight %.3f; "
              "faint-Kittel offset %.2e -> %.2e as lambda^2 -> 0; oracle deviation %.1e",
              bc, angular_to_mhz(split), angular_to_mhz(2.0 * g), angular_to_mhz(base.min_gap), base.faint_weight_max,
              conv.front(), conv.back(), base.oracle_dev),
          5.0};
}

// ---------------------------------------------------------------- 9, 10

Outcome criterion_9() {
  const auto r = decay_rate_conversion(170.0e-9);
  const double k = angular_to_mhz(r.kappa);
  const std::string four = fmt("%.4g", k);
  return {four == "1.872", fmt("tau_V = 170.0 ns -> tau_E = %.1f ns, kappa/2pi = %s MHz", r.tau_energy * 1e9, four.c_str())};
}

Outcome criterion_10() {
  const auto pts = synthesize_field_calibration(2.083, 60.64e-3, 0.0, 4.5e9, 8.5e9, 0.5e9, 5e-5, 10);
  const auto cal = fit_field_calibration(pts, 2.083);
  const double slope = tesla_to_mt(cal.slope), icpt = tesla_to_mt(cal.intercept);
  return {std::abs(slope - 60.64) <= 0.10 && std::abs(icpt) <= 0.4,
          fmt("%zu ESR lines: slope = %.3f +/- %.3f mT/A, intercept = %.3f +/- %.3f mT", pts.size(), slope,
              tesla_to_mt(cal.slope_error), icpt, tesla_to_mt(cal.intercept_error))};
}

struct Criterion {
  std::string id;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{{"1", criterion_1},   {"2", criterion_2},   {"3", criterion_3},
                                   {"4", criterion_4},   {"5", criterion_5},   {"6", criterion_6},
                                   {"7a", criterion_7a}, {"7b", criterion_7b}, {"7c", criterion_7c},
                                   {"8", criterion_8},   {"9", criterion_9},   {"10", criterion_10}};
  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = argv[++i];
    } else {
      std::cerr << "usage: magnonfit_acceptance [--criterion ID]\n";
      return 2;
    }
  }
  if (!only.empty() && std::none_of(all.begin(), all.end(), [&](const auto& c) { return c.id == only; })) {
    std::cerr << "unknown criterion " << only << "\n";
    return 2;
  }

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = fmt("%.2f s", secs);
    if (o.runtime_limit_s > 0.0 && secs > o.runtime_limit_s) {
      pass = false;
      timing += fmt(" (limit %.0f s)", o.runtime_limit_s);
    }
    std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << "  " << o.detail << "  [" << timing << "]"
              << std::endl;
    if (!pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
