#include <benchmark/benchmark.h>

#include <vector>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/pipeline.hpp"
#include "magnonfit/hamiltonian.hpp"
#include "magnonfit/ringdown.hpp"
#include "magnonfit/spectro_fit.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/transmission.hpp"
#include "magnonfit/units.hpp"

using namespace magnonfit;

static void BM_S21Coupled(benchmark::State& state) {
  const auto d = reference_device("3.6GHz");
  const std::complex<double> bg(0.5, 0.0);
  double w = ghz_to_angular(3.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(s21_coupled(w, 0.1, d.resonator, d.magnon, d.coupling.g_uniform, bg));
    w += 1.0;
  }
}
BENCHMARK(BM_S21Coupled);

static void BM_SweepMap(benchmark::State& state) {
  const auto d = reference_device("3.6GHz");
  SweepPlan p;
  p.field_start = 0.08;
  p.field_stop = 0.128;
  p.field_step = 0.001;
  p.freq_start = ghz_to_angular(3.4);
  p.freq_stop = ghz_to_angular(3.76);
  p.freq_step = mhz_to_angular(0.2);
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(p, d));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(p.fields().size() * p.freqs().size()));
}
BENCHMARK(BM_SweepMap)->Unit(benchmark::kMillisecond);

static void BM_ResonanceFit(benchmark::State& state) {
  BareResonanceModel m;
  m.omega_res = ghz_to_angular(3.6);
  m.ql = 3000.0;
  m.abs_qc = 9000.0;
  m.phi = 0.1;
  m.attenuation_a = 0.8;
  std::vector<double> w;
  std::vector<std::complex<double>> s;
  for (int i = 0; i < state.range(0); ++i) {
    w.push_back(m.omega_res + m.kappa_loaded() * (-10.0 + 20.0 * i / (state.range(0) - 1)));
    s.push_back(s21_bare(w.back(), m));
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_resonance(w, s));
}
BENCHMARK(BM_ResonanceFit)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

static void BM_Eigenspectrum(benchmark::State& state) {
  auto d = reference_device("3.6GHz");
  d.coupling.n_max = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigenspectrum(build_hamiltonian(0.1, d.resonator, d.magnon, d.coupling), 0.1));
  }
}
BENCHMARK(BM_Eigenspectrum)->Arg(4)->Arg(16)->Arg(64);

static void BM_Ringdown(benchmark::State& state) {
  const auto d = reference_device("3.6GHz");
  const double b = 0.101, g = d.coupling.g_uniform;
  const auto f = damped_branch_frequencies(d.resonator.omega_r(b), d.resonator.kappa_r(b), kittel_frequency(b, d.magnon),
                                           d.magnon.kappa_m, g);
  RingdownDrive drv;
  drv.b0 = b;
  drv.drive_freq = f.plus;
  drv.t_on = 2e-6;
  drv.t_total = 2.5e-6;
  drv.dt = max_ringdown_step(d.resonator, d.magnon, g, drv);
  drv.sample_dt = 1e-9;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ringdown(d.resonator, d.magnon, g, drv));
}
BENCHMARK(BM_Ringdown)->Unit(benchmark::kMillisecond);

static void BM_Pipeline(benchmark::State& state) {
  const auto ds = synthesize_acceptance_dataset("3.6GHz", 2024, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(ds.sweep));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK_MAIN();
