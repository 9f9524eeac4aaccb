#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"

using namespace magnonfit;

namespace {

SweepPlan small_plan() {
  SweepPlan p;
  p.field_start = 0.095;
  p.field_stop = 0.112;
  p.field_step = 0.001;
  p.freq_start = ghz_to_angular(3.45);
  p.freq_stop = ghz_to_angular(3.72);
  p.freq_step = mhz_to_angular(0.5);
  return p;
}

}  // namespace

TEST(SweepCsv, ComplexRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> fields{0.0, 0.0123456789, 0.1, 0.30000000000000004};
  std::vector<double> freqs;
  for (int j = 0; j < 50; ++j) freqs.push_back(ghz_to_angular(3.4) + mhz_to_angular(0.1) * j * (1.0 + 1e-9 * u(rng)));
  std::vector<std::complex<double>> s;
  for (std::size_t k = 0; k < fields.size() * freqs.size(); ++k) s.emplace_back(u(rng), u(rng) * 1e-300);
  const SweepMap a(fields, freqs, s);
  std::stringstream io;
  write_sweep_csv(io, a);
  const auto b = read_sweep_csv(io);
  EXPECT_EQ(b.fields(), a.fields());
  EXPECT_EQ(b.freqs(), a.freqs());
  EXPECT_EQ(b.s21(), a.s21());
}

TEST(SweepCsv, DbRoundTripIsBitExact) {
  const auto d = reference_device("3.6GHz");
  auto plan = small_plan();
  plan.field_step = 0.004;
  const auto sw = run_sweep(plan, d);
  const auto db = to_db(sw);
  std::stringstream io;
  write_db_csv(io, db);
  const auto back = read_db_csv(io);
  EXPECT_EQ(back.fields, db.fields);
  EXPECT_EQ(back.freqs, db.freqs);
  EXPECT_EQ(back.db, db.db);
  for (std::size_t k = 0; k < db.db.size(); ++k) EXPECT_DOUBLE_EQ(db.db[k], 20.0 * std::log10(std::abs(sw.s21()[k])));
}

TEST(SweepCsv, MalformedInput) {
  std::stringstream empty;
  EXPECT_THROW(read_sweep_csv(empty), std::invalid_argument);
  std::stringstream bad_header("a,b,c,d\n");
  EXPECT_THROW(read_sweep_csv(bad_header), std::invalid_argument);
  std::stringstream ragged("field_t,freq_hz,re,im\n0.1,1e9,1,0\n0.1,2e9,1\n");
  EXPECT_THROW(read_sweep_csv(ragged), std::invalid_argument);
  std::stringstream hole("field_t,freq_hz,re,im\n0.1,1e9,1,0\n0.1,2e9,1,0\n0.2,1e9,1,0\n");
  EXPECT_THROW(read_sweep_csv(hole), std::invalid_argument);
  std::stringstream nan_text("field_t,freq_hz,re,im\n0.1,1e9,abc,0\n");
  EXPECT_THROW(read_sweep_csv(nan_text), std::invalid_argument);
}

TEST(SweepFiles, SidecarRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "magnonfit_sweep_io_test";
  std::filesystem::create_directories(dir);
  auto ds = synthesize_acceptance_dataset("3.6GHz", 5, 0.01);
  const auto csv = dir / "d.csv";
  save_sweep(csv, ds.sweep);
  EXPECT_EQ(sidecar_path(csv), dir / "d.meta.json");
  const auto back = load_sweep(csv);
  EXPECT_EQ(back.s21(), ds.sweep.s21());
  EXPECT_EQ(back.meta()["dataset"], "3.6GHz");
  const auto seg = background_segments_from_meta(back.meta());
  ASSERT_EQ(seg.size(), ds.segments.size());
  for (std::size_t k = 0; k < seg.size(); ++k) {
    EXPECT_DOUBLE_EQ(seg[k].omega_lo, ds.segments[k].omega_lo);
    EXPECT_DOUBLE_EQ(seg[k].reference_field, ds.segments[k].reference_field);
  }
  EXPECT_THROW(load_sweep(dir / "missing.csv"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Noise, StandardDeviationAndDeterminism) {
  std::vector<double> fields, freqs;
  for (int i = 0; i < 100; ++i) fields.push_back(0.001 * i);
  for (int j = 0; j < 200; ++j) freqs.push_back(1e9 + 1e6 * j);
  SweepMap sw(fields, freqs, std::vector<std::complex<double>>(20000, {0.0, 2.0}));
  auto a = sw;
  apply_amplitude_noise(a, 0.05, 42);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& v : a.s21()) {
    const double n = (std::abs(v) / 2.0 - 1.0);
    sum += n;
    sum2 += n * n;
    EXPECT_DOUBLE_EQ(std::arg(v), std::numbers::pi / 2);
  }
  const double mean = sum / 20000.0, sd = std::sqrt(sum2 / 20000.0 - mean * mean);
  EXPECT_NEAR(sd, 0.05, 0.005);
  EXPECT_NEAR(mean, 0.0, 0.002);
  auto b = sw;
  apply_amplitude_noise(b, 0.05, 42);
  EXPECT_EQ(a.s21(), b.s21());
  auto c = sw;
  apply_amplitude_noise(c, 0.05, 43);
  EXPECT_NE(a.s21(), c.s21());
  EXPECT_THROW(apply_amplitude_noise(c, -0.1, 1), std::invalid_argument);
}

TEST(Sweep, SingleCellGrid) {
  const auto d = reference_device("3.6GHz");
  SweepPlan p;
  p.field_start = p.field_stop = 0.1;
  p.field_step = 0.001;
  p.freq_start = p.freq_stop = ghz_to_angular(3.6);
  p.freq_step = mhz_to_angular(1.0);
  const auto sw = run_sweep(p, d);
  EXPECT_EQ(sw.n_fields(), 1u);
  EXPECT_EQ(sw.n_freqs(), 1u);
}

TEST(Sweep, DipsFollowBranches) {
  const auto d = reference_device("3.6GHz");
  const auto sw = run_sweep(small_plan(), d);
  for (std::size_t i = 0; i < sw.n_fields(); ++i) {
    const double b = sw.fields()[i];
    const double wr = d.resonator.omega_r(b), wm = kittel_frequency(b, d.magnon);
    const auto f = coupled_branch_frequencies(wr, wm, d.coupling.g_uniform);
    const auto w = branch_resonator_weights(wr, wm, d.coupling.g_uniform);
    const double expected = w.plus > w.minus ? f.plus : f.minus;
    std::size_t jmin = 0;
    for (std::size_t j = 1; j < sw.n_freqs(); ++j)
      if (std::abs(sw.at(i, j)) < std::abs(sw.at(i, jmin))) jmin = j;
    // the deepest dip belongs to the more resonator-like branch
    EXPECT_NEAR(sw.freqs()[jmin], expected, mhz_to_angular(6.0)) << "b=" << b;
  }
}

TEST(Sweep, BareModelIgnoresMagnon) {
  const auto d = reference_device("3.6GHz");
  auto p = small_plan();
  p.model = SweepModel::Bare;
  const auto sw = run_sweep(p, d);
  for (std::size_t i = 0; i < sw.n_fields(); i += 5) {
    std::size_t jmin = 0;
    for (std::size_t j = 1; j < sw.n_freqs(); ++j)
      if (std::abs(sw.at(i, j)) < std::abs(sw.at(i, jmin))) jmin = j;
    EXPECT_NEAR(sw.freqs()[jmin], d.resonator.omega_r(sw.fields()[i]), p.freq_step);
  }
}

TEST(Sweep, PlanErrors) {
  const auto d = reference_device("3.6GHz");
  auto p = small_plan();
  p.field_step = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = small_plan();
  p.freq_stop = p.freq_start - 1.0;
  EXPECT_THROW(run_sweep(p, d), std::invalid_argument);
  p = small_plan();
  p.max_cells = 100;
  EXPECT_THROW(run_sweep(p, d), std::length_error);
  p = small_plan();
  p.model = SweepModel::MultimodeEigen;
  EXPECT_THROW(run_sweep(p, d), std::invalid_argument);
  EXPECT_THROW(sweep_model_from_string("quantum"), std::invalid_argument);
  EXPECT_THROW(parse_sweep_plan(nlohmann::json{{"field_start_t", 0.1}}), ConfigError);
}

TEST(Sweep, PlanJsonRoundTrip) {
  auto p = small_plan();
  p.noise_fraction = 0.02;
  p.seed = 99;
  const auto q = parse_sweep_plan(sweep_plan_to_json(p));
  EXPECT_NEAR(q.field_step, p.field_step, 1e-15);
  EXPECT_NEAR(q.freq_start, p.freq_start, 1e-3);
  EXPECT_EQ(q.seed, 99u);
  EXPECT_EQ(q.model, SweepModel::Coupled);
  EXPECT_EQ(q.fields().size(), 18u);
}

TEST(AcceptanceData, DeterministicWithTruth) {
  const auto a = synthesize_acceptance_dataset("3.6GHz", 2024, 0.01);
  const auto b = synthesize_acceptance_dataset("3.6GHz", 2024, 0.01);
  const auto c = synthesize_acceptance_dataset("3.6GHz", 2025, 0.01);
  EXPECT_EQ(a.sweep.s21(), b.sweep.s21());
  EXPECT_NE(a.sweep.s21(), c.sweep.s21());
  EXPECT_NEAR(a.truth["g_mhz"].get<double>(), 90.31, 1e-9);
  EXPECT_NEAR(a.truth["mu0_meff_mt"].get<double>(), 53.614, 1e-9);
  EXPECT_NEAR(a.truth["b_res_t"].get<double>(), 0.103429, 1e-6);
  EXPECT_NEAR(a.truth["kappa_m_mhz"].get<double>(), 30.62, 1e-9);
  EXPECT_THROW(synthesize_acceptance_dataset("5GHz"), std::invalid_argument);
  const auto e = synthesize_acceptance_dataset("9.2GHz", 1, 0.0);
  EXPECT_NEAR(e.truth["g_mhz"].get<double>(), 147.21, 1e-9);
}

TEST(Eigensweep, OneSpectrumPerField) {
  const auto d = reference_device("fig4");
  auto p = small_plan();
  p.model = SweepModel::MultimodeEigen;
  const auto s = run_eigen_sweep(p, d);
  ASSERT_EQ(s.size(), p.fields().size());
  for (const auto& e : s) EXPECT_EQ(e.eigenvalues.size(), static_cast<std::size_t>(d.coupling.n_max + 2));
}
