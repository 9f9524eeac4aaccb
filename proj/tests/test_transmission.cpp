#include <gtest/gtest.h>

#include <random>

#include "magnonfit/transmission.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"

using namespace magnonfit;

TEST(BareResonance, DipAtResonance) {
  BareResonanceModel m{ghz_to_angular(3.6), 4000.0, 8000.0, 0.0, 0.9};
  const auto s = s21_bare(m.omega_res, m);
  EXPECT_NEAR(s.real(), 0.9 * (1.0 - 0.5), 1e-15);
  EXPECT_NEAR(s.imag(), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s21_bare(m.omega_res * 1.1, m)), 0.9, 1e-3);
  EXPECT_NO_THROW(m.validate());
  m.abs_qc = 1000.0;  // more coupling than total loss
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(CoupledTransmission, ZeroCouplingIsConjugateOfBare) {
  const auto d = reference_device("3.6GHz");
  const std::complex<double> bg(0.7, -0.2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> b(0.08, 0.128), df(-30e6, 30e6);
  for (int k = 0; k < 500; ++k) {
    const double b0 = b(rng);
    auto m = bare_model_at(d.resonator, b0);
    m.attenuation_a = 1.0;
    const double w = m.omega_res + kTwoPi * df(rng);
    const auto coupled = s21_coupled(w, b0, d.resonator, d.magnon, 0.0, bg);
    const auto expected = std::conj(s21_bare(w, m)) * bg;
    EXPECT_NEAR(std::abs(coupled - expected), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(coupled), std::abs(s21_bare(w, m)) * std::abs(bg), 1e-12);
  }
}

TEST(CoupledTransmission, FarFromResonanceTendsToBackground) {
  const auto d = reference_device("3.6GHz");
  const std::complex<double> bg(0.5, 0.1);
  const auto s = s21_coupled(ghz_to_angular(2.0), 0.1, d.resonator, d.magnon, d.coupling.g_uniform, bg);
  EXPECT_NEAR(std::abs(s - bg), 0.0, 1e-3);
}

namespace {

SweepMap toy_sweep() {
  std::vector<double> fields{0.1, 0.2, 0.3};
  std::vector<double> freqs{1.0, 2.0, 3.0, 4.0};
  std::vector<std::complex<double>> s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) s.emplace_back(10.0 * i + j + 1.0, 1.0);
  return SweepMap(fields, freqs, s);
}

}  // namespace

TEST(Background, StitchesRowsBySegment) {
  const auto sw = toy_sweep();
  const std::vector<BackgroundSegment> seg{{2.5, 4.0, 0.1}, {1.0, 2.5, 0.3}};
  const auto bg = stitch_background(sw, seg);
  ASSERT_EQ(bg.size(), 4u);
  EXPECT_EQ(bg[0], sw.at(2, 0));
  EXPECT_EQ(bg[1], sw.at(2, 1));
  EXPECT_EQ(bg[2], sw.at(0, 2));
  EXPECT_EQ(bg[3], sw.at(0, 3));
}

TEST(Background, StitchErrors) {
  const auto sw = toy_sweep();
  const std::vector<BackgroundSegment> gap{{1.0, 2.2, 0.1}, {3.5, 4.0, 0.3}};
  try {
    stitch_background(sw, gap);
    FAIL() << "expected a gap error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("no segment covers"), std::string::npos);
  }
  const std::vector<BackgroundSegment> overlap{{1.0, 3.0, 0.1}, {2.0, 4.0, 0.3}};
  EXPECT_THROW(stitch_background(sw, overlap), std::invalid_argument);
  const std::vector<BackgroundSegment> missing{{1.0, 4.0, 0.15}};
  EXPECT_THROW(stitch_background(sw, missing), std::invalid_argument);
  EXPECT_THROW(stitch_background(sw, std::vector<BackgroundSegment>{}), std::invalid_argument);
}

TEST(Background, Normalize) {
  const auto sw = toy_sweep();
  std::vector<std::complex<double>> bg(sw.row(1).begin(), sw.row(1).end());
  const auto n = normalize_by_background(sw, bg);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(std::abs(n.at(1, j) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(n.at(2, j) - sw.at(2, j) / bg[j]), 0.0, 1e-15);
  }
  EXPECT_THROW(normalize_by_background(sw, std::vector<std::complex<double>>(3, 1.0)), std::invalid_argument);
  bg[0] = 0.0;
  EXPECT_THROW(normalize_by_background(sw, bg), std::domain_error);
}
