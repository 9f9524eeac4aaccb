#include <gtest/gtest.h>

#include "magnonfit/pipeline.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"

using namespace magnonfit;

TEST(Pipeline, RecoversLowFrequencyDevice) {
  const auto ds = synthesize_acceptance_dataset("3.6GHz", 2024, 0.01);
  const auto rep = run_pipeline(ds.sweep);
  EXPECT_TRUE(rep.converged);
  EXPECT_TRUE(rep.background_from_segments);
  EXPECT_NEAR(angular_to_mhz(rep.dispersion.g), 90.31, 1.0);
  EXPECT_NEAR(tesla_to_mt(rep.dispersion.mu0_meff), 53.614, 0.5);
  EXPECT_NEAR(rep.b_res, 0.103429, 0.5e-3);
  EXPECT_NEAR(rep.cooperativity / 1181.0, 1.0, 0.10);
  EXPECT_GT(rep.cooperativity_error, 0.0);
  const auto j = rep.to_json();
  EXPECT_DOUBLE_EQ(j["headline"]["cooperativity"].get<double>(), rep.cooperativity);
}

TEST(Pipeline, HighFrequencyDeviceLooseRecovery) {
  const auto ds = synthesize_acceptance_dataset("9.2GHz", 2024, 0.01);
  const auto rep = run_pipeline(ds.sweep);
  const double g = ds.truth["g_mhz"].get<double>();
  EXPECT_NEAR(angular_to_mhz(rep.dispersion.g) / g, 1.0, 0.05);
  EXPECT_NEAR(rep.b_res, ds.truth["b_res_t"].get<double>(), 2e-3);
  EXPECT_GT(rep.cooperativity, 50.0);
  EXPECT_LT(rep.cooperativity, 140.0);
}

TEST(Pipeline, MedianBackgroundWithoutSegments) {
  auto ds = synthesize_acceptance_dataset("3.6GHz", 7, 0.01);
  ds.sweep.meta().erase("background_segments");
  const auto rep = run_pipeline(ds.sweep);
  EXPECT_FALSE(rep.background_from_segments);
  EXPECT_NEAR(angular_to_mhz(rep.dispersion.g), 90.31, 3.0);
}
