#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magnonfit/spectro_fit.hpp"
#include "magnonfit/types.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit {

struct SeedSearchOptions {
  double meff_min = 0.0;  ///< T
  double meff_max = 0.3;
  double meff_step = 0.5e-3;
  double g_min = mhz_to_angular(2.0);  ///< rad/s
  double g_max = mhz_to_angular(400.0);
  double g_step = mhz_to_angular(2.0);
  double cap = mhz_to_angular(20.0);  ///< robust-loss cap (rad/s)
};

/// Coarse parameter estimate from the deepest dip of every field row of a
/// normalised sweep. The outermost fields are assumed far detuned, so their
/// dips belong to the resonator-like branch.
HybridEstimate seed_from_sweep(const SweepMap& normalized, double gamma, const SeedSearchOptions& options = {});

struct PipelineOptions {
  double gamma = ghz_to_angular(28.0);  ///< rad/s per T, held fixed
  std::optional<HybridEstimate> initial;           ///< skips the seed search
  std::optional<double> b_ref;                     ///< defaults to the lowest field
  int refinements = 3;
  ExtractionOptions extraction;
  WindowOptions windows{8.0, 0.0, 0.05};
  SeedSearchOptions seed_search;
  /// Branch points whose weighted dispersion residual exceeds this many
  /// standard deviations are dropped before the final fit.
  double outlier_sigma = 6.0;
};

struct PipelineReport {
  HybridEstimate seed;
  HybridEstimate final_estimate;
  BranchTable branches;
  DispersionFit dispersion;
  std::optional<CrossingFit> crossing;
  LinewidthFit linewidths;
  double b_res = 0.0;
  double b_res_error = 0.0;
  double kappa_r_at_res = 0.0;
  double kappa_r_at_res_error = 0.0;
  double cooperativity = 0.0;
  double cooperativity_error = 0.0;
  bool background_from_segments = false;
  std::vector<std::string> warnings;
  nlohmann::json diagnostics = nlohmann::json::object();
  bool converged = false;

  nlohmann::json to_json() const;
};

/// Background normalisation, seed search, iterative branch extraction,
/// dispersion, crossing and linewidth fits, then the cooperativity.
/// The background comes from "background_segments" in the sweep metadata;
/// without them the per-frequency median over fields is used.
PipelineReport run_pipeline(const SweepMap& sweep, const PipelineOptions& options = {});

}  // namespace magnonfit
