#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "magnonfit/transmission.hpp"
#include "magnonfit/types.hpp"

namespace magnonfit {

/// Thrown when a trace holds no dip that stands out of the noise.
class NoResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ResidualMode {
  Magnitude,  ///< residuals of |S21| (default; what a VNA magnitude fit uses)
  Complex,    ///< real and imaginary residuals, for phase-referenced synthetic data
};

struct ResonanceFitOptions {
  ResidualMode mode = ResidualMode::Magnitude;
  int n_starts = 5;
  double start_spread = 0.2;
  std::uint64_t seed = 0x5eed;
  /// Minimum depth significance (see ResonanceFit::depth_significance).
  double min_significance = 2.0;
};

struct ResonanceFit {
  FitResult fit;  ///< parameters a, Ql, abs_Qc, phi, omega_res
  BareResonanceModel model;
  double kappa = 0.0;  ///< ω_res/Q_l
  double kappa_error = 0.0;
  double depth = 0.0;               ///< 1 − min|S21|/a from the initial scan
  double noise = 0.0;               ///< per-sample σ estimate of |S21|
  /// depth·a over the deepest excursion white noise reaches in the smoothed
  /// trace, σ_box·sqrt(2 ln n_box). Pure noise scores about 1.
  double depth_significance = 0.0;
};

/// Least-squares fit of the hanger lineshape to one trace. Requires at least
/// 7 points spanning 3 linewidths (std::invalid_argument otherwise). Throws
/// NoResonanceError when the dip does not clear the noise floor. A fit that
/// does not converge is returned with fit.converged == false.
ResonanceFit fit_resonance(std::span<const double> omegas, std::span<const std::complex<double>> s21,
                           const ResonanceFitOptions& options = {});
ResonanceFit fit_resonance(std::span<const double> omegas, std::span<const double> magnitude,
                           const ResonanceFitOptions& options = {});

enum class Branch { Upper, Lower };
const char* to_string(Branch b);

/// Parameters needed to predict where the two branches sit at a given field.
struct HybridEstimate {
  double omega_r0 = 0.0;
  double gamma_r = 0.0;
  double mu0_meff = 0.0;
  double gamma = 0.0;
  double g = 0.0;
  double kappa_r = 0.0;
  double kappa_m = 0.0;

  double omega_r(double b0) const { return omega_r0 + gamma_r * b0; }
  double omega_m(double b0) const;
};

struct BranchWindow {
  std::size_t field_index = 0;
  Branch branch = Branch::Upper;
  double omega_lo = 0.0;
  double omega_hi = 0.0;
  double predicted_omega = 0.0;
  double predicted_kappa = 0.0;
};

struct BranchPoint {
  double field = 0.0;
  Branch branch = Branch::Upper;
  double omega = 0.0;
  double omega_error = 0.0;
  double kappa = 0.0;
  double kappa_error = 0.0;
  double depth_significance = 0.0;
  FitResult fit;
};

struct SkippedBranch {
  double field = 0.0;
  Branch branch = Branch::Upper;
  std::string reason;
};

struct BranchTable {
  std::vector<BranchPoint> points;
  std::vector<SkippedBranch> skipped;

  std::vector<BranchPoint> of(Branch b) const;
};

struct WindowOptions {
  double half_width_linewidths = 8.0;
  double margin = 0.0;  ///< rad/s added to every half-width for seed uncertainty
  /// Branches whose predicted resonator weight falls below this are skipped.
  double min_resonator_weight = 0.0;
};

/// Search windows centred on the predicted ω± at each field. The two windows
/// of one field never cross the midpoint between the predictions.
std::vector<BranchWindow> windows_from_estimate(const SweepMap& sweep, const HybridEstimate& estimate,
                                                const WindowOptions& options, std::vector<SkippedBranch>* skipped);

struct ExtractionOptions {
  ResonanceFitOptions fit;
  /// Branches with depth significance below this are reported and skipped.
  double min_significance = 3.0;
  /// Fit window half-width around the located dip, in estimated linewidths.
  double fit_half_width_linewidths = 6.0;
  /// Two candidate dips whose depths differ by less than this fraction count
  /// as a tie; the one closer to the prediction wins.
  double tie_tolerance = 0.05;
  /// Fits whose linewidth differs from the prediction by more than this
  /// factor either way are skipped. <= 0 disables the check.
  double kappa_ratio_limit = 4.0;
};

/// Fits the hanger lineshape to each window of a (background-normalised)
/// sweep and returns per-field ω± and κ±.
BranchTable extract_branches(const SweepMap& sweep, std::span<const BranchWindow> windows,
                             const ExtractionOptions& options = {});

struct SplittingPoint {
  double field = 0.0;
  double splitting = 0.0;  ///< ω+ − ω− (rad/s)
  double error = 0.0;      ///< optional; <= 0 means unweighted
};

/// Pairs upper and lower points taken at the same field.
std::vector<SplittingPoint> splittings_from(const BranchTable& table);

struct CrossingFit {
  double g = 0.0;
  double b_res = 0.0;
  double gamma_rm = 0.0;  ///< |dΔ/dB| (rad/s per T)
  double g_error = 0.0;
  double b_res_error = 0.0;
  double gamma_rm_error = 0.0;
  std::string warning;
  FitResult fit;
};

/// ω+ − ω− = sqrt((γ_rm·(B − B_res))² + 4g²). Needs at least 4 points.
CrossingFit fit_avoided_crossing(std::span<const SplittingPoint> points);

struct DispersionFitOptions {
  double gamma = 0.0;  ///< fixed gyromagnetic ratio (rad/s per T)
  HybridEstimate initial;
  bool weighted = true;
};

struct DispersionFit {
  double mu0_meff = 0.0;
  double g = 0.0;
  double omega_r0 = 0.0;
  double gamma_r = 0.0;
  double mu0_meff_error = 0.0;
  double g_error = 0.0;
  double omega_r0_error = 0.0;
  double gamma_r_error = 0.0;
  FitResult fit;

  /// Field where ω_m(B) = ω_r(B) under this fit (bisection on the field range).
  double resonance_field(double gamma, double b_lo, double b_hi) const;
};

/// Simultaneous fit of both branch tables to ω± with ω_m from the Kittel
/// formula and ω_r = ω_r0 + γ_r·B.
DispersionFit fit_branch_dispersion(const BranchTable& branches, const DispersionFitOptions& options);

struct LinewidthFit {
  double kappa_r0 = 0.0;  ///< at b_ref
  double kappa_r_slope = 0.0;
  double kappa_m = 0.0;
  double kappa_r0_error = 0.0;
  double kappa_r_slope_error = 0.0;
  double kappa_m_error = 0.0;
  double b_ref = 0.0;
  FitResult fit;

  double kappa_r(double b0) const { return kappa_r0 + kappa_r_slope * (b0 - b_ref); }
  double kappa_r_error(double b0) const;
};

/// Fits κ±(B) with the complex-eigenvalue linewidth law, keeping the
/// frequency parameters of a dispersion fit fixed. Free: κ_r0, κ_r slope, κ_m.
LinewidthFit fit_branch_linewidths(const BranchTable& branches, const DispersionFit& dispersion, double gamma,
                                   double b_ref, double kappa_m_guess);

/// Linear interpolation/extrapolation of κ_r(B) through the anchors (least
/// squares line for more than two). Duplicate anchor fields are an error.
double interpolate_kappa_r(std::span<const std::pair<double, double>> anchors, double b_target);

struct KappaMEstimate {
  double kappa_m = 0.0;
  bool physical = true;
  std::string diagnostic;
};

/// κ_m = κ+ + κ− − κ_r, from the strong-coupling average of the branches.
KappaMEstimate kappa_m_from_branches(double kappa_plus, double kappa_minus, double kappa_r);

}  // namespace magnonfit
