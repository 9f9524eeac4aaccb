#pragma once

#include <complex>
#include <span>
#include <vector>

#include "magnonfit/types.hpp"

namespace magnonfit {

/// Hanger-resonator lineshape parameters in Q-factor form.
struct BareResonanceModel {
  double omega_res = 0.0;
  double ql = 0.0;      ///< loaded Q
  double abs_qc = 0.0;  ///< |Q_c|
  double phi = 0.0;     ///< phase of Q_c
  double attenuation_a = 1.0;

  /// Loaded damping ω_res/Q_l.
  double kappa_loaded() const { return omega_res / ql; }
  /// Feedline coupling ω_res/|Q_c|.
  double kappa_ext() const { return omega_res / abs_qc; }

  /// Ql > 0, |Qc| > 0 and 1/Ql >= cos(φ)/|Qc| (non-negative internal loss).
  void validate(double tol = 1e-9) const;
};

/// a·(1 − (Q_l/|Q_c|)·e^{iφ} / (1 + 2i·Q_l·(ω/ω_res − 1))).
std::complex<double> s21_bare(double omega, const BareResonanceModel& model);

/// Q-factor form of the resonator at field b0: Q_l = ω_r/κ_r, |Q_c| = ω_r/κ_ext.
BareResonanceModel bare_model_at(const ResonatorParams& resonator, double b0);

/// Feedline transmission of the resonator hybridised with the Kittel mode:
///   S21,0(ω)·(1 + (κ_ext/2)e^{−iφ} / (i(ω − ω_r) − κ_r/2 + g²[i(ω − ω_m) − κ_m/2]^{−1}))
/// with ω_r, κ_r taken at b0 and ω_m from the Kittel formula.
///
/// With g = 0 this is the complex conjugate of s21_bare(bare_model_at(...))
/// times the background; the two conventions share |S21|.
std::complex<double> s21_coupled(double omega, double b0, const ResonatorParams& resonator,
                                 const MagnonParams& magnon, double g, std::complex<double> s21_background);

/// Frequency interval [omega_lo, omega_hi] whose background is read from the
/// sweep row at reference_field.
struct BackgroundSegment {
  double omega_lo = 0.0;
  double omega_hi = 0.0;
  double reference_field = 0.0;
};

/// Assembles the field-independent background S21,0(ω) from segment rows.
/// Segments may share end points but must not overlap; a frequency covered by
/// no segment raises std::invalid_argument naming the gap.
std::vector<std::complex<double>> stitch_background(const SweepMap& sweep,
                                                    std::span<const BackgroundSegment> segments);

/// S21/S21,0 per cell.
SweepMap normalize_by_background(const SweepMap& sweep, std::span<const std::complex<double>> background);

}  // namespace magnonfit
