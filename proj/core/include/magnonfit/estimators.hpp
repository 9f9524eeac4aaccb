#pragma once

#include <span>
#include <utility>

#include "magnonfit/types.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit {

/// C = 4g²/(κ_r·κ_m). Throws std::domain_error unless both rates are positive.
double cooperativity(double g, double kappa_r, double kappa_m);

/// First-order propagated standard error of C for independent inputs.
double cooperativity_error(double g, double g_err, double kappa_r, double kappa_r_err, double kappa_m,
                           double kappa_m_err);

/// g_s = g_e·μ_B·b_rf·ω_r / sqrt(8ħZ_r), b_rf = μ0/(2w). Returns rad/s.
double estimate_single_spin_coupling(double omega_r, double zr, double wire_width,
                                     const PhysicalConstants& constants = {});
/// Same, using the resonator's own Z_r and w with ω_r taken at b0.
double estimate_single_spin_coupling(const ResonatorParams& resonator, const PhysicalConstants& constants = {},
                                     double b0 = 0.0);

/// g = g_s·sqrt(N). Works in whatever unit g_s is given in.
double estimate_collective_coupling(double g_s, double n_spins);

/// ⟨n⟩ = 4·P_in·Q_l² / (ħ·ω_res²·|Q_c|).
double photon_number(double p_in_watts, double ql, double abs_qc, double omega_res,
                     const PhysicalConstants& constants = {});

/// θ ≈ 2·sqrt(n_m/N).
double cone_angle(double n_magnons, double n_spins);

struct CalibrationPoint {
  double current = 0.0;  ///< A
  double omega = 0.0;    ///< ESR resonance, rad/s
};

struct FieldCalibration {
  double slope = 0.0;      ///< T/A
  double intercept = 0.0;  ///< T
  double slope_error = 0.0;
  double intercept_error = 0.0;
  double residual_rms = 0.0;  ///< T
};

/// Converts each ESR line to B = ħω/(g·μ_B) and fits B = slope·I + intercept.
/// With two points the line is exact and both errors are zero.
FieldCalibration fit_field_calibration(std::span<const CalibrationPoint> points, double g_factor,
                                       const PhysicalConstants& constants = {});

}  // namespace magnonfit
