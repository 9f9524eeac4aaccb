#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magnonfit/types.hpp"

namespace magnonfit {

/// Sampled homodyne output of a driven ring-up / ring-down run.
struct RingdownTrace {
  std::vector<double> times;    ///< s, uniform spacing starting at 0
  std::vector<double> voltage;  ///< arbitrary units
  std::vector<double> energy;   ///< |α|² + |β|² per sample
  std::vector<std::complex<double>> output;  ///< feedline output amplitude (rotating frame)
  double drive_freq = 0.0;      ///< rad/s
  double drive_on_until = 0.0;  ///< s
  double dt = 0.0;  ///< sample spacing (s)
  nlohmann::json meta = nlohmann::json::object();
};

struct RingdownDrive {
  double b0 = 0.0;               ///< T
  double drive_freq = 0.0;       ///< rad/s
  double drive_amplitude = 1.0;  ///< input amplitude A (feedline units)
  double t_on = 0.0;             ///< drive switches off here (s)
  double t_total = 0.0;          ///< s
  double dt = 0.0;               ///< s
  /// Output sample spacing, rounded to a whole number of steps. 0 keeps every step.
  double sample_dt = 0.0;
};

/// Raised when dt does not resolve the fastest rate of the problem.
class StepTooLargeError : public std::invalid_argument {
 public:
  StepTooLargeError(const std::string& msg, double bound) : std::invalid_argument(msg), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

/// Raised when the amplitude grows after the drive has been switched off.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest step allowed for the given run: 0.05/max(|ω_r − ω_d|, |ω_m − ω_d|, g, κ_r, κ_m).
double max_ringdown_step(const ResonatorParams& resonator, const MagnonParams& magnon, double g,
                         const RingdownDrive& drive);

/// Fixed-step RK4 integration of the two coupled amplitudes in the frame
/// rotating at the drive frequency:
///   dα/dt = (iδ_r − κ_r/2)α − igβ + ε·[t < t_on]
///   dβ/dt = (iδ_m − κ_m/2)β − igα
/// with ε = sqrt(κ_ext/2)·A. The output amplitude A·[t < t_on] − sqrt(κ_ext/2)·α
/// is phase-rotated so that its value just before switch-off is real, and its
/// real part is the recorded voltage.
RingdownTrace simulate_ringdown(const ResonatorParams& resonator, const MagnonParams& magnon, double g,
                                const RingdownDrive& drive);

struct DecayFit {
  FitResult fit;  ///< amplitude, tau_voltage
  double tau_voltage = 0.0;
  double tau_error = 0.0;
  bool decay_detected = true;
  std::string warning;
};

/// Fits A·exp(−(t − t_start)/τ) to the samples at t >= t_start.
DecayFit fit_exponential_decay(const RingdownTrace& trace, double t_start);

struct SinusoidFit {
  FitResult fit;  ///< amplitude, tau_voltage, beat_omega, phase, offset
  double tau_voltage = 0.0;
  double tau_error = 0.0;
  double beat_omega = 0.0;  ///< rad/s
  double beat_omega_error = 0.0;
  std::string warning;

  double beat_freq_hz() const;
};

/// Fits A·exp(−(t − t_start)/τ)·cos(ω_b(t − t_start) + φ0) + offset. A beat
/// below the spectral resolution of the window falls back to the pure decay
/// fit with ω_b = 0 and a warning.
SinusoidFit fit_decaying_sinusoid(const RingdownTrace& trace, double t_start);

struct DecayRates {
  double tau_energy = 0.0;
  double kappa = 0.0;  ///< rad/s
};

/// τ_E = τ_V/2, κ = 1/τ_E.
DecayRates decay_rate_conversion(double tau_voltage);

}  // namespace magnonfit
