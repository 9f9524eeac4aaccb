#pragma once

#include <complex>
#include <numbers>

// Internal convention: frequencies and rates are angular (rad/s), fields are
// tesla. Reporting units (GHz, MHz, mT, dBm) only appear at I/O boundaries.

namespace magnonfit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
constexpr double ghz_to_angular(double ghz) { return kTwoPi * ghz * 1e9; }
constexpr double mhz_to_angular(double mhz) { return kTwoPi * mhz * 1e6; }

constexpr double angular_to_hz(double w) { return w / kTwoPi; }
constexpr double angular_to_ghz(double w) { return w / kTwoPi * 1e-9; }
constexpr double angular_to_mhz(double w) { return w / kTwoPi * 1e-6; }

constexpr double mt_to_tesla(double mt) { return mt * 1e-3; }
constexpr double tesla_to_mt(double t) { return t * 1e3; }

/// Power in watts for a level in dBm.
double dbm_to_watts(double dbm);

/// 20·log10(|s21| / |s21_0|). Throws std::domain_error for a zero reference.
double db_from_ratio(std::complex<double> s21, std::complex<double> s21_0);

/// Physical constants (SI). All values strictly positive and fixed once built.
class PhysicalConstants {
 public:
  /// CODATA 2018 values, g_e = 2.
  PhysicalConstants();
  PhysicalConstants(double hbar, double mu0, double mu_b, double g_e);

  double hbar() const { return hbar_; }
  double mu0() const { return mu0_; }
  double mu_b() const { return mu_b_; }
  double g_e() const { return g_e_; }

 private:
  double hbar_;
  double mu0_;
  double mu_b_;
  double g_e_;
};

}  // namespace magnonfit
