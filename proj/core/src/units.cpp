#include "magnonfit/units.hpp"

#include <cmath>
#include <stdexcept>

namespace magnonfit {

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double db_from_ratio(std::complex<double> s21, std::complex<double> s21_0) {
  const double ref = std::abs(s21_0);
  if (!(ref > 0.0)) {
    throw std::domain_error("db_from_ratio: reference transmission has zero magnitude");
  }
  return 20.0 * std::log10(std::abs(s21) / ref);
}

PhysicalConstants::PhysicalConstants()
    : PhysicalConstants(1.054571817e-34, 1.25663706212e-6, 9.2740100783e-24, 2.0) {}

PhysicalConstants::PhysicalConstants(double hbar, double mu0, double mu_b, double g_e)
    : hbar_(hbar), mu0_(mu0), mu_b_(mu_b), g_e_(g_e) {
  if (!(hbar > 0.0 && mu0 > 0.0 && mu_b > 0.0 && g_e > 0.0)) {
    throw std::invalid_argument("PhysicalConstants: all constants must be strictly positive");
  }
}

}  // namespace magnonfit
