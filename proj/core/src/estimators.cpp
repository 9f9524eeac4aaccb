#include "magnonfit/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace magnonfit {

double cooperativity(double g, double kappa_r, double kappa_m) {
  if (!(kappa_r > 0.0) || !(kappa_m > 0.0)) {
    throw std::domain_error("cooperativity: kappa_r and kappa_m must be positive");
  }
  return 4.0 * g * g / (kappa_r * kappa_m);
}

double cooperativity_error(double g, double g_err, double kappa_r, double kappa_r_err, double kappa_m,
                           double kappa_m_err) {
  const double c = cooperativity(g, kappa_r, kappa_m);
  const double rg = g != 0.0 ? 2.0 * g_err / g : 0.0;
  const double rr = kappa_r_err / kappa_r;
  const double rm = kappa_m_err / kappa_m;
  return std::abs(c) * std::sqrt(rg * rg + rr * rr + rm * rm);
}

double estimate_single_spin_coupling(double omega_r, double zr, double wire_width,
                                     const PhysicalConstants& k) {
  if (!(zr > 0.0) || !(wire_width > 0.0)) {
    throw std::invalid_argument("estimate_single_spin_coupling: Zr and w must be positive");
  }
  const double b_rf = k.mu0() / (2.0 * wire_width);
  return k.g_e() * k.mu_b() * b_rf * omega_r / std::sqrt(8.0 * k.hbar() * zr);
}

double estimate_single_spin_coupling(const ResonatorParams& r, const PhysicalConstants& k, double b0) {
  return estimate_single_spin_coupling(r.omega_r(b0), r.zr, r.wire_width, k);
}

double estimate_collective_coupling(double g_s, double n_spins) {
  if (n_spins < 0.0) throw std::invalid_argument("estimate_collective_coupling: N must be non-negative");
  return g_s * std::sqrt(n_spins);
}

double photon_number(double p_in, double ql, double abs_qc, double omega_res, const PhysicalConstants& k) {
  if (p_in < 0.0 || !(ql > 0.0) || !(abs_qc > 0.0) || !(omega_res > 0.0)) {
    throw std::invalid_argument("photon_number: inputs must be positive");
  }
  return 4.0 * p_in * ql * ql / (k.hbar() * omega_res * omega_res * abs_qc);
}

double cone_angle(double n_magnons, double n_spins) {
  if (!(n_spins > 0.0)) throw std::invalid_argument("cone_angle: N must be positive");
  if (n_magnons < 0.0) throw std::invalid_argument("cone_angle: magnon number must be non-negative");
  return 2.0 * std::sqrt(n_magnons / n_spins);
}

FieldCalibration fit_field_calibration(std::span<const CalibrationPoint> points, double g_factor,
                                       const PhysicalConstants& k) {
  if (points.size() < 2) throw std::invalid_argument("fit_field_calibration: need at least 2 points");
  if (!(g_factor > 0.0)) throw std::invalid_argument("fit_field_calibration: g factor must be positive");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> b(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    b[i] = k.hbar() * points[i].omega / (g_factor * k.mu_b());
    mx += points[i].current;
    my += b[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sxx += (points[i].current - mx) * (points[i].current - mx);
    sxy += (points[i].current - mx) * (b[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_field_calibration: currents are degenerate");

  FieldCalibration out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = b[i] - (out.slope * points[i].current + out.intercept);
    ssr += r * r;
  }
  out.residual_rms = std::sqrt(ssr / n);
  if (points.size() > 2) {
    const double s2 = ssr / (n - 2.0);
    out.slope_error = std::sqrt(s2 / sxx);
    out.intercept_error = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return out;
}

}  // namespace magnonfit
