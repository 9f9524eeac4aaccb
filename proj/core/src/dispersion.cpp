#include "magnonfit/dispersion.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace magnonfit {

double kittel_frequency(double b0, const MagnonParams& magnon) {
  return exchange_mode_frequency(0, b0, magnon);
}

double exchange_mode_frequency(int n, double b0, const MagnonParams& magnon) {
  if (b0 < 0.0) throw std::domain_error("magnon frequency: negative static field");
  if (n < 0) throw std::domain_error("magnon frequency: negative mode index");
  if (!(magnon.thickness > 0.0)) throw std::domain_error("magnon frequency: thickness must be positive");
  const double k = n * std::numbers::pi / magnon.thickness;
  const double exch = magnon.mu0_meff * magnon.lambda_ex_sq * k * k;
  return magnon.gamma * std::sqrt((b0 + exch) * (b0 + magnon.mu0_meff + exch));
}

BranchFrequencies coupled_branch_frequencies(double omega_r, double omega_m, double g) {
  if (g < 0.0) throw std::domain_error("coupled_branch_frequencies: negative coupling");
  const double delta = omega_m - omega_r;
  const double root = std::sqrt(delta * delta + 4.0 * g * g);
  const double centre = omega_r + 0.5 * delta;
  return {centre + 0.5 * root, centre - 0.5 * root, root};
}

BranchLinewidths branch_linewidths(double omega_r, double kappa_r, double omega_m, double kappa_m,
                                   double g) {
  if (kappa_r < 0.0 || kappa_m < 0.0 || g < 0.0) {
    throw std::domain_error("branch_linewidths: rates and coupling must be non-negative");
  }
  using cd = std::complex<double>;
  const cd detuning(omega_m - omega_r, 0.5 * (kappa_r - kappa_m));
  const cd root = std::sqrt(detuning * detuning + cd(4.0 * g * g, 0.0));
  const double mean = 0.5 * (kappa_r + kappa_m);
  BranchLinewidths out{mean - root.imag(), mean + root.imag(), {}};
  if (out.plus < 0.0 || out.minus < 0.0) {
    out.diagnostic = "principal-branch square root gave a negative linewidth (kappa_plus = " +
                     std::to_string(out.plus) + ", kappa_minus = " + std::to_string(out.minus) + ")";
  }
  return out;
}

BranchFrequencies damped_branch_frequencies(double omega_r, double kappa_r, double omega_m, double kappa_m,
                                            double g) {
  if (kappa_r < 0.0 || kappa_m < 0.0 || g < 0.0) {
    throw std::domain_error("damped_branch_frequencies: rates and coupling must be non-negative");
  }
  using cd = std::complex<double>;
  const cd detuning(omega_m - omega_r, 0.5 * (kappa_r - kappa_m));
  const cd root = std::sqrt(detuning * detuning + cd(4.0 * g * g, 0.0));
  const double centre = omega_r + 0.5 * (omega_m - omega_r);
  return {centre + 0.5 * root.real(), centre - 0.5 * root.real(), root.real()};
}

BranchPair branch_pair(double omega_r, double kappa_r, double omega_m, double kappa_m, double g) {
  const auto f = coupled_branch_frequencies(omega_r, omega_m, g);
  const auto k = branch_linewidths(omega_r, kappa_r, omega_m, kappa_m, g);
  return {f.plus, f.minus, k.plus, k.minus};
}

BranchWeights branch_resonator_weights(double omega_r, double omega_m, double g) {
  const double delta = omega_m - omega_r;
  const double root = std::sqrt(delta * delta + 4.0 * g * g);
  if (root == 0.0) return {0.5, 0.5};
  // The upper state is resonator-like when the magnon sits below (Δ < 0).
  const double plus = 0.5 * (1.0 - delta / root);
  return {plus, 1.0 - plus};
}

}  // namespace magnonfit
