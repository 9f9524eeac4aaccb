#pragma once

#include <string>

#include "magnonfit/types.hpp"

namespace magnonfit {

/// Uniform-mode frequency for an in-plane field along the long axis:
/// γ·sqrt(B0·(B0 + μ0·M_eff)). Throws std::domain_error for B0 < 0.
double kittel_frequency(double b0, const MagnonParams& magnon);

/// Thickness-quantised dipole-exchange mode n with k_n = nπ/L.
/// n = 0 goes through the same expression with k = 0 and equals the Kittel value.
double exchange_mode_frequency(int n, double b0, const MagnonParams& magnon);

struct BranchFrequencies {
  double plus = 0.0;
  double minus = 0.0;
  /// sqrt(Δ² + 4g²) as computed, not the difference of the two rounded
  /// frequencies; exactly 2g at Δ = 0.
  double gap = 0.0;
  double splitting() const { return gap; }
};

/// ω± = ω_r + Δ/2 ± sqrt(Δ² + 4g²)/2 with Δ = ω_m − ω_r.
BranchFrequencies coupled_branch_frequencies(double omega_r, double omega_m, double g);

struct BranchLinewidths {
  double plus = 0.0;
  double minus = 0.0;
  /// Empty unless the principal square root produced a negative rate.
  std::string diagnostic;
};

/// κ± = κ_r/2 + κ_m/2 ∓ Im sqrt((−ω_r + iκ_r/2 + ω_m − iκ_m/2)² + 4g²),
/// principal branch. Never flips signs to hide a negative rate.
BranchLinewidths branch_linewidths(double omega_r, double kappa_r, double omega_m, double kappa_m,
                                   double g);

/// Free-oscillation frequencies of the damped hybrid modes, the real parts of
/// the complex eigenvalues: ω_r + Δ/2 ± Re sqrt((Δ + i(κ_r − κ_m)/2)² + 4g²)/2.
/// Equal to coupled_branch_frequencies when κ_r = κ_m.
BranchFrequencies damped_branch_frequencies(double omega_r, double kappa_r, double omega_m, double kappa_m,
                                            double g);

/// Frequencies and linewidths of both hybrid branches.
struct BranchPair {
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double kappa_plus = 0.0;
  double kappa_minus = 0.0;
};

BranchPair branch_pair(double omega_r, double kappa_r, double omega_m, double kappa_m, double g);

/// Resonator weight |c_r|² of the upper (+) and lower (−) lossless two-mode
/// eigenstates. upper + lower = 1.
struct BranchWeights {
  double plus = 0.0;
  double minus = 0.0;
};
BranchWeights branch_resonator_weights(double omega_r, double omega_m, double g);

}  // namespace magnonfit
