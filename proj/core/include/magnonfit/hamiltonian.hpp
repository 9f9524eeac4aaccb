#pragma once

#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "magnonfit/types.hpp"

namespace magnonfit {

/// Single-excitation Hamiltonian (units of rad/s) in the basis
/// (resonator, Kittel mode, thickness modes 1..n_max).
///
/// Arrowhead structure: the diagonal holds the bare frequencies, row/column 0
/// holds the couplings (g, g_1, ..., g_n_max), every magnon–magnon element is
/// zero.
Eigen::MatrixXd build_hamiltonian(double b0, const ResonatorParams& resonator, const MagnonParams& magnon,
                                  const CouplingModel& coupling);

struct EigenSpectrum {
  double field_b0 = 0.0;
  std::vector<double> eigenvalues;        ///< ascending, rad/s
  std::vector<double> resonator_weights;  ///< |c_r|² of each eigenvector
};

/// Dense symmetric diagonalisation. Throws std::invalid_argument if H is not
/// square or not symmetric to a relative tolerance of 1e-12.
EigenSpectrum eigenspectrum(const Eigen::MatrixXd& h, double b0);

/// Eigenspectra over a list of fields.
std::vector<EigenSpectrum> eigenspectrum_sweep(std::span<const double> fields, const ResonatorParams& resonator,
                                               const MagnonParams& magnon, const CouplingModel& coupling);

/// Columns field_t, eigenvalue_ghz, resonator_weight; one row per eigenstate.
void write_eigenspectrum_csv(std::ostream& out, std::span<const EigenSpectrum> spectra);

}  // namespace magnonfit
