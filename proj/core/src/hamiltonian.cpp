#include "magnonfit/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/units.hpp"
#include "format_util.hpp"

namespace magnonfit {

Eigen::MatrixXd build_hamiltonian(double b0, const ResonatorParams& resonator, const MagnonParams& magnon,
                                  const CouplingModel& coupling) {
  coupling.validate();
  const int dim = coupling.n_max + 2;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  h(0, 0) = resonator.omega_r(b0);
  h(1, 1) = kittel_frequency(b0, magnon);
  h(0, 1) = h(1, 0) = coupling.g_uniform;
  for (int n = 1; n <= coupling.n_max; ++n) {
    h(n + 1, n + 1) = exchange_mode_frequency(n, b0, magnon);
    h(0, n + 1) = h(n + 1, 0) = coupling.mode_coupling(n);
  }
  return h;
}

EigenSpectrum eigenspectrum(const Eigen::MatrixXd& h, double b0) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw std::invalid_argument("eigenspectrum: matrix must be square and non-empty");
  }
  const double scale = h.cwiseAbs().maxCoeff();
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
    throw std::invalid_argument("eigenspectrum: matrix is not symmetric");
  }
  // Eigen's solver loses relative accuracy on a 1e10-scale diagonal less if the
  // common offset is removed first.
  const double shift = h.diagonal().mean();
  const Eigen::MatrixXd centred = h - shift * Eigen::MatrixXd::Identity(h.rows(), h.cols());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(centred);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigenspectrum: solver did not converge");

  EigenSpectrum out;
  out.field_b0 = b0;
  const auto n = static_cast<std::size_t>(h.rows());
  out.eigenvalues.resize(n);
  out.resonator_weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    out.eigenvalues[i] = solver.eigenvalues()(col) + shift;
    const double c = solver.eigenvectors()(0, col);
    out.resonator_weights[i] = c * c;
  }
  return out;
}

std::vector<EigenSpectrum> eigenspectrum_sweep(std::span<const double> fields, const ResonatorParams& resonator,
                                               const MagnonParams& magnon, const CouplingModel& coupling) {
  std::vector<EigenSpectrum> out;
  out.reserve(fields.size());
  for (double b : fields) out.push_back(eigenspectrum(build_hamiltonian(b, resonator, magnon, coupling), b));
  return out;
}

void write_eigenspectrum_csv(std::ostream& out, std::span<const EigenSpectrum> spectra) {
  out << "field_t,eigenvalue_ghz,resonator_weight\n";
  for (const auto& s : spectra) {
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
      out << detail::format_double(s.field_b0) << ',' << detail::format_double(angular_to_ghz(s.eigenvalues[i]))
          << ',' << detail::format_double(s.resonator_weights[i]) << '\n';
    }
  }
}

}  // namespace magnonfit
