#pragma once

// Independent reference computations used to check the library. None of
// these call into magnonfit.

#include <complex>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Cyclic Jacobi rotations; ascending eigenvalues and eigenvectors (columns).
struct JacobiResult {
  std::vector<double> values;
  Matrix vectors;
};
JacobiResult jacobi_eigen(Matrix a, double tol = 1e-15, int max_sweeps = 100);

/// Eigenvalues of [[a - i·ka/2, g], [g, b - i·kb/2]] from the characteristic polynomial.
std::pair<std::complex<double>, std::complex<double>> two_mode_complex(double a, double ka, double b, double kb,
                                                                     double g);

double kittel(double b0, double gamma, double meff);

/// Ordinary least squares y = m·x + c with the textbook standard errors.
struct Line {
  double slope, intercept, slope_err, intercept_err;
};
Line ols(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle
