#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/hamiltonian.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"
#include "oracles.hpp"

using namespace magnonfit;

namespace {

oracle::Matrix to_rows(const Eigen::MatrixXd& h) {
  oracle::Matrix m(h.rows(), std::vector<double>(h.cols()));
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j) m[i][j] = h(i, j);
  return m;
}

}  // namespace

TEST(Hamiltonian, ArrowheadStructure) {
  const auto d = reference_device("fig4");
  const auto h = build_hamiltonian(0.1, d.resonator, d.magnon, d.coupling);
  const int n = d.coupling.n_max + 2;
  ASSERT_EQ(h.rows(), n);
  ASSERT_EQ(h.cols(), n);
  EXPECT_DOUBLE_EQ(h(0, 0), d.resonator.omega_r(0.1));
  EXPECT_DOUBLE_EQ(h(1, 1), kittel_frequency(0.1, d.magnon));
  EXPECT_DOUBLE_EQ(h(0, 1), d.coupling.g_uniform);
  for (int k = 1; k <= d.coupling.n_max; ++k) {
    EXPECT_DOUBLE_EQ(h(k + 1, k + 1), exchange_mode_frequency(k, 0.1, d.magnon));
    EXPECT_DOUBLE_EQ(h(0, k + 1), d.coupling.mode_coupling(k));
    EXPECT_DOUBLE_EQ(h(0, k + 1), d.coupling.g_uniform / (k + 1));
  }
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j)
      if (i != j) {
        EXPECT_EQ(h(i, j), 0.0);
      }
  EXPECT_EQ(h, h.transpose());
}

TEST(Hamiltonian, EigenvaluesMatchJacobiOracle) {
  const auto d = reference_device("fig4");
  for (double b = 0.0; b <= 0.3; b += 0.0125) {
    const auto h = build_hamiltonian(b, d.resonator, d.magnon, d.coupling);
    const auto spec = eigenspectrum(h, b);
    const auto ref = oracle::jacobi_eigen(to_rows(h));
    ASSERT_EQ(spec.eigenvalues.size(), ref.values.size());
    double wsum = 0.0;
    for (std::size_t k = 0; k < ref.values.size(); ++k) {
      EXPECT_NEAR(spec.eigenvalues[k], ref.values[k], 1e-10 * std::abs(ref.values[k])) << "b=" << b << " k=" << k;
      EXPECT_NEAR(spec.resonator_weights[k], ref.vectors[0][k] * ref.vectors[0][k], 1e-8);
      wsum += spec.resonator_weights[k];
    }
    EXPECT_NEAR(wsum, 1.0, 1e-12);
  }
}

TEST(Hamiltonian, RandomSymmetricMatricesProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 6;
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = 1e10 * u(rng);
    const auto spec = eigenspectrum(h, 0.0);
    const auto ref = oracle::jacobi_eigen(to_rows(h));
    for (int k = 0; k < n; ++k) EXPECT_NEAR(spec.eigenvalues[k], ref.values[k], 1e-10 * 1e10 * n);
    EXPECT_TRUE(std::is_sorted(spec.eigenvalues.begin(), spec.eigenvalues.end()));
  }
}

TEST(Hamiltonian, TwoModeLimitReducesToAnalyticBranches) {
  auto d = reference_device("fig4");
  d.coupling.n_max = 0;
  const double b = 0.1;
  const auto spec = eigenspectrum(build_hamiltonian(b, d.resonator, d.magnon, d.coupling), b);
  const auto f = coupled_branch_frequencies(d.resonator.omega_r(b), kittel_frequency(b, d.magnon), d.coupling.g_uniform);
  EXPECT_NEAR(spec.eigenvalues[0], f.minus, 1e-12 * f.minus);
  EXPECT_NEAR(spec.eigenvalues[1], f.plus, 1e-12 * f.plus);
}

TEST(Hamiltonian, RejectsBadMatrices) {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 2.0, 2.5, 1.0;
  EXPECT_THROW(eigenspectrum(asym, 0.0), std::invalid_argument);
  EXPECT_THROW(eigenspectrum(Eigen::MatrixXd(2, 3), 0.0), std::invalid_argument);
  EXPECT_THROW(eigenspectrum(Eigen::MatrixXd(0, 0), 0.0), std::invalid_argument);
}

TEST(Hamiltonian, EigenspectrumCsv) {
  const auto d = reference_device("fig4");
  const std::vector<double> fields{0.05, 0.1};
  const auto spectra = eigenspectrum_sweep(fields, d.resonator, d.magnon, d.coupling);
  std::ostringstream os;
  write_eigenspectrum_csv(os, spectra);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "field_t,eigenvalue_ghz,resonator_weight");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 2 * (d.coupling.n_max + 2));
}
