#pragma once

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace magnonfit {

/// Superconducting lumped-element resonator. Rates are angular (rad/s).
///
/// The resonance frequency and the total (loaded) damping are both modelled as
/// linear in the static field:
///   omega_r(B) = omega_r0 + gamma_r·B
///   kappa_r(B) = kappa_r0 + kappa_r_slope·(B − b_ref)
/// kappa_r is the loaded damping, so it already contains kappa_ext.
struct ResonatorParams {
  double omega_r0 = 0.0;
  double gamma_r = 0.0;        ///< rad/s per T
  double kappa_r0 = 0.0;       ///< loaded damping at b_ref
  double kappa_r_slope = 0.0;  ///< rad/s per T
  double b_ref = 0.0;          ///< T
  double kappa_ext = 0.0;      ///< feedline coupling rate
  double phi = 0.0;            ///< impedance-mismatch phase (rad)
  double attenuation_a = 1.0;
  double zr = 50.0;            ///< characteristic impedance (Ohm)
  double wire_width = 10e-6;   ///< inductor wire width (m)

  double omega_r(double b0) const { return omega_r0 + gamma_r * b0; }
  double kappa_r(double b0) const { return kappa_r0 + kappa_r_slope * (b0 - b_ref); }

  /// Checks kappa_r > 0 and kappa_ext <= kappa_r over [b_lo, b_hi].
  /// Throws std::invalid_argument naming the violated invariant.
  void validate(double b_lo, double b_hi) const;
};

/// Thin-film magnet hosting the uniform (Kittel) mode and thickness-quantised
/// exchange modes.
struct MagnonParams {
  double gamma = 0.0;         ///< gyromagnetic ratio, rad/s per T
  double mu0_meff = 0.0;      ///< μ0·M_eff (T); may exceed ms_field
  double lambda_ex_sq = 0.0;  ///< exchange length squared (m²)
  double thickness = 0.0;     ///< film thickness L (m)
  double kappa_m = 0.0;       ///< uniform-mode damping (rad/s)
  double ms_field = 0.0;      ///< μ0·M_s (T)
  double volume = 0.0;        ///< m³
  double n_spins = 0.0;

  void validate() const;
};

/// Number of spins carrying the moment M_s·V, each with moment g·μ_B·S.
/// Only used when a caller asks for N to be derived rather than declared.
double spin_count_from_moment(double ms_field, double volume, double mu0, double mu_b,
                              double g_factor = 2.0, double spin = 0.5);

/// g_n = g/(n+1) for the k != 0 modes.
struct InverseIndexRule {};

struct CouplingModel {
  double g_uniform = 0.0;
  int n_max = 0;
  std::variant<InverseIndexRule, std::vector<double>> g_rule = InverseIndexRule{};

  /// Coupling of thickness mode n (1..n_max) to the resonator.
  double mode_coupling(int n) const;
  void validate() const;
};

/// Complex transmission over a (field, frequency) grid. Row i holds fields[i].
class SweepMap {
 public:
  SweepMap() = default;
  /// Throws std::invalid_argument unless the shape is (fields × freqs) and
  /// both axes are strictly monotonic.
  SweepMap(std::vector<double> fields, std::vector<double> freqs,
           std::vector<std::complex<double>> s21, nlohmann::json meta = nlohmann::json::object());

  const std::vector<double>& fields() const { return fields_; }
  const std::vector<double>& freqs() const { return freqs_; }
  const std::vector<std::complex<double>>& s21() const { return s21_; }
  std::size_t n_fields() const { return fields_.size(); }
  std::size_t n_freqs() const { return freqs_.size(); }

  std::complex<double> at(std::size_t field_idx, std::size_t freq_idx) const {
    return s21_[field_idx * freqs_.size() + freq_idx];
  }
  std::span<const std::complex<double>> row(std::size_t field_idx) const {
    return {s21_.data() + field_idx * freqs_.size(), freqs_.size()};
  }

  /// Index of the field equal to b0 within tol, or npos.
  std::size_t find_field(double b0, double tol = 1e-9) const;

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<double> fields_;
  std::vector<double> freqs_;
  std::vector<std::complex<double>> s21_;
  nlohmann::json meta_ = nlohmann::json::object();
};

struct FitParameter {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
};

/// Outcome of a least-squares fit. std_error[i] = sqrt(covariance(i, i)).
struct FitResult {
  std::vector<FitParameter> params;
  Eigen::MatrixXd covariance;
  double residual_rms = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::string diagnostics;

  /// Throws std::out_of_range for unknown names.
  const FitParameter& param(std::string_view name) const;
  double value(std::string_view name) const { return param(name).value; }
  double error(std::string_view name) const { return param(name).std_error; }
};

nlohmann::json to_json(const FitResult& fit);

}  // namespace magnonfit
