#include "magnonfit/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace magnonfit {

namespace {

bool strictly_monotonic(const std::vector<double>& v) {
  if (v.size() < 2) return true;
  const bool increasing = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
  }
  return true;
}

}  // namespace

void ResonatorParams::validate(double b_lo, double b_hi) const {
  if (!(omega_r(b_lo) > 0.0 && omega_r(b_hi) > 0.0)) {
    throw std::invalid_argument("resonator: omega_r must be positive over the field range");
  }
  // Both rates are linear in B, so checking the end points covers the range.
  for (double b : {b_lo, b_hi}) {
    const double k = kappa_r(b);
    if (!(k > 0.0)) {
      throw std::invalid_argument("resonator: kappa_r(B) must be positive over the field range (B = " +
                                  std::to_string(b) + " T)");
    }
    if (kappa_ext > k) {
      throw std::invalid_argument("resonator: kappa_ext exceeds the loaded damping kappa_r at B = " +
                                  std::to_string(b) + " T");
    }
  }
  if (kappa_ext < 0.0) throw std::invalid_argument("resonator: kappa_ext must be non-negative");
  if (!(attenuation_a > 0.0)) throw std::invalid_argument("resonator: attenuation_a must be positive");
}

void MagnonParams::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("magnon: gamma must be positive");
  if (!(thickness > 0.0)) throw std::invalid_argument("magnon: thickness_L must be positive");
  if (lambda_ex_sq < 0.0) throw std::invalid_argument("magnon: lambda_ex_sq must be non-negative");
  if (kappa_m < 0.0) throw std::invalid_argument("magnon: kappa_m must be non-negative");
  if (n_spins < 0.0) throw std::invalid_argument("magnon: n_spins must be non-negative");
}

double spin_count_from_moment(double ms_field, double volume, double mu0, double mu_b,
                              double g_factor, double spin) {
  if (!(mu0 > 0.0 && mu_b > 0.0 && g_factor > 0.0 && spin > 0.0)) {
    throw std::invalid_argument("spin_count_from_moment: constants must be positive");
  }
  const double moment = ms_field / mu0 * volume;  // A·m²
  return moment / (g_factor * mu_b * spin);
}

double CouplingModel::mode_coupling(int n) const {
  if (n < 1 || n > n_max) throw std::out_of_range("CouplingModel: mode index out of range");
  if (const auto* list = std::get_if<std::vector<double>>(&g_rule)) {
    return (*list)[static_cast<std::size_t>(n - 1)];
  }
  return g_uniform / (n + 1);
}

void CouplingModel::validate() const {
  if (g_uniform < 0.0) throw std::invalid_argument("coupling: g must be non-negative");
  if (n_max < 0) throw std::invalid_argument("coupling: n_max must be >= 0");
  if (const auto* list = std::get_if<std::vector<double>>(&g_rule)) {
    if (list->size() != static_cast<std::size_t>(n_max)) {
      throw std::invalid_argument("coupling: explicit g_n list length must equal n_max");
    }
    for (double g : *list) {
      if (g < 0.0) throw std::invalid_argument("coupling: g_n must be non-negative");
    }
  }
}

SweepMap::SweepMap(std::vector<double> fields, std::vector<double> freqs,
                   std::vector<std::complex<double>> s21, nlohmann::json meta)
    : fields_(std::move(fields)), freqs_(std::move(freqs)), s21_(std::move(s21)), meta_(std::move(meta)) {
  if (fields_.empty() || freqs_.empty()) throw std::invalid_argument("SweepMap: empty axis");
  if (s21_.size() != fields_.size() * freqs_.size()) {
    throw std::invalid_argument("SweepMap: s21 size " + std::to_string(s21_.size()) + " != " +
                                std::to_string(fields_.size()) + " x " + std::to_string(freqs_.size()));
  }
  if (!strictly_monotonic(fields_)) throw std::invalid_argument("SweepMap: field axis not strictly monotonic");
  if (!strictly_monotonic(freqs_)) throw std::invalid_argument("SweepMap: frequency axis not strictly monotonic");
  if (!meta_.is_object()) meta_ = nlohmann::json::object();
}

std::size_t SweepMap::find_field(double b0, double tol) const {
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (std::abs(fields_[i] - b0) <= tol) return i;
  }
  return npos;
}

const FitParameter& FitResult::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("FitResult: no parameter named '" + std::string(name) + "'");
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json j;
  j["converged"] = fit.converged;
  j["residual_rms"] = fit.residual_rms;
  j["evaluations"] = fit.evaluations;
  j["diagnostics"] = fit.diagnostics;
  auto& params = j["params"];
  params = nlohmann::json::object();
  for (const auto& p : fit.params) {
    params[p.name] = {{"value", p.value}, {"std_error", p.std_error}};
  }
  return j;
}

}  // namespace magnonfit
