#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "magnonfit/types.hpp"

namespace magnonfit {

/// Raised for malformed configuration. what() starts with the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct DeviceParams {
  std::string device_id;
  ResonatorParams resonator;
  MagnonParams magnon;
  CouplingModel coupling;
  std::optional<std::pair<double, double>> field_range;  ///< T
};

/// Parses the device file schema (reporting units: GHz, MHz, mT, nm, um).
///
///   resonator{omega_r0_ghz, gamma_r_mhz_per_t, kappa_r0_mhz, kappa_r_slope_mhz_per_t,
///             kappa_ext_mhz, phi_rad, attenuation_a, zr_ohm, wire_width_um[, b_ref_t]}
///   magnon{gamma_ghz_per_t, mu0_meff_mt, lambda_ex_sq_m2, thickness_nm, kappa_m_mhz,
///          ms_mt, volume_m3, n_spins}
///   coupling{g_mhz, n_max, g_rule}   g_rule: "inverse_n_plus_1" or [g_n in MHz]
///   field_range_t: [lo, hi]          optional; b_ref defaults to lo
DeviceParams parse_device_config(const nlohmann::json& j);
DeviceParams load_device_config(const std::filesystem::path& path);
nlohmann::json device_config_to_json(const DeviceParams& device);

}  // namespace magnonfit
