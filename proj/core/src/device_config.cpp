#include "magnonfit/device_config.hpp"

#include <fstream>

#include "magnonfit/units.hpp"

namespace magnonfit {

namespace {

const nlohmann::json& section(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw ConfigError(name, "missing section");
  if (!j.at(name).is_object()) throw ConfigError(name, "expected an object");
  return j.at(name);
}

double number(const nlohmann::json& sec, const std::string& prefix, const char* key) {
  const std::string full = prefix + "." + key;
  if (!sec.contains(key)) throw ConfigError(full, "missing key");
  if (!sec.at(key).is_number()) throw ConfigError(full, "expected a number");
  return sec.at(key).get<double>();
}

double number_or(const nlohmann::json& sec, const std::string& prefix, const char* key, double fallback) {
  if (!sec.contains(key)) return fallback;
  return number(sec, prefix, key);
}

}  // namespace

DeviceParams parse_device_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  DeviceParams d;
  d.device_id = j.value("device_id", std::string{});

  if (j.contains("field_range_t")) {
    const auto& fr = j.at("field_range_t");
    if (!fr.is_array() || fr.size() != 2 || !fr[0].is_number() || !fr[1].is_number()) {
      throw ConfigError("field_range_t", "expected [lo, hi] in tesla");
    }
    const double lo = fr[0].get<double>();
    const double hi = fr[1].get<double>();
    if (!(hi > lo)) throw ConfigError("field_range_t", "hi must exceed lo");
    d.field_range = std::make_pair(lo, hi);
  }

  const auto& r = section(j, "resonator");
  auto& res = d.resonator;
  res.omega_r0 = ghz_to_angular(number(r, "resonator", "omega_r0_ghz"));
  res.gamma_r = mhz_to_angular(number(r, "resonator", "gamma_r_mhz_per_t"));
  res.kappa_r0 = mhz_to_angular(number(r, "resonator", "kappa_r0_mhz"));
  res.kappa_r_slope = mhz_to_angular(number(r, "resonator", "kappa_r_slope_mhz_per_t"));
  res.kappa_ext = mhz_to_angular(number(r, "resonator", "kappa_ext_mhz"));
  res.phi = number(r, "resonator", "phi_rad");
  res.attenuation_a = number(r, "resonator", "attenuation_a");
  res.zr = number(r, "resonator", "zr_ohm");
  res.wire_width = number(r, "resonator", "wire_width_um") * 1e-6;
  res.b_ref = number_or(r, "resonator", "b_ref_t", d.field_range ? d.field_range->first : 0.0);

  const auto& m = section(j, "magnon");
  auto& mag = d.magnon;
  mag.gamma = ghz_to_angular(number(m, "magnon", "gamma_ghz_per_t"));
  mag.mu0_meff = mt_to_tesla(number(m, "magnon", "mu0_meff_mt"));
  mag.lambda_ex_sq = number(m, "magnon", "lambda_ex_sq_m2");
  mag.thickness = number(m, "magnon", "thickness_nm") * 1e-9;
  mag.kappa_m = mhz_to_angular(number(m, "magnon", "kappa_m_mhz"));
  mag.ms_field = mt_to_tesla(number(m, "magnon", "ms_mt"));
  mag.volume = number(m, "magnon", "volume_m3");
  mag.n_spins = number(m, "magnon", "n_spins");

  const auto& c = section(j, "coupling");
  auto& cpl = d.coupling;
  cpl.g_uniform = mhz_to_angular(number(c, "coupling", "g_mhz"));
  if (!c.contains("n_max") || !c.at("n_max").is_number_integer()) {
    throw ConfigError("coupling.n_max", "expected a non-negative integer");
  }
  cpl.n_max = c.at("n_max").get<int>();
  if (c.contains("g_rule")) {
    const auto& rule = c.at("g_rule");
    if (rule.is_string()) {
      if (rule.get<std::string>() != "inverse_n_plus_1") {
        throw ConfigError("coupling.g_rule", "unknown rule '" + rule.get<std::string>() + "'");
      }
      cpl.g_rule = InverseIndexRule{};
    } else if (rule.is_array()) {
      std::vector<double> list;
      for (const auto& v : rule) {
        if (!v.is_number()) throw ConfigError("coupling.g_rule", "list entries must be numbers (MHz)");
        list.push_back(mhz_to_angular(v.get<double>()));
      }
      cpl.g_rule = std::move(list);
    } else {
      throw ConfigError("coupling.g_rule", "expected \"inverse_n_plus_1\" or a list of MHz values");
    }
  }

  try {
    mag.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("magnon", e.what());
  }
  try {
    cpl.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("coupling", e.what());
  }
  if (d.field_range) {
    try {
      res.validate(d.field_range->first, d.field_range->second);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("resonator", e.what());
    }
  }
  return d;
}

DeviceParams load_device_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open device file");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string(), std::string("parse error: ") + e.what());
  }
  return parse_device_config(j);
}

nlohmann::json device_config_to_json(const DeviceParams& d) {
  const auto& r = d.resonator;
  const auto& m = d.magnon;
  const auto& c = d.coupling;
  nlohmann::json j;
  if (!d.device_id.empty()) j["device_id"] = d.device_id;
  if (d.field_range) j["field_range_t"] = {d.field_range->first, d.field_range->second};
  j["resonator"] = {
      {"omega_r0_ghz", angular_to_ghz(r.omega_r0)},
      {"gamma_r_mhz_per_t", angular_to_mhz(r.gamma_r)},
      {"kappa_r0_mhz", angular_to_mhz(r.kappa_r0)},
      {"kappa_r_slope_mhz_per_t", angular_to_mhz(r.kappa_r_slope)},
      {"kappa_ext_mhz", angular_to_mhz(r.kappa_ext)},
      {"phi_rad", r.phi},
      {"attenuation_a", r.attenuation_a},
      {"zr_ohm", r.zr},
      {"wire_width_um", r.wire_width * 1e6},
      {"b_ref_t", r.b_ref},
  };
  j["magnon"] = {
      {"gamma_ghz_per_t", angular_to_ghz(m.gamma)},
      {"mu0_meff_mt", tesla_to_mt(m.mu0_meff)},
      {"lambda_ex_sq_m2", m.lambda_ex_sq},
      {"thickness_nm", m.thickness * 1e9},
      {"kappa_m_mhz", angular_to_mhz(m.kappa_m)},
      {"ms_mt", tesla_to_mt(m.ms_field)},
      {"volume_m3", m.volume},
      {"n_spins", m.n_spins},
  };
  nlohmann::json rule;
  if (const auto* list = std::get_if<std::vector<double>>(&c.g_rule)) {
    rule = nlohmann::json::array();
    for (double g : *list) rule.push_back(angular_to_mhz(g));
  } else {
    rule = "inverse_n_plus_1";
  }
  j["coupling"] = {{"g_mhz", angular_to_mhz(c.g_uniform)}, {"n_max", c.n_max}, {"g_rule", rule}};
  return j;
}

}  // namespace magnonfit
