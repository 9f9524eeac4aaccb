#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "magnonfit/estimators.hpp"
#include "magnonfit/ringdown.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit::cli {

void register_estimate(CLI::App& app, EstimateOptions& o) {
  app.add_flag("--gs", o.gs, "Single-spin coupling from --zr, --w, --fr");
  app.add_flag("--collective", o.collective, "Collective coupling g_s*sqrt(N) from --gs-hz (or --gs inputs) and --nspins");
  app.add_flag("--photons", o.photons, "Mean photon number from --p-dbm, --ql, --qc, --fr");
  app.add_flag("--cone", o.cone, "Precession cone angle from --nm, --nspins");
  app.add_flag("--cooperativity", o.cooperativity, "C = 4g^2/(kappa_r kappa_m) from --g-mhz, --kr-mhz, --km-mhz");
  app.add_flag("--decay", o.decay, "Energy decay time and rate from a voltage ring-down time --tau-ns");
  app.add_flag("--calibration", o.calibration, "Coil calibration from an ESR table --in (current_a,freq_ghz) and --g-factor");
  app.add_option("--zr", o.zr, "Resonator impedance (Ohm)");
  app.add_option("--w", o.w, "Inductor wire width (m)");
  app.add_option("--fr", o.fr, "Resonator frequency (Hz)");
  app.add_option("--nspins", o.nspins, "Number of spins");
  app.add_option("--gs-hz", o.gs_hz, "Single-spin coupling g_s/2pi (Hz)");
  app.add_option("--p-dbm", o.p_dbm, "Power at the sample (dBm)");
  app.add_option("--ql", o.ql, "Loaded quality factor");
  app.add_option("--qc", o.qc, "Coupling quality factor |Q_c|");
  app.add_option("--nm", o.nm, "Number of magnons");
  app.add_option("--g-mhz", o.g_mhz, "g/2pi (MHz)");
  app.add_option("--kr-mhz", o.kr_mhz, "kappa_r/2pi (MHz)");
  app.add_option("--km-mhz", o.km_mhz, "kappa_m/2pi (MHz)");
  app.add_option("--g-err-mhz", o.g_err_mhz, "Standard error of g/2pi (MHz)");
  app.add_option("--kr-err-mhz", o.kr_err_mhz, "Standard error of kappa_r/2pi (MHz)");
  app.add_option("--km-err-mhz", o.km_err_mhz, "Standard error of kappa_m/2pi (MHz)");
  app.add_option("--tau-ns", o.tau_ns, "Voltage ring-down time (ns)");
  app.add_option("--g-factor", o.g_factor, "ESR g-factor of the calibration standard");
  app.add_option("--in", o.in, "Calibration table CSV");
  app.add_option("--out", o.out, "Write the estimates as JSON");
}

namespace {

std::vector<CalibrationPoint> read_calibration(const std::string& path) {
  require_readable(path);
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) throw UsageError(path + ": empty input");
  if (line.rfind("current_a,freq_ghz", 0) != 0) throw UsageError(path + ": expected header current_a,freq_ghz");
  std::vector<CalibrationPoint> pts;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string a, f;
    if (!std::getline(ss, a, ',') || !std::getline(ss, f, ',')) {
      throw UsageError(fmt::format("{}: line {}: expected 2 columns", path, n));
    }
    try {
      pts.push_back({std::stod(a), ghz_to_angular(std::stod(f))});
    } catch (const std::exception&) {
      throw UsageError(fmt::format("{}: line {}: bad number", path, n));
    }
  }
  return pts;
}

}  // namespace

int run_estimate(const EstimateOptions& o, Context& ctx) {
  if (!(o.gs || o.collective || o.photons || o.cone || o.cooperativity || o.decay || o.calibration)) {
    throw UsageError("choose at least one of --gs, --collective, --photons, --cone, --cooperativity, --decay, --calibration");
  }
  std::vector<std::string> missing;
  auto need = [&](bool selected, const std::optional<double>& v, const char* key) {
    if (selected && !v && std::find(missing.begin(), missing.end(), key) == missing.end()) missing.emplace_back(key);
  };
  need(o.gs, o.zr, "--zr");
  need(o.gs, o.w, "--w");
  need(o.gs, o.fr, "--fr");
  const bool collective_from_gs = o.collective && !o.gs_hz;
  need(collective_from_gs, o.zr, "--zr");
  need(collective_from_gs, o.w, "--w");
  need(collective_from_gs, o.fr, "--fr");
  need(o.collective, o.nspins, "--nspins");
  need(o.photons, o.p_dbm, "--p-dbm");
  need(o.photons, o.ql, "--ql");
  need(o.photons, o.qc, "--qc");
  need(o.photons, o.fr, "--fr");
  need(o.cone, o.nm, "--nm");
  need(o.cone, o.nspins, "--nspins");
  need(o.cooperativity, o.g_mhz, "--g-mhz");
  need(o.cooperativity, o.kr_mhz, "--kr-mhz");
  need(o.cooperativity, o.km_mhz, "--km-mhz");
  need(o.decay, o.tau_ns, "--tau-ns");
  need(o.calibration, o.g_factor, "--g-factor");
  if (o.calibration && o.in.empty()) missing.emplace_back("--in");
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    throw UsageError("missing inputs: " + list);
  }

  nlohmann::json rep = nlohmann::json::object();
  auto& out = ctx.out;
  std::optional<double> gs_rad;
  if (o.gs || collective_from_gs) {
    gs_rad = estimate_single_spin_coupling(hz_to_angular(*o.fr), *o.zr, *o.w);
    if (o.gs) {
      rep["single_spin_coupling"] = {{"inputs", {{"zr_ohm", *o.zr}, {"w_m", *o.w}, {"fr_hz", *o.fr}}},
                                     {"gs_hz", angular_to_hz(*gs_rad)},
                                     {"gs_rad_s", *gs_rad}};
      out << fmt::format("g_s/2pi = {:.4g} Hz  (Z_r = {} Ohm, w = {} m, f_r = {} Hz)\n", angular_to_hz(*gs_rad), *o.zr,
                         *o.w, *o.fr);
    }
  }
  if (o.collective) {
    const double gs = o.gs_hz ? hz_to_angular(*o.gs_hz) : *gs_rad;
    const double g = estimate_collective_coupling(gs, *o.nspins);
    rep["collective_coupling"] = {{"inputs", {{"gs_hz", angular_to_hz(gs)}, {"nspins", *o.nspins}}},
                                  {"g_mhz", angular_to_mhz(g)},
                                  {"g_rad_s", g}};
    out << fmt::format("g/2pi = {:.4g} MHz  (g_s/2pi = {:.4g} Hz, N = {:.4g})\n", angular_to_mhz(g), angular_to_hz(gs),
                       *o.nspins);
  }
  if (o.photons) {
    const double p = dbm_to_watts(*o.p_dbm);
    const double n = photon_number(p, *o.ql, *o.qc, hz_to_angular(*o.fr));
    rep["photon_number"] = {
        {"inputs", {{"p_dbm", *o.p_dbm}, {"p_w", p}, {"ql", *o.ql}, {"qc", *o.qc}, {"fr_hz", *o.fr}}},
        {"n", n}};
    out << fmt::format("<n> = {:.4g}  (P = {} dBm, Q_l = {}, |Q_c| = {}, f_r = {} Hz)\n", n, *o.p_dbm, *o.ql, *o.qc,
                       *o.fr);
  }
  if (o.cone) {
    const double theta = cone_angle(*o.nm, *o.nspins);
    rep["cone_angle"] = {{"inputs", {{"nm", *o.nm}, {"nspins", *o.nspins}}}, {"theta_rad", theta}};
    out << fmt::format("theta = {:.4g} rad  (n_m = {:.4g}, N = {:.4g})\n", theta, *o.nm, *o.nspins);
  }
  if (o.cooperativity) {
    const double g = mhz_to_angular(*o.g_mhz), kr = mhz_to_angular(*o.kr_mhz), km = mhz_to_angular(*o.km_mhz);
    const double c = magnonfit::cooperativity(g, kr, km);
    const double ce = cooperativity_error(g, mhz_to_angular(o.g_err_mhz), kr, mhz_to_angular(o.kr_err_mhz), km,
                                          mhz_to_angular(o.km_err_mhz));
    rep["cooperativity"] = {
        {"inputs", {{"g_mhz", *o.g_mhz}, {"kr_mhz", *o.kr_mhz}, {"km_mhz", *o.km_mhz}}}, {"c", c}, {"c_error", ce}};
    out << fmt::format("C = {:.1f} +/- {:.1f}  (g/2pi = {} MHz, kappa_r/2pi = {} MHz, kappa_m/2pi = {} MHz)\n", c, ce,
                       *o.g_mhz, *o.kr_mhz, *o.km_mhz);
  }
  if (o.decay) {
    const DecayRates r = decay_rate_conversion(*o.tau_ns * 1e-9);
    rep["decay"] = {{"inputs", {{"tau_voltage_ns", *o.tau_ns}}},
                    {"tau_energy_ns", r.tau_energy * 1e9},
                    {"kappa_mhz", angular_to_mhz(r.kappa)},
                    {"kappa_rad_s", r.kappa}};
    out << fmt::format("tau_E = {:.4g} ns, kappa/2pi = {:.4f} MHz  (tau_V = {} ns)\n", r.tau_energy * 1e9,
                       angular_to_mhz(r.kappa), *o.tau_ns);
  }
  if (o.calibration) {
    const auto pts = read_calibration(o.in);
    const FieldCalibration cal = fit_field_calibration(pts, *o.g_factor);
    rep["calibration"] = {{"inputs", {{"file", o.in}, {"points", pts.size()}, {"g_factor", *o.g_factor}}},
                          {"slope_mt_per_a", tesla_to_mt(cal.slope)},
                          {"slope_error_mt_per_a", tesla_to_mt(cal.slope_error)},
                          {"intercept_mt", tesla_to_mt(cal.intercept)},
                          {"intercept_error_mt", tesla_to_mt(cal.intercept_error)},
                          {"residual_rms_mt", tesla_to_mt(cal.residual_rms)}};
    out << fmt::format("slope = {:.4f} +/- {:.4f} mT/A, intercept = {:.4f} +/- {:.4f} mT  ({} points, g = {})\n",
                       tesla_to_mt(cal.slope), tesla_to_mt(cal.slope_error), tesla_to_mt(cal.intercept),
                       tesla_to_mt(cal.intercept_error), pts.size(), *o.g_factor);
  }

  if (!o.out.empty()) {
    write_json_file(o.out, rep);
    std::vector<std::filesystem::path> inputs;
    if (!o.in.empty()) inputs.emplace_back(o.in);
    write_manifest(o.out, ctx, "estimate", inputs, std::nullopt);
  }
  return kOk;
}

}  // namespace magnonfit::cli
