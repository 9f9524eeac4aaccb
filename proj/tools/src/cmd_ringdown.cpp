#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "magnonfit/dispersion.hpp"
#include "magnonfit/ringdown.hpp"
#include "magnonfit/units.hpp"
#include "magnonfit/version.hpp"

namespace magnonfit::cli {

void register_ringdown(CLI::App& app, RingdownOptions& o) {
  app.add_option("--device", o.device, "Device config file (JSON)");
  app.add_option("--reference", o.reference, "Built-in device: 3.6GHz, 9.2GHz or fig4");
  app.add_option("--field", o.field, "Static field B0 (T)")->required();
  app.add_option("--branch", o.branch, "Driven branch: auto (resonator-like), upper or lower")
      ->check(CLI::IsMember({"auto", "upper", "lower"}));
  app.add_option("--detuning-mhz", o.detuning_mhz, "Drive offset from the branch frequency (MHz)");
  app.add_option("--drive-ghz", o.drive_ghz, "Absolute drive frequency (GHz); overrides --branch/--detuning-mhz");
  app.add_option("--amplitude", o.amplitude, "Drive amplitude (feedline units)");
  app.add_option("--t-on-ns", o.t_on_ns, "Drive switches off at this time (ns)");
  app.add_option("--t-total-ns", o.t_total_ns, "Simulated duration (ns)");
  app.add_option("--dt-ns", o.dt_ns, "Integration step (ns); default the largest allowed step");
  app.add_option("--sample-ns", o.sample_ns, "Output sample spacing (ns)");
  app.add_option("--delay-ns", o.delay_ns, "Fit starts this long after switch-off (ns)");
  app.add_option("--out", o.out, "Trace CSV (time_s,voltage)")->required();
  app.add_option("--report", o.report, "Decay report (JSON); default <out stem>.report.json");
}

int run_ringdown(const RingdownOptions& o, Context& ctx) {
  const DeviceParams dev = resolve_device(o.device, o.reference);
  if (o.t_total_ns < o.t_on_ns) throw UsageError("--t-total-ns must not be shorter than --t-on-ns");
  if (!(o.t_on_ns > 0.0)) throw UsageError("--t-on-ns must be positive");
  if (!(o.sample_ns > 0.0)) throw UsageError("--sample-ns must be positive");
  if (o.delay_ns < 0.0) throw UsageError("--delay-ns must not be negative");

  const auto& r = dev.resonator;
  const auto& m = dev.magnon;
  const double g = dev.coupling.g_uniform;
  const double b0 = *o.field;
  const double wr = r.omega_r(b0);
  const double wm = kittel_frequency(b0, m);
  const double kr = r.kappa_r(b0);
  const auto freq = damped_branch_frequencies(wr, kr, wm, m.kappa_m, g);
  const auto kap = branch_linewidths(wr, kr, wm, m.kappa_m, g);
  const auto weight = branch_resonator_weights(wr, wm, g);
  const bool upper = o.branch == "upper" || (o.branch == "auto" && weight.plus >= weight.minus);

  RingdownDrive d;
  d.b0 = b0;
  d.drive_amplitude = o.amplitude;
  d.drive_freq = o.drive_ghz ? ghz_to_angular(*o.drive_ghz)
                             : (upper ? freq.plus : freq.minus) + mhz_to_angular(o.detuning_mhz);
  d.t_on = o.t_on_ns * 1e-9;
  d.t_total = o.t_total_ns * 1e-9;
  d.sample_dt = o.sample_ns * 1e-9;
  RingdownDrive probe = d;
  probe.dt = 1.0;
  const double bound = max_ringdown_step(r, m, g, probe);
  d.dt = o.dt_ns ? *o.dt_ns * 1e-9 : bound;
  if (d.dt > bound) {
    throw UsageError(fmt::format("--dt-ns {} is too coarse: this run needs dt <= {:.6g} ns", *o.dt_ns, bound * 1e9));
  }

  const RingdownTrace tr = simulate_ringdown(r, m, g, d);

  const std::string params = device_config_to_json(dev).dump() + fmt::format("|{}|{}|{}|{}|{}|{}", num(b0),
                                                                             num(d.drive_freq), num(d.drive_amplitude),
                                                                             num(d.t_on), num(d.t_total), num(d.dt));
  const std::string digest = sha256_text(params);

  {
    std::ofstream csv(o.out);
    if (!csv) throw UsageError("cannot open " + o.out + " for writing");
    csv << "# drive_freq_hz: " << num(angular_to_hz(d.drive_freq)) << "\n";
    csv << "# field_t: " << num(b0) << "\n";
    csv << "# t_on_s: " << num(tr.drive_on_until) << "\n";
    csv << "# dt_s: " << num(tr.dt) << "\n";
    csv << "# integration_dt_s: " << num(d.dt) << "\n";
    csv << "# params_sha256: " << digest << "\n";
    csv << "time_s,voltage\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) csv << num(tr.times[k]) << "," << num(tr.voltage[k]) << "\n";
  }

  const double t_start = tr.drive_on_until + o.delay_ns * 1e-9;
  const bool detuned = o.drive_ghz.has_value() || o.detuning_mhz != 0.0;
  nlohmann::json fit_json;
  double tau = 0.0, tau_err = 0.0;
  std::string warning;
  double beat_hz = 0.0, beat_err_hz = 0.0;
  if (detuned) {
    const SinusoidFit sf = fit_decaying_sinusoid(tr, t_start);
    tau = sf.tau_voltage;
    tau_err = sf.tau_error;
    warning = sf.warning;
    beat_hz = sf.beat_freq_hz();
    beat_err_hz = angular_to_hz(sf.beat_omega_error);
    fit_json = to_json(sf.fit);
  } else {
    const DecayFit df = fit_exponential_decay(tr, t_start);
    tau = df.tau_voltage;
    tau_err = df.tau_error;
    warning = df.warning;
    fit_json = to_json(df.fit);
  }
  const bool decayed = std::isfinite(tau) && tau > 0.0;
  const double predicted = upper ? kap.plus : kap.minus;

  nlohmann::json rep = {{"field_t", b0},
                        {"branch", upper ? "upper" : "lower"},
                        {"drive_freq_ghz", angular_to_ghz(d.drive_freq)},
                        {"drive_freq_rad_s", d.drive_freq},
                        {"branch_freq_ghz", angular_to_ghz(upper ? freq.plus : freq.minus)},
                        {"predicted_kappa_mhz", angular_to_mhz(predicted)},
                        {"fit_start_s", t_start},
                        {"warning", warning},
                        {"fit", fit_json}};
  if (decayed) {
    const DecayRates rates = decay_rate_conversion(tau);
    const double kappa_err = rates.kappa * tau_err / tau;
    rep["tau_voltage_ns"] = tau * 1e9;
    rep["tau_voltage_error_ns"] = tau_err * 1e9;
    rep["tau_energy_ns"] = rates.tau_energy * 1e9;
    rep["kappa_mhz"] = angular_to_mhz(rates.kappa);
    rep["kappa_error_mhz"] = angular_to_mhz(kappa_err);
    rep["kappa_rad_s"] = rates.kappa;
  }
  if (detuned) {
    rep["beat_freq_mhz"] = beat_hz * 1e-6;
    rep["beat_freq_error_mhz"] = beat_err_hz * 1e-6;
  }
  const std::filesystem::path report = o.report.empty() ? sibling(o.out, ".report.json") : std::filesystem::path(o.report);
  write_json_file(report, rep);
  write_manifest(o.out, ctx, "ringdown", o.device.empty() ? std::vector<std::filesystem::path>{}
                                                          : std::vector<std::filesystem::path>{o.device},
                 std::nullopt);

  ctx.out << fmt::format("B0 = {} T, {} branch at {:.6f} GHz, drive {:.6f} GHz\n", b0, upper ? "upper" : "lower",
                         angular_to_ghz(upper ? freq.plus : freq.minus), angular_to_ghz(d.drive_freq));
  if (!decayed) throw NumericalFailure("no decay detected in the fit window" + (warning.empty() ? "" : ": " + warning));
  const DecayRates rates = decay_rate_conversion(tau);
  ctx.out << fmt::format("tau_V = {:.3f} +/- {:.3f} ns, tau_E = {:.3f} ns\n", tau * 1e9, tau_err * 1e9,
                         rates.tau_energy * 1e9);
  ctx.out << fmt::format("kappa/2pi = {:.4f} +/- {:.4f} MHz (branch linewidth {:.4f} MHz)\n",
                         angular_to_mhz(rates.kappa), angular_to_mhz(rates.kappa * tau_err / tau),
                         angular_to_mhz(predicted));
  if (detuned) ctx.out << fmt::format("f_beat = {:.4f} +/- {:.4f} MHz\n", beat_hz * 1e-6, beat_err_hz * 1e-6);
  if (!warning.empty()) ctx.err << "warning: " << warning << "\n";
  return kOk;
}

}  // namespace magnonfit::cli
