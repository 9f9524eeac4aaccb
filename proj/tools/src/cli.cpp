#include "magnonfit_cli/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "magnonfit/device_config.hpp"
#include "magnonfit/spectro_fit.hpp"
#include "magnonfit/version.hpp"

namespace magnonfit::cli {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{args, out, err};
  CLI::App app{"magnonfit: hybrid magnon-resonator simulation and fitting"};
  app.name("magnonfit");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateOptions sim;
  FitOptions fit;
  RingdownOptions ring;
  EstimateOptions est;
  auto* c_sim = app.add_subcommand("simulate", "Synthesize a field-frequency S21 map or an eigenspectrum");
  auto* c_fit = app.add_subcommand("fit", "Fit a resonance trace, a full sweep, or a splitting table");
  auto* c_ring = app.add_subcommand("ringdown", "Simulate a ring-down trace and fit its decay");
  auto* c_est = app.add_subcommand("estimate", "Closed-form estimators (coupling, photon number, cone angle, ...)");
  register_simulate(*c_sim, sim);
  register_fit(*c_fit, fit);
  register_ringdown(*c_ring, ring);
  register_estimate(*c_est, est);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim, ctx);
    if (c_fit->parsed()) return run_fit(fit, ctx);
    if (c_ring->parsed()) return run_ringdown(ring, ctx);
    if (c_est->parsed()) return run_estimate(est, ctx);
    err << "error: no command given\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const NoResonanceError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::logic_error& e) {
    // invalid_argument, length_error, out_of_range: bad inputs
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace magnonfit::cli
