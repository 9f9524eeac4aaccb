#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "common.hpp"

namespace CLI {
class App;
}

namespace magnonfit::cli {

struct SimulateOptions {
  std::string device;
  std::string reference;
  std::string dataset;
  std::string plan;
  std::string model;
  std::string out;
  std::string db_out;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
};
void register_simulate(CLI::App& app, SimulateOptions& o);
int run_simulate(const SimulateOptions& o, Context& ctx);

struct FitOptions {
  std::string mode = "pipeline";
  std::string in;
  std::string out;
  std::optional<double> field;
  std::string residuals = "magnitude";
  double gamma_ghz_per_t = 28.0;
  int refinements = 3;
};
void register_fit(CLI::App& app, FitOptions& o);
int run_fit(const FitOptions& o, Context& ctx);

struct RingdownOptions {
  std::string device;
  std::string reference;
  std::optional<double> field;
  std::string branch = "auto";
  double detuning_mhz = 0.0;
  std::optional<double> drive_ghz;
  double amplitude = 1.0;
  double t_on_ns = 2000.0;
  double t_total_ns = 3000.0;
  std::optional<double> dt_ns;
  double sample_ns = 1.0;
  double delay_ns = 60.0;
  std::string out;
  std::string report;
};
void register_ringdown(CLI::App& app, RingdownOptions& o);
int run_ringdown(const RingdownOptions& o, Context& ctx);

struct EstimateOptions {
  bool gs = false;
  bool collective = false;
  bool photons = false;
  bool cone = false;
  bool cooperativity = false;
  bool decay = false;
  bool calibration = false;
  std::optional<double> zr, w, fr, nspins, gs_hz, p_dbm, ql, qc, nm, g_mhz, kr_mhz, km_mhz, tau_ns, g_factor;
  double g_err_mhz = 0.0, kr_err_mhz = 0.0, km_err_mhz = 0.0;
  std::string in;
  std::string out;
};
void register_estimate(CLI::App& app, EstimateOptions& o);
int run_estimate(const EstimateOptions& o, Context& ctx);

}  // namespace magnonfit::cli
