#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magnonfit/device_config.hpp"
#include "magnonfit/estimators.hpp"
#include "magnonfit/hamiltonian.hpp"
#include "magnonfit/transmission.hpp"
#include "magnonfit/types.hpp"

namespace magnonfit {

enum class SweepModel { Bare, Coupled, MultimodeEigen };

const char* to_string(SweepModel m);
/// "bare", "coupled" or "multimode-eigen"; std::invalid_argument otherwise.
SweepModel sweep_model_from_string(const std::string& name);

struct SweepPlan {
  double field_start = 0.0;  ///< T
  double field_stop = 0.0;
  double field_step = 0.0;
  double freq_start = 0.0;  ///< rad/s
  double freq_stop = 0.0;
  double freq_step = 0.0;
  SweepModel model = SweepModel::Coupled;
  double noise_fraction = 0.0;  ///< σ of the multiplicative magnitude noise
  std::uint64_t seed = 0;
  std::size_t max_cells = 20'000'000;

  /// Throws std::invalid_argument for non-positive steps or empty ranges.
  void validate() const;
  std::vector<double> fields() const;
  std::vector<double> freqs() const;
};

/// Plan file keys: field_start_t, field_stop_t, field_step_t, freq_start_ghz,
/// freq_stop_ghz, freq_step_mhz, model, noise_fraction, seed.
SweepPlan parse_sweep_plan(const nlohmann::json& j);
nlohmann::json sweep_plan_to_json(const SweepPlan& plan);

/// Field-independent line background S21,0(ω).
using BackgroundFn = std::function<std::complex<double>(double omega)>;

/// Evaluates the bare or coupled forward model on the plan grid. Without a
/// background function the background is the resonator's attenuation a.
/// Throws std::length_error when the grid exceeds plan.max_cells.
SweepMap run_sweep(const SweepPlan& plan, const DeviceParams& device, const BackgroundFn& background = {});

/// Eigenspectra of the multimode Hamiltonian at every plan field.
std::vector<EigenSpectrum> run_eigen_sweep(const SweepPlan& plan, const DeviceParams& device);

/// Multiplies every cell by (1 + σ·n_ij), n_ij ~ N(0, 1) drawn from a
/// generator seeded by (seed, i, j). Phases are untouched.
void apply_amplitude_noise(SweepMap& sweep, double fraction, std::uint64_t seed);

/// Magnitude-only sweep in dB, as stored by the s21_db CSV schema.
struct DbMap {
  std::vector<double> fields;
  std::vector<double> freqs;  ///< rad/s
  std::vector<double> db;     ///< row-major, one row per field

  double at(std::size_t i, std::size_t j) const { return db[i * freqs.size() + j]; }
};

/// 20·log10|S21| per cell, or ΔS21 relative to a per-frequency reference.
DbMap to_db(const SweepMap& sweep, std::span<const std::complex<double>> reference = {});

/// Columns field_t,freq_hz,re,im; one line per cell, field-major.
void write_sweep_csv(std::ostream& out, const SweepMap& sweep);
SweepMap read_sweep_csv(std::istream& in);
/// Columns field_t,freq_hz,s21_db.
void write_db_csv(std::ostream& out, const DbMap& map);
DbMap read_db_csv(std::istream& in);

/// "<stem>.meta.json" next to the CSV.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);
/// Writes the CSV plus the sidecar with sweep.meta().
void save_sweep(const std::filesystem::path& csv, const SweepMap& sweep);
/// Reads the CSV and, if present, the sidecar metadata.
SweepMap load_sweep(const std::filesystem::path& csv);

/// Background segments as stored in sweep metadata under "background_segments".
std::vector<BackgroundSegment> background_segments_from_meta(const nlohmann::json& meta);
nlohmann::json background_segments_to_json(std::span<const BackgroundSegment> segments);

struct AcceptanceDataset {
  SweepMap sweep;
  DeviceParams device;
  nlohmann::json truth;
  std::vector<BackgroundSegment> segments;
};

/// Noisy synthetic sweep of one of the two reference devices ("3.6GHz" or
/// "9.2GHz") with its ground truth. Unknown ids raise std::invalid_argument.
AcceptanceDataset synthesize_acceptance_dataset(const std::string& device_id, std::uint64_t seed = 2024,
                                                double noise_fraction = 0.01);

/// Device parameters used by the acceptance datasets.
DeviceParams reference_device(const std::string& device_id);

/// ESR calibration points for a linear coil: B = slope·I + offset, ESR lines
/// from f_start to f_stop (Hz) in f_step steps, Gaussian field jitter σ_B.
std::vector<CalibrationPoint> synthesize_field_calibration(double g_factor, double slope_t_per_a,
                                                           double offset_t, double f_start, double f_stop,
                                                           double f_step, double field_noise_t,
                                                           std::uint64_t seed,
                                                           const PhysicalConstants& constants = {});

}  // namespace magnonfit
