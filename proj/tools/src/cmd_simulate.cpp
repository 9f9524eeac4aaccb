#include <fstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "magnonfit/hamiltonian.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"
#include "magnonfit/version.hpp"

namespace magnonfit::cli {

void register_simulate(CLI::App& app, SimulateOptions& o) {
  app.add_option("--device", o.device, "Device config file (JSON)");
  app.add_option("--reference", o.reference, "Built-in device: 3.6GHz, 9.2GHz or fig4");
  app.add_option("--dataset", o.dataset, "Synthesize a reference dataset with ground truth: 3.6GHz or 9.2GHz");
  app.add_option("--plan", o.plan, "Sweep plan file (JSON)");
  app.add_option("--model", o.model, "bare, coupled or multimode-eigen (overrides the plan)");
  app.add_option("--out", o.out, "Output CSV")->required();
  app.add_option("--db-out", o.db_out, "Also write |S21| in dB (field_t,freq_hz,s21_db)");
  app.add_option("--seed", o.seed, "Noise seed (overrides the plan)");
  app.add_option("--noise", o.noise, "Multiplicative amplitude-noise fraction (overrides the plan)");
}

namespace {

int simulate_dataset(const SimulateOptions& o, Context& ctx) {
  if (!o.plan.empty() || !o.model.empty() || !o.device.empty() || !o.reference.empty()) {
    throw UsageError("--dataset cannot be combined with --plan, --model, --device or --reference");
  }
  const std::uint64_t seed = o.seed.value_or(2024);
  AcceptanceDataset ds;
  try {
    ds = synthesize_acceptance_dataset(o.dataset, seed, o.noise.value_or(0.01));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  ds.sweep.meta()["version"] = kVersion;
  save_sweep(o.out, ds.sweep);
  const auto truth = sibling(o.out, ".truth.json");
  write_json_file(truth, ds.truth);
  if (!o.db_out.empty()) {
    std::ofstream db(o.db_out);
    if (!db) throw UsageError("cannot open " + o.db_out + " for writing");
    write_db_csv(db, to_db(ds.sweep));
  }
  write_manifest(o.out, ctx, "simulate", {}, seed);
  ctx.out << fmt::format("wrote {} ({} fields x {} frequencies), {}, {}\n", o.out, ds.sweep.n_fields(),
                         ds.sweep.n_freqs(), sidecar_path(o.out).string(), truth.string());
  return kOk;
}

}  // namespace

int run_simulate(const SimulateOptions& o, Context& ctx) {
  if (!o.dataset.empty()) return simulate_dataset(o, ctx);

  std::vector<std::filesystem::path> inputs;
  const DeviceParams device = resolve_device(o.device, o.reference);
  if (!o.device.empty()) inputs.emplace_back(o.device);
  if (o.plan.empty()) throw UsageError("--plan is required unless --dataset is given");
  SweepPlan plan = parse_sweep_plan(read_json_file(o.plan));
  inputs.emplace_back(o.plan);
  if (!o.model.empty()) {
    try {
      plan.model = sweep_model_from_string(o.model);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--model: ") + e.what());
    }
  }
  if (o.seed) plan.seed = *o.seed;
  if (o.noise) plan.noise_fraction = *o.noise;

  if (plan.model == SweepModel::MultimodeEigen) {
    const auto spectra = run_eigen_sweep(plan, device);
    std::ofstream csv(o.out);
    if (!csv) throw UsageError("cannot open " + o.out + " for writing");
    write_eigenspectrum_csv(csv, spectra);
    nlohmann::json meta = {{"version", kVersion},
                           {"model", to_string(plan.model)},
                           {"plan", sweep_plan_to_json(plan)},
                           {"device", device_config_to_json(device)},
                           {"columns", {"field_t", "eigenvalue_ghz", "resonator_weight"}}};
    write_json_file(sidecar_path(o.out), meta);
    write_manifest(o.out, ctx, "simulate", inputs, plan.seed);
    ctx.out << fmt::format("wrote {} ({} fields x {} eigenstates)\n", o.out, spectra.size(),
                           spectra.empty() ? 0 : spectra.front().eigenvalues.size());
    return kOk;
  }

  SweepMap sweep = run_sweep(plan, device);
  sweep.meta()["device"] = device_config_to_json(device);
  sweep.meta()["version"] = kVersion;
  save_sweep(o.out, sweep);
  if (!o.db_out.empty()) {
    std::ofstream db(o.db_out);
    if (!db) throw UsageError("cannot open " + o.db_out + " for writing");
    write_db_csv(db, to_db(sweep));
  }
  write_manifest(o.out, ctx, "simulate", inputs, plan.seed);
  ctx.out << fmt::format("wrote {} ({} fields x {} frequencies, model {}, noise {})\n", o.out, sweep.n_fields(),
                         sweep.n_freqs(), to_string(plan.model), plan.noise_fraction);
  return kOk;
}

}  // namespace magnonfit::cli
