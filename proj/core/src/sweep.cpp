#include <cmath>
#include <random>
#include <stdexcept>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit {

namespace {

std::vector<double> axis(double start, double stop, double step) {
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = start + static_cast<double>(k) * step;
  return v;
}

}  // namespace

const char* to_string(SweepModel m) {
  switch (m) {
    case SweepModel::Bare:
      return "bare";
    case SweepModel::Coupled:
      return "coupled";
    case SweepModel::MultimodeEigen:
      return "multimode-eigen";
  }
  return "?";
}

SweepModel sweep_model_from_string(const std::string& name) {
  if (name == "bare") return SweepModel::Bare;
  if (name == "coupled") return SweepModel::Coupled;
  if (name == "multimode-eigen") return SweepModel::MultimodeEigen;
  throw std::invalid_argument("unknown sweep model '" + name + "' (expected bare, coupled or multimode-eigen)");
}

void SweepPlan::validate() const {
  if (!(field_step > 0.0)) throw std::invalid_argument("plan: field step must be positive");
  if (!(freq_step > 0.0)) throw std::invalid_argument("plan: frequency step must be positive");
  if (field_stop < field_start) throw std::invalid_argument("plan: empty field range");
  if (freq_stop < freq_start) throw std::invalid_argument("plan: empty frequency range");
  if (field_start < 0.0) throw std::invalid_argument("plan: fields must be non-negative");
  if (!(freq_start > 0.0)) throw std::invalid_argument("plan: frequencies must be positive");
  if (noise_fraction < 0.0) throw std::invalid_argument("plan: noise fraction must be non-negative");
}

std::vector<double> SweepPlan::fields() const { return axis(field_start, field_stop, field_step); }
std::vector<double> SweepPlan::freqs() const { return axis(freq_start, freq_stop, freq_step); }

SweepPlan parse_sweep_plan(const nlohmann::json& j) {
  auto need = [&](const char* key) -> double {
    if (!j.contains(key)) throw ConfigError(key, "missing required key");
    if (!j.at(key).is_number()) throw ConfigError(key, "expected a number");
    return j.at(key).get<double>();
  };
  SweepPlan p;
  p.field_start = need("field_start_t");
  p.field_stop = need("field_stop_t");
  p.field_step = need("field_step_t");
  p.freq_start = ghz_to_angular(need("freq_start_ghz"));
  p.freq_stop = ghz_to_angular(need("freq_stop_ghz"));
  p.freq_step = mhz_to_angular(need("freq_step_mhz"));
  if (j.contains("model")) {
    try {
      p.model = sweep_model_from_string(j.at("model").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("model", e.what());
    }
  }
  if (j.contains("noise_fraction")) p.noise_fraction = need("noise_fraction");
  if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("plan", e.what());
  }
  return p;
}

nlohmann::json sweep_plan_to_json(const SweepPlan& p) {
  return {{"field_start_t", p.field_start},
          {"field_stop_t", p.field_stop},
          {"field_step_t", p.field_step},
          {"freq_start_ghz", angular_to_ghz(p.freq_start)},
          {"freq_stop_ghz", angular_to_ghz(p.freq_stop)},
          {"freq_step_mhz", angular_to_mhz(p.freq_step)},
          {"model", to_string(p.model)},
          {"noise_fraction", p.noise_fraction},
          {"seed", p.seed}};
}

SweepMap run_sweep(const SweepPlan& plan, const DeviceParams& device, const BackgroundFn& background) {
  plan.validate();
  if (plan.model == SweepModel::MultimodeEigen) {
    throw std::invalid_argument("run_sweep: the multimode-eigen model yields eigenspectra, not a transmission map");
  }
  auto fields = plan.fields();
  auto freqs = plan.freqs();
  const double cells = static_cast<double>(fields.size()) * static_cast<double>(freqs.size());
  if (cells > static_cast<double>(plan.max_cells)) {
    throw std::length_error("run_sweep: grid of " + std::to_string(fields.size()) + " x " +
                            std::to_string(freqs.size()) + " cells exceeds the budget of " +
                            std::to_string(plan.max_cells));
  }
  device.resonator.validate(fields.front(), fields.back());
  device.magnon.validate();

  std::vector<std::complex<double>> bg(freqs.size(), device.resonator.attenuation_a);
  if (background) {
    for (std::size_t j = 0; j < freqs.size(); ++j) bg[j] = background(freqs[j]);
  }
  std::vector<std::complex<double>> s21(fields.size() * freqs.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const double b = fields[i];
    if (plan.model == SweepModel::Bare) {
      BareResonanceModel m = bare_model_at(device.resonator, b);
      m.attenuation_a = 1.0;
      for (std::size_t j = 0; j < freqs.size(); ++j) s21[i * freqs.size() + j] = bg[j] * s21_bare(freqs[j], m);
    } else {
      for (std::size_t j = 0; j < freqs.size(); ++j) {
        s21[i * freqs.size() + j] =
            s21_coupled(freqs[j], b, device.resonator, device.magnon, device.coupling.g_uniform, bg[j]);
      }
    }
  }
  nlohmann::json meta = {{"device_id", device.device_id},
                         {"model", to_string(plan.model)},
                         {"noise_fraction", plan.noise_fraction},
                         {"seed", plan.seed},
                         {"plan", sweep_plan_to_json(plan)}};
  SweepMap out(std::move(fields), std::move(freqs), std::move(s21), std::move(meta));
  if (plan.noise_fraction > 0.0) apply_amplitude_noise(out, plan.noise_fraction, plan.seed);
  return out;
}

std::vector<EigenSpectrum> run_eigen_sweep(const SweepPlan& plan, const DeviceParams& device) {
  if (!(plan.field_step > 0.0) || plan.field_stop < plan.field_start || plan.field_start < 0.0) {
    throw std::invalid_argument("run_eigen_sweep: invalid field axis");
  }
  device.magnon.validate();
  device.coupling.validate();
  const auto fields = plan.fields();
  return eigenspectrum_sweep(fields, device.resonator, device.magnon, device.coupling);
}

void apply_amplitude_noise(SweepMap& sweep, double fraction, std::uint64_t seed) {
  if (fraction < 0.0) throw std::invalid_argument("apply_amplitude_noise: fraction must be non-negative");
  if (fraction == 0.0) return;
  std::vector<std::complex<double>> s = sweep.s21();
  const std::size_t nf = sweep.n_freqs();
  for (std::size_t i = 0; i < sweep.n_fields(); ++i) {
    for (std::size_t j = 0; j < nf; ++j) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal(0.0, fraction);
      s[i * nf + j] *= 1.0 + normal(rng);
    }
  }
  nlohmann::json meta = sweep.meta();
  meta["noise_fraction"] = fraction;
  meta["seed"] = seed;
  sweep = SweepMap(sweep.fields(), sweep.freqs(), std::move(s), std::move(meta));
}

DbMap to_db(const SweepMap& sweep, std::span<const std::complex<double>> reference) {
  if (!reference.empty() && reference.size() != sweep.n_freqs()) {
    throw std::invalid_argument("to_db: reference length differs from the frequency axis");
  }
  DbMap m;
  m.fields = sweep.fields();
  m.freqs = sweep.freqs();
  m.db.resize(sweep.s21().size());
  for (std::size_t i = 0; i < sweep.n_fields(); ++i) {
    for (std::size_t j = 0; j < sweep.n_freqs(); ++j) {
      m.db[i * sweep.n_freqs() + j] =
          db_from_ratio(sweep.at(i, j), reference.empty() ? std::complex<double>{1.0} : reference[j]);
    }
  }
  return m;
}

}  // namespace magnonfit
