#include "magnonfit/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit {

using cd = std::complex<double>;

void BareResonanceModel::validate(double tol) const {
  if (!(ql > 0.0)) throw std::invalid_argument("BareResonanceModel: Ql must be positive");
  if (!(abs_qc > 0.0)) throw std::invalid_argument("BareResonanceModel: |Qc| must be positive");
  if (!(omega_res > 0.0)) throw std::invalid_argument("BareResonanceModel: omega_res must be positive");
  if (1.0 / ql < std::cos(phi) / abs_qc - tol / ql) {
    throw std::invalid_argument("BareResonanceModel: 1/Ql < Re(e^{i phi})/|Qc| (negative internal loss)");
  }
}

cd s21_bare(double omega, const BareResonanceModel& m) {
  const cd i(0.0, 1.0);
  const cd numer = (m.ql / m.abs_qc) * std::exp(i * m.phi);
  const cd denom = 1.0 + 2.0 * i * m.ql * (omega / m.omega_res - 1.0);
  return m.attenuation_a * (1.0 - numer / denom);
}

BareResonanceModel bare_model_at(const ResonatorParams& r, double b0) {
  const double w = r.omega_r(b0);
  BareResonanceModel m;
  m.omega_res = w;
  m.ql = w / r.kappa_r(b0);
  m.abs_qc = r.kappa_ext > 0.0 ? w / r.kappa_ext : std::numeric_limits<double>::infinity();
  m.phi = r.phi;
  m.attenuation_a = r.attenuation_a;
  return m;
}

cd s21_coupled(double omega, double b0, const ResonatorParams& r, const MagnonParams& magnon, double g,
               cd s21_background) {
  const cd i(0.0, 1.0);
  const double omega_r = r.omega_r(b0);
  const double kappa_r = r.kappa_r(b0);
  const double omega_m = kittel_frequency(b0, magnon);
  cd denom = i * (omega - omega_r) - 0.5 * kappa_r;
  if (g != 0.0) {
    const cd magnon_term = i * (omega - omega_m) - 0.5 * magnon.kappa_m;
    if (magnon_term == 0.0) throw std::domain_error("s21_coupled: magnon susceptibility diverges (kappa_m = 0 on resonance)");
    denom += g * g / magnon_term;
  }
  if (denom == 0.0) throw std::domain_error("s21_coupled: resonant denominator vanished");
  const cd response = 0.5 * r.kappa_ext * std::exp(-i * r.phi) / denom;
  return s21_background * (1.0 + response);
}

std::vector<cd> stitch_background(const SweepMap& sweep, std::span<const BackgroundSegment> segments) {
  if (segments.empty()) throw std::invalid_argument("stitch_background: no segments given");
  std::vector<BackgroundSegment> sorted(segments.begin(), segments.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.omega_lo < b.omega_lo; });
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (!(sorted[k].omega_hi > sorted[k].omega_lo)) {
      throw std::invalid_argument("stitch_background: segment with empty frequency range");
    }
    if (k > 0 && sorted[k].omega_lo < sorted[k - 1].omega_hi) {
      std::ostringstream msg;
      msg << "stitch_background: segments overlap between " << angular_to_ghz(sorted[k].omega_lo) << " and "
          << angular_to_ghz(sorted[k - 1].omega_hi) << " GHz";
      throw std::invalid_argument(msg.str());
    }
  }
  std::vector<std::size_t> rows;
  for (const auto& s : sorted) {
    const std::size_t idx = sweep.find_field(s.reference_field);
    if (idx == SweepMap::npos) {
      throw std::invalid_argument("stitch_background: reference field " + std::to_string(s.reference_field) +
                                  " T is not in the sweep");
    }
    rows.push_back(idx);
  }

  const auto& freqs = sweep.freqs();
  std::vector<cd> out(freqs.size());
  // Relative slack so segment edges written in GHz still catch grid points.
  const double slack = 1e-12 * std::max(std::abs(freqs.front()), std::abs(freqs.back()));
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    const double w = freqs[j];
    std::size_t hit = sorted.size();
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (w >= sorted[k].omega_lo - slack && w <= sorted[k].omega_hi + slack) {
        hit = k;
        break;
      }
    }
    if (hit == sorted.size()) {
      // Report the whole uncovered run, not just the first point.
      std::size_t end = j;
      while (end + 1 < freqs.size()) {
        const double next = freqs[end + 1];
        bool covered = false;
        for (const auto& s : sorted) covered = covered || (next >= s.omega_lo - slack && next <= s.omega_hi + slack);
        if (covered) break;
        ++end;
      }
      std::ostringstream msg;
      msg.precision(10);
      msg << "stitch_background: no segment covers " << angular_to_ghz(freqs[j]) << " .. "
          << angular_to_ghz(freqs[end]) << " GHz";
      throw std::invalid_argument(msg.str());
    }
    out[j] = sweep.at(rows[hit], j);
  }
  return out;
}

SweepMap normalize_by_background(const SweepMap& sweep, std::span<const cd> background) {
  if (background.size() != sweep.n_freqs()) {
    throw std::invalid_argument("normalize_by_background: background length does not match the frequency axis");
  }
  std::vector<cd> s21(sweep.s21().size());
  for (std::size_t i = 0; i < sweep.n_fields(); ++i) {
    for (std::size_t j = 0; j < sweep.n_freqs(); ++j) {
      if (background[j] == 0.0) throw std::domain_error("normalize_by_background: zero background value");
      s21[i * sweep.n_freqs() + j] = sweep.at(i, j) / background[j];
    }
  }
  auto meta = sweep.meta();
  meta["normalized_by_background"] = true;
  return SweepMap(sweep.fields(), sweep.freqs(), std::move(s21), std::move(meta));
}

}  // namespace magnonfit
