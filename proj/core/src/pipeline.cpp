#include "magnonfit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/estimators.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/transmission.hpp"
#include "magnonfit/units.hpp"
#include "trace_stats.hpp"

namespace magnonfit {

namespace {

struct RowDip {
  double field;
  double omega;
  double depth;
};

std::vector<RowDip> deepest_dips(const SweepMap& s) {
  const auto& freqs = s.freqs();
  const double step = std::abs(freqs.back() - freqs.front()) / static_cast<double>(std::max<std::size_t>(1, freqs.size() - 1));
  const auto box = static_cast<std::size_t>(std::max(1.0, std::round(mhz_to_angular(1.0) / step)));
  std::vector<RowDip> out;
  std::vector<double> mag(s.n_freqs());
  for (std::size_t i = 0; i < s.n_fields(); ++i) {
    const auto row = s.row(i);
    for (std::size_t j = 0; j < mag.size(); ++j) mag[j] = std::abs(row[j]);
    const auto smooth = detail::boxcar(mag, box);
    const double base = detail::median(mag);
    const auto jmin = static_cast<std::size_t>(std::min_element(smooth.begin(), smooth.end()) - smooth.begin());
    out.push_back({s.fields()[i], freqs[jmin], base > 0.0 ? 1.0 - smooth[jmin] / base : 0.0});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.field < b.field; });
  return out;
}

double kittel(double b, double gamma, double meff) {
  MagnonParams m;
  m.gamma = gamma;
  m.mu0_meff = meff;
  m.thickness = 1.0;
  return kittel_frequency(b, m);
}

nlohmann::json branch_point_json(const BranchPoint& p) {
  return {{"field_t", p.field},
          {"branch", to_string(p.branch)},
          {"freq_ghz", angular_to_ghz(p.omega)},
          {"freq_error_mhz", angular_to_mhz(p.omega_error)},
          {"kappa_mhz", angular_to_mhz(p.kappa)},
          {"kappa_error_mhz", angular_to_mhz(p.kappa_error)},
          {"depth_significance", p.depth_significance},
          {"converged", p.fit.converged}};
}

/// Removes points whose normalised residual exceeds n_sigma times the robust
/// (MAD) scale, floored at 1. Returns the number removed.
std::size_t drop_outliers(BranchTable& table, const std::vector<double>& r, double n_sigma, const char* which) {
  std::vector<double> a(r.size());
  std::transform(r.begin(), r.end(), a.begin(), [](double x) { return std::abs(x); });
  const double scale = std::max(1.0, 1.4826 * detail::median(a));
  std::vector<BranchPoint> kept;
  std::size_t removed = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    auto& p = table.points[k];
    if (std::abs(r[k]) > n_sigma * scale) {
      table.skipped.push_back({p.field, p.branch,
                               std::string("outlier in the ") + which + " fit (" + std::to_string(r[k]) +
                                   " standard errors)"});
      ++removed;
    } else {
      kept.push_back(std::move(p));
    }
  }
  table.points = std::move(kept);
  return removed;
}

}  // namespace

HybridEstimate seed_from_sweep(const SweepMap& s, double gamma, const SeedSearchOptions& o) {
  if (s.n_fields() < 3) throw std::invalid_argument("seed_from_sweep: need at least 3 fields");
  const auto dips = deepest_dips(s);
  const RowDip& a = dips.front();
  const RowDip& b = dips.back();
  const double cap2 = o.cap * o.cap;

  double best = std::numeric_limits<double>::infinity();
  HybridEstimate est;
  est.gamma = gamma;
  std::vector<double> wm(dips.size());
  for (double meff = o.meff_min; meff <= o.meff_max + 1e-12; meff += o.meff_step) {
    for (std::size_t i = 0; i < dips.size(); ++i) wm[i] = kittel(dips[i].field, gamma, meff);
    const double wma = wm.front(), wmb = wm.back();
    for (double g = o.g_min; g <= o.g_max + 1e-6; g += o.g_step) {
      const double da = a.omega - wma, db = b.omega - wmb;
      if (std::abs(da) <= g || std::abs(db) <= g) continue;
      // (ω − ω_r)(ω − ω_m) = g² inverted for ω_r at the two outer dips.
      const double wra = a.omega - g * g / da;
      const double wrb = b.omega - g * g / db;
      const double gr = (wrb - wra) / (b.field - a.field);
      const double wr0 = wra - gr * a.field;
      double score = 0.0;
      for (std::size_t i = 0; i < dips.size() && score < best; ++i) {
        const double wr = wr0 + gr * dips[i].field;
        const double delta = wm[i] - wr;
        const double root = std::sqrt(delta * delta + 4.0 * g * g);
        const double up = wr + 0.5 * (delta + root);
        const double lo = wr + 0.5 * (delta - root);
        const double r = std::min(std::abs(dips[i].omega - up), std::abs(dips[i].omega - lo));
        score += std::min(r * r, cap2);
      }
      if (score < best) {
        best = score;
        est.mu0_meff = meff;
        est.g = g;
        est.omega_r0 = wr0;
        est.gamma_r = gr;
      }
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("seed_from_sweep: no admissible (M_eff, g) candidate");

  // Linewidth seeds from the lowest-field dip.
  est.kappa_r = mhz_to_angular(1.0);
  const std::size_t ia = s.find_field(a.field);
  try {
    const double hw = std::max(15.0 * est.kappa_r, 60.0 * (s.freqs()[1] - s.freqs()[0]));
    std::vector<double> w;
    std::vector<std::complex<double>> v;
    for (std::size_t j = 0; j < s.n_freqs(); ++j) {
      if (std::abs(s.freqs()[j] - a.omega) <= hw) {
        w.push_back(s.freqs()[j]);
        v.push_back(s.at(ia, j));
      }
    }
    const auto rf = fit_resonance(w, v);
    if (rf.fit.converged && rf.kappa > 0.0) est.kappa_r = rf.kappa;
  } catch (const std::exception&) {
    // keep the default
  }
  est.kappa_m = 20.0 * est.kappa_r;
  return est;
}

nlohmann::json PipelineReport::to_json() const {
  nlohmann::json j;
  const double g = dispersion.g;
  j["headline"] = {{"g_mhz", angular_to_mhz(g)},
                   {"g_error_mhz", angular_to_mhz(dispersion.g_error)},
                   {"mu0_meff_mt", tesla_to_mt(dispersion.mu0_meff)},
                   {"mu0_meff_error_mt", tesla_to_mt(dispersion.mu0_meff_error)},
                   {"b_res_t", b_res},
                   {"b_res_error_t", b_res_error},
                   {"kappa_r_mhz", angular_to_mhz(kappa_r_at_res)},
                   {"kappa_r_error_mhz", angular_to_mhz(kappa_r_at_res_error)},
                   {"kappa_m_mhz", angular_to_mhz(linewidths.kappa_m)},
                   {"kappa_m_error_mhz", angular_to_mhz(linewidths.kappa_m_error)},
                   {"cooperativity", cooperativity},
                   {"cooperativity_error", cooperativity_error},
                   {"omega_r0_ghz", angular_to_ghz(dispersion.omega_r0)},
                   {"gamma_r_mhz_per_t", angular_to_mhz(dispersion.gamma_r)}};
  j["angular"] = {{"g", g},
                  {"kappa_r", kappa_r_at_res},
                  {"kappa_m", linewidths.kappa_m},
                  {"omega_r0", dispersion.omega_r0},
                  {"gamma_r", dispersion.gamma_r},
                  {"mu0_meff_t", dispersion.mu0_meff}};
  j["converged"] = converged;
  j["background_from_segments"] = background_from_segments;
  j["seed"] = {{"g_mhz", angular_to_mhz(seed.g)},
               {"mu0_meff_mt", tesla_to_mt(seed.mu0_meff)},
               {"omega_r0_ghz", angular_to_ghz(seed.omega_r0)},
               {"gamma_r_mhz_per_t", angular_to_mhz(seed.gamma_r)},
               {"kappa_r_mhz", angular_to_mhz(seed.kappa_r)},
               {"kappa_m_mhz", angular_to_mhz(seed.kappa_m)}};
  j["dispersion_fit"] = magnonfit::to_json(dispersion.fit);
  j["linewidth_fit"] = magnonfit::to_json(linewidths.fit);
  j["linewidth_fit"]["b_ref_t"] = linewidths.b_ref;
  if (crossing) {
    j["crossing_fit"] = {{"g_mhz", angular_to_mhz(crossing->g)},
                         {"g_error_mhz", angular_to_mhz(crossing->g_error)},
                         {"b_res_t", crossing->b_res},
                         {"b_res_error_t", crossing->b_res_error},
                         {"gamma_rm_ghz_per_t", angular_to_ghz(crossing->gamma_rm)},
                         {"gamma_rm_error_ghz_per_t", angular_to_ghz(crossing->gamma_rm_error)},
                         {"warning", crossing->warning}};
  }
  auto& pts = j["branches"];
  pts = nlohmann::json::array();
  for (const auto& p : branches.points) pts.push_back(branch_point_json(p));
  auto& sk = j["skipped"];
  sk = nlohmann::json::array();
  for (const auto& s : branches.skipped) {
    sk.push_back({{"field_t", s.field}, {"branch", to_string(s.branch)}, {"reason", s.reason}});
  }
  j["warnings"] = warnings;
  j["diagnostics"] = diagnostics;
  return j;
}

PipelineReport run_pipeline(const SweepMap& sweep, const PipelineOptions& opt) {
  PipelineReport rep;
  const double gamma = opt.gamma;
  if (!(gamma > 0.0)) throw std::invalid_argument("run_pipeline: gamma must be positive");

  std::vector<std::complex<double>> bg;
  const auto segs = background_segments_from_meta(sweep.meta());
  if (!segs.empty()) {
    bg = stitch_background(sweep, segs);
    rep.background_from_segments = true;
  } else {
    bg.resize(sweep.n_freqs());
    std::vector<double> col(sweep.n_fields());
    for (std::size_t j = 0; j < sweep.n_freqs(); ++j) {
      for (std::size_t i = 0; i < sweep.n_fields(); ++i) col[i] = std::abs(sweep.at(i, j));
      bg[j] = detail::median(col);
    }
    rep.warnings.push_back("no background segments in metadata; using the per-frequency median over fields");
  }
  const SweepMap norm = normalize_by_background(sweep, bg);
  const double b_lo = *std::min_element(norm.fields().begin(), norm.fields().end());
  const double b_hi = *std::max_element(norm.fields().begin(), norm.fields().end());
  const double b_ref = opt.b_ref.value_or(b_lo);

  HybridEstimate est = opt.initial ? *opt.initial : seed_from_sweep(norm, gamma, opt.seed_search);
  est.gamma = gamma;
  rep.seed = est;

  BranchTable table;
  DispersionFit disp;
  LinewidthFit lw;
  for (int it = 0; it < std::max(1, opt.refinements); ++it) {
    WindowOptions wo = opt.windows;
    if (it == 0 && !opt.initial) wo.margin = std::max(wo.margin, 0.25 * est.g);
    std::vector<SkippedBranch> skipped;
    const auto windows = windows_from_estimate(norm, est, wo, &skipped);
    table = extract_branches(norm, windows, opt.extraction);
    table.skipped.insert(table.skipped.begin(), skipped.begin(), skipped.end());

    DispersionFitOptions dopt;
    dopt.gamma = gamma;
    dopt.initial = est;
    disp = fit_branch_dispersion(table, dopt);

    // Drop gross outliers (mis-identified dips) against a robust residual
    // scale, refitting until none remain.
    for (int pass = 0; pass < 3; ++pass) {
      std::vector<double> r(table.points.size());
      for (std::size_t k = 0; k < r.size(); ++k) {
        const auto& p = table.points[k];
        const double wm = kittel(p.field, gamma, disp.mu0_meff);
        const auto f = coupled_branch_frequencies(disp.omega_r0 + disp.gamma_r * p.field, wm, disp.g);
        const double model = p.branch == Branch::Upper ? f.plus : f.minus;
        r[k] = (model - p.omega) / (p.omega_error > 0.0 ? p.omega_error : 1.0);
      }
      if (drop_outliers(table, r, opt.outlier_sigma, "dispersion") == 0) break;
      dopt.initial.mu0_meff = disp.mu0_meff;
      dopt.initial.g = disp.g;
      dopt.initial.omega_r0 = disp.omega_r0;
      dopt.initial.gamma_r = disp.gamma_r;
      disp = fit_branch_dispersion(table, dopt);
    }

    lw = fit_branch_linewidths(table, disp, gamma, b_ref, est.kappa_m);
    for (int pass = 0; pass < 3; ++pass) {
      std::vector<double> r(table.points.size());
      for (std::size_t k = 0; k < r.size(); ++k) {
        const auto& p = table.points[k];
        const double wm = kittel(p.field, gamma, disp.mu0_meff);
        const auto kk = branch_linewidths(disp.omega_r0 + disp.gamma_r * p.field, lw.kappa_r(p.field), wm,
                                          lw.kappa_m, disp.g);
        const double model = p.branch == Branch::Upper ? kk.plus : kk.minus;
        r[k] = (model - p.kappa) / (p.kappa_error > 0.0 ? p.kappa_error : 1.0);
      }
      if (drop_outliers(table, r, opt.outlier_sigma, "linewidth") == 0) break;
      lw = fit_branch_linewidths(table, disp, gamma, b_ref, lw.kappa_m > 0.0 ? lw.kappa_m : est.kappa_m);
    }
    est.mu0_meff = disp.mu0_meff;
    est.g = disp.g;
    est.omega_r0 = disp.omega_r0;
    est.gamma_r = disp.gamma_r;
    double b_mid = 0.5 * (b_lo + b_hi);
    try {
      b_mid = disp.resonance_field(gamma, b_lo, b_hi);
    } catch (const std::exception&) {
    }
    if (lw.kappa_r(b_mid) > 0.0) est.kappa_r = lw.kappa_r(b_mid);
    if (lw.kappa_m > 0.0) est.kappa_m = lw.kappa_m;
  }
  rep.final_estimate = est;
  rep.branches = table;
  rep.dispersion = disp;
  rep.linewidths = lw;

  bool have_bres = true;
  try {
    rep.b_res = disp.resonance_field(gamma, b_lo, b_hi);
    // Propagate (μ0·M_eff, ω_r0, γ_r) uncertainty by finite differences.
    const int idx[3] = {0, 2, 3};
    Eigen::Vector3d grad;
    for (int k = 0; k < 3; ++k) {
      DispersionFit d = disp;
      const double h = std::max(1e-7 * std::abs(disp.fit.params[idx[k]].value), 1e-12);
      double* field = k == 0 ? &d.mu0_meff : k == 1 ? &d.omega_r0 : &d.gamma_r;
      *field += h;
      const double up = d.resonance_field(gamma, b_lo, b_hi);
      *field -= 2.0 * h;
      const double dn = d.resonance_field(gamma, b_lo, b_hi);
      grad(k) = (up - dn) / (2.0 * h);
    }
    Eigen::Matrix3d cov;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) cov(r, c) = disp.fit.covariance(idx[r], idx[c]);
    }
    rep.b_res_error = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
  } catch (const std::exception& e) {
    have_bres = false;
    rep.warnings.push_back(std::string("resonance field not found: ") + e.what());
  }

  const auto splits = splittings_from(table);
  if (splits.size() >= 4) {
    try {
      rep.crossing = fit_avoided_crossing(splits);
      if (!rep.crossing->warning.empty()) rep.warnings.push_back("crossing fit: " + rep.crossing->warning);
    } catch (const std::exception& e) {
      rep.warnings.push_back(std::string("crossing fit failed: ") + e.what());
    }
  } else {
    rep.warnings.push_back("fewer than 4 paired splittings; crossing fit skipped");
  }

  if (have_bres) {
    rep.kappa_r_at_res = lw.kappa_r(rep.b_res);
    rep.kappa_r_at_res_error = lw.kappa_r_error(rep.b_res);
    try {
      rep.cooperativity = cooperativity(disp.g, rep.kappa_r_at_res, lw.kappa_m);
      rep.cooperativity_error = cooperativity_error(disp.g, disp.g_error, rep.kappa_r_at_res,
                                                    rep.kappa_r_at_res_error, lw.kappa_m, lw.kappa_m_error);
    } catch (const std::exception& e) {
      have_bres = false;
      rep.warnings.push_back(std::string("cooperativity undefined: ") + e.what());
    }

    // Tail-anchor route: κ_r interpolated between the outermost resonator-like
    // points and κ_m from the branch pair nearest B_res.
    std::vector<std::pair<double, double>> anchors;
    const auto lower = table.of(Branch::Lower);
    const auto upper = table.of(Branch::Upper);
    auto resonator_like = [&](const BranchPoint& p) {
      const double wr = disp.omega_r0 + disp.gamma_r * p.field;
      const auto w = branch_resonator_weights(wr, kittel(p.field, gamma, disp.mu0_meff), disp.g);
      return (p.branch == Branch::Upper ? w.plus : w.minus) > 0.9;
    };
    const BranchPoint* lo_anchor = nullptr;
    const BranchPoint* hi_anchor = nullptr;
    for (const auto& p : table.points) {
      if (!resonator_like(p)) continue;
      if (!lo_anchor || p.field < lo_anchor->field) lo_anchor = &p;
      if (!hi_anchor || p.field > hi_anchor->field) hi_anchor = &p;
    }
    nlohmann::json naive = nlohmann::json::object();
    if (lo_anchor && hi_anchor && lo_anchor->field != hi_anchor->field) {
      anchors = {{lo_anchor->field, lo_anchor->kappa}, {hi_anchor->field, hi_anchor->kappa}};
      const double kr = interpolate_kappa_r(anchors, rep.b_res);
      naive["kappa_r_anchor_fields_t"] = {lo_anchor->field, hi_anchor->field};
      naive["kappa_r_mhz"] = angular_to_mhz(kr);
      const SplittingPoint* nearest = nullptr;
      for (const auto& s : splits) {
        if (!nearest || std::abs(s.field - rep.b_res) < std::abs(nearest->field - rep.b_res)) nearest = &s;
      }
      if (nearest) {
        double kp = 0.0, km = 0.0;
        for (const auto& p : upper) {
          if (p.field == nearest->field) kp = p.kappa;
        }
        for (const auto& p : lower) {
          if (p.field == nearest->field) km = p.kappa;
        }
        const auto est_m = kappa_m_from_branches(kp, km, kr);
        naive["pair_field_t"] = nearest->field;
        naive["kappa_plus_mhz"] = angular_to_mhz(kp);
        naive["kappa_minus_mhz"] = angular_to_mhz(km);
        naive["kappa_m_mhz"] = angular_to_mhz(est_m.kappa_m);
        naive["physical"] = est_m.physical;
        if (kr > 0.0 && est_m.kappa_m > 0.0) naive["cooperativity"] = magnonfit::cooperativity(disp.g, kr, est_m.kappa_m);
      }
    }
    rep.diagnostics["tail_anchor_route"] = naive;
  }

  rep.converged = have_bres && disp.fit.converged && lw.fit.converged;
  if (!disp.fit.converged) rep.warnings.push_back("dispersion fit did not converge: " + disp.fit.diagnostics);
  if (!lw.fit.converged) rep.warnings.push_back("linewidth fit did not converge: " + lw.fit.diagnostics);
  return rep;
}

}  // namespace magnonfit
