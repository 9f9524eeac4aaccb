#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "magnonfit/dispersion.hpp"
#include "magnonfit/spectro_fit.hpp"
#include "trace_stats.hpp"

namespace magnonfit {

const char* to_string(Branch b) { return b == Branch::Upper ? "upper" : "lower"; }

double HybridEstimate::omega_m(double b0) const {
  MagnonParams m;
  m.gamma = gamma;
  m.mu0_meff = mu0_meff;
  m.thickness = 1.0;
  return kittel_frequency(b0, m);
}

std::vector<BranchPoint> BranchTable::of(Branch b) const {
  std::vector<BranchPoint> out;
  std::copy_if(points.begin(), points.end(), std::back_inserter(out), [b](const auto& p) { return p.branch == b; });
  return out;
}

std::vector<BranchWindow> windows_from_estimate(const SweepMap& sweep, const HybridEstimate& est,
                                                const WindowOptions& opt, std::vector<SkippedBranch>* skipped) {
  const auto& freqs = sweep.freqs();
  const double f_lo = std::min(freqs.front(), freqs.back());
  const double f_hi = std::max(freqs.front(), freqs.back());
  std::vector<BranchWindow> out;
  auto skip = [&](double b, Branch br, std::string why) {
    if (skipped) skipped->push_back({b, br, std::move(why)});
  };

  for (std::size_t i = 0; i < sweep.n_fields(); ++i) {
    const double b = sweep.fields()[i];
    const double wr = est.omega_r(b);
    const double wm = est.omega_m(b);
    const auto f = coupled_branch_frequencies(wr, wm, est.g);
    const auto k = branch_linewidths(wr, est.kappa_r, wm, est.kappa_m, est.g);
    const auto weight = branch_resonator_weights(wr, wm, est.g);
    const double mid = 0.5 * (f.plus + f.minus);

    for (Branch br : {Branch::Upper, Branch::Lower}) {
      const bool up = br == Branch::Upper;
      const double centre = up ? f.plus : f.minus;
      const double kappa = up ? k.plus : k.minus;
      const double w = up ? weight.plus : weight.minus;
      if (w < opt.min_resonator_weight) {
        skip(b, br, "predicted resonator weight " + std::to_string(w) + " below threshold");
        continue;
      }
      if (centre < f_lo || centre > f_hi) {
        skip(b, br, "predicted frequency outside the swept span");
        continue;
      }
      const double hw = opt.half_width_linewidths * kappa + opt.margin;
      BranchWindow win;
      win.field_index = i;
      win.branch = br;
      win.predicted_omega = centre;
      win.predicted_kappa = kappa;
      win.omega_lo = std::max(f_lo, up ? std::max(mid, centre - hw) : centre - hw);
      win.omega_hi = std::min(f_hi, up ? centre + hw : std::min(mid, centre + hw));
      out.push_back(win);
    }
  }
  return out;
}

namespace {

struct Dip {
  std::size_t index;
  double depth;
};

}  // namespace

BranchTable extract_branches(const SweepMap& sweep, std::span<const BranchWindow> windows,
                             const ExtractionOptions& opt) {
  BranchTable table;
  const auto& freqs = sweep.freqs();
  const double step = std::abs(freqs.back() - freqs.front()) / static_cast<double>(std::max<std::size_t>(1, freqs.size() - 1));

  for (const auto& win : windows) {
    if (win.field_index >= sweep.n_fields()) throw std::out_of_range("extract_branches: field index out of range");
    const double b = sweep.fields()[win.field_index];
    auto skip = [&](std::string why) { table.skipped.push_back({b, win.branch, std::move(why)}); };

    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      if (freqs[j] >= win.omega_lo && freqs[j] <= win.omega_hi) idx.push_back(j);
    }
    if (idx.size() < 7) {
      skip("window holds fewer than 7 samples");
      continue;
    }
    const auto row = sweep.row(win.field_index);
    std::vector<double> mag(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) mag[k] = std::abs(row[idx[k]]);

    const auto box = static_cast<std::size_t>(std::max(1.0, std::round(0.5 * win.predicted_kappa / step)));
    const auto smooth = detail::boxcar(mag, box);
    const double baseline = detail::median(mag);

    std::vector<Dip> dips;
    for (std::size_t k = 0; k < smooth.size(); ++k) {
      const bool left = k == 0 || smooth[k] <= smooth[k - 1];
      const bool right = k + 1 == smooth.size() || smooth[k] < smooth[k + 1];
      if (left && right && baseline - smooth[k] > 0.0) dips.push_back({k, baseline - smooth[k]});
    }
    if (dips.empty()) {
      skip("no dip inside the window");
      continue;
    }
    std::sort(dips.begin(), dips.end(), [](const Dip& a, const Dip& c) { return a.depth > c.depth; });
    Dip best = dips.front();
    for (const auto& d : dips) {
      if (d.depth < (1.0 - opt.tie_tolerance) * dips.front().depth) break;
      const double dist_best = std::abs(freqs[idx[best.index]] - win.predicted_omega);
      if (std::abs(freqs[idx[d.index]] - win.predicted_omega) < dist_best) best = d;
    }

    // Half-depth width of the located dip sets the fit window.
    const double half_level = baseline - 0.5 * best.depth;
    std::size_t lo = best.index, hi = best.index;
    while (lo > 0 && smooth[lo] < half_level) --lo;
    while (hi + 1 < smooth.size() && smooth[hi] < half_level) ++hi;
    const double fwhm = std::max({freqs[idx[hi]] - freqs[idx[lo]], 2.0 * step, 0.25 * win.predicted_kappa});
    const double centre = freqs[idx[best.index]];
    const double hw = opt.fit_half_width_linewidths * std::max(fwhm, win.predicted_kappa);

    std::vector<double> w_fit;
    std::vector<std::complex<double>> s_fit;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double w = freqs[idx[k]];
      if (w >= centre - hw && w <= centre + hw) {
        w_fit.push_back(w);
        s_fit.push_back(row[idx[k]]);
      }
    }

    ResonanceFitOptions fopt = opt.fit;
    fopt.min_significance = 0.0;
    ResonanceFit rf;
    try {
      rf = fit_resonance(w_fit, s_fit, fopt);
    } catch (const std::exception& e) {
      skip(std::string("resonance fit failed: ") + e.what());
      continue;
    }
    if (rf.depth_significance < opt.min_significance) {
      skip("dip depth below " + std::to_string(opt.min_significance) + "x noise floor (significance " +
           std::to_string(rf.depth_significance) + ")");
      continue;
    }
    if (!rf.fit.converged) {
      skip("resonance fit did not converge: " + rf.fit.diagnostics);
      continue;
    }
    const double w_res = rf.model.omega_res;
    if (w_res < win.omega_lo || w_res > win.omega_hi) {
      skip("fitted resonance left the search window");
      continue;
    }
    if (opt.kappa_ratio_limit > 0.0 && win.predicted_kappa > 0.0) {
      const double ratio = rf.kappa / win.predicted_kappa;
      if (!(ratio >= 1.0 / opt.kappa_ratio_limit && ratio <= opt.kappa_ratio_limit)) {
        skip("fitted linewidth " + std::to_string(ratio) + "x the predicted value");
        continue;
      }
    }
    BranchPoint pt;
    pt.field = b;
    pt.branch = win.branch;
    pt.omega = w_res;
    pt.omega_error = rf.fit.error("omega_res");
    pt.kappa = rf.kappa;
    pt.kappa_error = rf.kappa_error;
    pt.depth_significance = rf.depth_significance;
    pt.fit = std::move(rf.fit);
    table.points.push_back(std::move(pt));
  }
  return table;
}

std::vector<SplittingPoint> splittings_from(const BranchTable& table) {
  std::map<double, const BranchPoint*> upper;
  for (const auto& p : table.points) {
    if (p.branch == Branch::Upper) upper[p.field] = &p;
  }
  std::vector<SplittingPoint> out;
  for (const auto& p : table.points) {
    if (p.branch != Branch::Lower) continue;
    const auto it = upper.find(p.field);
    if (it == upper.end()) continue;
    const double err = std::hypot(it->second->omega_error, p.omega_error);
    out.push_back({p.field, it->second->omega - p.omega, err});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.field < b.field; });
  return out;
}

}  // namespace magnonfit
