#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "magnonfit/pipeline.hpp"
#include "magnonfit/spectro_fit.hpp"
#include "magnonfit/sweep_io.hpp"
#include "magnonfit/units.hpp"

namespace magnonfit::cli {

void register_fit(CLI::App& app, FitOptions& o) {
  app.add_option("--mode", o.mode, "resonance, pipeline or crossing")
      ->check(CLI::IsMember({"resonance", "pipeline", "crossing"}));
  app.add_option("--in", o.in, "Sweep CSV (resonance, pipeline) or splitting CSV (crossing)")->required();
  app.add_option("--out", o.out, "Report file (JSON)")->required();
  app.add_option("--field", o.field, "Field row to fit in resonance mode (T); default the first row");
  app.add_option("--residuals", o.residuals, "magnitude or complex (resonance mode)")
      ->check(CLI::IsMember({"magnitude", "complex"}));
  app.add_option("--gamma", o.gamma_ghz_per_t, "Gyromagnetic ratio gamma/2pi (GHz/T), pipeline mode");
  app.add_option("--refinements", o.refinements, "Extraction passes in pipeline mode");
}

namespace {

std::string pm(double v, double e, int prec = 4) { return fmt::format("{:.{}f} +/- {:.{}f}", v, prec, e, prec); }

int fit_resonance_mode(const FitOptions& o, Context& ctx) {
  const SweepMap sweep = load_sweep(o.in);
  std::size_t row = 0;
  if (o.field) {
    row = sweep.find_field(*o.field);
    if (row == SweepMap::npos) throw UsageError(fmt::format("--field {} T is not a row of {}", *o.field, o.in));
  }
  const auto s = sweep.row(row);
  ResonanceFitOptions opt;
  opt.mode = o.residuals == "complex" ? ResidualMode::Complex : ResidualMode::Magnitude;
  const ResonanceFit rf = fit_resonance(sweep.freqs(), s, opt);

  const auto& m = rf.model;
  const double f_err = rf.fit.error("omega_res");
  nlohmann::json rep = {
      {"mode", "resonance"},
      {"field_t", sweep.fields()[row]},
      {"headline",
       {{"f_res_ghz", angular_to_ghz(m.omega_res)},
        {"f_res_error_ghz", angular_to_ghz(f_err)},
        {"ql", m.ql},
        {"ql_error", rf.fit.error("Ql")},
        {"abs_qc", m.abs_qc},
        {"abs_qc_error", rf.fit.error("abs_Qc")},
        {"phi_rad", m.phi},
        {"phi_error_rad", rf.fit.error("phi")},
        {"a", m.attenuation_a},
        {"kappa_mhz", angular_to_mhz(rf.kappa)},
        {"kappa_error_mhz", angular_to_mhz(rf.kappa_error)},
        {"kappa_ext_mhz", angular_to_mhz(m.kappa_ext())}}},
      {"angular", {{"omega_res", m.omega_res}, {"kappa", rf.kappa}, {"kappa_ext", m.kappa_ext()}}},
      {"depth", rf.depth},
      {"noise", rf.noise},
      {"depth_significance", rf.depth_significance},
      {"fit", to_json(rf.fit)}};
  write_json_file(o.out, rep);
  write_manifest(o.out, ctx, "fit", {o.in}, std::nullopt);
  ctx.out << fmt::format("B0 = {} T\n", sweep.fields()[row]);
  ctx.out << fmt::format("f_res = {} GHz\n", pm(angular_to_ghz(m.omega_res), angular_to_ghz(f_err), 7));
  ctx.out << fmt::format("Q_l = {}\n", pm(m.ql, rf.fit.error("Ql"), 1));
  ctx.out << fmt::format("|Q_c| = {}\n", pm(m.abs_qc, rf.fit.error("abs_Qc"), 1));
  ctx.out << fmt::format("phi = {} rad\n", pm(m.phi, rf.fit.error("phi")));
  ctx.out << fmt::format("kappa/2pi = {} MHz\n", pm(angular_to_mhz(rf.kappa), angular_to_mhz(rf.kappa_error)));
  if (!rf.fit.converged) throw NumericalFailure("resonance fit did not converge: " + rf.fit.diagnostics);
  return kOk;
}

int fit_pipeline_mode(const FitOptions& o, Context& ctx) {
  const SweepMap sweep = load_sweep(o.in);
  PipelineOptions opt;
  opt.gamma = ghz_to_angular(o.gamma_ghz_per_t);
  opt.refinements = o.refinements;
  PipelineReport rep;
  try {
    rep = run_pipeline(sweep, opt);
  } catch (const std::exception& e) {
    write_json_file(o.out, {{"mode", "pipeline"}, {"converged", false}, {"error", e.what()}});
    write_manifest(o.out, ctx, "fit", {o.in}, std::nullopt);
    throw NumericalFailure(std::string("pipeline failed: ") + e.what());
  }
  nlohmann::json j = rep.to_json();
  j["mode"] = "pipeline";
  write_json_file(o.out, j);
  write_manifest(o.out, ctx, "fit", {o.in}, std::nullopt);

  const auto& h = j.at("headline");
  ctx.out << fmt::format("g/2pi = {} MHz\n", pm(h.at("g_mhz"), h.at("g_error_mhz")));
  ctx.out << fmt::format("kappa_r/2pi = {} MHz (at B_res)\n", pm(h.at("kappa_r_mhz"), h.at("kappa_r_error_mhz")));
  ctx.out << fmt::format("kappa_m/2pi = {} MHz\n", pm(h.at("kappa_m_mhz"), h.at("kappa_m_error_mhz")));
  ctx.out << fmt::format("C = {}\n", pm(h.at("cooperativity"), h.at("cooperativity_error"), 1));
  ctx.out << fmt::format("mu0 Meff = {} mT\n", pm(h.at("mu0_meff_mt"), h.at("mu0_meff_error_mt")));
  ctx.out << fmt::format("B_res = {} T\n", pm(h.at("b_res_t"), h.at("b_res_error_t"), 6));
  for (const auto& w : rep.warnings) ctx.err << "warning: " << w << "\n";
  if (!rep.converged) throw NumericalFailure("pipeline fits did not all converge; see " + o.out);
  return kOk;
}

std::vector<SplittingPoint> read_splittings(const std::string& path) {
  require_readable(path);
  std::ifstream in(path);
  std::string line;
  std::vector<SplittingPoint> pts;
  if (!std::getline(in, line)) throw UsageError(path + ": empty input");
  if (line.rfind("field_t,splitting_mhz", 0) != 0) {
    throw UsageError(path + ": expected header field_t,splitting_mhz[,error_mhz]");
  }
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw UsageError(fmt::format("{}: line {}: bad number '{}'", path, n, cell));
      }
    }
    if (v.size() < 2 || v.size() > 3) throw UsageError(fmt::format("{}: line {}: expected 2 or 3 columns", path, n));
    pts.push_back({v[0], mhz_to_angular(v[1]), v.size() == 3 ? mhz_to_angular(v[2]) : 0.0});
  }
  if (pts.empty()) throw UsageError(path + ": no data rows");
  return pts;
}

int fit_crossing_mode(const FitOptions& o, Context& ctx) {
  const auto pts = read_splittings(o.in);
  const CrossingFit cf = fit_avoided_crossing(pts);
  nlohmann::json rep = {{"mode", "crossing"},
                        {"headline",
                         {{"g_mhz", angular_to_mhz(cf.g)},
                          {"g_error_mhz", angular_to_mhz(cf.g_error)},
                          {"b_res_t", cf.b_res},
                          {"b_res_error_t", cf.b_res_error},
                          {"gamma_rm_ghz_per_t", angular_to_ghz(cf.gamma_rm)},
                          {"gamma_rm_error_ghz_per_t", angular_to_ghz(cf.gamma_rm_error)}}},
                        {"angular", {{"g", cf.g}, {"gamma_rm", cf.gamma_rm}}},
                        {"warning", cf.warning},
                        {"fit", to_json(cf.fit)}};
  write_json_file(o.out, rep);
  write_manifest(o.out, ctx, "fit", {o.in}, std::nullopt);
  ctx.out << fmt::format("g/2pi = {} MHz\n", pm(angular_to_mhz(cf.g), angular_to_mhz(cf.g_error)));
  ctx.out << fmt::format("B_res = {} T\n", pm(cf.b_res, cf.b_res_error, 6));
  if (!cf.warning.empty()) ctx.err << "warning: " << cf.warning << "\n";
  if (!cf.fit.converged) throw NumericalFailure("crossing fit did not converge: " + cf.fit.diagnostics);
  return kOk;
}

}  // namespace

int run_fit(const FitOptions& o, Context& ctx) {
  require_readable(o.in);
  try {
    if (o.mode == "resonance") return fit_resonance_mode(o, ctx);
    if (o.mode == "crossing") return fit_crossing_mode(o, ctx);
    return fit_pipeline_mode(o, ctx);
  } catch (const NoResonanceError& e) {
    // Partial report so scripted runs still find a file with the reason.
    write_json_file(o.out, {{"mode", o.mode}, {"converged", false}, {"error", e.what()}});
    throw;
  }
}

}  // namespace magnonfit::cli
