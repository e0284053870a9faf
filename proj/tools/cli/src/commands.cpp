#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "internal.hpp"

namespace optomech::cli {

using detail::json;

std::string tool_version() { return std::string("optomech ") + OPTOMECH_VERSION; }

namespace {

namespace fs = std::filesystem;

ModeOperator spectrum_operator(const RunConfig& c, const SystemParams& p, const TruncationSpec& tr) {
  const std::string& h = c.spectrum.hamiltonian;
  if (h == "full") return hamiltonians::full_hamiltonian(p, tr);
  if (h == "displaced") return hamiltonians::displaced_hamiltonian(p, tr);
  if (h == "ion_laser") return hamiltonians::ion_laser_hamiltonian(p, tr);
  if (h == "rwa") return hamiltonians::rwa_sideband_hamiltonian(c.spectrum.sideband, p, tr);
  return hamiltonians::coupled_oscillator_hamiltonian(p, tr);
}

// Per-block quadratic shift of the undriven ladder: s_k = c2 k^2.
std::optional<double> ladder_curvature(const std::string& h, const SystemParams& p) {
  if (p.xi != 0.0) return std::nullopt;
  if (h == "full" || h == "displaced") return p.chi - p.g0 * p.g0 / p.omega_m;
  if (h == "ion_laser") return 0.0;
  return std::nullopt;
}

std::string panel_stem(Mode mode, double eta) { return fmt::format("husimi_{}_eta{}", to_string(mode), eta); }

Mode mode_of(const std::string& name) { return name == "cavity" ? Mode::cavity : Mode::mirror; }

}  // namespace

CommandResult cmd_spectrum(const RunConfig& c, const CommandOptions& opts) {
  const SystemParams p = c.effective_params();
  TruncationSpec tr = c.truncation;
  if (tr.dim_cavity == 0) tr = {40, 40, tr.tail_tol};
  const ModeOperator h = spectrum_operator(c, p, tr);
  const auto interior = fock::interior_spectrum(h, tr, c.spectrum.max_top_population);
  if (static_cast<int>(interior.size()) < c.spectrum.count) {
    const int more = std::max(tr.dim_cavity, tr.dim_mirror) + std::max(8, std::max(tr.dim_cavity, tr.dim_mirror) / 4);
    throw TruncationError(ErrorKind::truncation_insufficient,
                          fmt::format("only {} of {} requested eigenvalues are interior at dims {}x{}; try dims {}x{}",
                                      interior.size(), c.spectrum.count, tr.dim_cavity, tr.dim_mirror, more, more),
                          more);
  }
  const auto curvature = ladder_curvature(c.spectrum.hamiltonian, p);

  std::string csv = "index,eigenvalue,photons,phonons,ladder_deviation,top_population\n";
  double worst = 0.0;
  std::map<int, double> block_min;
  for (int i = 0; i < c.spectrum.count; ++i) {
    const auto& e = interior[i];
    if (curvature) {
      const int k = static_cast<int>(std::lround(e.mean_photons));
      const double base = p.detuning * k + *curvature * k * k;
      const int j = static_cast<int>(std::lround((e.value - base) / p.omega_m));
      const double dev = std::abs(e.value - base - p.omega_m * j);
      worst = std::max(worst, dev);
      auto [it, fresh] = block_min.emplace(k, e.value);
      if (!fresh) it->second = std::min(it->second, e.value);
      csv += fmt::format("{},{},{},{},{},{}\n", i, e.value, k, j, dev, e.top_population);
    } else {
      csv += fmt::format("{},{},{},,,{}\n", i, e.value, e.mean_photons, e.top_population);
    }
  }

  json meta = {{"tool", tool_version()},
               {"experiment", "spectrum"},
               {"hamiltonian", c.spectrum.hamiltonian},
               {"params", detail::params_json(p)},
               {"truncation", detail::truncation_json(tr)},
               {"count", c.spectrum.count},
               {"max_top_population", c.spectrum.max_top_population},
               {"interior_available", interior.size()}};
  if (c.spectrum.hamiltonian == "rwa") meta["sideband"] = c.spectrum.sideband;
  int code = exit_code::success;
  if (curvature) {
    json blocks = json::array();
    for (const auto& [k, lowest] : block_min) {
      blocks.push_back({{"k", k}, {"shift", lowest - p.detuning * k}, {"expected", *curvature * k * k}});
    }
    meta["ladder"] = {{"max_deviation", worst}, {"block_shifts", blocks}};
    if (opts.verify) {
      const bool pass = worst < 1e-8;
      meta["verify"] = {{"name", "ladder_deviation"}, {"tolerance", 1e-8}, {"measured", worst}, {"pass", pass}};
      if (!pass) code = exit_code::numerical_failure;
    }
  } else {
    meta["ladder"] = nullptr;
  }

  CommandResult r;
  const fs::path csv_path = opts.out_dir / "spectrum.csv";
  const fs::path json_path = opts.out_dir / "spectrum.json";
  detail::write_atomic(csv_path, csv);
  detail::write_atomic(json_path, meta.dump(2) + "\n");
  r.files = {csv_path, json_path};
  r.exit_code = code;
  detail::log_line(opts, fmt::format("spectrum: {} interior eigenvalues written{}", c.spectrum.count,
                                     curvature ? fmt::format(", max ladder deviation {:.3e}", worst) : ""));
  return r;
}

CommandResult cmd_evolve(const RunConfig& c, const CommandOptions& opts) {
  const SystemParams p = c.effective_params();
  const EvolveOptions& o = c.evolve;
  std::string csv = "scaled_time,dim_cavity,dim_mirror,cutoff_deficit,mean_photons,mean_phonons,purity,fidelity\n";
  json rows = json::array();
  bool all_pass = true;
  for (double xt : o.scaled_times) {
    const AnalyticEvolutionSpec spec = detail::analytic_spec(o.alpha, o.gamma, xt, p);
    const TruncationSpec tr = detail::resolve_truncation(c.truncation, spec);
    const AnalyticState s = dynamics::evolve_analytic(spec, tr);
    const double purity = fock::reduced_density(s.state, Mode::cavity).purity();
    std::optional<double> fid;
    if (o.compare != "none") fid = detail::model_fidelity(o.compare, spec, tr);
    const bool pass = !fid || *fid >= o.min_fidelity;
    all_pass = all_pass && pass;
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", xt, tr.dim_cavity, tr.dim_mirror, s.diagnostics.cutoff_deficit,
                       s.state.mean_number(Mode::cavity), s.state.mean_number(Mode::mirror), purity,
                       fid ? detail::format_number(*fid) : "");
    rows.push_back({{"scaled_time", xt},
                    {"truncation", detail::truncation_json(tr)},
                    {"cutoffs", {{"k_max", s.diagnostics.cutoffs.k_max}, {"j_max", s.diagnostics.cutoffs.j_max}}},
                    {"cavity_loss", s.diagnostics.cavity_loss},
                    {"mirror_loss", s.diagnostics.mirror_loss},
                    {"fidelity", fid ? json(*fid) : json(nullptr)},
                    {"pass", pass}});
    detail::log_line(opts, fmt::format("evolve: xi t = {} dims {}x{}{}", xt, tr.dim_cavity, tr.dim_mirror,
                                       fid ? fmt::format(" fidelity vs {} = {:.12f}", o.compare, *fid) : ""));
  }
  json meta = {{"tool", tool_version()},
               {"experiment", "evolve"},
               {"params", detail::params_json(p)},
               {"alpha", detail::complex_json(o.alpha)},
               {"gamma", detail::complex_json(o.gamma)},
               {"compare", o.compare},
               {"min_fidelity", o.min_fidelity},
               {"rows", rows},
               {"pass", all_pass}};
  CommandResult r;
  const fs::path csv_path = opts.out_dir / "evolve.csv";
  const fs::path json_path = opts.out_dir / "evolve.json";
  detail::write_atomic(csv_path, csv);
  detail::write_atomic(json_path, meta.dump(2) + "\n");
  r.files = {csv_path, json_path};
  // Fidelity thresholds are part of every evolve run that compares.
  if (!all_pass) r.exit_code = exit_code::numerical_failure;
  return r;
}

CommandResult cmd_husimi(const RunConfig& c, const CommandOptions& opts) {
  const HusimiOptions& o = c.husimi;
  std::vector<double> etas = o.etas;
  if (etas.empty()) etas.push_back(c.params.eta());

  CommandResult r;
  json panels = json::array();
  std::map<std::string, std::vector<std::size_t>> counts;
  std::map<std::string, double> first_peak;
  std::string script;
  bool verified = true;
  for (double eta : etas) {
    SystemParams p = c.params;
    p.g0 = eta * p.omega_m;
    if (c.match_kerr) p = p.with_matched_kerr();
    const AnalyticEvolutionSpec spec = detail::analytic_spec(o.alpha, o.gamma, o.scaled_time, p);
    for (const std::string& mode_name : o.modes) {
      const Mode mode = mode_of(mode_name);
      const detail::Panel panel = detail::compute_panel(spec, mode, c.truncation, o.grid, o.threshold, opts.verify);
      const std::string stem = panel_stem(mode, eta);
      const fs::path csv_path = opts.out_dir / (stem + ".csv");
      const fs::path json_path = opts.out_dir / (stem + ".json");
      json meta = detail::panel_json(panel);
      meta["tool"] = tool_version();
      meta["params"] = detail::params_json(p);
      meta["alpha"] = detail::complex_json(o.alpha);
      meta["gamma"] = detail::complex_json(o.gamma);
      meta["scaled_time"] = o.scaled_time;
      meta["threshold"] = o.threshold;
      if (panel.residual) {
        const bool pass = *panel.residual < o.max_residual;
        meta["verify"] = {{"tolerance", o.max_residual}, {"pass", pass}};
        verified = verified && pass;
      }
      detail::write_atomic(csv_path, detail::grid_csv(panel.grid));
      detail::write_atomic(json_path, meta.dump(2) + "\n");
      r.files.push_back(csv_path);
      r.files.push_back(json_path);
      counts[mode_name].push_back(panel.maxima.size());
      panels.push_back({{"csv", csv_path.filename().string()},
                        {"metadata", json_path.filename().string()},
                        {"mode", mode_name},
                        {"eta", eta},
                        {"maxima_count", panel.maxima.size()},
                        {"norm_integral", panel.integral},
                        {"oracle_residual", panel.residual ? json(*panel.residual) : json(nullptr)}});
      detail::log_line(opts, fmt::format("husimi: {} eta={} dims {}x{} maxima {} integral {:.8f}{}", mode_name, eta,
                                         panel.truncation.dim_cavity, panel.truncation.dim_mirror, panel.maxima.size(),
                                         panel.integral,
                                         panel.residual ? fmt::format(" residual {:.2e}", *panel.residual) : ""));
      if (o.gnuplot) {
        if (!first_peak.count(mode_name)) first_peak[mode_name] = panel.grid.peak();
        const double scale = o.normalize_to_first ? first_peak[mode_name] : panel.grid.peak();
        script += fmt::format(
            "set output '{0}.png'\nset title '{1} mode, eta = {2}'\n"
            "plot '{0}.csv' every ::1 using 1:2:($3/{3}) with image notitle\n",
            stem, mode_name, eta, scale);
      }
    }
  }
  json summary = {{"tool", tool_version()}, {"experiment", "husimi"}, {"config", json::parse(serialize_config(c))},
                  {"panels", panels}};
  json trend = json::object();
  for (const auto& [mode_name, list] : counts) {
    trend[mode_name] = {{"maxima_counts", list}, {"non_decreasing", std::is_sorted(list.begin(), list.end())}};
  }
  summary["maxima_trend"] = trend;
  if (o.gnuplot) {
    const std::string head =
        "set datafile separator ','\nset terminal pngcairo size 800,800\nset size square\n"
        "set xlabel 'Re(beta)'\nset ylabel 'Im(beta)'\nset cbrange [0:1]\n";
    const fs::path gp = opts.out_dir / "husimi.gp";
    detail::write_atomic(gp, head + script);
    r.files.push_back(gp);
  }
  const fs::path summary_path = opts.out_dir / "husimi.json";
  detail::write_atomic(summary_path, summary.dump(2) + "\n");
  r.files.push_back(summary_path);
  if (!verified) r.exit_code = exit_code::numerical_failure;
  return r;
}

CommandResult run_command(Experiment e, const RunConfig& c, const CommandOptions& opts) {
  switch (e) {
    case Experiment::spectrum: return cmd_spectrum(c, opts);
    case Experiment::evolve: return cmd_evolve(c, opts);
    case Experiment::husimi: return cmd_husimi(c, opts);
    case Experiment::sweep: return cmd_sweep(c, opts);
    case Experiment::verify: return cmd_verify(c, opts);
  }
  throw Error(ErrorKind::wiring, "unknown experiment");
}

}  // namespace optomech::cli
