#include <cmath>

#include <fmt/format.h>

#include "internal.hpp"
#include "optomech/specfun.hpp"

namespace optomech::cli::detail {

AnalyticEvolutionSpec analytic_spec(cplx alpha, cplx gamma, double scaled_time, const SystemParams& p) {
  AnalyticEvolutionSpec s;
  s.alpha = alpha;
  s.gamma = gamma;
  s.scaled_time = scaled_time;
  s.params = p;
  return s;
}

TruncationSpec resolve_truncation(const TruncationSpec& configured, const AnalyticEvolutionSpec& spec) {
  if (configured.dim_cavity == 0 && configured.dim_mirror == 0) {
    return dynamics::plan_truncation(spec, configured.tail_tol);
  }
  return configured;
}

Panel compute_panel(const AnalyticEvolutionSpec& spec, Mode mode, const TruncationSpec& configured, const GridSpec& grid,
                    double threshold, bool with_oracle) {
  Panel p;
  p.mode = mode;
  p.eta = spec.params.eta();
  p.truncation = resolve_truncation(configured, spec);
  p.cutoffs = dynamics::resolve_cutoffs(spec);
  GridGeometry g = phase_space::default_grid(spec, mode);
  g.n_re = g.n_im = grid.points;
  if (grid.half_width) g = GridGeometry::square(mode == Mode::cavity ? spec.alpha : spec.gamma, *grid.half_width, grid.points);

  p.grid = mode == Mode::cavity ? phase_space::husimi_cavity_analytic(spec, g, p.truncation)
                                : phase_space::husimi_mechanical_analytic(spec, g, p.truncation);
  try {
    p.integral = phase_space::integrate_grid(p.grid);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::extents_too_small) throw;
    const double half = 0.5 * (g.re_max - g.re_min);
    throw Error(e.kind(), fmt::format("{} ({} grid: half_width {:.2f}, try {:.2f})", e.what(), to_string(mode), half,
                                      1.5 * half));
  }
  p.maxima = phase_space::find_local_maxima(p.grid, threshold);
  if (with_oracle) {
    const AnalyticState s = dynamics::evolve_analytic(spec, p.truncation);
    const HusimiGrid ref = phase_space::husimi_from_density(fock::reduced_density(s.state, mode), g);
    p.residual = phase_space::max_abs_difference(p.grid, ref);
  }
  return p;
}

json panel_json(const Panel& p) {
  json maxima = json::array();
  for (const LocalMaximum& m : p.maxima) {
    maxima.push_back({{"i", m.i}, {"j", m.j}, {"beta", complex_json(m.beta)}, {"q", m.value}});
  }
  json j = {{"mode", std::string(to_string(p.mode))},
            {"eta", p.eta},
            {"truncation", truncation_json(p.truncation)},
            {"cutoffs", {{"k_max", p.cutoffs.k_max}, {"j_max", p.cutoffs.j_max}}},
            {"grid", geometry_json(p.grid.geometry)},
            {"norm_integral", p.integral},
            {"boundary_ratio", phase_space::boundary_ratio(p.grid)},
            {"peak", p.grid.peak()},
            {"clamped", p.grid.clamped},
            {"maxima_count", p.maxima.size()},
            {"maxima", maxima}};
  j["oracle_residual"] = p.residual ? json(*p.residual) : json(nullptr);
  return j;
}

namespace {

BipartiteState coherent_product(cplx alpha, cplx gamma, const TruncationSpec& tr) {
  const CVector a = specfun::coherent_amplitudes(alpha, tr.dim_cavity);
  const CVector b = specfun::coherent_amplitudes(gamma, tr.dim_mirror);
  return BipartiteState::product(a, b).normalized();
}

double physical_time(const AnalyticEvolutionSpec& spec, std::string_view model) {
  if (!(spec.params.xi > 0.0)) {
    throw ConfigError("params.xi", fmt::format("model '{}' needs a positive drive to convert xi t into t", model));
  }
  return spec.scaled_time / spec.params.xi;
}

}  // namespace

double model_fidelity(std::string_view model, const AnalyticEvolutionSpec& spec, const TruncationSpec& tr) {
  const SystemParams& p = spec.params;
  if (model == "structured" || model == "analytic") {
    return dynamics::fidelity(dynamics::evolve_analytic(spec, tr).state, dynamics::evolve_resonant_numeric(spec, tr));
  }
  const double t = physical_time(spec, model);
  if (model == "full") {
    const BipartiteState lab = dynamics::evolve_full_numeric(p, coherent_product(spec.alpha, spec.gamma, tr), t,
                                                             dynamics::Generator::full);
    fock::check_truncation(lab, tr.tail_tol, "lab-frame evolution");
    const BipartiteState rot = dynamics::to_rotating_frame(lab, p, t);
    return dynamics::fidelity(rot, dynamics::evolve_analytic(spec, tr).state);
  }
  if (model == "ion_laser") {
    const BipartiteState psi0 =
        dynamics::polaron_initial_state(spec.alpha, spec.gamma, p.eta(), tr.dim_cavity, tr.dim_mirror).normalized();
    const BipartiteState out = dynamics::evolve_full_numeric(p, psi0, t, dynamics::Generator::ion_laser);
    const BipartiteState frame = dynamics::to_interaction_picture(out, p, t);
    return dynamics::fidelity(frame, dynamics::evolve_polaron_analytic(spec, tr).state);
  }
  if (model == "coupled") {
    const BipartiteState psi0 = coherent_product(spec.alpha, spec.gamma, tr);
    const BipartiteState ion = dynamics::evolve_full_numeric(p, psi0, t, dynamics::Generator::ion_laser);
    const BipartiteState pre = dynamics::coupled_frame_map(psi0, p, true);
    const BipartiteState cpl = dynamics::evolve_full_numeric(p, pre, t, dynamics::Generator::coupled);
    return dynamics::fidelity(ion, dynamics::coupled_frame_map(cpl, p, false));
  }
  throw ConfigError("model", fmt::format("unknown model '{}'", model));
}

}  // namespace optomech::cli::detail
