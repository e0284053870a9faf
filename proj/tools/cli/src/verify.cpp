#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "internal.hpp"
#include "optomech/specfun.hpp"

namespace optomech::cli {

using detail::json;

namespace {

namespace hm = optomech::hamiltonians;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

VerifyRecord at_most(std::string name, double tolerance, double measured, std::string detail = {}) {
  return {std::move(name), "<=", tolerance, measured, measured <= tolerance, std::move(detail)};
}

hm::AssemblyOptions make_options(bool fault) {
  hm::AssemblyOptions o;
  o.flip_coupling_sign = fault;
  return o;
}

// Interior block [0, nc) x [0, nm) of the joint operator difference a - b.
double interior_difference(const CMatrix& a, const CMatrix& b, const TruncationSpec& tr, int nc, int nm) {
  double worst = 0.0;
  for (int k = 0; k < nc; ++k)
    for (int j = 0; j < nm; ++j)
      for (int kp = 0; kp < nc; ++kp)
        for (int jp = 0; jp < nm; ++jp) {
          const int r = tr.index(k, j), c = tr.index(kp, jp);
          worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
        }
  return worst;
}

VerifyRecord kerr_ladder() {
  const SystemParams p = SystemParams{0.7, 1.0, 0.3, 0.0, 0.0}.with_matched_kerr();
  const TruncationSpec tr{8, 40};
  const auto ev = fock::interior_spectrum(hm::full_hamiltonian(p, tr), tr, 1e-12);
  const std::size_t n = std::min<std::size_t>(ev.size(), 60);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(std::lround(ev[i].mean_photons));
    const double rest = ev[i].value - p.detuning * k;
    worst = std::max(worst, std::abs(rest - p.omega_m * std::round(rest / p.omega_m)));
  }
  if (n < 60) return {"kerr_ladder", "<=", 1e-8, worst, false, fmt::format("only {} interior eigenvalues", n)};
  return at_most("kerr_ladder", 1e-8, worst, "matched Kerr, xi = 0: lowest 60 interior eigenvalues vs Delta k + omega_m j");
}

VerifyRecord spectrum_preservation(bool fault) {
  const SystemParams p{0.4, 1.0, 0.5, 0.1, 0.0};
  const TruncationSpec tr{5, 60};
  const auto full = fock::interior_spectrum(hm::full_hamiltonian(p, tr), tr, 1e-10);
  const auto disp = fock::interior_spectrum(hm::displaced_hamiltonian(p, tr, make_options(fault)), tr, 1e-10);
  const std::size_t n = std::min<std::size_t>({full.size(), disp.size(), 80});
  double worst = n == 0 ? kNaN : 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(full[i].value - disp[i].value));
  return at_most("spectrum_preservation", 1e-8, worst,
                 fmt::format("xi = 0, eta = 0.5, chi = 0.1: {} interior eigenvalues of the polaron-frame form", n));
}

VerifyRecord polaron_conjugation(bool fault) {
  const TruncationSpec tr{5, 90};
  double worst = 0.0;
  for (double eta : {0.2, 0.5, 0.8}) {
    const SystemParams p{0.3, 1.0, eta, 0.05, 0.1};
    const CMatrix u = hm::polaron_unitary(eta, tr).matrix();
    const CMatrix conj = u.adjoint() * hm::full_hamiltonian(p, tr).matrix() * u;
    const CMatrix h7 = hm::displaced_hamiltonian(p, tr, make_options(fault)).matrix();
    worst = std::max(worst, interior_difference(conj, h7, tr, 4, 20));
  }
  return at_most("polaron_conjugation", 1e-9, worst, "U^dag H U vs polaron-frame assembly, interior 4x20");
}

VerifyRecord displaced_fock_formula() {
  double worst = 0.0;
  for (cplx f : {cplx(0.3, 0.0), cplx(0.0, 0.8), cplx(1.5, 0.0)}) {
    const CMatrix ref = fock::displacement_operator(f, 120).matrix().topLeftCorner(21, 21);
    worst = std::max(worst, (specfun::displaced_fock_matrix(f, 21, 21) - ref).cwiseAbs().maxCoeff());
  }
  return at_most("displaced_fock_formula", 1e-10, worst, "n, k <= 20 vs exponential of the truncated generator");
}

VerifyRecord rwa_projection() {
  const TruncationSpec tr{25, 25};
  double worst = 0.0;
  for (int n : {0, 1, 2, -1}) {
    const SystemParams p = SystemParams{static_cast<double>(n), 1.0, 0.45, 0.0, 0.2}.with_matched_kerr();
    const ModeOperator proj = hm::stationary_projection(hm::ion_laser_drive(p, tr), p.detuning, p.omega_m, tr);
    worst = std::max(worst, (hm::rwa_sideband_hamiltonian(n, p, tr).matrix() - proj.matrix()).cwiseAbs().maxCoeff());
  }
  return at_most("rwa_projection", 1e-12, worst, "sidebands 0, 1, 2, -1 vs stationary projection of the drive");
}

AnalyticEvolutionSpec small_spec(double eta, double xt) {
  return detail::analytic_spec(1.0, 1.0, xt, SystemParams{0.0, 1.0, eta, 0.0, 0.01}.with_matched_kerr());
}

VerifyRecord analytic_vs_structured() {
  const AnalyticEvolutionSpec s = small_spec(0.5, std::numbers::pi / 2);
  const TruncationSpec tr = dynamics::plan_truncation(s, 1e-12);
  const double f = detail::model_fidelity("structured", s, tr);
  return at_most("analytic_vs_numeric", 1e-8, 1.0 - f, "1 - fidelity, alpha = Gamma = 1, eta = 0.5, xi t = pi/2");
}

VerifyRecord frame_roundtrip() {
  const SystemParams p = SystemParams{0.8, 1.0, 0.3, 0.0, 0.05}.with_matched_kerr();
  const TruncationSpec tr{16, 30};
  const BipartiteState psi = dynamics::evolve_analytic(small_spec(0.3, 0.0), tr).state;
  const BipartiteState back = dynamics::from_rotating_frame(dynamics::to_rotating_frame(psi, p, 1.7), p, 1.7);
  return at_most("frame_roundtrip", 1e-12, (back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff());
}

std::vector<VerifyRecord> husimi_checks() {
  const AnalyticEvolutionSpec s = small_spec(0.5, std::numbers::pi / 2);
  const GridSpec grid{12.0, 121};
  const TruncationSpec planned{0, 0, 1e-12};
  std::vector<VerifyRecord> out;
  double residual = 0.0, norm = 0.0, peak = 0.0;
  for (Mode m : {Mode::mirror, Mode::cavity}) {
    const detail::Panel p = detail::compute_panel(s, m, planned, grid, 0.1, true);
    residual = std::max(residual, *p.residual);
    norm = std::max(norm, std::abs(p.integral - 1.0));
    peak = std::max(peak, p.grid.peak());
  }
  out.push_back(at_most("husimi_oracle", 1e-8, residual, "closed forms vs reduced-density evaluation, both modes"));
  out.push_back(at_most("husimi_normalization", 5e-3, norm, "|integral - 1|, both modes"));
  out.push_back(at_most("husimi_peak_bound", 1.0 / std::numbers::pi + 1e-10, peak));
  return out;
}

VerifyRecord truncation_adequacy(const RunConfig& c) {
  SystemParams p = c.params;
  if (!c.husimi.etas.empty()) p.g0 = c.husimi.etas.front() * p.omega_m;
  if (c.match_kerr) p = p.with_matched_kerr();
  const AnalyticEvolutionSpec s = detail::analytic_spec(c.husimi.alpha, c.husimi.gamma, c.husimi.scaled_time, p);
  const TruncationSpec tr = detail::resolve_truncation(c.truncation, s);
  const std::string where = fmt::format("configured dims {}x{}", tr.dim_cavity, tr.dim_mirror);
  try {
    const AnalyticState a = dynamics::evolve_analytic(s, tr);
    const double loss = std::max(a.diagnostics.cavity_loss, a.diagnostics.mirror_loss);
    return at_most("truncation_adequacy", tr.tail_tol, loss, where);
  } catch (const TruncationError& e) {
    VerifyRecord r{"truncation_adequacy", "<=", tr.tail_tol, kNaN, false, where + ": " + e.what()};
    r.failure_code = exit_code::truncation_inadequate;
    return r;
  }
}

}  // namespace

std::vector<VerifyRecord> run_invariants(const RunConfig& c) {
  const bool fault = c.verify.fault == "flip_coupling_sign";
  std::vector<std::function<std::vector<VerifyRecord>()>> checks = {
      [] { return std::vector{kerr_ladder()}; },
      [&] { return std::vector{spectrum_preservation(fault)}; },
      [&] { return std::vector{polaron_conjugation(fault)}; },
      [] { return std::vector{displaced_fock_formula()}; },
      [] { return std::vector{rwa_projection()}; },
      [] { return std::vector{analytic_vs_structured()}; },
      [] { return std::vector{frame_roundtrip()}; },
      [] { return husimi_checks(); },
      [&] { return std::vector{truncation_adequacy(c)}; },
  };
  std::vector<VerifyRecord> out;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      for (VerifyRecord& r : checks[i]()) out.push_back(std::move(r));
    } catch (const Error& e) {
      VerifyRecord r{fmt::format("check_{}", i), "<=", 0.0, kNaN, false, e.what()};
      r.failure_code = exit_code_for(e.kind());
      out.push_back(std::move(r));
    }
  }
  return out;
}

CommandResult cmd_verify(const RunConfig& c, const CommandOptions& opts) {
  const std::vector<VerifyRecord> records = run_invariants(c);
  json list = json::array();
  bool all = true;
  bool numeric_failure = false;
  for (const VerifyRecord& r : records) {
    list.push_back({{"name", r.name},
                    {"relation", r.relation},
                    {"tolerance", r.tolerance},
                    {"measured", std::isfinite(r.measured) ? json(r.measured) : json(nullptr)},
                    {"pass", r.pass},
                    {"detail", r.detail}});
    all = all && r.pass;
    if (!r.pass && r.failure_code != exit_code::truncation_inadequate) numeric_failure = true;
    detail::log_line(opts, fmt::format("{} {:<24} {:.3e} {} {:.3e}{}", r.pass ? "PASS" : "FAIL", r.name, r.measured,
                                       r.relation, r.tolerance, r.pass || r.detail.empty() ? "" : "  " + r.detail));
  }
  json report = {{"tool", tool_version()}, {"fault", c.verify.fault}, {"records", list}, {"pass", all}};
  CommandResult res;
  const auto path = opts.out_dir / "verify.json";
  detail::write_atomic(path, report.dump(2) + "\n");
  res.files = {path};
  if (!all) res.exit_code = numeric_failure ? exit_code::numerical_failure : exit_code::truncation_inadequate;
  return res;
}

}  // namespace optomech::cli
