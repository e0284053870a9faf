// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "optomech/dynamics.hpp"
#include "optomech/hamiltonians.hpp"
#include "optomech/phase_space.hpp"
#include "optomech/specfun.hpp"
#include "oracles.hpp"

using namespace optomech;
namespace dyn = optomech::dynamics;
namespace hm = optomech::hamiltonians;
namespace ps = optomech::phase_space;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string summary;
};

Outcome at_most(double measured, double tolerance, const std::string& what) {
  return {measured <= tolerance, fmt::format("{} = {:.3e} (limit {:.0e})", what, measured, tolerance)};
}

Outcome at_least(double measured, double bound, const std::string& what) {
  return {measured >= bound, fmt::format("{} = {:.10f} (limit {})", what, measured, bound)};
}

double max_interior_difference(const CMatrix& a, const CMatrix& b, const TruncationSpec& tr, int nc, int nm) {
  double worst = 0.0;
  for (int k = 0; k < nc; ++k)
    for (int j = 0; j < nm; ++j)
      for (int kp = 0; kp < nc; ++kp)
        for (int jp = 0; jp < nm; ++jp)
          worst = std::max(worst, std::abs(a(tr.index(k, j), tr.index(kp, jp)) - b(tr.index(k, j), tr.index(kp, jp))));
  return worst;
}

AnalyticEvolutionSpec fig1_spec(double eta, double scaled_time) {
  AnalyticEvolutionSpec s;
  s.alpha = 2.0;
  s.gamma = 2.0;
  s.scaled_time = scaled_time;
  s.params = SystemParams{0.0, 1.0, eta, 0.0, 0.01}.with_matched_kerr();
  return s;
}

BipartiteState coherent_product(cplx alpha, cplx gamma, const TruncationSpec& tr) {
  return BipartiteState::product(specfun::coherent_amplitudes(alpha, tr.dim_cavity),
                                 specfun::coherent_amplitudes(gamma, tr.dim_mirror))
      .normalized();
}

Outcome kerr_cancellation_spectrum() {
  const SystemParams p = SystemParams{0.7, 1.0, 0.3, 0.0, 0.0}.with_matched_kerr();
  const TruncationSpec tr{40, 40};
  const auto ev = fock::interior_spectrum(hm::full_hamiltonian(p, tr), tr, 1e-12);
  if (ev.size() < 100) return {false, fmt::format("only {} interior eigenvalues", ev.size())};
  // Each eigenvalue is matched to its nearest ladder point; points may not be reused.
  std::vector<std::pair<double, int>> ladder;
  for (int k = 0; k < tr.dim_cavity; ++k)
    for (int j = 0; j < tr.dim_mirror; ++j) ladder.push_back({p.detuning * k + p.omega_m * j, k * tr.dim_mirror + j});
  std::sort(ladder.begin(), ladder.end());
  std::vector<bool> used(ladder.size(), false);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < ladder.size(); ++l)
      if (!used[l] && (used[best] || std::abs(ladder[l].first - ev[i].value) < std::abs(ladder[best].first - ev[i].value)))
        best = l;
    used[best] = true;
    worst = std::max(worst, std::abs(ladder[best].first - ev[i].value));
  }
  return at_most(worst, 1e-8, "max distance of the 100 lowest to distinct ladder points");
}

Outcome polaron_conjugation() {
  const TruncationSpec tr{6, 80};
  double worst = 0.0;
  for (double eta : {0.2, 0.5, 1.0}) {
    const SystemParams p{0.3, 1.0, eta, 0.07, 0.12};
    const CMatrix u = hm::polaron_unitary(eta, tr).matrix();
    const CMatrix conj = u.adjoint() * hm::full_hamiltonian(p, tr).matrix() * u;
    worst = std::max(worst, max_interior_difference(conj, hm::displaced_hamiltonian(p, tr).matrix(), tr, 4, 20));
  }
  return at_most(worst, 1e-9, "max interior |U^dag H U - H_disp| (6x80, interior 4x20)");
}

Outcome displaced_fock_formula() {
  double worst = 0.0;
  for (cplx f : {cplx(0.3, 0.0), cplx(0.0, 0.8), cplx(1.5, 0.0)}) {
    const CMatrix ref = oracle::displacement(f, 21);
    worst = std::max(worst, (specfun::displaced_fock_matrix(f, 21, 21) - ref).cwiseAbs().maxCoeff());
  }
  return at_most(worst, 1e-10, "max |formula - expm| over n, k <= 20");
}

Outcome rwa_resummation() {
  const TruncationSpec tr{25, 25};
  double worst = 0.0;
  for (int n : {0, 1, 2, -1}) {
    const SystemParams p = SystemParams{static_cast<double>(n), 1.0, 0.45, 0.0, 0.2}.with_matched_kerr();
    const ModeOperator proj = hm::stationary_projection(hm::ion_laser_drive(p, tr), p.detuning, p.omega_m, tr);
    worst = std::max(worst, (hm::rwa_sideband_hamiltonian(n, p, tr).matrix() - proj.matrix()).cwiseAbs().maxCoeff());
  }
  return at_most(worst, 1e-12, "max elementwise difference, n in {0, 1, 2, -1}");
}

Outcome analytic_evolution() {
  double worst = 1.0;
  for (double eta : {0.25, 0.5, 0.75, 1.0}) {
    for (double xt : {kPi / 4, kPi / 2, kPi}) {
      const AnalyticEvolutionSpec s = fig1_spec(eta, xt);
      const TruncationSpec tr = dyn::plan_truncation(s, 1e-12);
      worst = std::min(worst, dyn::fidelity(dyn::evolve_analytic(s, tr).state, dyn::evolve_resonant_numeric(s, tr)));
    }
  }
  return at_least(worst, 1.0 - 1e-8, "min fidelity over 12 (eta, xi t)");
}

Outcome rwa_validity() {
  const AnalyticEvolutionSpec s = fig1_spec(0.25, kPi);
  const TruncationSpec tr{70, 30, 1e-8};
  const SystemParams& p = s.params;
  const double t = s.scaled_time / p.xi;
  const BipartiteState psi0 = dyn::polaron_initial_state(s.alpha, s.gamma, p.eta(), tr.dim_cavity, tr.dim_mirror).normalized();
  const BipartiteState lab = dyn::Propagator(hm::ion_laser_hamiltonian(p, tr), tr.dim_mirror).evolve(psi0, t);
  const double f = dyn::fidelity(dyn::to_interaction_picture(lab, p, t), dyn::evolve_polaron_analytic(s, tr).state);
  return at_least(f, 0.99, "fidelity at xi = 0.01, xi t = pi");
}

Outcome weak_coupling_reduction() {
  const SystemParams p{0.8, 1.0, 0.02, 0.0, 0.05};
  const TruncationSpec tr{24, 24};
  const dyn::Propagator ion(dyn::build_generator(dyn::Generator::ion_laser, p, tr), tr.dim_mirror);
  const dyn::Propagator cpl(dyn::build_generator(dyn::Generator::coupled, p, tr), tr.dim_mirror);
  const BipartiteState psi0 = coherent_product(1.0, 1.0, tr);
  const BipartiteState pre = dyn::coupled_frame_map(psi0, p, true);
  double worst = 1.0;
  for (int i = 0; i <= 16; ++i) {
    const double t = kPi * i / 16 / p.xi;
    worst = std::min(worst, dyn::fidelity(ion.evolve(psi0, t), dyn::coupled_frame_map(cpl.evolve(pre, t), p)));
  }
  return at_least(worst, 0.99, "min fidelity over 17 times in [0, pi]");
}

struct Fig1Panel {
  double eta;
  HusimiGrid grid;
  double residual;
  double integral;
  std::size_t maxima;
};

std::vector<Fig1Panel>& fig1_panels() {
  static std::vector<Fig1Panel> panels = [] {
    std::vector<Fig1Panel> out;
    for (double eta : {0.25, 0.5, 0.75, 1.0}) {
      const AnalyticEvolutionSpec s = fig1_spec(eta, kPi);
      const TruncationSpec tr = dyn::plan_truncation(s, 1e-12);
      const GridGeometry g = ps::default_grid(s, Mode::mirror);
      HusimiGrid q = ps::husimi_mechanical_analytic(s, g, tr);
      const HusimiGrid ref =
          ps::husimi_from_density(fock::reduced_density(dyn::evolve_analytic(s, tr).state, Mode::mirror), g);
      const double residual = ps::max_abs_difference(q, ref);
      const double integral = ps::integrate_grid(q);
      const std::size_t maxima = ps::find_local_maxima(q, 0.1).size();
      out.push_back({eta, std::move(q), residual, integral, maxima});
    }
    return out;
  }();
  return panels;
}

Outcome husimi_oracle() {
  double residual = 0.0, norm = 0.0;
  for (const Fig1Panel& p : fig1_panels()) {
    residual = std::max(residual, p.residual);
    norm = std::max(norm, std::abs(p.integral - 1.0));
  }
  // Cavity closed form on the cavity grids of the same four states.
  for (double eta : {0.25, 0.5, 0.75, 1.0}) {
    const AnalyticEvolutionSpec s = fig1_spec(eta, kPi);
    const TruncationSpec tr = dyn::plan_truncation(s, 1e-12);
    const GridGeometry g = ps::default_grid(s, Mode::cavity);
    const HusimiGrid q = ps::husimi_cavity_analytic(s, g, tr);
    const HusimiGrid ref =
        ps::husimi_from_density(fock::reduced_density(dyn::evolve_analytic(s, tr).state, Mode::cavity), g);
    residual = std::max(residual, ps::max_abs_difference(q, ref));
    norm = std::max(norm, std::abs(ps::integrate_grid(q) - 1.0));
  }
  return {residual <= 1e-8 && norm <= 5e-3,
          fmt::format("mirror and cavity, 4 eta each: max |Q_closed - Q_rho| = {:.3e} (limit 1e-08), "
                      "max |int Q - 1| = {:.3e} (limit 5e-03)",
                      residual, norm)};
}

Outcome fig1_reproduction() {
  std::vector<std::size_t> counts;
  for (const Fig1Panel& p : fig1_panels()) counts.push_back(p.maxima);
  const bool monotone = std::is_sorted(counts.begin(), counts.end());
  std::string list;
  for (std::size_t c : counts) list += fmt::format("{}{}", list.empty() ? "" : ", ", c);
  return {monotone && counts.back() >= 2,
          fmt::format("maxima above 10% of peak at eta = 0.25..1: [{}] (non-decreasing, >= 2 at eta = 1)", list)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
#ifndef OPTOMECH_EXE
  return {false, "driver executable not built"};
#else
  const fs::path root = fs::current_path() / "acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path a = root / "a", b = root / "b";
  // The two runs also use different worker counts.
  for (const auto& [dir, threads] : {std::pair{a, 1}, std::pair{b, 3}}) {
    const std::string cmd = fmt::format("OPTOMECH_THREADS={} \"{}\" husimi --preset fig1 --out \"{}\" > \"{}.log\" 2>&1",
                                        threads, OPTOMECH_EXE, dir.string(), dir.string());
    if (const int rc = std::system(cmd.c_str()); rc != 0) return {false, fmt::format("run failed: {}", cmd)};
  }
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a))
    if (e.path().extension() == ".csv") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) return {false, "no CSV output"};
  for (const std::string& n : names) {
    if (!fs::exists(b / n) || slurp(a / n) != slurp(b / n)) return {false, fmt::format("{} differs between runs", n)};
  }
  return {true, fmt::format("{} CSV files byte-identical across two runs", names.size())};
#endif
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 kerr-cancellation spectrum", kerr_cancellation_spectrum},
      {"2 polaron conjugation", polaron_conjugation},
      {"3 displaced-Fock formula", displaced_fock_formula},
      {"4 RWA resummation", rwa_resummation},
      {"5 analytic evolution", analytic_evolution},
      {"6 RWA validity", rwa_validity},
      {"7 weak-coupling reduction", weak_coupling_reduction},
      {"8 Husimi oracle", husimi_oracle},
      {"9 fig1 qualitative reproduction", fig1_reproduction},
      {"10 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("{} [{}] {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", name, o.summary, secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
