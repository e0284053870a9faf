#include "optomech/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "optomech/specfun.hpp"
#include "parallel.hpp"

namespace optomech::dynamics {

namespace {

int default_k_max(cplx alpha) {
  const double a = std::abs(alpha);
  return static_cast<int>(std::ceil(a * a + 8.0 * a + 10.0));
}

int default_j_max(cplx gamma, double eta, int k_max) {
  double best = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    const double g = std::abs(gamma - eta * k);
    best = std::max(best, g * g + 8.0 * g + 10.0);
  }
  return static_cast<int>(std::ceil(best));
}

cplx tilde_alpha(cplx alpha, cplx gamma, double eta) {
  // Gamma - Gamma^* is imaginary, so this is a pure phase.
  return alpha * std::exp(0.5 * eta * (gamma - std::conj(gamma)));
}

using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Amplitude grid (rows: photons, cols: phonons) of a state, and back.
CMatrix as_grid(const BipartiteState& psi) { return psi.grid(); }

BipartiteState from_grid(const CMatrix& g) { return BipartiteState::from_grid(g); }

// Applies D_b(shift(k)) to every photon row k of the grid.
void displace_rows(CMatrix& grid, const std::vector<cplx>& shifts) {
  CMatrix cols = grid.transpose();
  fock::displacement_generator(static_cast<int>(cols.rows()))->apply_columns(shifts, cols);
  grid = cols.transpose();
}

// Applies D_a(shift(j)) to every phonon column j of the grid.
void displace_cols(CMatrix& grid, const std::vector<cplx>& shifts) {
  fock::displacement_generator(static_cast<int>(grid.rows()))->apply_columns(shifts, grid);
}

double tail_mass_beyond(cplx amplitude, int count) { return fock::coherent_tail_mass(amplitude, count); }

void require_same_shape(const BipartiteState& a, const BipartiteState& b) {
  if (a.dim_cavity() != b.dim_cavity() || a.dim_mirror() != b.dim_mirror()) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("states have different shapes ({}x{} vs {}x{})", a.dim_cavity(),
                            a.dim_mirror(), b.dim_cavity(), b.dim_mirror()));
  }
}

// Raises the documented errors for an assembled closed-form state and
// returns it normalized.
BipartiteState certify(const CMatrix& grid, AnalyticDiagnostics& d, const TruncationSpec& tr,
                       std::string_view context) {
  d.norm_deficit = 1.0 - grid.squaredNorm();
  const SumCutoffs& c = d.cutoffs;
  if (d.cutoff_deficit >= kMaxNormDeficit) {
    const int k_more = c.k_max + std::max(10, c.k_max / 4);
    const int j_more = c.j_max + std::max(10, c.j_max / 4);
    throw TruncationError(
        ErrorKind::cutoff_insufficient,
        fmt::format("{}: sums with k <= {}, j <= {} leave a norm deficit of {:.3e} (limit {:.0e}); "
                    "try k_max = {}, j_max = {}",
                    context, c.k_max, c.j_max, d.cutoff_deficit, kMaxNormDeficit, k_more, j_more),
        std::max(k_more, j_more));
  }
  const auto too_small = [&](Mode mode, double loss) {
    const int dim = tr.dim(mode);
    const int suggest = dim + std::max(8, dim / 4);
    throw TruncationError(
        ErrorKind::truncation_insufficient,
        fmt::format("{}: {:.3e} of the state lies beyond dim_{} = {} (tail_tol {:.1e}); try {}",
                    context, loss, to_string(mode), dim, tr.tail_tol, suggest),
        suggest);
  };
  if (d.cavity_loss >= tr.tail_tol) too_small(Mode::cavity, d.cavity_loss);
  if (d.mirror_loss >= tr.tail_tol) too_small(Mode::mirror, d.mirror_loss);
  if (d.norm_deficit >= kMaxNormDeficit) {
    too_small(d.cavity_loss >= d.mirror_loss ? Mode::cavity : Mode::mirror, d.norm_deficit);
  }
  BipartiteState psi = from_grid(grid / std::sqrt(grid.squaredNorm()));
  fock::check_truncation(psi, tr.tail_tol, context);
  return psi;
}

// Rows [0, rows) of D_b(eta n) chi_n, with chi_n restricted to its support.
CVector mirror_row(const CMatrix& chi, int n, double eta, int rows) {
  const auto row = chi.row(n);
  Eigen::Index hi = row.size();
  const double peak = row.cwiseAbs2().maxCoeff();
  if (peak == 0.0) return CVector::Zero(rows);
  while (hi > 1 && std::norm(row(hi - 1)) < 1e-40 * peak) --hi;
  const CMatrix d = specfun::displaced_fock_matrix(eta * n, rows, static_cast<int>(hi));
  return d * row.head(hi).transpose();
}

// Extra rows or columns evaluated past a cutoff to measure what it discards.
int margin(int dim) { return std::max(8, dim / 4); }

// Norm differences are only meaningful above accumulated round-off.
double above_roundoff(double x) { return x > 1e-12 ? x : 0.0; }

}  // namespace

double effective_amplitude(int j, double scaled_time, double eta) {
  if (j < 0) throw Error(ErrorKind::domain, fmt::format("phonon number must be >= 0 (got {})", j));
  const double z = eta * eta;
  const specfun::ScaledValue lag = specfun::laguerre_scaled(j, 0, z);
  return scaled_time * lag.mantissa * std::exp(lag.log_scale - 0.5 * z);
}

SumCutoffs resolve_cutoffs(const AnalyticEvolutionSpec& spec) {
  SumCutoffs c = spec.cutoffs;
  if (c.k_max < 0) c.k_max = default_k_max(spec.alpha);
  if (c.j_max < 0) c.j_max = default_j_max(spec.gamma, spec.params.eta(), c.k_max);
  return c;
}

BipartiteState polaron_initial_state(cplx alpha, cplx gamma, double eta, int dim_cavity, int dim_mirror) {
  const CVector a = specfun::coherent_amplitudes(tilde_alpha(alpha, gamma, eta), dim_cavity);
  CMatrix grid(dim_cavity, dim_mirror);
  for (int k = 0; k < dim_cavity; ++k) {
    grid.row(k) = a(k) * specfun::coherent_amplitudes(gamma - eta * k, dim_mirror).transpose();
  }
  return from_grid(grid);
}

PolaronAmplitudes polaron_amplitudes(const AnalyticEvolutionSpec& spec, int rows) {
  spec.params.validate();
  if (spec.scaled_time < 0.0) {
    throw Error(ErrorKind::domain, fmt::format("scaled time must be >= 0 (got {})", spec.scaled_time));
  }
  if (rows < 1) throw Error(ErrorKind::invalid_dimension, "polaron_amplitudes needs rows >= 1");
  PolaronAmplitudes out;
  out.cutoffs = resolve_cutoffs(spec);
  const int nk = out.cutoffs.k_max + 1;
  const int nj = out.cutoffs.j_max + 1;
  const double eta = spec.params.eta();

  const CVector a = specfun::coherent_amplitudes(tilde_alpha(spec.alpha, spec.gamma, eta), nk);
  // g(j, k) = <j|Gamma - eta k>
  CMatrix g(nj, nk);
  out.cutoff_deficit = tail_mass_beyond(spec.alpha, nk);
  for (int k = 0; k < nk; ++k) {
    const cplx gk = spec.gamma - eta * k;
    g.col(k) = a(k) * specfun::coherent_amplitudes(gk, nj);
    out.cutoff_deficit += std::norm(a(k)) * tail_mass_beyond(gk, nj);
  }
  const RVector w = hamiltonians::resonant_weights(eta, nj);

  out.chi = CMatrix::Zero(rows, nj);
  detail::parallel_for(0, nj, [&](int j) {
    const auto coeff = g.row(j);
    if (coeff.cwiseAbs2().maxCoeff() == 0.0) return;
    const CMatrix d = specfun::displaced_fock_matrix(spec.scaled_time * w(j), rows, nk);
    out.chi.col(j) = d * coeff.transpose();
  });
  return out;
}

AnalyticState evolve_polaron_analytic(const AnalyticEvolutionSpec& spec, const TruncationSpec& tr) {
  tr.validate();
  const int extra_rows = margin(tr.dim_cavity);
  const PolaronAmplitudes pa = polaron_amplitudes(spec, tr.dim_cavity + extra_rows);
  AnalyticDiagnostics d;
  d.cutoffs = pa.cutoffs;
  d.cutoff_deficit = pa.cutoff_deficit;
  const int cols = std::min<int>(tr.dim_mirror, static_cast<int>(pa.chi.cols()));
  CMatrix grid = CMatrix::Zero(tr.dim_cavity, tr.dim_mirror);
  grid.leftCols(cols) = pa.chi.topLeftCorner(tr.dim_cavity, cols);
  const double kept = pa.chi.topRows(tr.dim_cavity).squaredNorm();
  d.cavity_loss = pa.chi.bottomRows(extra_rows).squaredNorm() +
                  above_roundoff(1.0 - pa.cutoff_deficit - pa.chi.squaredNorm());
  d.mirror_loss = above_roundoff(kept - grid.squaredNorm());
  if (cols < pa.chi.cols()) {
    d.mirror_loss += pa.chi.topRows(tr.dim_cavity).rightCols(pa.chi.cols() - cols).squaredNorm();
  }
  BipartiteState psi = certify(grid, d, tr, "polaron-frame evolution");
  return {std::move(psi), d};
}

AnalyticState evolve_analytic(const AnalyticEvolutionSpec& spec, const TruncationSpec& tr) {
  tr.validate();
  const int extra_rows = margin(tr.dim_cavity);
  const int extra_cols = margin(tr.dim_mirror);
  const PolaronAmplitudes pa = polaron_amplitudes(spec, tr.dim_cavity + extra_rows);
  const double eta = spec.params.eta();
  AnalyticDiagnostics d;
  d.cutoffs = pa.cutoffs;
  d.cutoff_deficit = pa.cutoff_deficit;

  RowMajor grid = RowMajor::Zero(tr.dim_cavity, tr.dim_mirror);
  std::vector<double> spill(tr.dim_cavity, 0.0);
  detail::parallel_for(0, tr.dim_cavity, [&](int n) {
    const CVector row = mirror_row(pa.chi, n, eta, tr.dim_mirror + extra_cols);
    grid.row(n) = row.head(tr.dim_mirror).transpose();
    spill[n] = row.tail(extra_cols).squaredNorm();
  });
  const double kept = pa.chi.topRows(tr.dim_cavity).squaredNorm();
  d.cavity_loss = pa.chi.bottomRows(extra_rows).squaredNorm() +
                  above_roundoff(1.0 - pa.cutoff_deficit - pa.chi.squaredNorm());
  double spilled = 0.0;
  for (double x : spill) spilled += x;
  d.mirror_loss = spilled + above_roundoff(kept - grid.squaredNorm() - spilled);
  BipartiteState psi = certify(grid, d, tr, "analytic evolution");
  return {std::move(psi), d};
}

TruncationSpec plan_truncation(const AnalyticEvolutionSpec& spec, double tail_tol) {
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw Error(ErrorKind::invalid_dimension, fmt::format("tail_tol must lie in (0, 1) (got {})", tail_tol));
  }
  const SumCutoffs cut = resolve_cutoffs(spec);
  const double eta = spec.params.eta();
  double f_max = 0.0;
  const RVector w = hamiltonians::resonant_weights(eta, cut.j_max + 1);
  for (int j = 0; j <= cut.j_max; ++j) f_max = std::max(f_max, std::abs(spec.scaled_time * w(j)));
  const double reach = std::sqrt(static_cast<double>(cut.k_max)) + f_max;
  const int work_rows = static_cast<int>(std::ceil(reach * reach + 10.0 * reach + 20.0));

  const PolaronAmplitudes pa = polaron_amplitudes(spec, work_rows);
  const RVector pop = pa.chi.rowwise().squaredNorm();

  // Photon cutoff: smallest dim whose top state and beyond hold < tail_tol.
  int dim_cavity = work_rows;
  double tail = 0.0;
  for (int n = work_rows - 1; n >= 1; --n) {
    tail += pop(n);  // mass at photon numbers >= n
    if (tail >= tail_tol) break;
    dim_cavity = n + 1;
  }
  dim_cavity = std::max(dim_cavity, 2);

  // Phonon cutoff: grow each photon row until its remaining mass is negligible.
  std::vector<RVector> rows_pop(dim_cavity);
  std::vector<double> residual(dim_cavity, 0.0);
  detail::parallel_for(0, dim_cavity, [&](int n) {
    const double mass = pop(n);
    if (mass < 1e-300) {
      rows_pop[n] = RVector::Zero(2);
      return;
    }
    // Moments of b^dag b after D_b(eta n).
    const auto chi = pa.chi.row(n);
    const Eigen::Index m = chi.size();
    const double x = eta * n;
    CVector u(m + 1), v(m + 2);
    u.setZero();
    v.setZero();
    for (Eigen::Index j = 0; j < m; ++j) {
      u(j) += x * chi(j);
      if (j > 0) u(j - 1) += std::sqrt(static_cast<double>(j)) * chi(j);
    }
    for (Eigen::Index j = 0; j <= m; ++j) {
      v(j) += x * u(j);
      v(j + 1) += std::sqrt(static_cast<double>(j + 1)) * u(j);
    }
    const double mean = u.squaredNorm() / mass;
    const double var = std::max(0.0, v.squaredNorm() / mass - mean * mean);
    int rows = static_cast<int>(std::ceil(mean + 6.0 * std::sqrt(var) + 30.0));
    for (;;) {
      const RVector p = mirror_row(pa.chi, n, eta, rows).cwiseAbs2();
      const double rest = std::max(0.0, mass - p.sum());
      const double last = p.tail(std::max<Eigen::Index>(1, rows / 4)).sum();
      const bool settled = rest < 1e-3 * tail_tol + 1e-13 * mass;
      if ((settled && last < 1e-3 * tail_tol) || rows > 200000) {
        rows_pop[n] = p;
        residual[n] = rest > 1e-13 * mass ? rest : 0.0;
        return;
      }
      rows = rows + rows / 2;
    }
  });

  int longest = 2;
  for (const auto& p : rows_pop) longest = std::max<int>(longest, static_cast<int>(p.size()));
  // tail_at[l] = mass at phonon numbers >= l, summed over photon rows.
  RVector tail_at = RVector::Zero(longest + 1);
  for (int n = 0; n < dim_cavity; ++n) {
    const RVector& p = rows_pop[n];
    double acc = residual[n];
    tail_at(longest) += acc;
    for (Eigen::Index l = longest - 1; l >= 0; --l) {
      if (l < p.size()) acc += p(l);
      tail_at(l) += acc;
    }
  }
  int dim_mirror = longest;
  for (int dim = longest; dim >= 2; --dim) {
    if (tail_at(dim - 1) >= tail_tol) break;
    dim_mirror = dim;
  }
  dim_mirror = std::max(dim_mirror, 2);
  return {dim_cavity, dim_mirror, tail_tol};
}

BipartiteState evolve_resonant_numeric(const AnalyticEvolutionSpec& spec, const TruncationSpec& tr) {
  tr.validate();
  spec.params.validate();
  const double eta = spec.params.eta();
  // The polaron frame moves the mirror to Gamma - eta k, so the intermediate
  // mirror space is sized for the largest of those amplitudes.
  int dim_m = tr.dim_mirror;
  for (int k = 0; k < tr.dim_cavity; ++k) {
    const double r = std::abs(spec.gamma - eta * k);
    dim_m = std::max(dim_m, static_cast<int>(std::ceil(r * r + 8.0 * r + 10.0)) + 20);
  }
  const CVector ca = specfun::coherent_amplitudes(spec.alpha, tr.dim_cavity);
  const CVector cg = specfun::coherent_amplitudes(spec.gamma, dim_m);
  CMatrix grid = ca * cg.transpose();

  std::vector<cplx> undress(tr.dim_cavity), dress(tr.dim_cavity);
  for (int k = 0; k < tr.dim_cavity; ++k) {
    undress[k] = -eta * k;
    dress[k] = eta * k;
  }
  const RVector w = hamiltonians::resonant_weights(eta, dim_m);
  std::vector<cplx> drive(dim_m);
  for (int j = 0; j < dim_m; ++j) drive[j] = spec.scaled_time * w(j);

  displace_rows(grid, undress);
  displace_cols(grid, drive);
  displace_rows(grid, dress);
  const CMatrix out = grid.leftCols(tr.dim_mirror);
  return from_grid(out / out.norm());
}

std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::full: return "full";
    case Generator::ion_laser: return "ion_laser";
    case Generator::rwa: return "rwa";
    case Generator::coupled: return "coupled";
  }
  return "unknown";
}

Propagator::Propagator(const ModeOperator& h, int dim_mirror)
    : spec_(fock::diagonalize(h, dim_mirror)), dim_mirror_(dim_mirror) {}

BipartiteState Propagator::evolve(const BipartiteState& psi0, double t) const {
  if (psi0.size() != spec_.values.size() || psi0.dim_mirror() != dim_mirror_) {
    throw Error(ErrorKind::invalid_dimension, "propagator and state shapes differ");
  }
  if (t == 0.0) return psi0;
  return {spec_.evolve(psi0.amplitudes(), t), psi0.dim_cavity(), psi0.dim_mirror()};
}

ModeOperator build_generator(Generator which, const SystemParams& p, const TruncationSpec& tr, int sideband) {
  switch (which) {
    case Generator::full: return hamiltonians::full_hamiltonian(p, tr);
    case Generator::ion_laser: return hamiltonians::ion_laser_hamiltonian(p, tr);
    case Generator::rwa: return hamiltonians::rwa_sideband_hamiltonian(sideband, p, tr);
    case Generator::coupled: return hamiltonians::coupled_oscillator_hamiltonian(p, tr);
  }
  throw Error(ErrorKind::wiring, "unknown generator");
}

BipartiteState evolve_full_numeric(const SystemParams& p, const BipartiteState& psi0, double t,
                                   Generator which, int sideband) {
  const TruncationSpec tr{psi0.dim_cavity(), psi0.dim_mirror(), kDefaultTailTol};
  if (t == 0.0) {
    build_generator(which, p, tr, sideband);  // still surfaces builder errors
    return psi0;
  }
  return fock::propagate_numeric(build_generator(which, p, tr, sideband), psi0, t);
}

double fidelity(const BipartiteState& a, const BipartiteState& b) {
  require_same_shape(a, b);
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

BipartiteState apply_polaron(const BipartiteState& psi, double eta, bool inverse) {
  CMatrix grid = as_grid(psi);
  std::vector<cplx> shifts(psi.dim_cavity());
  for (int k = 0; k < psi.dim_cavity(); ++k) shifts[k] = (inverse ? -eta : eta) * k;
  displace_rows(grid, shifts);
  return from_grid(grid);
}

BipartiteState to_interaction_picture(const BipartiteState& psi, const SystemParams& p, double t, bool inverse) {
  const double s = inverse ? -1.0 : 1.0;
  CVector out = psi.amplitudes();
  const int nm = psi.dim_mirror();
  for (int k = 0; k < psi.dim_cavity(); ++k)
    for (int j = 0; j < nm; ++j) out(k * nm + j) *= std::polar(1.0, s * (p.detuning * k + p.omega_m * j) * t);
  return {std::move(out), psi.dim_cavity(), nm};
}

BipartiteState to_rotating_frame(const BipartiteState& psi_lab, const SystemParams& p, double t) {
  const double eta = p.eta();
  return apply_polaron(to_interaction_picture(apply_polaron(psi_lab, eta, true), p, t), eta);
}

BipartiteState from_rotating_frame(const BipartiteState& psi_rot, const SystemParams& p, double t) {
  const double eta = p.eta();
  return apply_polaron(to_interaction_picture(apply_polaron(psi_rot, eta, true), p, t, true), eta);
}

BipartiteState coupled_frame_map(const BipartiteState& psi, const SystemParams& p, bool inverse) {
  if (std::abs(p.detuning) < 1e-12) {
    throw Error(ErrorKind::resonant_divergence, "coupled frame map needs Delta != 0");
  }
  const cplx beta{0.0, -p.xi / p.detuning};
  const int nm = psi.dim_mirror();
  CMatrix grid = as_grid(psi);
  const auto fourier = [&](double sign) {
    for (int j = 0; j < nm; ++j) grid.col(j) *= std::polar(1.0, sign * -0.5 * std::numbers::pi * j);
  };
  const std::vector<cplx> shift(nm, inverse ? -beta : beta);
  if (inverse) {
    fourier(-1.0);
    displace_cols(grid, shift);
  } else {
    displace_cols(grid, shift);
    fourier(1.0);
  }
  return from_grid(grid);
}

}  // namespace optomech::dynamics
