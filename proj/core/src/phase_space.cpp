#include "optomech/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "optomech/specfun.hpp"
#include "parallel.hpp"

namespace optomech {

void GridGeometry::validate() const {
  if (n_re < 2 || n_im < 2) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("grid needs at least 2x2 points (got {}x{})", n_re, n_im));
  }
  if (!(re_max > re_min) || !(im_max > im_min)) {
    throw Error(ErrorKind::invalid_dimension, "grid extents must satisfy min < max");
  }
}

GridGeometry GridGeometry::square(cplx center, double half_width, int points) {
  return {center.real() - half_width, center.real() + half_width, center.imag() - half_width,
          center.imag() + half_width, points, points};
}

namespace phase_space {

namespace {

constexpr double kInvPi = std::numbers::inv_pi;

// Keeps the documented positivity contract: round-off negatives become zero.
HusimiGrid finish(const GridGeometry& g, RMatrix values) {
  HusimiGrid out{g, std::move(values), 0};
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    double& v = out.values.data()[i];
    if (v < 0.0) {
      if (v < -1e-14) {
        throw Error(ErrorKind::contract_violation, fmt::format("Husimi value {:.3e} is negative", v));
      }
      v = 0.0;
      ++out.clamped;
    }
  }
  return out;
}

// Evaluates one grid row i at a time; body(i, column of values) fills Q(i, :).
template <typename RowBody>
RMatrix fill_rows(const GridGeometry& g, RowBody&& body) {
  g.validate();
  RMatrix values(g.n_re, g.n_im);
  detail::parallel_for(0, g.n_re, [&](int i) {
    RVector row(g.n_im);
    body(i, row);
    values.row(i) = row.transpose();
  });
  return values;
}

struct Support {
  int lo = 0;
  int hi = -1;  // inclusive; hi < lo marks an empty row
};

Support support_of(const Eigen::Ref<const CVector>& v, double floor) {
  Support s;
  const auto n = static_cast<int>(v.size());
  int lo = 0;
  while (lo < n && std::norm(v(lo)) <= floor) ++lo;
  int hi = n - 1;
  while (hi >= lo && std::norm(v(hi)) <= floor) --hi;
  s.lo = lo;
  s.hi = hi;
  return s;
}

// <gamma|v> over the intersection of v's support and gamma's number window.
cplx coherent_overlap(cplx gamma, const Eigen::Ref<const CVector>& v, Support s) {
  const specfun::CoherentWindow w = specfun::coherent_window(gamma, s.lo, s.hi);
  const auto len = w.values.size();
  if (len == 0) return {};
  return w.values.dot(v.segment(w.first, len));  // conjugates the window
}

void require_adequate(const dynamics::PolaronAmplitudes& pa, const TruncationSpec& tr) {
  if (pa.cutoff_deficit >= dynamics::kMaxNormDeficit) {
    throw TruncationError(ErrorKind::cutoff_insufficient,
                          fmt::format("Husimi sums with k <= {}, j <= {} leave a norm deficit of {:.3e}",
                                      pa.cutoffs.k_max, pa.cutoffs.j_max, pa.cutoff_deficit),
                          pa.cutoffs.j_max + std::max(10, pa.cutoffs.j_max / 4));
  }
  const double loss = 1.0 - pa.cutoff_deficit - pa.chi.squaredNorm();
  if (loss >= tr.tail_tol) {
    const int suggest = tr.dim_cavity + std::max(8, tr.dim_cavity / 4);
    throw TruncationError(ErrorKind::truncation_insufficient,
                          fmt::format("Husimi: {:.3e} of the state lies beyond dim_cavity = {}; try {}",
                                      loss, tr.dim_cavity, suggest),
                          suggest);
  }
}

}  // namespace

GridGeometry default_grid(const AnalyticEvolutionSpec& spec, Mode mode) {
  const SumCutoffs c = dynamics::resolve_cutoffs(spec);
  const double half = std::max(std::abs(spec.gamma), std::abs(spec.alpha)) + spec.params.eta() * c.k_max + 4.0;
  return GridGeometry::square(mode == Mode::cavity ? spec.alpha : spec.gamma, half, 201);
}

HusimiGrid husimi_mechanical_from_polaron(const CMatrix& chi, double eta, const GridGeometry& g) {
  const auto rows = static_cast<int>(chi.rows());
  const double peak = chi.cwiseAbs2().maxCoeff();
  std::vector<Support> support(rows);
  std::vector<CVector> chi_rows(rows);
  for (int n = 0; n < rows; ++n) {
    chi_rows[n] = chi.row(n).transpose();
    support[n] = chi_rows[n].squaredNorm() < 1e-32 ? Support{} : support_of(chi_rows[n], 1e-40 * peak);
  }
  RMatrix values = fill_rows(g, [&](int i, RVector& row) {
    for (int j = 0; j < g.n_im; ++j) {
      const cplx beta = g.point(i, j);
      double q = 0.0;
      for (int n = 0; n < rows; ++n) q += std::norm(coherent_overlap(beta - eta * n, chi_rows[n], support[n]));
      row(j) = kInvPi * q;
    }
  });
  return finish(g, std::move(values));
}

HusimiGrid husimi_mechanical_analytic(const AnalyticEvolutionSpec& spec, const GridGeometry& g,
                                      const TruncationSpec& tr) {
  tr.validate();
  const dynamics::PolaronAmplitudes pa = dynamics::polaron_amplitudes(spec, tr.dim_cavity);
  require_adequate(pa, tr);
  return husimi_mechanical_from_polaron(pa.chi / std::sqrt(pa.chi.squaredNorm()), spec.params.eta(), g);
}

HusimiGrid husimi_cavity_from_state(const BipartiteState& psi, const GridGeometry& g) {
  // Performing the phonon sum first leaves G(n, n') = sum_l psi(n, l) psi^*(n', l).
  const CMatrix grid = psi.grid();
  const CMatrix gram = grid * grid.adjoint();
  const int nc = psi.dim_cavity();
  RMatrix values = fill_rows(g, [&](int i, RVector& row) {
    for (int j = 0; j < g.n_im; ++j) {
      const CVector c = specfun::coherent_amplitudes(g.point(i, j), nc).conjugate();  // <beta|n>
      row(j) = kInvPi * (c.transpose() * gram * c.conjugate()).value().real();
    }
  });
  return finish(g, std::move(values));
}

HusimiGrid husimi_cavity_analytic(const AnalyticEvolutionSpec& spec, const GridGeometry& g,
                                  const TruncationSpec& tr) {
  const AnalyticState s = dynamics::evolve_analytic(spec, tr);
  return husimi_cavity_from_state(s.state, g);
}

HusimiGrid husimi_from_density(const DensityMatrix& rho, const GridGeometry& g) {
  const CMatrix& m = rho.matrix();
  const auto d = static_cast<int>(m.rows());
  // Pivoted Cholesky rho = L L^dag, stopped once the residual diagonal is negligible.
  RVector diag = m.diagonal().real();
  const double stop = 1e-15 * std::max(diag.sum(), 1e-300);
  std::vector<CVector> factor;
  for (int r = 0; r < d; ++r) {
    Eigen::Index p;
    const double dmax = diag.maxCoeff(&p);
    if (dmax <= stop) break;
    CVector col = m.col(p);
    for (const CVector& prev : factor) col -= prev * std::conj(prev(p));
    col /= std::sqrt(dmax);
    for (int i = 0; i < d; ++i) diag(i) -= std::norm(col(i));
    diag(p) = 0.0;
    factor.push_back(std::move(col));
  }
  CMatrix lf(d, static_cast<Eigen::Index>(factor.size()));
  for (std::size_t r = 0; r < factor.size(); ++r) lf.col(static_cast<Eigen::Index>(r)) = factor[r];
  // Rows of L that carry weight; the coherent window is clipped to them.
  Support rows_used{0, -1};
  if (lf.cols() > 0) rows_used = support_of(lf.rowwise().squaredNorm().cast<cplx>(), 0.0);

  RMatrix values = fill_rows(g, [&](int i, RVector& row) {
    for (int j = 0; j < g.n_im; ++j) {
      const specfun::CoherentWindow w = specfun::coherent_window(g.point(i, j), rows_used.lo, rows_used.hi);
      const auto len = w.values.size();
      row(j) = len == 0 ? 0.0 : kInvPi * (lf.middleRows(w.first, len).adjoint() * w.values).squaredNorm();
    }
  });
  return finish(g, std::move(values));
}

double boundary_ratio(const HusimiGrid& grid) {
  const RMatrix& v = grid.values;
  const double peak = v.maxCoeff();
  if (peak <= 0.0) return 0.0;
  const double edge = std::max({v.row(0).maxCoeff(), v.row(v.rows() - 1).maxCoeff(), v.col(0).maxCoeff(),
                                v.col(v.cols() - 1).maxCoeff()});
  return edge / peak;
}

double integrate_grid(const HusimiGrid& grid) {
  const double ratio = boundary_ratio(grid);
  if (ratio >= 1e-6) {
    throw Error(ErrorKind::extents_too_small,
                fmt::format("grid boundary reaches {:.3e} of the peak (limit 1e-6); widen the extents", ratio));
  }
  // Row sums then a sum over rows: a fixed reduction order.
  double total = 0.0;
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i) total += grid.values.row(i).sum();
  return total * grid.cell_area();
}

std::vector<LocalMaximum> find_local_maxima(const HusimiGrid& grid, double rel_threshold) {
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) {
    throw Error(ErrorKind::domain, fmt::format("rel_threshold must lie in (0, 1) (got {})", rel_threshold));
  }
  const RMatrix& v = grid.values;
  const int nr = static_cast<int>(v.rows());
  const int ni = static_cast<int>(v.cols());
  const double floor = rel_threshold * v.maxCoeff();
  std::vector<LocalMaximum> out;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < ni; ++j) {
      const double x = v(i, j);
      if (x <= floor) continue;
      bool best = true;
      for (int di = -1; di <= 1 && best; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di;
          const int jj = j + dj;
          if (ii < 0 || ii >= nr || jj < 0 || jj >= ni) continue;
          const double y = v(ii, jj);
          // A tied neighbour earlier in (i, j) order owns the plateau.
          if (y > x || (y == x && (di < 0 || (di == 0 && dj < 0)))) {
            best = false;
            break;
          }
        }
      }
      if (best) out.push_back({i, j, grid.geometry.point(i, j), x});
    }
  }
  return out;
}

double max_abs_difference(const HusimiGrid& a, const HusimiGrid& b) {
  if (!(a.geometry == b.geometry)) throw Error(ErrorKind::invalid_dimension, "Husimi grids differ in geometry");
  return (a.values - b.values).cwiseAbs().maxCoeff();
}

}  // namespace phase_space
}  // namespace optomech
