#pragma once

// Husimi-Q functions Q(beta) = <beta|rho|beta> / pi of either subsystem, from
// the closed-form expansions and from a reduced density matrix.

#include <vector>

#include "optomech/dynamics.hpp"
#include "optomech/fock.hpp"

namespace optomech {

/// Sample points re_min + i (re_max - re_min)/(n_re - 1), likewise for im.
struct GridGeometry {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;
  int n_re = 201;
  int n_im = 201;

  void validate() const;
  double re_step() const noexcept { return (re_max - re_min) / (n_re - 1); }
  double im_step() const noexcept { return (im_max - im_min) / (n_im - 1); }
  double re(int i) const noexcept { return re_min + i * re_step(); }
  double im(int j) const noexcept { return im_min + j * im_step(); }
  cplx point(int i, int j) const noexcept { return {re(i), im(j)}; }

  /// Square of the given half-width centred on `center`.
  static GridGeometry square(cplx center, double half_width, int points = 201);

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

struct HusimiGrid {
  GridGeometry geometry;
  RMatrix values;        // values(i, j) = Q(re(i) + i im(j))
  int clamped = 0;       // negative round-off values set to zero

  double cell_area() const noexcept { return geometry.re_step() * geometry.im_step(); }
  double peak() const { return values.maxCoeff(); }
};

struct LocalMaximum {
  int i = 0;
  int j = 0;
  cplx beta;
  double value = 0.0;
};

namespace phase_space {

/// Half-width max(|Gamma|, |alpha|) + eta k_max + 4, 201 x 201 points, centred
/// at the mode's initial amplitude.
GridGeometry default_grid(const AnalyticEvolutionSpec& spec, Mode mode);

/// Mechanical Q from the polaron-frame amplitudes chi:
///   Q(beta) = (1/pi) sum_n |sum_j chi(n, j) <beta - eta n|j>|^2.
HusimiGrid husimi_mechanical_analytic(const AnalyticEvolutionSpec& spec, const GridGeometry& g,
                                      const TruncationSpec& tr);

/// Cavity Q from the rotating-frame amplitudes psi(n, l):
///   Q(beta) = (1/pi) sum_l |sum_n psi(n, l) <beta|n>|^2.
HusimiGrid husimi_cavity_analytic(const AnalyticEvolutionSpec& spec, const GridGeometry& g,
                                  const TruncationSpec& tr);

/// Same sums for a state that is already assembled.
HusimiGrid husimi_mechanical_from_polaron(const CMatrix& chi, double eta, const GridGeometry& g);
HusimiGrid husimi_cavity_from_state(const BipartiteState& psi, const GridGeometry& g);

/// (1/pi) <beta|rho|beta> via a pivoted Cholesky factor of rho.
HusimiGrid husimi_from_density(const DensityMatrix& rho, const GridGeometry& g);

/// Riemann sum of Q over the grid. Throws extents_too_small when the largest
/// boundary value reaches 1e-6 of the peak.
double integrate_grid(const HusimiGrid& grid);

/// Largest boundary value relative to the peak.
double boundary_ratio(const HusimiGrid& grid);

/// 8-neighbour strict maxima above rel_threshold * peak; among equal
/// neighbours the lexicographically smallest (i, j) wins.
std::vector<LocalMaximum> find_local_maxima(const HusimiGrid& grid, double rel_threshold);

/// Largest pointwise |a - b|; throws invalid_dimension for different geometries.
double max_abs_difference(const HusimiGrid& a, const HusimiGrid& b);

}  // namespace phase_space
}  // namespace optomech
