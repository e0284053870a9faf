#pragma once

// Dense linear algebra over truncated bosonic Fock spaces.
//
// The joint cavity (x) mirror space is ordered cavity-major: basis state
// |k>_c (x) |j>_m lives at index k * dim_mirror + j.

#include <complex>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "optomech/error.hpp"

namespace optomech {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kDefaultTailTol = 1e-8;
inline constexpr double kHermitianTol = 1e-12;

enum class Mode { cavity, mirror, joint };

std::string_view to_string(Mode mode);

struct TruncationSpec {
  int dim_cavity = 0;
  int dim_mirror = 0;
  /// Largest admissible population in the top basis state of either mode.
  double tail_tol = kDefaultTailTol;

  /// Throws invalid_dimension for dims < 2 or tail_tol outside (0, 1).
  void validate() const;

  int joint_dim() const noexcept { return dim_cavity * dim_mirror; }
  int dim(Mode mode) const;
  int index(int k, int j) const noexcept { return k * dim_mirror + j; }

  friend bool operator==(const TruncationSpec&, const TruncationSpec&) = default;
};

/// A square complex matrix tagged with the space it acts on.
class ModeOperator {
 public:
  ModeOperator(CMatrix matrix, Mode mode);

  const CMatrix& matrix() const noexcept { return matrix_; }
  Mode mode() const noexcept { return mode_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  cplx operator()(Eigen::Index row, Eigen::Index col) const { return matrix_(row, col); }

  ModeOperator adjoint() const { return {matrix_.adjoint(), mode_}; }

  /// max |H - H^dagger| over all entries.
  double hermiticity_defect() const;
  bool is_hermitian(double tol = kHermitianTol) const { return hermiticity_defect() < tol; }

  ModeOperator& operator+=(const ModeOperator& rhs);
  ModeOperator& operator-=(const ModeOperator& rhs);
  ModeOperator& operator*=(cplx scale);

  friend ModeOperator operator+(ModeOperator lhs, const ModeOperator& rhs) { return lhs += rhs; }
  friend ModeOperator operator-(ModeOperator lhs, const ModeOperator& rhs) { return lhs -= rhs; }
  friend ModeOperator operator*(ModeOperator op, cplx scale) { return op *= scale; }
  friend ModeOperator operator*(cplx scale, ModeOperator op) { return op *= scale; }
  friend ModeOperator operator*(const ModeOperator& lhs, const ModeOperator& rhs);

 private:
  void require_same_space(const ModeOperator& rhs) const;

  CMatrix matrix_;
  Mode mode_;
};

/// Pure state on the truncated cavity (x) mirror space.
class BipartiteState {
 public:
  BipartiteState(CVector amplitudes, int dim_cavity, int dim_mirror);

  static BipartiteState product(const CVector& cavity, const CVector& mirror);
  static BipartiteState basis(int k, int j, int dim_cavity, int dim_mirror);
  /// Rows are photon numbers k, columns phonon numbers j.
  static BipartiteState from_grid(const CMatrix& grid);

  int dim_cavity() const noexcept { return dim_cavity_; }
  int dim_mirror() const noexcept { return dim_mirror_; }
  Eigen::Index size() const noexcept { return amplitudes_.size(); }

  const CVector& amplitudes() const noexcept { return amplitudes_; }
  cplx amplitude(int k, int j) const { return amplitudes_(k * dim_mirror_ + j); }

  /// dim_cavity x dim_mirror matrix view of the amplitudes (copy).
  CMatrix grid() const;

  double norm() const { return amplitudes_.norm(); }
  BipartiteState normalized() const;

  /// Number distribution of one mode.
  RVector marginal(Mode mode) const;
  /// Population of the highest retained basis state of one mode.
  double top_population(Mode mode) const;
  double mean_number(Mode mode) const;

 private:
  CVector amplitudes_;
  int dim_cavity_;
  int dim_mirror_;
};

class DensityMatrix {
 public:
  DensityMatrix(CMatrix matrix, Mode mode);

  const CMatrix& matrix() const noexcept { return matrix_; }
  Mode mode() const noexcept { return mode_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }

  cplx trace() const { return matrix_.trace(); }
  double purity() const;

  /// Hermitian, unit trace and positive semidefinite within the floors;
  /// throws contract_violation otherwise.
  void validate(double trace_tol = 1e-8, double eigen_floor = -1e-10) const;

 private:
  CMatrix matrix_;
  Mode mode_;
};

namespace fock {

ModeOperator annihilation(int dim, Mode mode = Mode::cavity);
ModeOperator creation(int dim, Mode mode = Mode::cavity);
ModeOperator number(int dim, Mode mode = Mode::cavity);
ModeOperator identity(int dim, Mode mode = Mode::cavity);

ModeOperator commutator(const ModeOperator& lhs, const ModeOperator& rhs);

struct TruncatedVector {
  CVector amplitudes;
  /// Probability mass the untruncated vector carries beyond the cutoff.
  double tail_mass = 0.0;
};

/// Poisson tail sum_{n >= dim} e^{-|a|^2} |a|^{2n} / n!.
double coherent_tail_mass(cplx amplitude, int dim);
/// Smallest dim whose coherent tail mass is below tail_tol.
int minimal_coherent_dim(cplx amplitude, double tail_tol);

/// Renormalized truncated coherent state. Throws TruncationError
/// (truncation_insufficient, suggesting the minimal adequate dim) when the
/// discarded tail reaches tail_tol.
TruncatedVector coherent_state(cplx amplitude, int dim, double tail_tol = kDefaultTailTol);

/// exp(f a^dagger - f^* a) on a single truncated mode, exact for the
/// truncated generator.
ModeOperator displacement_operator(cplx f, int dim, Mode mode = Mode::cavity);

/// Kronecker product cavity (x) mirror in cavity-major order.
ModeOperator tensor(const ModeOperator& cavity, const ModeOperator& mirror);

struct HermitianSpectrum {
  RVector values;
  CMatrix vectors;

  /// exp(-i H t) v
  CVector evolve(const CVector& v, double t) const;
  CMatrix propagator(double t) const;
};

/// Eigendecomposition of a Hermitian operator; purely real input takes the
/// real-symmetric path. Throws contract_violation for non-Hermitian input.
///
/// With gauge_stride > 0 the similarity P^dag H P, P = diag(i^{r / gauge_stride}),
/// is tried first; drives of the form i xi (a^dag X^dag - a X) with real X
/// become real under it (gauge_stride = dim_mirror for joint operators).
HermitianSpectrum diagonalize(const ModeOperator& h, int gauge_stride = 0);

/// exp(-i H t) psi0 by spectral decomposition (cavity gauge applied).
BipartiteState propagate_numeric(const ModeOperator& h, const BipartiteState& psi0, double t);

/// Partial trace keeping one mode.
DensityMatrix reduced_density(const BipartiteState& psi, Mode keep);

/// max |U^dagger U - I| over the leading `interior` rows/cols (all when < 0).
double unitarity_defect(const CMatrix& u, Eigen::Index interior = -1);

/// Throws TruncationError when either mode's top basis state holds at least
/// tail_tol of the population.
void check_truncation(const BipartiteState& psi, double tail_tol, std::string_view context);

/// Copy of psi zero-padded (or cut) to the given dimensions.
BipartiteState embed(const BipartiteState& psi, int dim_cavity, int dim_mirror);

struct InteriorEigenvalue {
  double value;
  double top_population;
  double mean_photons;
};

/// Eigenvalues of a joint Hamiltonian whose eigenvectors keep less than
/// max_top_population in the top basis state of each mode, ascending.
std::vector<InteriorEigenvalue> interior_spectrum(const ModeOperator& h, const TruncationSpec& tr,
                                                  double max_top_population);

/// Spectral data of the truncated quadrature a + a^dagger, used to apply
/// displacements exp(f a^dagger - f^* a) without forming dense exponentials.
///
/// With X = a + a^dagger = V diag(x) V^T and P = diag(e^{i n (arg f - pi/2)}),
/// D(f) = P V diag(e^{i |f| x}) V^T P^dagger.
class DisplacementGenerator {
 public:
  explicit DisplacementGenerator(int dim);

  int dim() const noexcept { return static_cast<int>(nodes_.size()); }
  const RVector& nodes() const noexcept { return nodes_; }

  CMatrix matrix(cplx f) const;
  CVector apply(cplx f, const CVector& v) const;
  /// Applies D(shifts[c]) to column c of `columns` in place.
  void apply_columns(std::span<const cplx> shifts, CMatrix& columns) const;

 private:
  RVector nodes_;
  RMatrix vectors_;
};

/// Shared, lazily built generator for one dimension (thread-safe cache).
std::shared_ptr<const DisplacementGenerator> displacement_generator(int dim);

}  // namespace fock
}  // namespace optomech
