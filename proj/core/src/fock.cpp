#include "optomech/fock.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "optomech/specfun.hpp"

namespace optomech {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::cavity: return "cavity";
    case Mode::mirror: return "mirror";
    case Mode::joint: return "joint";
  }
  return "unknown";
}

void TruncationSpec::validate() const {
  if (dim_cavity < 2 || dim_mirror < 2) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("truncation dims must be >= 2 (got cavity={}, mirror={})", dim_cavity,
                            dim_mirror));
  }
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("tail_tol must lie in (0, 1) (got {})", tail_tol));
  }
}

int TruncationSpec::dim(Mode mode) const {
  switch (mode) {
    case Mode::cavity: return dim_cavity;
    case Mode::mirror: return dim_mirror;
    case Mode::joint: return joint_dim();
  }
  return 0;
}

// --- ModeOperator ---------------------------------------------------------

ModeOperator::ModeOperator(CMatrix matrix, Mode mode) : matrix_(std::move(matrix)), mode_(mode) {
  if (matrix_.rows() != matrix_.cols()) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("operator matrix must be square (got {}x{})", matrix_.rows(),
                            matrix_.cols()));
  }
}

double ModeOperator::hermiticity_defect() const {
  if (matrix_.size() == 0) return 0.0;
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

void ModeOperator::require_same_space(const ModeOperator& rhs) const {
  if (mode_ != rhs.mode_ || dim() != rhs.dim()) {
    throw Error(ErrorKind::wiring,
                fmt::format("cannot combine {} operator (dim {}) with {} operator (dim {})",
                            to_string(mode_), dim(), to_string(rhs.mode_), rhs.dim()));
  }
}

ModeOperator& ModeOperator::operator+=(const ModeOperator& rhs) {
  require_same_space(rhs);
  matrix_ += rhs.matrix_;
  return *this;
}

ModeOperator& ModeOperator::operator-=(const ModeOperator& rhs) {
  require_same_space(rhs);
  matrix_ -= rhs.matrix_;
  return *this;
}

ModeOperator& ModeOperator::operator*=(cplx scale) {
  matrix_ *= scale;
  return *this;
}

ModeOperator operator*(const ModeOperator& lhs, const ModeOperator& rhs) {
  lhs.require_same_space(rhs);
  return {lhs.matrix_ * rhs.matrix_, lhs.mode_};
}

// --- BipartiteState -------------------------------------------------------

BipartiteState::BipartiteState(CVector amplitudes, int dim_cavity, int dim_mirror)
    : amplitudes_(std::move(amplitudes)), dim_cavity_(dim_cavity), dim_mirror_(dim_mirror) {
  if (dim_cavity < 1 || dim_mirror < 1 ||
      amplitudes_.size() != static_cast<Eigen::Index>(dim_cavity) * dim_mirror) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("state of length {} does not match dims {}x{}", amplitudes_.size(),
                            dim_cavity, dim_mirror));
  }
}

BipartiteState BipartiteState::product(const CVector& cavity, const CVector& mirror) {
  const auto nc = static_cast<int>(cavity.size());
  const auto nm = static_cast<int>(mirror.size());
  CVector amps(static_cast<Eigen::Index>(nc) * nm);
  for (int k = 0; k < nc; ++k) amps.segment(static_cast<Eigen::Index>(k) * nm, nm) = cavity(k) * mirror;
  return {std::move(amps), nc, nm};
}

BipartiteState BipartiteState::basis(int k, int j, int dim_cavity, int dim_mirror) {
  if (k < 0 || k >= dim_cavity || j < 0 || j >= dim_mirror) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("basis state |{},{}> outside {}x{}", k, j, dim_cavity, dim_mirror));
  }
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(dim_cavity) * dim_mirror);
  amps(static_cast<Eigen::Index>(k) * dim_mirror + j) = 1.0;
  return {std::move(amps), dim_cavity, dim_mirror};
}

BipartiteState BipartiteState::from_grid(const CMatrix& grid) {
  const auto nc = static_cast<int>(grid.rows());
  const auto nm = static_cast<int>(grid.cols());
  CVector amps(grid.size());
  for (int k = 0; k < nc; ++k)
    for (int j = 0; j < nm; ++j) amps(static_cast<Eigen::Index>(k) * nm + j) = grid(k, j);
  return {std::move(amps), nc, nm};
}

CMatrix BipartiteState::grid() const {
  using RowMajor = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(amplitudes_.data(), dim_cavity_, dim_mirror_);
}

BipartiteState BipartiteState::normalized() const {
  const double n = norm();
  if (n == 0.0) throw Error(ErrorKind::contract_violation, "cannot normalize the zero state");
  return {amplitudes_ / n, dim_cavity_, dim_mirror_};
}

RVector BipartiteState::marginal(Mode mode) const {
  const CMatrix g = grid();
  const RMatrix pop = g.cwiseAbs2();
  switch (mode) {
    case Mode::cavity: return pop.rowwise().sum();
    case Mode::mirror: return pop.colwise().sum().transpose();
    case Mode::joint: break;
  }
  throw Error(ErrorKind::wiring, "marginal requires a single mode");
}

double BipartiteState::top_population(Mode mode) const {
  const RVector m = marginal(mode);
  return m(m.size() - 1);
}

double BipartiteState::mean_number(Mode mode) const {
  const RVector m = marginal(mode);
  double acc = 0.0;
  for (Eigen::Index n = 0; n < m.size(); ++n) acc += static_cast<double>(n) * m(n);
  return acc / m.sum();
}

// --- DensityMatrix --------------------------------------------------------

DensityMatrix::DensityMatrix(CMatrix matrix, Mode mode) : matrix_(std::move(matrix)), mode_(mode) {
  if (matrix_.rows() != matrix_.cols()) {
    throw Error(ErrorKind::invalid_dimension, "density matrix must be square");
  }
}

double DensityMatrix::purity() const {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return matrix_.cwiseAbs2().sum();
}

void DensityMatrix::validate(double trace_tol, double eigen_floor) const {
  const double defect = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    throw Error(ErrorKind::contract_violation,
                fmt::format("density matrix not Hermitian (defect {:.3e})", defect));
  }
  const double tr = trace().real();
  if (std::abs(tr - 1.0) > trace_tol) {
    throw Error(ErrorKind::contract_violation,
                fmt::format("density matrix trace {:.12f} differs from 1", tr));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < eigen_floor) {
    throw Error(ErrorKind::contract_violation,
                fmt::format("density matrix has eigenvalue {:.3e} below floor",
                            es.eigenvalues().minCoeff()));
  }
}

namespace fock {

namespace {

void require_dim(int dim) {
  if (dim < 2) {
    throw Error(ErrorKind::invalid_dimension, fmt::format("mode dimension must be >= 2 (got {})", dim));
  }
}

}  // namespace

ModeOperator annihilation(int dim, Mode mode) {
  require_dim(dim);
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {std::move(a), mode};
}

ModeOperator creation(int dim, Mode mode) { return annihilation(dim, mode).adjoint(); }

ModeOperator number(int dim, Mode mode) {
  require_dim(dim);
  CMatrix n = CMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) n(i, i) = static_cast<double>(i);
  return {std::move(n), mode};
}

ModeOperator identity(int dim, Mode mode) {
  if (dim < 1) throw Error(ErrorKind::invalid_dimension, "identity dimension must be positive");
  return {CMatrix::Identity(dim, dim), mode};
}

ModeOperator commutator(const ModeOperator& lhs, const ModeOperator& rhs) {
  return lhs * rhs - rhs * lhs;
}

double coherent_tail_mass(cplx amplitude, int dim) {
  const double s = std::norm(amplitude);
  if (s == 0.0) return 0.0;
  // Sum the Poisson pmf forward from n = dim in log space.
  double log_term = -s + dim * std::log(s) - specfun::log_factorial(dim);
  double term = std::exp(log_term);
  double sum = 0.0;
  for (int n = dim; n < dim + 100000; ++n) {
    sum += term;
    term *= s / (n + 1);
    if (n > s && term < 1e-300 + 1e-18 * sum) break;
    if (term == 0.0 && n > s) break;
  }
  return sum;
}

int minimal_coherent_dim(cplx amplitude, double tail_tol) {
  const double s = std::norm(amplitude);
  int dim = std::max(2, static_cast<int>(s));
  while (coherent_tail_mass(amplitude, dim) >= tail_tol) ++dim;
  // The tail is monotone in dim, so walk back down for tiny amplitudes.
  while (dim > 2 && coherent_tail_mass(amplitude, dim - 1) < tail_tol) --dim;
  return dim;
}

TruncatedVector coherent_state(cplx amplitude, int dim, double tail_tol) {
  require_dim(dim);
  TruncatedVector out;
  out.tail_mass = coherent_tail_mass(amplitude, dim);
  if (out.tail_mass >= tail_tol) {
    const int need = minimal_coherent_dim(amplitude, tail_tol);
    throw TruncationError(
        ErrorKind::truncation_insufficient,
        fmt::format("coherent state |{:.4g}{:+.4g}i> loses {:.3e} beyond dim {}; need dim >= {}",
                    amplitude.real(), amplitude.imag(), out.tail_mass, dim, need),
        need);
  }
  out.amplitudes = specfun::coherent_amplitudes(amplitude, dim);
  out.amplitudes /= out.amplitudes.norm();
  return out;
}

ModeOperator displacement_operator(cplx f, int dim, Mode mode) {
  require_dim(dim);
  return {displacement_generator(dim)->matrix(f), mode};
}

ModeOperator tensor(const ModeOperator& cavity, const ModeOperator& mirror) {
  if (cavity.mode() != Mode::cavity || mirror.mode() != Mode::mirror) {
    throw Error(ErrorKind::wiring,
                fmt::format("tensor expects (cavity, mirror) operators, got ({}, {})",
                            to_string(cavity.mode()), to_string(mirror.mode())));
  }
  const auto nc = cavity.dim();
  const auto nm = mirror.dim();
  CMatrix out(nc * nm, nc * nm);
  for (Eigen::Index k = 0; k < nc; ++k)
    for (Eigen::Index kp = 0; kp < nc; ++kp)
      out.block(k * nm, kp * nm, nm, nm) = cavity(k, kp) * mirror.matrix();
  return {std::move(out), Mode::joint};
}

CVector HermitianSpectrum::evolve(const CVector& v, double t) const {
  CVector coeff = vectors.adjoint() * v;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) *= std::polar(1.0, -values(i) * t);
  return vectors * coeff;
}

CMatrix HermitianSpectrum::propagator(double t) const {
  CVector phases(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) phases(i) = std::polar(1.0, -values(i) * t);
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

HermitianSpectrum diagonalize(const ModeOperator& h, int gauge_stride) {
  const CMatrix& m = h.matrix();
  const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  const double defect = h.hermiticity_defect();
  if (defect > 1e-10 * scale) {
    throw Error(ErrorKind::contract_violation,
                fmt::format("generator is not Hermitian (defect {:.3e})", defect));
  }
  HermitianSpectrum out;
  const auto real_path = [&](const RMatrix& r) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors().cast<cplx>();
  };
  if (m.size() == 0 || m.imag().cwiseAbs().maxCoeff() == 0.0) {
    real_path(m.real());
    return out;
  }
  if (gauge_stride > 0) {
    static constexpr cplx kPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const auto n = m.rows();
    CVector p(n);
    for (Eigen::Index r = 0; r < n; ++r) p(r) = kPow[(r / gauge_stride) % 4];
    const CMatrix g = p.conjugate().asDiagonal() * m * p.asDiagonal();
    if (g.imag().cwiseAbs().maxCoeff() <= 1e-15 * scale) {
      real_path(g.real());
      out.vectors = p.asDiagonal() * out.vectors;
      return out;
    }
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

BipartiteState propagate_numeric(const ModeOperator& h, const BipartiteState& psi0, double t) {
  if (h.dim() != psi0.size()) {
    throw Error(ErrorKind::invalid_dimension,
                fmt::format("Hamiltonian dim {} does not match state length {}", h.dim(), psi0.size()));
  }
  if (t == 0.0) return psi0;
  const HermitianSpectrum spec = diagonalize(h, psi0.dim_mirror());
  return {spec.evolve(psi0.amplitudes(), t), psi0.dim_cavity(), psi0.dim_mirror()};
}

DensityMatrix reduced_density(const BipartiteState& psi, Mode keep) {
  const CMatrix g = psi.grid();
  switch (keep) {
    case Mode::cavity: return {g * g.adjoint(), Mode::cavity};
    case Mode::mirror: return {g.transpose() * g.conjugate(), Mode::mirror};
    case Mode::joint: break;
  }
  throw Error(ErrorKind::wiring, "reduced_density keeps exactly one mode");
}

double unitarity_defect(const CMatrix& u, Eigen::Index interior) {
  const Eigen::Index n = interior < 0 ? u.rows() : std::min(interior, u.rows());
  const CMatrix g = u.adjoint() * u;
  return (g.topLeftCorner(n, n) - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

void check_truncation(const BipartiteState& psi, double tail_tol, std::string_view context) {
  for (Mode mode : {Mode::cavity, Mode::mirror}) {
    const double top = psi.top_population(mode);
    if (top >= tail_tol) {
      const int dim = mode == Mode::cavity ? psi.dim_cavity() : psi.dim_mirror();
      const int suggest = dim + std::max(8, dim / 4);
      throw TruncationError(
          ErrorKind::truncation_insufficient,
          fmt::format("{}: {} top basis state holds {:.3e} (tail_tol {:.1e}); increase dim_{} "
                      "beyond {} (try {})",
                      context, to_string(mode), top, tail_tol, to_string(mode), dim, suggest),
          suggest);
    }
  }
}

BipartiteState embed(const BipartiteState& psi, int dim_cavity, int dim_mirror) {
  CMatrix out = CMatrix::Zero(dim_cavity, dim_mirror);
  const CMatrix g = psi.grid();
  const auto rows = std::min<Eigen::Index>(dim_cavity, g.rows());
  const auto cols = std::min<Eigen::Index>(dim_mirror, g.cols());
  out.topLeftCorner(rows, cols) = g.topLeftCorner(rows, cols);
  return BipartiteState::from_grid(out);
}

std::vector<InteriorEigenvalue> interior_spectrum(const ModeOperator& h, const TruncationSpec& tr,
                                                  double max_top_population) {
  tr.validate();
  if (h.dim() != tr.joint_dim()) {
    throw Error(ErrorKind::invalid_dimension, "Hamiltonian does not match the truncation");
  }
  const HermitianSpectrum spec = diagonalize(h, tr.dim_mirror);
  std::vector<InteriorEigenvalue> out;
  for (Eigen::Index i = 0; i < spec.values.size(); ++i) {
    const BipartiteState v(spec.vectors.col(i), tr.dim_cavity, tr.dim_mirror);
    const RVector cav = v.marginal(Mode::cavity);
    const RVector mir = v.marginal(Mode::mirror);
    const double top = std::max(cav(cav.size() - 1), mir(mir.size() - 1));
    if (top >= max_top_population) continue;
    double mean = 0.0;
    for (Eigen::Index k = 0; k < cav.size(); ++k) mean += static_cast<double>(k) * cav(k);
    out.push_back({spec.values(i), top, mean});
  }
  return out;
}

// --- DisplacementGenerator ------------------------------------------------

DisplacementGenerator::DisplacementGenerator(int dim) {
  require_dim(dim);
  RVector diag = RVector::Zero(dim);
  RVector sub(dim - 1);
  for (int n = 1; n < dim; ++n) sub(n - 1) = std::sqrt(static_cast<double>(n));
  Eigen::SelfAdjointEigenSolver<RMatrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  nodes_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

namespace {

// e^{i n (arg f - pi/2)} for n < dim.
CVector frame_phases(cplx f, int dim) {
  const double phi = (f == cplx{}) ? 0.0 : std::arg(f) - std::numbers::pi / 2;
  CVector p(dim);
  for (int n = 0; n < dim; ++n) p(n) = std::polar(1.0, n * phi);
  return p;
}

}  // namespace

CMatrix DisplacementGenerator::matrix(cplx f) const {
  const int n = dim();
  if (f == cplx{}) return CMatrix::Identity(n, n);
  const CVector p = frame_phases(f, n);
  const double r = std::abs(f);
  CMatrix left = vectors_.cast<cplx>();
  for (int m = 0; m < n; ++m) left.col(m) *= std::polar(1.0, r * nodes_(m));
  CMatrix out = left * vectors_.transpose().cast<cplx>();
  return p.asDiagonal() * out * p.conjugate().asDiagonal();
}

CVector DisplacementGenerator::apply(cplx f, const CVector& v) const {
  CMatrix col = v;
  const cplx shift[1] = {f};
  apply_columns(shift, col);
  return col.col(0);
}

void DisplacementGenerator::apply_columns(std::span<const cplx> shifts, CMatrix& columns) const {
  const int n = dim();
  if (columns.rows() != n || static_cast<std::size_t>(columns.cols()) != shifts.size()) {
    throw Error(ErrorKind::invalid_dimension, "apply_columns: shape mismatch");
  }
  const auto cols = columns.cols();
  for (Eigen::Index c = 0; c < cols; ++c) {
    columns.col(c) = frame_phases(shifts[c], n).conjugate().asDiagonal() * columns.col(c);
  }
  // Real GEMMs on the real and imaginary parts.
  RMatrix wr = vectors_.transpose() * columns.real();
  RMatrix wi = vectors_.transpose() * columns.imag();
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double r = std::abs(shifts[c]);
    for (int m = 0; m < n; ++m) {
      const cplx z = cplx(wr(m, c), wi(m, c)) * std::polar(1.0, r * nodes_(m));
      wr(m, c) = z.real();
      wi(m, c) = z.imag();
    }
  }
  const RMatrix outr = vectors_ * wr;
  const RMatrix outi = vectors_ * wi;
  for (Eigen::Index c = 0; c < cols; ++c) {
    const CVector p = frame_phases(shifts[c], n);
    for (int m = 0; m < n; ++m) columns(m, c) = p(m) * cplx(outr(m, c), outi(m, c));
  }
}

std::shared_ptr<const DisplacementGenerator> displacement_generator(int dim) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const DisplacementGenerator>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(dim); it != cache.end()) return it->second;
  }
  auto gen = std::make_shared<const DisplacementGenerator>(dim);
  std::lock_guard lock(mutex);
  return cache.try_emplace(dim, std::move(gen)).first->second;
}

}  // namespace fock
}  // namespace optomech
