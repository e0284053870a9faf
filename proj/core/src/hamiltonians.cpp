#include "optomech/hamiltonians.hpp"

#include <cmath>
#include <fmt/format.h>

#include "optomech/specfun.hpp"

namespace optomech {

bool SystemParams::kerr_matched() const noexcept {
  return std::abs(chi - g0 * g0 / omega_m) < 1e-12;
}

SystemParams SystemParams::with_matched_kerr() const {
  SystemParams out = *this;
  out.chi = g0 * g0 / omega_m;
  return out;
}

void SystemParams::validate() const {
  for (double v : {detuning, omega_m, g0, chi, xi}) {
    if (!std::isfinite(v)) throw Error(ErrorKind::domain, "system parameters must be finite");
  }
  if (!(omega_m > 0.0)) {
    throw Error(ErrorKind::domain, fmt::format("omega_m must be > 0 (got {})", omega_m));
  }
  if (g0 < 0.0 || chi < 0.0 || xi < 0.0) {
    throw Error(ErrorKind::domain,
                fmt::format("g0, chi and xi must be >= 0 (got g0={}, chi={}, xi={})", g0, chi, xi));
  }
}

namespace hamiltonians {

namespace {

const cplx I{0.0, 1.0};

double sq(int n) { return std::sqrt(static_cast<double>(n)); }

void prepare(const SystemParams& p, const TruncationSpec& tr) {
  p.validate();
  tr.validate();
}

ModeOperator finish(CMatrix m, const char* what) {
  ModeOperator h(std::move(m), Mode::joint);
  const double defect = h.hermiticity_defect();
  if (defect >= kHermitianTol) {
    throw Error(ErrorKind::internal_assembly,
                fmt::format("{} assembled with Hermiticity defect {:.3e}", what, defect));
  }
  return h;
}

// Adds the cavity-ladder drive i xi [a^dag (x) X^dag - a (x) X], X = D_b(eta).
void add_displaced_drive(CMatrix& h, double xi, double eta, const TruncationSpec& tr) {
  if (xi == 0.0) return;
  const int nc = tr.dim_cavity;
  const int nm = tr.dim_mirror;
  const CMatrix x = specfun::displaced_fock_matrix(eta, nm, nm);
  const CMatrix xh = x.adjoint();
  for (int k = 0; k + 1 < nc; ++k) {
    const cplx c = I * xi * sq(k + 1);
    h.block((k + 1) * nm, k * nm, nm, nm) += c * xh;
    h.block(k * nm, (k + 1) * nm, nm, nm) -= c * x;
  }
}

}  // namespace

ModeOperator free_hamiltonian(const SystemParams& p, const TruncationSpec& tr) {
  prepare(p, tr);
  CMatrix h = CMatrix::Zero(tr.joint_dim(), tr.joint_dim());
  for (int k = 0; k < tr.dim_cavity; ++k)
    for (int j = 0; j < tr.dim_mirror; ++j) h(tr.index(k, j), tr.index(k, j)) = p.detuning * k + p.omega_m * j;
  return {std::move(h), Mode::joint};
}

ModeOperator full_hamiltonian(const SystemParams& p, const TruncationSpec& tr) {
  prepare(p, tr);
  const int nc = tr.dim_cavity;
  const int nm = tr.dim_mirror;
  CMatrix h = CMatrix::Zero(tr.joint_dim(), tr.joint_dim());
  for (int k = 0; k < nc; ++k) {
    for (int j = 0; j < nm; ++j) {
      const int r = tr.index(k, j);
      h(r, r) = p.detuning * k + p.omega_m * j + p.chi * k * k;
      if (j + 1 < nm) {
        const double c = -p.g0 * k * sq(j + 1);
        h(tr.index(k, j + 1), r) = c;
        h(r, tr.index(k, j + 1)) = c;
      }
      if (k + 1 < nc) {
        const cplx c = I * p.xi * sq(k + 1);
        h(tr.index(k + 1, j), r) = c;
        h(r, tr.index(k + 1, j)) = -c;
      }
    }
  }
  return finish(std::move(h), "full Hamiltonian");
}

ModeOperator polaron_unitary(double eta, const TruncationSpec& tr, Diagnostics* diag) {
  tr.validate();
  const int nc = tr.dim_cavity;
  const int nm = tr.dim_mirror;
  CMatrix u = CMatrix::Zero(tr.joint_dim(), tr.joint_dim());
  const auto gen = fock::displacement_generator(nm);
  for (int k = 0; k < nc; ++k) u.block(k * nm, k * nm, nm, nm) = gen->matrix(eta * k);
  if (diag != nullptr && eta != 0.0) {
    const double leak = fock::coherent_tail_mass(eta * (nc - 1), nm);
    if (leak >= tr.tail_tol) {
      diag->warn(fmt::format(
          "polaron block k={} displaces the mirror by {:.3g}; {:.3e} of the displaced vacuum lies "
          "beyond dim_mirror={} (need {})",
          nc - 1, eta * (nc - 1), leak, nm, fock::minimal_coherent_dim(eta * (nc - 1), tr.tail_tol)));
    }
  }
  return {std::move(u), Mode::joint};
}

ModeOperator displaced_hamiltonian(const SystemParams& p, const TruncationSpec& tr,
                                   const AssemblyOptions& opts) {
  prepare(p, tr);
  const double eta = opts.eta.value_or(p.eta());
  const double w = p.omega_m;
  const double sign = opts.flip_coupling_sign ? -1.0 : 1.0;
  const int nc = tr.dim_cavity;
  const int nm = tr.dim_mirror;
  CMatrix h = CMatrix::Zero(tr.joint_dim(), tr.joint_dim());
  for (int k = 0; k < nc; ++k) {
    const double n2 = static_cast<double>(k) * k;
    for (int j = 0; j < nm; ++j) {
      const int r = tr.index(k, j);
      h(r, r) = p.detuning * k + w * (j + eta * eta * n2) - 2.0 * p.g0 * eta * n2 + p.chi * n2;
      if (j + 1 < nm) {
        const double c = (sign * w * eta - p.g0) * k * sq(j + 1);
        h(tr.index(k, j + 1), r) = c;
        h(r, tr.index(k, j + 1)) = c;
      }
    }
  }
  add_displaced_drive(h, p.xi, eta, tr);
  return finish(std::move(h), "displaced Hamiltonian");
}

ModeOperator ion_laser_drive(const SystemParams& p, const TruncationSpec& tr) {
  prepare(p, tr);
  CMatrix h = CMatrix::Zero(tr.joint_dim(), tr.joint_dim());
  add_displaced_drive(h, p.xi, p.eta(), tr);
  return finish(std::move(h), "ion-laser drive");
}

ModeOperator ion_laser_hamiltonian(const SystemParams& p, const TruncationSpec& tr, Diagnostics* diag) {
  prepare(p, tr);
  if (diag != nullptr && !p.kerr_matched()) {
    diag->warn(fmt::format("chi={} differs from g0^2/omega_m={}; the ion-laser form drops the "
                           "residual Kerr term",
                           p.chi, p.g0 * p.g0 / p.omega_m));
  }
  CMatrix h = free_hamiltonian(p, tr).matrix();
  add_displaced_drive(h, p.xi, p.eta(), tr);
  return finish(std::move(h), "ion-laser Hamiltonian");
}

ModeOperator rwa_sideband_hamiltonian(int n, const SystemParams& p, const TruncationSpec& tr) {
  prepare(p, tr);
  const int nc = tr.dim_cavity;
  const int nm = tr.dim_mirror;
  const int m = std::abs(n);
  if (m >= nm) {
    throw Error(ErrorKind::degenerate_truncation,
                fmt::format("sideband order {} needs dim_mirror > {} (got {})", n, m, nm));
  }
  const double eta = p.eta();
  const double z = eta * eta;
  // <j|D(-eta)|j+m> (red) and <j+m|D(-eta)|j> (blue) both reduce to
  // s^m eta^m e^{-z/2} sqrt(j!/(j+m)!) L_j^{(m)}(z), s = +1 red, -1 blue.
  const double s = (n < 0 && m % 2 == 1) ? -1.0 : 1.0;
  CMatrix h = CMatrix::Zero(tr.joint_dim(), tr.joint_dim());
  if (p.xi == 0.0 || (eta == 0.0 && m > 0)) return {std::move(h), Mode::joint};
  for (int j = 0; j + m < nm; ++j) {
    double c;
    if (eta == 0.0) {
      c = 1.0;
    } else {
      const specfun::ScaledValue lag = specfun::laguerre_scaled(j, m, z);
      c = s * lag.mantissa *
          std::exp(lag.log_scale + m * std::log(eta) - 0.5 * z +
                   0.5 * (specfun::log_factorial(j) - specfun::log_factorial(j + m)));
    }
    // Photon raised together with the mirror moving j+m -> j (red) or j -> j+m (blue).
    const int from = n >= 0 ? j + m : j;
    const int to = n >= 0 ? j : j + m;
    for (int k = 0; k + 1 < nc; ++k) {
      const cplx e = I * p.xi * sq(k + 1) * c;
      h(tr.index(k + 1, to), tr.index(k, from)) += e;
      h(tr.index(k, from), tr.index(k + 1, to)) += std::conj(e);
    }
  }
  return finish(std::move(h), "sideband Hamiltonian");
}

RVector resonant_weights(double eta, int count) {
  RVector w(std::max(count, 0));
  const double z = eta * eta;
  for (int j = 0; j < w.size(); ++j) {
    const specfun::ScaledValue lag = specfun::laguerre_scaled(j, 0, z);
    w(j) = lag.mantissa * std::exp(lag.log_scale - 0.5 * z);
  }
  return w;
}

ModeOperator resonant_interaction(const SystemParams& p, const TruncationSpec& tr) {
  prepare(p, tr);
  const int nc = tr.dim_cavity;
  const int nm = tr.dim_mirror;
  const RVector w = resonant_weights(p.eta(), nm);
  CMatrix h = CMatrix::Zero(tr.joint_dim(), tr.joint_dim());
  for (int k = 0; k + 1 < nc; ++k) {
    for (int j = 0; j < nm; ++j) {
      const cplx e = I * p.xi * sq(k + 1) * w(j);
      h(tr.index(k + 1, j), tr.index(k, j)) = e;
      h(tr.index(k, j), tr.index(k + 1, j)) = std::conj(e);
    }
  }
  return finish(std::move(h), "resonant interaction");
}

ModeOperator coupled_oscillator_hamiltonian(const SystemParams& p, const TruncationSpec& tr) {
  prepare(p, tr);
  if (std::abs(p.detuning) < 1e-12) {
    throw Error(ErrorKind::resonant_divergence,
                "coupled-oscillator form needs Delta != 0 (the cavity displacement i xi/Delta "
                "diverges); use the sideband Hamiltonian on resonance");
  }
  const int nc = tr.dim_cavity;
  const int nm = tr.dim_mirror;
  const double g = p.xi * p.eta();
  CMatrix h = free_hamiltonian(p, tr).matrix();
  for (int k = 0; k + 1 < nc; ++k) {
    for (int j = 0; j + 1 < nm; ++j) {
      const double ca = sq(k + 1);
      const double cb = sq(j + 1);
      // (a + a^dag)(b + b^dag) links (k, j) with (k+1, j+1) and (k+1, j) with (k, j+1).
      h(tr.index(k + 1, j + 1), tr.index(k, j)) += g * ca * cb;
      h(tr.index(k, j), tr.index(k + 1, j + 1)) += g * ca * cb;
      h(tr.index(k + 1, j), tr.index(k, j + 1)) += g * ca * cb;
      h(tr.index(k, j + 1), tr.index(k + 1, j)) += g * ca * cb;
    }
  }
  return finish(std::move(h), "coupled-oscillator Hamiltonian");
}

ModeOperator stationary_projection(const ModeOperator& op, double detuning, double omega_m,
                                   const TruncationSpec& tr, double tol) {
  tr.validate();
  if (op.dim() != tr.joint_dim()) {
    throw Error(ErrorKind::invalid_dimension, "stationary_projection: operator does not match truncation");
  }
  const int nm = tr.dim_mirror;
  CMatrix out = op.matrix();
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const int kc = static_cast<int>(c) / nm;
    const int jc = static_cast<int>(c) % nm;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const int kr = static_cast<int>(r) / nm;
      const int jr = static_cast<int>(r) % nm;
      if (std::abs(detuning * (kr - kc) + omega_m * (jr - jc)) >= tol) out(r, c) = 0.0;
    }
  }
  return {std::move(out), op.mode()};
}

std::array<double, 2> coupled_normal_modes(const SystemParams& p) {
  const double d = p.detuning;
  const double w = p.omega_m;
  const double g = p.xi * p.eta();
  const double mean = 0.5 * (d * d + w * w);
  const double half = 0.5 * (d * d - w * w);
  const double root = std::sqrt(half * half + 4.0 * g * g * d * w);
  const double lo = mean - root;
  if (lo <= 0.0) {
    throw Error(ErrorKind::domain, fmt::format("coupled pair unstable (Omega_-^2 = {:.3e})", lo));
  }
  return {std::sqrt(lo), std::sqrt(mean + root)};
}

}  // namespace hamiltonians
}  // namespace optomech
