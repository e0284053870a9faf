#pragma once

// Hamiltonians of the driven Kerr optomechanical cavity and its polaron
// picture. All frequencies are in units of the mirror frequency.

#include <array>
#include <optional>

#include "optomech/error.hpp"
#include "optomech/fock.hpp"

namespace optomech {

struct SystemParams {
  double detuning = 0.0;  // Delta
  double omega_m = 1.0;
  double g0 = 0.0;
  double chi = 0.0;
  double xi = 0.0;

  double eta() const noexcept { return g0 / omega_m; }
  /// chi equals g0^2 / omega_m within 1e-12.
  bool kerr_matched() const noexcept;
  /// Copy with chi set to the matched value g0^2 / omega_m.
  SystemParams with_matched_kerr() const;

  /// Throws domain for omega_m <= 0, negative g0/chi/xi or non-finite values.
  void validate() const;

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

namespace hamiltonians {

/// Delta a^dag a + omega_m b^dag b (diagonal).
ModeOperator free_hamiltonian(const SystemParams& p, const TruncationSpec& tr);

/// Delta a^dag a + omega_m b^dag b - g0 a^dag a (b^dag + b) + chi (a^dag a)^2
/// + i xi (a^dag - a).
ModeOperator full_hamiltonian(const SystemParams& p, const TruncationSpec& tr);

/// exp[eta a^dag a (b^dag - b)] = sum_k |k><k| (x) D_b(eta k). A warning is
/// recorded when the top photon block pushes more than tail_tol of the
/// displaced mirror vacuum past the cutoff.
ModeOperator polaron_unitary(double eta, const TruncationSpec& tr, Diagnostics* diag = nullptr);

struct AssemblyOptions {
  /// Polaron parameter; defaults to p.eta().
  std::optional<double> eta;
  /// Test hook: reverses the sign of omega_m eta a^dag a (b^dag + b).
  bool flip_coupling_sign = false;
};

/// Polaron-frame Hamiltonian for arbitrary eta and chi:
///   Delta N + omega_m [b^dag b + eta^2 N^2 + eta N (b^dag + b)]
///   - g0 N (b^dag + b + 2 eta N) + chi N^2 + i xi [a^dag D_b^dag(eta) - a D_b(eta)]
/// with N = a^dag a. Drive elements come from the closed-form displaced
/// Fock matrix, so this equals U^dag H U only away from the mirror cutoff.
ModeOperator displaced_hamiltonian(const SystemParams& p, const TruncationSpec& tr,
                                   const AssemblyOptions& opts = {});

/// i xi [a^dag D_b^dag(eta) - a D_b(eta)]
ModeOperator ion_laser_drive(const SystemParams& p, const TruncationSpec& tr);

/// Delta a^dag a + omega_m b^dag b + ion_laser_drive. Warns when chi is not
/// matched to g0^2 / omega_m (the quartic terms are then silently dropped).
ModeOperator ion_laser_hamiltonian(const SystemParams& p, const TruncationSpec& tr,
                                   Diagnostics* diag = nullptr);

/// Time-independent interaction-picture drive at the sideband Delta = n omega_m.
/// For n >= 0:
///   i xi eta^n e^{-eta^2/2} [F_n(N_b) b^n a^dag - h.c.],
///   F_n(N) = N! / (N + n)! L_N^{(n)}(eta^2);
/// for n = -m < 0:
///   i xi (-eta)^m e^{-eta^2/2} [a^dag b^dag^m F_m(N_b) - h.c.].
/// |n| >= dim_mirror throws degenerate_truncation.
ModeOperator rwa_sideband_hamiltonian(int n, const SystemParams& p, const TruncationSpec& tr);

/// e^{-eta^2/2} L_j(eta^2) for j < count.
RVector resonant_weights(double eta, int count);

/// i xi e^{-eta^2/2} L_{N_b}(eta^2) (a^dag - a)
ModeOperator resonant_interaction(const SystemParams& p, const TruncationSpec& tr);

/// Delta a^dag a + omega_m b^dag b + xi eta (a^dag + a)(b + b^dag), no constant
/// offset. Throws resonant_divergence when |Delta| < 1e-12.
ModeOperator coupled_oscillator_hamiltonian(const SystemParams& p, const TruncationSpec& tr);

/// Entries <k',l|op|k,j> whose free energy difference
/// Delta (k' - k) + omega_m (l - j) has magnitude below tol; all others zeroed.
ModeOperator stationary_projection(const ModeOperator& op, double detuning, double omega_m,
                                   const TruncationSpec& tr, double tol = 1e-9);

/// Normal-mode frequencies of the coupled pair, from the classical quadratic
/// form: Omega^2 = (D^2 + w^2)/2 -+ sqrt(((D^2 - w^2)/2)^2 + 4 g^2 D w),
/// g = xi eta. Ascending; throws domain when the pair is unstable.
std::array<double, 2> coupled_normal_modes(const SystemParams& p);

}  // namespace hamiltonians
}  // namespace optomech
