#pragma once

// Time evolution: the closed-form coherent-state solution of the resonant
// (n = 0) sideband dynamics, numeric propagation over the Hamiltonian
// builders, and conversions between the lab, polaron and rotating frames.
//
// Frames used throughout:
//   lab       frame of the full driven Hamiltonian (rotating at the drive frequency)
//   polaron   U_p^dag psi_lab with U_p = exp[eta a^dag a (b^dag - b)]
//   rotating  U_p e^{i H0 t} U_p^dag psi_lab, H0 = Delta a^dag a + omega_m b^dag b

#include <string_view>
#include <vector>

#include "optomech/fock.hpp"
#include "optomech/hamiltonians.hpp"

namespace optomech {

/// Inclusive upper limits of the k (photon) and j (phonon) sums of the
/// closed-form state. Values < 0 select the defaults
///   k_max = |alpha|^2 + 8|alpha| + 10,
///   j_max = max_{k <= k_max} |Gamma - eta k|^2 + 8|Gamma - eta k| + 10.
struct SumCutoffs {
  int k_max = -1;
  int j_max = -1;

  friend bool operator==(const SumCutoffs&, const SumCutoffs&) = default;
};

struct AnalyticEvolutionSpec {
  cplx alpha{0.0, 0.0};  // cavity coherent amplitude
  cplx gamma{0.0, 0.0};  // mirror coherent amplitude
  double scaled_time = 0.0;  // xi t
  SystemParams params;
  SumCutoffs cutoffs;
};

struct AnalyticDiagnostics {
  SumCutoffs cutoffs;           // resolved values
  double cutoff_deficit = 0.0;  // Poisson mass outside the k, j sums
  double cavity_loss = 0.0;     // mass at photon numbers >= dim_cavity
  double mirror_loss = 0.0;     // mass at phonon numbers >= dim_mirror
  double norm_deficit = 0.0;    // 1 - |psi|^2 before normalization
};

struct AnalyticState {
  BipartiteState state;
  AnalyticDiagnostics diagnostics;
};

namespace dynamics {

inline constexpr double kMaxNormDeficit = 1e-6;

/// f_j = (xi t) e^{-eta^2/2} L_j(eta^2)
double effective_amplitude(int j, double scaled_time, double eta);

SumCutoffs resolve_cutoffs(const AnalyticEvolutionSpec& spec);

/// Polaron-frame initial state U_p^dag |alpha, Gamma>
///   = e^{-|alpha|^2/2} sum_k alpha~^k / sqrt(k!) |k> (x) |Gamma - eta k>,
/// alpha~ = alpha e^{eta (Gamma - Gamma^*)/2}, unnormalized on the truncation.
BipartiteState polaron_initial_state(cplx alpha, cplx gamma, double eta, int dim_cavity, int dim_mirror);

/// chi(n, j) = e^{-|alpha|^2/2} sum_k alpha~^k / sqrt(k!) <j|Gamma~_k> <n|D_a(f_j)|k>
/// for n < rows and j <= j_max: the polaron-frame state after the resonant
/// evolution, exp(-i H_I t) U_p^dag |alpha, Gamma>.
struct PolaronAmplitudes {
  CMatrix chi;  // rows x (j_max + 1)
  SumCutoffs cutoffs;
  double cutoff_deficit = 0.0;
};
PolaronAmplitudes polaron_amplitudes(const AnalyticEvolutionSpec& spec, int rows);

/// Rotating-frame state |Psi(t)>_R = U_p D_a(f_N) U_p^dag |alpha, Gamma> as
///   psi(n, l) = sum_j <l|D_b(eta n)|j> chi(n, j),
/// all displacement elements from the closed-form Laguerre path.
/// Throws cutoff_insufficient when the sums leave more than kMaxNormDeficit
/// of the norm, truncation_insufficient when dims are too small.
AnalyticState evolve_analytic(const AnalyticEvolutionSpec& spec, const TruncationSpec& tr);

/// The same state in the polaron frame (chi restricted to the truncation).
AnalyticState evolve_polaron_analytic(const AnalyticEvolutionSpec& spec, const TruncationSpec& tr);

/// Smallest dims for which the rotating-frame state leaves less than tail_tol
/// beyond either cutoff (and in either top basis state).
TruncationSpec plan_truncation(const AnalyticEvolutionSpec& spec, double tail_tol);

/// Reference for evolve_analytic: polaron dressing, the resonant generator and
/// undressing, each exponentiated numerically from its truncated generator
/// (block by block; the joint generators are block diagonal).
BipartiteState evolve_resonant_numeric(const AnalyticEvolutionSpec& spec, const TruncationSpec& tr);

enum class Generator { full, ion_laser, rwa, coupled };
std::string_view to_string(Generator g);

/// Spectral propagator for one Hamiltonian.
class Propagator {
 public:
  explicit Propagator(const ModeOperator& h, int dim_mirror);
  BipartiteState evolve(const BipartiteState& psi0, double t) const;
  const fock::HermitianSpectrum& spectrum() const noexcept { return spec_; }

 private:
  fock::HermitianSpectrum spec_;
  int dim_mirror_;
};

/// Generator matrix for `which` (sideband order used by rwa).
ModeOperator build_generator(Generator which, const SystemParams& p, const TruncationSpec& tr,
                             int sideband = 0);

/// exp(-i H t) psi0 for the selected generator.
BipartiteState evolve_full_numeric(const SystemParams& p, const BipartiteState& psi0, double t,
                                   Generator which, int sideband = 0);

/// |<a|b>|^2; throws invalid_dimension on shape mismatch.
double fidelity(const BipartiteState& a, const BipartiteState& b);

/// U_p psi (or U_p^dag psi when inverse), applied block by block.
BipartiteState apply_polaron(const BipartiteState& psi, double eta, bool inverse = false);

/// e^{i H0 t} psi (or e^{-i H0 t} when inverse).
BipartiteState to_interaction_picture(const BipartiteState& psi, const SystemParams& p, double t,
                                      bool inverse = false);

/// U_p e^{i H0 t} U_p^dag psi_lab.
BipartiteState to_rotating_frame(const BipartiteState& psi_lab, const SystemParams& p, double t);
/// Inverse of to_rotating_frame.
BipartiteState from_rotating_frame(const BipartiteState& psi_rot, const SystemParams& p, double t);

/// M psi (or M^dag psi), M = e^{-i pi/2 b^dag b} D_a(-i xi / Delta): maps
/// the coupled-oscillator frame to the polaron frame of the ion-laser form,
/// H_ion ~ M H_coupled M^dag + const for eta << 1.
BipartiteState coupled_frame_map(const BipartiteState& psi, const SystemParams& p, bool inverse = false);

}  // namespace dynamics
}  // namespace optomech
