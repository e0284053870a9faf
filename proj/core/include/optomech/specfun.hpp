#pragma once

// Special functions behind displaced Fock states: generalized Laguerre
// polynomials, the terminating branch of the Tricomi function U(a, b, z),
// and matrix elements <n|D(f)|k> of the displacement operator.

#include <complex>

#include <Eigen/Dense>

namespace optomech::specfun {

using cplx = std::complex<double>;

/// mantissa * exp(log_scale); keeps recurrences clear of overflow.
struct ScaledValue {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double value() const;
};

/// log(n!) for n >= 0.
double log_factorial(int n);

/// Generalized Laguerre polynomial L_n^{(alpha)}(x) by forward recurrence.
/// Requires n >= 0, x >= 0 and n + alpha >= 0 when alpha < 0.
double laguerre(int n, int alpha, double x);
ScaledValue laguerre_scaled(int n, int alpha, double x);

/// U(-k, b, z) as the terminating degree-k sum
///   (-1)^k sum_s C(k, s) (b + s)_{k-s} (-z)^s.
double tricomi_poly(int k, int b, double z);

/// U(a, b, z) restricted to the terminating branch a = -k, k in N, integer b.
/// Anything else throws unsupported_branch.
double tricomi_u(double a, double b, double z);

/// <n|D(f)|k> = e^{-|f|^2/2} f^{n-k} (-1)^k (n! k!)^{-1/2} U(-k, n-k+1, |f|^2),
/// evaluated through the Laguerre form with log-space factorial ratios.
/// Elements with n < k use the reflection <n|D(f)|k> = <k|D(-f)|n>^*.
cplx displaced_fock_element(int n, int k, cplx f);

/// Block [0, rows) x [0, cols) of D(f), one Laguerre recurrence per diagonal.
Eigen::MatrixXcd displaced_fock_matrix(cplx f, int rows, int cols);

/// <j|alpha> = e^{-|alpha|^2/2} alpha^j / sqrt(j!) for j < count.
Eigen::VectorXcd coherent_amplitudes(cplx alpha, int count);

/// Contiguous run of <j|alpha> that can be non-negligible, j in [first, first + size).
struct CoherentWindow {
  int first = 0;
  Eigen::VectorXcd values;
};

/// Restricts coherent_amplitudes to indices within ~13 standard deviations of
/// |alpha|^2 (amplitudes outside are below 1e-17) and below `count`.
CoherentWindow coherent_window(cplx alpha, int count);

/// coherent_window further clipped to indices [lo, hi]; may be empty.
CoherentWindow coherent_window(cplx alpha, int lo, int hi);

}  // namespace optomech::specfun
