#include "optomech/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "optomech/error.hpp"

namespace optomech::specfun {

namespace {

constexpr double kRescaleAbove = 1e150;
const double kLogRescale = std::log(kRescaleAbove);

bool is_zero(cplx f) { return f.real() == 0.0 && f.imag() == 0.0; }

// log(n!) for n below kTableSize is tabulated once; larger n falls back to lgamma.
constexpr int kTableSize = 1 << 15;

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kTableSize);
    for (int n = 0; n < kTableSize; ++n) t[n] = std::lgamma(static_cast<double>(n) + 1.0);
    return t;
  }();
  return table;
}

double lf(int n) {
  if (n < kTableSize) return log_factorial_table()[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

// (k+1) L_{k+1} = (2k + 1 + alpha - x) L_k - (k + alpha) L_{k-1}, carried with a
// shared exponent. `visit(k, mantissa, log_scale)` sees every degree 0..n.
template <typename Visit>
void laguerre_sweep(int n, int alpha, double x, Visit&& visit) {
  double prev = 1.0;  // L_0
  double scale = 0.0;
  visit(0, prev, scale);
  if (n == 0) return;
  double cur = 1.0 + alpha - x;  // L_1
  visit(1, cur, scale);
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur /= kRescaleAbove;
      prev /= kRescaleAbove;
      scale += kLogRescale;
    }
    visit(k + 1, cur, scale);
  }
}

void check_laguerre_domain(int n, int alpha, double x) {
  if (n < 0) throw Error(ErrorKind::domain, fmt::format("Laguerre order must be >= 0 (got {})", n));
  if (alpha < 0 && n + alpha < 0) {
    throw Error(ErrorKind::domain,
                fmt::format("Laguerre parameter {} invalid for order {} (need n + alpha >= 0)", alpha, n));
  }
  if (!(x >= 0.0)) throw Error(ErrorKind::domain, fmt::format("Laguerre argument must be >= 0 (got {})", x));
}

// log of e^{-z/2} |f|^m sqrt(lo! / (lo + m)!)
double log_envelope(double z, double log_abs_f, int m, int lo) {
  return -0.5 * z + m * log_abs_f + 0.5 * (lf(lo) - lf(lo + m));
}

}  // namespace

double ScaledValue::value() const { return mantissa * std::exp(log_scale); }

double log_factorial(int n) {
  if (n < 0) throw Error(ErrorKind::domain, fmt::format("log_factorial of negative {}", n));
  return lf(n);
}

ScaledValue laguerre_scaled(int n, int alpha, double x) {
  check_laguerre_domain(n, alpha, x);
  ScaledValue out{1.0, 0.0};
  laguerre_sweep(n, alpha, x, [&](int k, double mant, double scale) {
    if (k == n) out = {mant, scale};
  });
  return out;
}

double laguerre(int n, int alpha, double x) { return laguerre_scaled(n, alpha, x).value(); }

double tricomi_poly(int k, int b, double z) {
  if (k < 0) throw Error(ErrorKind::domain, fmt::format("tricomi_poly needs k >= 0 (got {})", k));
  if (!(z >= 0.0)) throw Error(ErrorKind::domain, fmt::format("tricomi_poly needs z >= 0 (got {})", z));
  double sum = 0.0;
  double binom = 1.0;  // C(k, s)
  double zpow = 1.0;   // (-z)^s
  for (int s = 0; s <= k; ++s) {
    double poch = 1.0;  // (b + s)_{k - s}
    for (int i = 0; i < k - s; ++i) poch *= static_cast<double>(b + s + i);
    sum += binom * poch * zpow;
    binom = binom * (k - s) / (s + 1.0);
    zpow *= -z;
  }
  return (k % 2 == 0) ? sum : -sum;
}

double tricomi_u(double a, double b, double z) {
  const bool terminating = a <= 0.0 && std::floor(a) == a;
  if (!terminating || std::floor(b) != b) {
    throw Error(ErrorKind::unsupported_branch,
                fmt::format("U({}, {}, z): only a = -k (k = 0, 1, ...) with integer b is supported", a, b));
  }
  return tricomi_poly(static_cast<int>(-a), static_cast<int>(b), z);
}

cplx displaced_fock_element(int n, int k, cplx f) {
  if (n < 0 || k < 0) {
    throw Error(ErrorKind::domain, fmt::format("Fock indices must be >= 0 (got {}, {})", n, k));
  }
  if (is_zero(f)) return n == k ? cplx{1.0, 0.0} : cplx{};
  const double z = std::norm(f);
  const int lo = std::min(n, k);
  const int m = std::abs(n - k);
  const ScaledValue lag = laguerre_scaled(lo, m, z);
  if (lag.mantissa == 0.0) return {};
  const double logmag = log_envelope(z, std::log(std::abs(f)), m, lo) + lag.log_scale;
  const double mag = lag.mantissa * std::exp(logmag);
  // n >= k: phase of f^m; n < k: phase of (-f^*)^m.
  const double theta = n >= k ? m * std::arg(f) : m * std::arg(-std::conj(f));
  return std::polar(1.0, theta) * mag;
}

Eigen::MatrixXcd displaced_fock_matrix(cplx f, int rows, int cols) {
  if (rows < 0 || cols < 0) throw Error(ErrorKind::domain, "negative block size");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rows, cols);
  if (is_zero(f)) {
    for (int i = 0; i < std::min(rows, cols); ++i) out(i, i) = 1.0;
    return out;
  }
  const double z = std::norm(f);
  const double log_abs_f = std::log(std::abs(f));
  const cplx lower_phase = std::polar(1.0, std::arg(f));             // f / |f|
  const cplx upper_phase = std::polar(1.0, std::arg(-std::conj(f)));  // -f^* / |f|

  const int max_m = std::max(rows, cols);
  for (int m = 0; m < max_m; ++m) {
    // Lower diagonal (n = lo + m, k = lo) and upper diagonal (n = lo, k = lo + m)
    // share |element|; only the phase differs.
    const int lower_len = std::min(cols, rows - m);
    const int upper_len = m == 0 ? 0 : std::min(rows, cols - m);
    const int len = std::max(lower_len, upper_len);
    if (len <= 0) continue;
    const cplx lp = std::pow(lower_phase, m);
    const cplx up = std::pow(upper_phase, m);
    laguerre_sweep(len - 1, m, z, [&](int lo, double mant, double scale) {
      if (mant == 0.0) return;
      const double mag = mant * std::exp(log_envelope(z, log_abs_f, m, lo) + scale);
      if (lo < lower_len) out(lo + m, lo) = lp * mag;
      if (lo < upper_len) out(lo, lo + m) = up * mag;
    });
  }
  return out;
}

Eigen::VectorXcd coherent_amplitudes(cplx alpha, int count) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(std::max(count, 0));
  if (count <= 0) return out;
  if (is_zero(alpha)) {
    out(0) = 1.0;
    return out;
  }
  const double s = std::norm(alpha);
  const double log_abs = std::log(std::abs(alpha));
  const double theta = std::arg(alpha);
  for (int j = 0; j < count; ++j) {
    const double logmag = -0.5 * s + j * log_abs - 0.5 * log_factorial(j);
    out(j) = std::polar(std::exp(logmag), j * theta);
  }
  return out;
}

CoherentWindow coherent_window(cplx alpha, int count) { return coherent_window(alpha, 0, count - 1); }

CoherentWindow coherent_window(cplx alpha, int lo, int hi) {
  CoherentWindow w;
  lo = std::max(lo, 0);
  if (hi < lo) return w;
  if (is_zero(alpha)) {
    if (lo == 0) w.values = Eigen::VectorXcd::Ones(1);
    return w;
  }
  const double s = std::norm(alpha);
  const double spread = 13.0 * std::sqrt(s) + 40.0;
  lo = std::max(lo, static_cast<int>(std::floor(s - spread)));
  hi = std::min(hi, static_cast<int>(std::ceil(s + spread)));
  if (hi < lo) return w;
  w.first = lo;
  w.values.resize(hi - lo + 1);
  const double abs_alpha = std::abs(alpha);
  const double theta = std::arg(alpha);
  const cplx step = std::polar(1.0, theta);
  // Seed in log space at `lo`, then multiply by alpha / sqrt(j + 1).
  const double seed = -0.5 * s + lo * std::log(abs_alpha) - 0.5 * lf(lo);
  cplx cur = std::polar(std::exp(seed), lo * theta);
  for (int j = lo; j <= hi; ++j) {
    w.values(j - lo) = cur;
    cur *= step * (abs_alpha / std::sqrt(static_cast<double>(j + 1)));
  }
  return w;
}

}  // namespace optomech::specfun
