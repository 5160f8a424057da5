#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace interlace {

/// Exponentially scaled modified Bessel functions It_n(s) = e^{-s} I_n(s).
/// These are the single-coordinate transition densities of the continuous
/// time simple random walk, the backbone of the Green function quadratures.
namespace bessel {

/// Fill out[0..nmax] with It_n(s) by Miller's backward recurrence, normalized
/// through e^s = I_0 + 2 sum_{k>=1} I_k. Accurate to ~1e-15 relative.
inline void scaled_i_row(double s, int nmax, std::vector<double>& out) {
  out.assign(nmax + 1, 0.0);
  if (s <= 0.0) {
    out[0] = 1.0;  // I_n(0) = [n == 0]
    return;
  }
  // Start order: high enough that I_M/I_0 < 1e-20.
  int m = nmax + (int)std::ceil(10.0 * std::sqrt(s)) + 40;
  if (m < nmax + 10) m = nmax + 10;
  double fp = 0.0;          // f_{k+1}
  double fc = 1e-300;       // f_k
  double norm = 0.0;        // accumulates f_0 + 2 sum f_k
  for (int k = m; k >= 1; --k) {
    double fm = fp + (2.0 * k / s) * fc;  // f_{k-1}
    fp = fc;
    fc = fm;
    if (k - 1 <= nmax) out[k - 1] = fc;  // store f_{k-1}; out[k-1] pending scale
    if (k - 1 >= 1) norm += 2.0 * fc; else norm += fc;
    if (fc > 1e280) {  // rescale to avoid overflow
      const double r = 1e-280;
      fp *= r;
      fc *= r;
      norm *= r;
      for (auto& v : out) v *= r;
    }
  }
  // norm currently holds f_0 + 2 sum_{k>=1} f_k = C e^s with f_n = C I_n(s).
  const double inv = 1.0 / norm;
  for (auto& v : out) v *= inv;
}

/// It_n(s) from the large-argument asymptotic series; requires s to comfortably
/// dominate n^2 (callers use s >= ~3 n^2). Truncates at the smallest term.
inline double scaled_i_asymptotic(double s, int n) {
  const double mu = 4.0 * (double)n * (double)n;
  double term = 1.0, sum = 1.0;
  for (int j = 1; j <= 60; ++j) {
    const double od = 2.0 * j - 1.0;
    term *= -(mu - od * od) / (8.0 * s * j);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * 3.14159265358979323846 * s);
}

/// Coefficients c_j of the series It_n(s) ~ (2 pi s)^{-1/2} sum_j c_j s^{-j}.
inline void asymptotic_coeffs(int n, int jmax, std::vector<double>& c) {
  const double mu = 4.0 * (double)n * (double)n;
  c.assign(jmax + 1, 0.0);
  c[0] = 1.0;
  for (int j = 1; j <= jmax; ++j) {
    const double od = 2.0 * j - 1.0;
    c[j] = -c[j - 1] * (mu - od * od) / (8.0 * j);
  }
}

/// Product of series: r_j = sum_{i} a_i b_{j-i}, truncated at jmax.
inline std::vector<double> series_product(const std::vector<double>& a,
                                          const std::vector<double>& b) {
  const int jmax = (int)a.size() - 1;
  std::vector<double> r(jmax + 1, 0.0);
  for (int i = 0; i <= jmax; ++i)
    for (int j = 0; i + j <= jmax; ++j) r[i + j] += a[i] * b[j];
  return r;
}

}  // namespace bessel
}  // namespace interlace
