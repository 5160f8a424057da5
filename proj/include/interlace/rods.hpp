#pragma once

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "interlace/green.hpp"
#include "interlace/parallel.hpp"
#include "interlace/point.hpp"

namespace interlace {

/// Green kernel along a rod direction: k(dz) = g((dy1, dy2, dz)) for
/// dz = 0..N. Built once per (dy, N) and shared; construction parallelizes
/// over dz. Small offsets use the time-representation quadrature, large ones
/// the reduced polar route, both deterministic.
class RodKernel {
 public:
  static std::shared_ptr<const RodKernel> get(const FreeLatticeGreen& g, int dy1, int dy2,
                                              long n, int workers) {
    if (g.dim() != 3) throw std::invalid_argument("RodKernel: d == 3 required");
    // canonical direction: |dy1| >= |dy2| >= 0
    int a = std::abs(dy1), b = std::abs(dy2);
    if (a < b) std::swap(a, b);
    static std::mutex mu;
    static std::map<std::tuple<std::uint64_t, int, int, long>,
                    std::shared_ptr<const RodKernel>>
        cache;
    const auto key = std::make_tuple(g.instance_id(), a, b, n);
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = cache.find(key);
      if (it != cache.end()) return it->second;
      // reuse any longer table for the same direction
      for (auto& [k, v] : cache)
        if (std::get<0>(k) == g.instance_id() && std::get<1>(k) == a && std::get<2>(k) == b &&
            std::get<3>(k) >= n)
          return v;
    }
    auto fresh = std::shared_ptr<RodKernel>(new RodKernel(g, a, b, n, workers));
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, std::move(fresh)).first->second;
  }

  double at(long dz) const { return values_[std::labs(dz)]; }
  long length() const { return (long)values_.size() - 1; }

 private:
  RodKernel(const FreeLatticeGreen& g, int a, int b, long n, int workers) {
    values_.resize(n + 1);
    const long split = 32;
    for (long z = 0; z <= std::min(split - 1, n); ++z)
      values_[z] = g.green_origin(Point{a, b, (int)z});
    if (n >= split) {
      parallel_for(n - split + 1, workers,
                   [&](long i) { values_[split + i] = g.rod_value(a, b, split + i); });
    }
  }

  std::vector<double> values_;
};

/// tau_N = (1/(2 log N)) sum_{|z| <= N} g((0,z)); converges to 3/(2 pi).
inline double tau_n(const FreeLatticeGreen& g, long n, int workers = 1) {
  auto k0 = RodKernel::get(g, 0, 0, n, workers);
  double s = k0->at(0);
  for (long z = 1; z <= n; ++z) s += 2.0 * k0->at(z);
  return s / (2.0 * std::log((double)n));
}

/// Potential difference between the centered rod and the rod through y:
/// sum_{x' in J_0} g(x,x') - sum_{x'' in J_y} g(x,x'') for x = (0,z), z in J.
/// Equals (3/2) a(y) - b_N(y,z) with b_N nonnegative and vanishing away from
/// the rod ends.
struct RodPotentialDifference {
  double difference = 0.0;
  double residual = 0.0;  // b_N(y,z)
};

inline RodPotentialDifference rod_potential_difference(const FreeLatticeGreen& g,
                                                       const PotentialKernel2D& a,
                                                       const Point& y, long z, long n,
                                                       int workers = 1) {
  if (y.dim() != 2) throw std::invalid_argument("rod_potential_difference: y in Z^2");
  if (z < 1 || z > n) throw std::invalid_argument("rod_potential_difference: z in {1..N}");
  auto k0 = RodKernel::get(g, 0, 0, n, workers);
  auto ky = RodKernel::get(g, y[0], y[1], n, workers);
  RodPotentialDifference r;
  for (long zp = 1; zp <= n; ++zp) r.difference += k0->at(zp - z) - ky->at(zp - z);
  r.residual = 1.5 * a(y) - r.difference;
  return r;
}

/// Energy form E(W) = -3 sum_{y,y'} W(y) W(y') a(y'-y) of a centered weight
/// function; equals the variance of sum W(y) psi_y under the pinned field.
inline double energy(const PotentialKernel2D& a, const std::vector<Point>& support,
                     const Eigen::VectorXd& w) {
  if ((long)support.size() != w.size()) throw std::invalid_argument("energy: size mismatch");
  double total = 0.0;
  for (long i = 0; i < w.size(); ++i) total += w[i];
  if (std::abs(total) > 1e-12 * (1.0 + w.cwiseAbs().sum()))
    throw std::invalid_argument("energy: W must be centered (sum W = 0)");
  double e = 0.0;
  for (long i = 0; i < w.size(); ++i)
    for (long j = 0; j < w.size(); ++j) e += w[i] * w[j] * a(support[j] - support[i]);
  return -3.0 * e;
}

/// The operator F -> G(V F) on B = Lambda x {1..N} with V constant along
/// each rod. The Green matrix restricted to B is block Toeplitz in z, so a
/// matvec is |Lambda|^2 linear convolutions of length N, done with FFTs of
/// length 2N. A dense reference path exists for small instances.
class RodOperator {
 public:
  RodOperator(const FreeLatticeGreen& g, std::vector<Point> lambda, Eigen::VectorXd rod_v,
              long n, int workers = 1)
      : lambda_(std::move(lambda)), v_(std::move(rod_v)), n_(n) {
    const int m = (int)lambda_.size();
    if (v_.size() != m) throw std::invalid_argument("RodOperator: V size mismatch");
    if (n_ < 2) throw std::invalid_argument("RodOperator: N > 1 required");
    for (const Point& y : lambda_)
      if (y.dim() != 2) throw std::invalid_argument("RodOperator: Lambda in Z^2");
    kernels_.resize(m);
    for (int i = 0; i < m; ++i) {
      kernels_[i].resize(m);
      for (int j = 0; j < m; ++j) {
        const Point dy = lambda_[j] - lambda_[i];
        kernels_[i][j] = RodKernel::get(g, dy[0], dy[1], n_, workers);
      }
    }
    fft_len_ = 1;
    while (fft_len_ < 2 * n_) fft_len_ <<= 1;
    plan_init();
    // frequency-domain kernels, one per distinct direction object
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const RodKernel* k = kernels_[i][j].get();
        if (khat_.count(k)) continue;
        std::vector<std::complex<double>> buf(fft_len_, 0.0);
        for (long z = -(n_ - 1); z <= n_ - 1; ++z)
          buf[(z + fft_len_) % fft_len_] = k->at(z);
        fft_inplace(buf, false);
        khat_.emplace(k, std::move(buf));
      }
  }

  ~RodOperator() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan_fwd_);
    fftw_destroy_plan(plan_bwd_);
  }

  RodOperator(const RodOperator&) = delete;
  RodOperator& operator=(const RodOperator&) = delete;

  long rod_length() const { return n_; }
  int rods() const { return (int)lambda_.size(); }
  long size() const { return n_ * rods(); }

  /// F is (|Lambda| x N) row-major; returns G(V F) of the same shape.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& f) const {
    const int m = rods();
    if (f.rows() != m || f.cols() != n_) throw std::invalid_argument("apply: shape mismatch");
    std::vector<std::vector<std::complex<double>>> fhat(m);
    for (int j = 0; j < m; ++j) {
      std::vector<std::complex<double>> buf(fft_len_, 0.0);
      for (long z = 0; z < n_; ++z) buf[z] = v_[j] * f(j, z);
      fft_inplace(buf, false);
      fhat[j] = std::move(buf);
    }
    Eigen::MatrixXd out(m, n_);
    std::vector<std::complex<double>> acc(fft_len_);
    for (int i = 0; i < m; ++i) {
      std::fill(acc.begin(), acc.end(), std::complex<double>(0.0));
      for (int j = 0; j < m; ++j) {
        const auto& kh = khat_.at(kernels_[i][j].get());
        const auto& fh = fhat[j];
        for (long t = 0; t < fft_len_; ++t) acc[t] += kh[t] * fh[t];
      }
      fft_inplace(acc, true);
      for (long z = 0; z < n_; ++z) out(i, z) = acc[z].real() / (double)fft_len_;
    }
    return out;
  }

  /// Dense reference matvec, O((|Lambda| N)^2); guards the FFT path.
  Eigen::MatrixXd apply_dense(const Eigen::MatrixXd& f) const {
    const int m = rods();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, n_);
    for (int i = 0; i < m; ++i)
      for (long z = 0; z < n_; ++z) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) {
          const RodKernel& k = *kernels_[i][j];
          for (long zp = 0; zp < n_; ++zp) s += k.at(zp - z) * v_[j] * f(j, zp);
        }
        out(i, z) = s;
      }
    return out;
  }

  /// (V F, 1) restricted to B: sum over rods and heights of V(y) F(y,z).
  /// Summed per rod first so that a centered V annihilates F == 1 exactly.
  double pair_with_v(const Eigen::MatrixXd& f) const {
    double s = 0.0;
    for (int j = 0; j < rods(); ++j) {
      double row = 0.0;
      for (long z = 0; z < n_; ++z) row += f(j, z);
      s += v_[j] * row;
    }
    return s;
  }

 private:
  static std::mutex& fftw_mutex() {
    static std::mutex mu;  // FFTW planning is not thread-safe
    return mu;
  }

  void plan_init() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    scratch_.resize(fft_len_);
    auto* ptr = reinterpret_cast<fftw_complex*>(scratch_.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;  // plans reused on other buffers
    plan_fwd_ = fftw_plan_dft_1d((int)fft_len_, ptr, ptr, FFTW_FORWARD, flags);
    plan_bwd_ = fftw_plan_dft_1d((int)fft_len_, ptr, ptr, FFTW_BACKWARD, flags);
  }

  void fft_inplace(std::vector<std::complex<double>>& buf, bool inverse) const {
    auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(inverse ? plan_bwd_ : plan_fwd_, ptr, ptr);
  }

  std::vector<Point> lambda_;
  Eigen::VectorXd v_;
  long n_;
  long fft_len_ = 0;
  std::vector<std::vector<std::shared_ptr<const RodKernel>>> kernels_;
  std::map<const RodKernel*, std::vector<std::complex<double>>> khat_;
  mutable std::vector<std::complex<double>> scratch_;
  fftw_plan plan_fwd_ = nullptr;
  fftw_plan plan_bwd_ = nullptr;
};

/// Coefficients u (V, (GV)^{n-1} 1) for the rod geometry, with u and V taken
/// verbatim from the caller; scalings live at the call sites.
inline std::vector<double> rod_series_coefficients(const RodOperator& op, double u, int n_max,
                                                   bool dense_reference = false) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Ones(op.rods(), op.rod_length());
  std::vector<double> out(n_max);
  for (int k = 1; k <= n_max; ++k) {
    out[k - 1] = u * op.pair_with_v(h);
    if (k < n_max) h = dense_reference ? op.apply_dense(h) : op.apply(h);
  }
  return out;
}

struct RodCoefficients {
  long n = 0;
  double u = 0.0;                  // level used
  std::vector<double> a;           // a_N(n), n = 1..n_max
};

/// a_N(n) = u_N (V_N, (GV_N)^{n-1} 1) with u_N = alpha log N / N and
/// V_N = W/sqrt(log N) on Lambda x {1..N}; W must be centered.
inline RodCoefficients coeff_a_n(const FreeLatticeGreen& g, const std::vector<Point>& lambda,
                                 const Eigen::VectorXd& w, double alpha, long n, int n_max,
                                 int workers = 1, bool dense_reference = false) {
  if (n_max < 1 || n_max > 16) throw std::invalid_argument("coeff_a_n: 1 <= n_max <= 16");
  double total = 0.0;
  for (long i = 0; i < w.size(); ++i) total += w[i];
  if (std::abs(total) > 1e-12 * (1.0 + w.cwiseAbs().sum()))
    throw std::invalid_argument("coeff_a_n: W must be centered");
  if ((long)lambda.size() * n > 10'000'000)
    throw std::invalid_argument("coeff_a_n: |Lambda| N too large");
  const double logn = std::log((double)n);
  RodCoefficients r;
  r.n = n;
  r.u = alpha * logn / (double)n;
  RodOperator op(g, lambda, w / std::sqrt(logn), n, workers);
  r.a = rod_series_coefficients(op, r.u, n_max, dense_reference);
  return r;
}

/// Single-rod coefficients at_N(n) with Vt_N = (1/log N) 1_{J_0}; all
/// nonnegative, at_N(1) = alpha exactly, limit alpha (3/pi)^{n-1}.
inline RodCoefficients coeff_tilde_a_n(const FreeLatticeGreen& g, double alpha, long n,
                                       int n_max, int workers = 1) {
  if (n_max < 1 || n_max > 16)
    throw std::invalid_argument("coeff_tilde_a_n: 1 <= n_max <= 16");
  const double logn = std::log((double)n);
  RodCoefficients r;
  r.n = n;
  r.u = alpha * logn / (double)n;
  Eigen::VectorXd v(1);
  v[0] = 1.0 / logn;
  RodOperator op(g, {Point{0, 0}}, v, n, workers);
  r.a = rod_series_coefficients(op, r.u, n_max);
  return r;
}

/// Closed forms of the limiting transforms reached by the rod coefficients:
/// characteristic function exp{(alpha/2) E z^2 / (1 - (3/(2 pi)) E z^2)} at
/// z = it, and single-rod Laplace transform exp{-alpha l / (1 + 3 l / pi)}.
inline std::complex<double> limit_char_function(double alpha, double energy_w, double t) {
  const std::complex<double> z(0.0, t);
  const std::complex<double> z2 = z * z;
  return std::exp(0.5 * alpha * energy_w * z2 /
                  (1.0 - (3.0 / (2.0 * kPi)) * energy_w * z2));
}

inline double limit_laplace_single_rod(double alpha, double lambda) {
  if (lambda < 0) throw std::invalid_argument("limit_laplace_single_rod: lambda >= 0");
  return std::exp(-alpha * lambda / (1.0 + 3.0 * lambda / kPi));
}

/// Richardson extrapolation in 1/log N over a geometric N-grid: Neville's
/// scheme on nodes x_i = 1/log N_i, returning the value at x = 0. Suits the
/// slow logarithmic convergence of tau_N and the rod coefficients.
inline double extrapolate_in_inverse_log(const std::vector<long>& ns,
                                         const std::vector<double>& vals) {
  const int m = (int)ns.size();
  if (m < 2 || (int)vals.size() != m)
    throw std::invalid_argument("extrapolate_in_inverse_log: need matching grids, m >= 2");
  std::vector<double> x(m), p(vals);
  for (int i = 0; i < m; ++i) x[i] = 1.0 / std::log((double)ns[i]);
  for (int level = 1; level < m; ++level)
    for (int i = 0; i < m - level; ++i)
      p[i] = (x[i + level] * p[i] - x[i] * p[i + 1]) / (x[i + level] - x[i]);
  return p[0];
}

}  // namespace interlace
