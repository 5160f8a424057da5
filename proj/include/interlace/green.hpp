#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "interlace/bessel.hpp"
#include "interlace/point.hpp"
#include "interlace/quadrature.hpp"

namespace interlace {

inline constexpr double kPi = 3.14159265358979323846;

/// Resolution knobs for the deterministic Green-function quadratures.
/// Defaults target absolute error below 1e-10 for |x| <= 64.
struct GreenQuadOptions {
  int gl_order = 48;       // Gauss-Legendre order per panel (time integral)
  int radial_order = 40;   // radial order per panel (polar route)
  int theta_base = 64;     // base angular node count (polar route)
  int tail_terms = 6;      // analytic tail series order
};

/// Green function g(x) of the simple random walk on Z^d, d >= 3.
///
/// Evaluation is deterministic quadrature of the Fourier representation
/// g(x) = (2pi)^{-d} int cos(k.x) / (1 - phi(k)) dk, carried out in two
/// equivalent forms chosen by argument size:
///
///  * time representation  g(x) = d * int_0^inf prod_i e^{-s} I_{x_i}(s) ds,
///    i.e. the k-integral traded for the continuous-time transition kernel.
///    The integrand is smooth and positive; panels run to s ~ 3.5 max(x_i)^2,
///    then the large-s asymptotics of the scaled Bessel factors take over and
///    the far tail is integrated in closed form. Works for every d >= 3.
///
///  * for d = 3 and max|x_i| >= 32, one lattice direction is integrated out
///    analytically, leaving a 2-d polar quadrature of
///    cos(k.y) rho(k)^{|z|} / sqrt(A^2 - 1/9) over a disk of radius ~70/|z|;
///    rho < 1 away from k = 0 makes the neglected region exponentially small.
///    This keeps cost flat in |x| and is what the long-rod kernels use.
///
/// Values are memoized per symmetry orbit; the cache is guarded by a shared
/// mutex so warmed-up models can be read concurrently.
class FreeLatticeGreen {
 public:
  explicit FreeLatticeGreen(int dim, GreenQuadOptions opts = {})
      : d_(dim), opts_(opts) {
    if (dim < 3)
      throw std::domain_error("FreeLatticeGreen: d >= 3 required (walk not transient)");
    if (dim > Point::kMaxDim)
      throw std::invalid_argument("FreeLatticeGreen: dimension too large");
    static std::atomic<std::uint64_t> counter{1};
    instance_id_ = counter.fetch_add(1);
  }

  int dim() const { return d_; }
  double weight(const Point&) const { return 1.0; }
  std::uint64_t instance_id() const { return instance_id_; }

  /// g(x) = expected number of visits to x starting from the origin.
  double green_origin(const Point& x) const {
    if (x.dim() != d_) throw std::invalid_argument("green_origin: dimension mismatch");
    const Point key = x.canonical();
    {
      std::shared_lock lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const double v = evaluate(key);
    {
      std::unique_lock lock(mu_);
      cache_.emplace(key, v);
    }
    return v;
  }

  double green(const Point& x, const Point& y) const { return green_origin(y - x); }

  double at_zero() const { return green_origin(Point::zero(d_)); }

  /// g((y1,y2,z)) for d = 3 with the z-axis reduced analytically; |z| >= 32.
  /// Used directly by the rod kernel tables (no cache traffic).
  double rod_value(int y1, int y2, long long z) const {
    if (d_ != 3) throw std::logic_error("rod_value: d == 3 only");
    return polar_value(std::abs(y1), std::abs(y2), std::llabs(z));
  }

  /// Time-representation quadrature (any d >= 3); exposed for cross-checks.
  double value_by_series(const Point& x) const {
    const Point c = x.canonical();
    std::vector<int> n(d_);
    for (int i = 0; i < d_; ++i) n[i] = c[i];
    return series_value(n);
  }

  /// Reduced polar quadrature (d = 3, max coordinate >= 32); for cross-checks.
  double value_by_polar(const Point& x) const {
    const Point c = x.canonical();
    return polar_value(c[1], c[2], c[0]);
  }

 private:
  double evaluate(const Point& c) const {
    if (d_ == 3 && c[0] >= 32) return polar_value(c[1], c[2], c[0]);
    std::vector<int> n(d_);
    for (int i = 0; i < d_; ++i) n[i] = c[i];
    return series_value(n);
  }

  double series_value(const std::vector<int>& n) const {
    const int nmax = n[0];
    const double s_star = std::max(40.0, 3.5 * (double)nmax * nmax);
    const double t_cut = std::max({1.0e5, 20.0 * s_star});

    std::vector<double> row;
    auto integrand_exact = [&](double s) {
      bessel::scaled_i_row(s, nmax, row);
      double p = 1.0;
      for (int i = 0; i < d_; ++i) p *= row[n[i]];
      return p;
    };
    const double part_a = gauss_geometric(integrand_exact, 0.0, s_star, 2.0, opts_.gl_order);

    auto integrand_asym = [&](double s) {
      double p = 1.0;
      for (int i = 0; i < d_; ++i) p *= bessel::scaled_i_asymptotic(s, n[i]);
      return p;
    };
    const double part_b = gauss_geometric(integrand_asym, s_star, t_cut, s_star, opts_.gl_order);

    // Far tail: prod It_{n_i}(s) ~ (2 pi s)^{-d/2} sum_j C_j s^{-j} integrated
    // term by term beyond t_cut.
    const int jmax = opts_.tail_terms;
    std::vector<double> prod{1.0};
    prod.resize(jmax + 1, 0.0);
    prod[0] = 1.0;
    std::vector<double> cj;
    for (int i = 0; i < d_; ++i) {
      bessel::asymptotic_coeffs(n[i], jmax, cj);
      prod = bessel::series_product(prod, cj);
    }
    double tail = 0.0;
    const double half_d = 0.5 * d_;
    for (int j = 0; j <= jmax; ++j)
      tail += prod[j] * std::pow(t_cut, 1.0 - half_d - j) / (half_d - 1.0 + j);
    tail *= std::pow(2.0 * kPi, -half_d);

    return d_ * (part_a + part_b + tail);
  }

  // g((y1,y2,z)) = (2pi)^{-2} int_{|k|<=R} cos(k.y) rho(k)^z / s(k) dk with
  // A = 1/3 + (2/3)(sin^2(k1/2)+sin^2(k2/2)), s = sqrt(A^2-1/9),
  // rho = 1/(3(A+s)); R = 70/z keeps the discarded annulus below ~1e-15.
  double polar_value(int y1, int y2, long long z) const {
    if (z < 23) throw std::logic_error("polar_value: |z| too small for reduced route");
    const double radius = 70.0 / (double)z;
    const double ynorm = std::sqrt((double)y1 * y1 + (double)y2 * y2);
    int ntheta = opts_.theta_base + 8 * (int)std::ceil(radius * ynorm);
    const auto& gl = GaussLegendre::of_order(opts_.radial_order);

    const double edges[6] = {0.0, radius / 16, radius / 8, radius / 4, radius / 2, radius};
    double total = 0.0;
    for (int t = 0; t < ntheta; ++t) {
      const double theta = 2.0 * kPi * (t + 0.5) / ntheta;
      const double c1 = std::cos(theta), c2 = std::sin(theta);
      double acc = 0.0;
      for (int p = 0; p + 1 < 6; ++p) {
        const double mid = 0.5 * (edges[p] + edges[p + 1]);
        const double half = 0.5 * (edges[p + 1] - edges[p]);
        for (int i = 0; i < opts_.radial_order; ++i) {
          const double r = mid + half * gl.node[i];
          const double k1 = r * c1, k2 = r * c2;
          const double s1 = std::sin(0.5 * k1), s2 = std::sin(0.5 * k2);
          const double delta = (2.0 / 3.0) * (s1 * s1 + s2 * s2);  // A - 1/3
          const double s = std::sqrt(delta * (delta + 2.0 / 3.0));
          const double logrho = -std::log1p(3.0 * (delta + s));
          const double f = std::cos(k1 * y1 + k2 * y2) * std::exp((double)z * logrho) * (r / s);
          acc += gl.weight[i] * half * f;
        }
      }
      total += acc;
    }
    total *= 2.0 * kPi / ntheta;          // trapezoid weight in theta
    return total / (4.0 * kPi * kPi);
  }

  int d_;
  GreenQuadOptions opts_;
  std::uint64_t instance_id_ = 0;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<Point, double, PointHash> cache_;
};

/// Potential kernel a(y) of the two-dimensional simple random walk,
/// a(y) = lim_n sum_{j<=n} P_0[X_j = 0] - P_0[X_j = y], evaluated as
/// a(y) = 2 int_0^inf (It_0(s)^2 - It_{y1}(s) It_{y2}(s)) ds with the same
/// panel + asymptotic-series + closed-form-tail scheme as the Green function.
/// a(0) = 0, a is symmetric and nonnegative.
class PotentialKernel2D {
 public:
  explicit PotentialKernel2D(GreenQuadOptions opts = {}) : opts_(opts) {}

  double operator()(const Point& y) const {
    if (y.dim() != 2) throw std::invalid_argument("potential kernel: y must lie in Z^2");
    const Point key = y.canonical();
    if (key[0] == 0) return 0.0;
    {
      std::shared_lock lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const double v = evaluate(key[0], key[1]);
    {
      std::unique_lock lock(mu_);
      cache_.emplace(key, v);
    }
    return v;
  }

  double at(int y1, int y2) const { return (*this)(Point{y1, y2}); }

 private:
  double evaluate(int n0, int n1) const {
    const double s_star = std::max(40.0, 6.0 * (double)n0 * n0);
    const double t_cut = std::max(4000.0, 110.0 * (double)n0 * n0);

    std::vector<double> row;
    auto integrand_exact = [&](double s) {
      bessel::scaled_i_row(s, n0, row);
      return row[0] * row[0] - row[n0] * row[n1];
    };
    const double part_a = gauss_geometric(integrand_exact, 0.0, s_star, 2.0, opts_.gl_order);

    // Difference of the two product series; the j = 0 terms cancel exactly,
    // which is what makes the tail integrable.
    const int jmax = std::max(10, opts_.tail_terms);
    std::vector<double> c0, ca, cb;
    bessel::asymptotic_coeffs(0, jmax, c0);
    bessel::asymptotic_coeffs(n0, jmax, ca);
    bessel::asymptotic_coeffs(n1, jmax, cb);
    const std::vector<double> p00 = bessel::series_product(c0, c0);
    const std::vector<double> pyy = bessel::series_product(ca, cb);
    std::vector<double> diff(jmax + 1);
    for (int j = 0; j <= jmax; ++j) diff[j] = p00[j] - pyy[j];

    auto integrand_asym = [&](double s) {
      double acc = 0.0, sp = 1.0 / s;
      for (int j = 1; j <= jmax; ++j) {
        acc += diff[j] * sp;
        sp /= s;
      }
      return acc / (2.0 * kPi * s);
    };
    const double part_b = gauss_geometric(integrand_asym, s_star, t_cut, s_star, opts_.gl_order);

    double tail = 0.0;
    for (int j = 1; j <= jmax; ++j) tail += diff[j] * std::pow(t_cut, -j) / j;
    tail /= 2.0 * kPi;

    return 2.0 * (part_a + part_b + tail);
  }

  GreenQuadOptions opts_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<Point, double, PointHash> cache_;
};

}  // namespace interlace
