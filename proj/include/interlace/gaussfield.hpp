#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "interlace/green.hpp"
#include "interlace/point.hpp"
#include "interlace/rng.hpp"

namespace interlace {

/// One draw from BESQ^0(a2, tau): the time-tau marginal of a zero-dimensional
/// squared Bessel process started at a2. Compound-Poisson representation:
/// N ~ Poisson(a2/(2 tau)) jumps, each contributing an Exp(mean 2 tau) mass.
/// Laplace transform: E[e^{-lambda X}] = exp{-lambda a2 / (1 + 2 tau lambda)}.
inline double sample_besq0(double a2, double tau, Rng& rng) {
  if (a2 < 0 || tau <= 0) throw std::invalid_argument("sample_besq0: a2 >= 0, tau > 0");
  const long n = rng.poisson(a2 / (2.0 * tau));
  double x = 0.0;
  for (long i = 0; i < n; ++i) x += rng.exponential(2.0 * tau);
  return x;
}

/// Centered Gaussian vector with a fixed covariance matrix, sampled through
/// a pivoted LDL^T factorization so that exactly semidefinite covariances
/// (pinned fields have a zero row at the pinning site) are handled.
class GaussianField {
 public:
  explicit GaussianField(Eigen::MatrixXd cov, double tol = 1e-9) {
    const int n = (int)cov.rows();
    cov = 0.5 * (cov + cov.transpose().eval());
    // coordinates with zero variance are almost surely zero (pinning sites);
    // keep them exact instead of letting elimination leak roundoff into them
    pinned_.assign(n, false);
    for (int i = 0; i < n; ++i) pinned_[i] = cov(i, i) == 0.0;
    ldlt_.compute(cov);
    if (ldlt_.info() != Eigen::Success)
      throw std::runtime_error("GaussianField: factorization failed");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    diag_ = ldlt_.vectorD();
    for (int i = 0; i < n; ++i) {
      if (diag_[i] < -tol * scale)
        throw std::runtime_error(
            "GaussianField: covariance not positive semidefinite beyond tolerance");
      diag_[i] = diag_[i] > 0 ? std::sqrt(diag_[i]) : 0.0;
    }
    n_ = n;
  }

  int size() const { return n_; }

  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd z(n_);
    for (int i = 0; i < n_; ++i) z[i] = rng.normal() * diag_[i];
    Eigen::VectorXd x = ldlt_.matrixL() * z;
    x = ldlt_.transpositionsP().transpose() * x;
    for (int i = 0; i < n_; ++i)
      if (pinned_[i]) x[i] = 0.0;
    return x;
  }

 private:
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  Eigen::VectorXd diag_;
  std::vector<bool> pinned_;
  int n_ = 0;
};

/// Pinned two-dimensional free field: centered Gaussian (psi_y) with
/// covariance 3 (a(y) + a(y') - a(y'-y)); psi_0 = 0 when the origin is among
/// the requested points.
class PinnedFreeField2D {
 public:
  PinnedFreeField2D(const PotentialKernel2D& a, std::vector<Point> points)
      : points_(std::move(points)), field_(covariance(a, points_)) {}

  static Eigen::MatrixXd covariance(const PotentialKernel2D& a,
                                    const std::vector<Point>& pts) {
    const int n = (int)pts.size();
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double v = 3.0 * (a(pts[i]) + a(pts[j]) - a(pts[j] - pts[i]));
        c(i, j) = c(j, i) = v;
      }
    return c;
  }

  const std::vector<Point>& points() const { return points_; }
  Eigen::VectorXd sample(Rng& rng) const { return field_.sample(rng); }

 private:
  std::vector<Point> points_;
  GaussianField field_;
};

/// Increments at the origin of the d-dimensional free field (d >= 3):
/// centered Gaussian (phi_x) with covariance g(x'-x) + g(0) - g(x) - g(x').
class FreeFieldIncrements {
 public:
  FreeFieldIncrements(const FreeLatticeGreen& g, std::vector<Point> points)
      : points_(std::move(points)), field_(covariance(g, points_)) {}

  static Eigen::MatrixXd covariance(const FreeLatticeGreen& g,
                                    const std::vector<Point>& pts) {
    const int n = (int)pts.size();
    const double g0 = g.at_zero();
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double v = g.green_origin(pts[j] - pts[i]) + g0 - g.green_origin(pts[i]) -
                         g.green_origin(pts[j]);
        c(i, j) = c(j, i) = v;
      }
    return c;
  }

  const std::vector<Point>& points() const { return points_; }
  Eigen::VectorXd sample(Rng& rng) const { return field_.sample(rng); }

 private:
  std::vector<Point> points_;
  GaussianField field_;
};

}  // namespace interlace
