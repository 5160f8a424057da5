#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "interlace/point.hpp"

namespace interlace {

/// Green function of planar simple random walk killed on exiting the square
/// U_L = [-L,L]^2: g_L(y1,y2) = expected visits to y2 before exit, starting
/// at y1. Solved once per source column from the sparse (I - P) system.
class DirichletBoxGreen {
 public:
  explicit DirichletBoxGreen(int L) : L_(L) {
    if (L < 1) throw std::invalid_argument("DirichletBoxGreen: L >= 1 required");
    side_ = 2 * L + 1;
    const int n = side_ * side_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * n);
    for (int i = 0; i < n; ++i) {
      auto [x, y] = site_of(i);
      trip.emplace_back(i, i, 1.0);
      for (auto [dx, dy] : kSteps) {
        int nx = x + dx, ny = y + dy;
        if (std::abs(nx) <= L_ && std::abs(ny) <= L_)
          trip.emplace_back(i, index_of(nx, ny), -0.25);
      }
    }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(m);
    if (solver_.info() != Eigen::Success)
      throw std::runtime_error("DirichletBoxGreen: factorization failed");
  }

  int L() const { return L_; }

  bool contains(const Point& y) const {
    return y.dim() == 2 && std::abs(y[0]) <= L_ && std::abs(y[1]) <= L_;
  }

  double green(const Point& y1, const Point& y2) const {
    if (!contains(y1) || !contains(y2))
      throw std::invalid_argument("DirichletBoxGreen: site outside the box");
    return column(y1)[index_of(y2[0], y2[1])];
  }

  /// Exit distribution P_{y1}[X_{T} = b] over the outer boundary (sites
  /// adjacent to the box); the last step carries probability 1/4 from each
  /// interior neighbor.
  std::vector<std::pair<Point, double>> exit_distribution(const Point& y1) const {
    if (!contains(y1)) throw std::invalid_argument("DirichletBoxGreen: site outside the box");
    const Eigen::VectorXd& g = column(y1);
    std::unordered_map<Point, double, PointHash> out;
    for (int i = 0; i < side_ * side_; ++i) {
      auto [x, y] = site_of(i);
      for (auto [dx, dy] : kSteps) {
        int nx = x + dx, ny = y + dy;
        if (std::abs(nx) > L_ || std::abs(ny) > L_) out[Point{nx, ny}] += 0.25 * g[i];
      }
    }
    return {out.begin(), out.end()};
  }

 private:
  static constexpr int kSteps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

  int index_of(int x, int y) const { return (x + L_) * side_ + (y + L_); }
  std::pair<int, int> site_of(int i) const { return {i / side_ - L_, i % side_ - L_}; }

  const Eigen::VectorXd& column(const Point& y1) const {
    const int idx = index_of(y1[0], y1[1]);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = columns_.find(idx);
    if (it != columns_.end()) return it->second;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(side_ * side_);
    rhs[idx] = 1.0;
    Eigen::VectorXd g = solver_.solve(rhs);
    return columns_.emplace(idx, std::move(g)).first->second;
  }

  int L_;
  int side_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  mutable std::mutex mu_;
  mutable std::unordered_map<int, Eigen::VectorXd> columns_;
};

}  // namespace interlace
