#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "interlace/point.hpp"

namespace interlace {

/// Finite weighted graph with killing, carrying the Green density
///
///   g(x,x') = [(D - A)^{-1}]_{x,x'},
///
/// where A holds the symmetric edge weights rho_{x,x'} and D the diagonal
/// total weights rho(x) = sum_x' rho_{x,x'} + kappa_x. The walk jumps with
/// probability rho_{x,x'}/rho(x) and dies with probability kappa_x/rho(x);
/// g is the expected-visits count divided by rho(x'). Requires a connected
/// support and at least one positive killing weight, otherwise the system
/// is singular and construction fails.
class WeightedGraphGreen {
 public:
  WeightedGraphGreen(std::vector<Point> sites,
                     const std::vector<std::tuple<int, int, double>>& edges,
                     std::vector<double> killing)
      : sites_(std::move(sites)), killing_(std::move(killing)) {
    const int n = (int)sites_.size();
    if (n == 0) throw std::invalid_argument("weighted graph: no sites");
    if ((int)killing_.size() != n)
      throw std::invalid_argument("weighted graph: killing size mismatch");
    for (int i = 0; i < n; ++i) index_.emplace(sites_[i], i);
    if ((int)index_.size() != n) throw std::invalid_argument("weighted graph: duplicate sites");

    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    rho_.assign(n, 0.0);
    double total_kill = 0.0;
    for (int i = 0; i < n; ++i) {
      if (killing_[i] < 0) throw std::invalid_argument("weighted graph: negative killing");
      rho_[i] += killing_[i];
      total_kill += killing_[i];
    }
    for (auto [a, b, w] : edges) {
      if (a < 0 || b < 0 || a >= n || b >= n || a == b || w < 0)
        throw std::invalid_argument("weighted graph: bad edge");
      lap(a, b) -= w;
      lap(b, a) -= w;
      rho_[a] += w;
      rho_[b] += w;
    }
    if (total_kill <= 0.0)
      throw std::invalid_argument("weighted graph: needs a positive killing weight");
    if (!connected(edges, n))
      throw std::invalid_argument("weighted graph: support not connected");
    for (int i = 0; i < n; ++i) lap(i, i) += rho_[i];

    Eigen::LLT<Eigen::MatrixXd> llt(lap);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("weighted graph: singular system (insufficient killing?)");
    green_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
    green_ = 0.5 * (green_ + green_.transpose().eval());  // exact symmetry
  }

  int size() const { return (int)sites_.size(); }
  const std::vector<Point>& sites() const { return sites_; }

  int index_of(const Point& x) const {
    auto it = index_.find(x);
    if (it == index_.end()) throw std::invalid_argument("weighted graph: unknown site");
    return it->second;
  }

  double weight(const Point& x) const { return rho_[index_of(x)]; }
  double weight_at(int i) const { return rho_[i]; }

  double green(const Point& x, const Point& y) const {
    return green_(index_of(x), index_of(y));
  }
  double green_at(int i, int j) const { return green_(i, j); }

  const Eigen::MatrixXd& green_matrix() const { return green_; }

 private:
  static bool connected(const std::vector<std::tuple<int, int, double>>& edges, int n) {
    if (n == 1) return true;
    std::vector<std::vector<int>> adj(n);
    for (auto [a, b, w] : edges)
      if (w > 0) {
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
    }
    return count == n;
  }

  std::vector<Point> sites_;
  std::vector<double> killing_;
  std::vector<double> rho_;
  std::unordered_map<Point, int, PointHash> index_;
  Eigen::MatrixXd green_;
};

}  // namespace interlace
