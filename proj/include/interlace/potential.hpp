#pragma once

#include <Eigen/Dense>
#include <concepts>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "interlace/point.hpp"

namespace interlace {

/// Anything that can evaluate a (symmetric, positive definite on finite
/// sets) Green density together with site weights. The free lattice uses
/// counting weights; weighted graphs carry rho.
template <class M>
concept GreenModel = requires(const M& m, const Point& x, const Point& y) {
  { m.green(x, y) } -> std::convertible_to<double>;
  { m.weight(x) } -> std::convertible_to<double>;
};

/// A finite set K of sites with its Green matrix G_K, equilibrium measure
/// e_K solving G_K e = 1, and capacity cap(K) = sum e_K. The equilibrium
/// measure gives entrance probabilities through
/// P_x[H_K < inf] = sum_{x' in K} g(x,x') e_K(x').
/// Immutable after construction; concurrent reads are safe.
template <GreenModel M>
class SiteSet {
 public:
  SiteSet(const M& model, std::vector<Point> sites) : model_(&model), sites_(std::move(sites)) {
    const int n = (int)sites_.size();
    if (n == 0) throw std::invalid_argument("SiteSet: empty site list");
    std::unordered_set<Point, PointHash> uniq(sites_.begin(), sites_.end());
    if ((int)uniq.size() != n)
      throw std::invalid_argument("SiteSet: duplicate sites make G_K singular");
    green_.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) green_(i, j) = green_(j, i) = model.green(sites_[i], sites_[j]);
    llt_.compute(green_);
    if (llt_.info() != Eigen::Success)
      throw std::runtime_error("SiteSet: Green matrix not positive definite");
    equilibrium_ = llt_.solve(Eigen::VectorXd::Ones(n));
    for (int i = 0; i < n; ++i)
      if (equilibrium_[i] < -1e-12)
        throw std::runtime_error("SiteSet: negative equilibrium weight (ill-conditioned G_K)");
    capacity_ = equilibrium_.sum();
  }

  const M& model() const { return *model_; }
  int size() const { return (int)sites_.size(); }
  const std::vector<Point>& sites() const { return sites_; }
  const Eigen::MatrixXd& green_matrix() const { return green_; }
  const Eigen::VectorXd& equilibrium() const { return equilibrium_; }
  double capacity() const { return capacity_; }

  int index_of(const Point& x) const {
    for (int i = 0; i < size(); ++i)
      if (sites_[i] == x) return i;
    return -1;
  }

  Eigen::VectorXd green_column(const Point& y) const {
    Eigen::VectorXd g(size());
    for (int i = 0; i < size(); ++i) g[i] = model_->green(y, sites_[i]);
    return g;
  }

  /// P_y[H_K < inf]; equals 1 for y in K.
  double hit_probability(const Point& y) const {
    return equilibrium_.dot(green_column(y));
  }

  /// Distribution of the first site of K hit from y, as sub-probabilities:
  /// q(x') = P_y[H_K < inf, X_{H_K} = x'], obtained from G_K q = g(y,.)|_K.
  /// The total mass of q is the hit probability.
  Eigen::VectorXd entry_distribution(const Point& y) const {
    return llt_.solve(green_column(y));
  }

 private:
  const M* model_;
  std::vector<Point> sites_;
  Eigen::MatrixXd green_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd equilibrium_;
  double capacity_ = 0.0;
};

template <GreenModel M>
double capacity(const M& model, const std::vector<Point>& sites) {
  return SiteSet<M>(model, sites).capacity();
}

/// Determinants g_I = det(G_I) and cofactor sums c_I (sum of the entries of
/// the cofactor matrix of G_I) for every subset I of K, with the conventions
/// g_empty = 1, c_empty = 0. cap(I) = c_I / g_I. Subsets are indexed by bit
/// masks over the site order of K; the table is permutation invariant.
class SubsetTable {
 public:
  template <GreenModel M>
  explicit SubsetTable(const SiteSet<M>& K) : SubsetTable(K.green_matrix()) {}

  explicit SubsetTable(const Eigen::MatrixXd& green) {
    const int n = (int)green.rows();
    if (n > 14) throw std::invalid_argument("SubsetTable: |K| <= 14 required (2^|K| work)");
    n_ = n;
    gdet_.assign(std::size_t{1} << n, 1.0);
    csum_.assign(std::size_t{1} << n, 0.0);
    std::vector<int> members;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      members.clear();
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) members.push_back(i);
      const int k = (int)members.size();
      Eigen::MatrixXd sub(k, k);
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = green(members[a], members[b]);
      Eigen::LLT<Eigen::MatrixXd> llt(sub);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("SubsetTable: submatrix not positive definite");
      double det = 1.0;
      for (int a = 0; a < k; ++a) det *= llt.matrixLLT()(a, a) * llt.matrixLLT()(a, a);
      const Eigen::VectorXd sol = llt.solve(Eigen::VectorXd::Ones(k));
      gdet_[mask] = det;                 // g_I > 0
      csum_[mask] = det * sol.sum();     // c_I = g_I * 1^T G_I^{-1} 1 > 0
    }
  }

  int set_size() const { return n_; }
  double g(std::uint32_t mask) const { return gdet_[mask]; }
  double c(std::uint32_t mask) const { return csum_[mask]; }
  double capacity(std::uint32_t mask) const { return csum_[mask] / gdet_[mask]; }

 private:
  int n_ = 0;
  std::vector<double> gdet_;
  std::vector<double> csum_;
};

}  // namespace interlace
