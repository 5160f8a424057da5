#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace interlace {

/// A lattice site in Z^d, d <= 8. Value type with cheap copies; the
/// dimension travels with the point so mixed-dimension bugs surface early.
class Point {
 public:
  static constexpr int kMaxDim = 8;

  Point() = default;

  Point(std::initializer_list<int> cs) {
    if (cs.size() > kMaxDim) throw std::invalid_argument("Point: dimension > 8");
    dim_ = static_cast<int>(cs.size());
    int i = 0;
    for (int c : cs) c_[i++] = c;
  }

  explicit Point(const std::vector<int>& cs) {
    if (cs.size() > kMaxDim) throw std::invalid_argument("Point: dimension > 8");
    dim_ = static_cast<int>(cs.size());
    for (int i = 0; i < dim_; ++i) c_[i] = cs[i];
  }

  static Point zero(int d) {
    Point p;
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("Point: bad dimension");
    p.dim_ = d;
    return p;
  }

  static Point unit(int d, int axis) {
    Point p = zero(d);
    p.c_[axis] = 1;
    return p;
  }

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[i]; }
  int& operator[](int i) { return c_[i]; }

  Point operator-(const Point& o) const {
    check_dim(o);
    Point r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] -= o.c_[i];
    return r;
  }

  Point operator+(const Point& o) const {
    check_dim(o);
    Point r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] += o.c_[i];
    return r;
  }

  Point operator-() const {
    Point r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] = -r.c_[i];
    return r;
  }

  bool operator==(const Point& o) const {
    if (dim_ != o.dim_) return false;
    for (int i = 0; i < dim_; ++i)
      if (c_[i] != o.c_[i]) return false;
    return true;
  }
  bool operator!=(const Point& o) const { return !(*this == o); }

  bool operator<(const Point& o) const {  // lexicographic, for ordered maps
    if (dim_ != o.dim_) return dim_ < o.dim_;
    for (int i = 0; i < dim_; ++i)
      if (c_[i] != o.c_[i]) return c_[i] < o.c_[i];
    return false;
  }

  long long norm1() const {
    long long s = 0;
    for (int i = 0; i < dim_; ++i) s += std::abs((long long)c_[i]);
    return s;
  }

  long long norm_sq() const {
    long long s = 0;
    for (int i = 0; i < dim_; ++i) s += (long long)c_[i] * c_[i];
    return s;
  }

  double norm() const { return std::sqrt((double)norm_sq()); }

  int norm_inf() const {
    int m = 0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
    return m;
  }

  /// Representative of the symmetry orbit under coordinate permutations and
  /// sign flips: absolute values sorted in decreasing order. The simple
  /// random walk Green function is constant on these orbits.
  Point canonical() const {
    Point r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] = std::abs(r.c_[i]);
    for (int i = 1; i < dim_; ++i)  // insertion sort, dim <= 8
      for (int j = i; j > 0 && r.c_[j] > r.c_[j - 1]; --j)
        std::swap(r.c_[j], r.c_[j - 1]);
    return r;
  }

  std::size_t hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ (std::uint64_t)dim_;
    for (int i = 0; i < dim_; ++i) {
      h ^= (std::uint64_t)(std::uint32_t)c_[i] + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xbf58476d1ce4e5b9ull;
    }
    return (std::size_t)(h ^ (h >> 31));
  }

  friend std::ostream& operator<<(std::ostream& os, const Point& p) {
    os << '(';
    for (int i = 0; i < p.dim_; ++i) os << (i ? "," : "") << p.c_[i];
    return os << ')';
  }

 private:
  void check_dim(const Point& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("Point: dimension mismatch");
  }

  std::array<int, kMaxDim> c_{};
  int dim_ = 0;
};

struct PointHash {
  std::size_t operator()(const Point& p) const { return p.hash(); }
};

}  // namespace interlace
