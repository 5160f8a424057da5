#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace interlace {

/// Gauss-Legendre nodes/weights on [-1,1], computed once per order by Newton
/// iteration on the Legendre polynomial and cached process-wide.
struct GaussLegendre {
  std::vector<double> node;
  std::vector<double> weight;

  static const GaussLegendre& of_order(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussLegendre gl;
    gl.node.resize(n);
    gl.weight.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        // Legendre recurrence for P_n(x) and P'_n(x).
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double w = 2.0 / ((1.0 - x * x) * dp * dp);
      gl.node[i] = -x;
      gl.weight[i] = w;
      gl.node[n - 1 - i] = x;
      gl.weight[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(gl)).first->second;
  }
};

/// Integrate f over [a,b] with an n-point Gauss-Legendre rule.
template <class F>
double gauss_panel(F&& f, double a, double b, int n) {
  const auto& gl = GaussLegendre::of_order(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += gl.weight[i] * f(mid + half * gl.node[i]);
  return s * half;
}

/// Integrate over [a,b] split into geometrically growing panels starting at
/// width `first`. Suits integrands that vary on a scale proportional to s.
template <class F>
double gauss_geometric(F&& f, double a, double b, double first, int order) {
  if (!(b > a)) return 0.0;
  double s = 0.0, lo = a, w = first;
  while (lo < b) {
    double hi = std::min(b, lo + w);
    s += gauss_panel(f, lo, hi, order);
    lo = hi;
    w *= 2.0;
  }
  return s;
}

}  // namespace interlace
