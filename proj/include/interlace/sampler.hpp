#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "interlace/green.hpp"
#include "interlace/parallel.hpp"
#include "interlace/point.hpp"
#include "interlace/potential.hpp"
#include "interlace/rng.hpp"

namespace interlace {

struct SamplerConfig {
  enum class EscapeMode { exact, truncation };

  std::uint64_t seed = 1;
  long replicas = 1;
  EscapeMode mode = EscapeMode::exact;
  double truncation_radius = 64.0;  // only used by the biased benchmark mode
  int workers = 1;
  int backward_steps = 8;  // bookkeeping prefix; occupation fields ignore it
};

/// One trajectory of the interlacement process restricted to those meeting K.
/// Only the visits to K are materialized: between two visits the walk is
/// resolved by an exact escape/entrance decision, and after the last visit it
/// is certified to never return. The backward ray never meets K again; a
/// finite prefix is kept for inspection. Holding times are drawn lazily from
/// the stream identified by (seed, replica, index).
struct Trajectory {
  int start_index = 0;
  double label = 0.0;
  std::vector<int> visits;      // indices into K.sites(), in visit order
  std::vector<Point> backward;  // backward prefix, all outside K
  std::uint64_t seed = 0;
  long replica = 0;
  long index = 0;
};

/// Occupation field of one sampled configuration over a window inside K.
struct OccupationField {
  std::vector<Point> sites;
  std::vector<int> window_k;      // window positions as K indices
  Eigen::VectorXd continuous;     // L_{x,u}
  Eigen::VectorXi discrete;       // visit counts
  double level = 0.0;
};

/// Poisson sampler of interlacement trajectories meeting a finite window K
/// on Z^d, d >= 3. Trajectory count is Poisson(u cap(K)); starts follow
/// e_K / cap(K); the forward walk is exact: whenever it steps out of K the
/// return-or-escape alternative is decided by a Bernoulli with the exact
/// hitting probability, and returns re-enter through the exact entrance
/// distribution (solved from G_K q = g(y,.)). All randomness derives from
/// counter-based streams, so results are identical for any worker count.
class InterlacementSampler {
 public:
  InterlacementSampler(const SiteSet<FreeLatticeGreen>& K, SamplerConfig cfg)
      : K_(&K), cfg_(cfg), d_(K.model().dim()) {
    const int n = K.size();
    for (int i = 0; i < n; ++i) site_index_.emplace(K.sites()[i], i);

    start_cdf_.resize(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += K.equilibrium()[i] / K.capacity();
      start_cdf_[i] = acc;
    }
    start_cdf_[n - 1] = 1.0;

    // Boundary ring: each site adjacent to K gets its hitting probability and
    // entrance distribution precomputed; forward sampling is lookups only.
    neighbor_.assign(n, {});
    for (int i = 0; i < n; ++i) {
      neighbor_[i].resize(2 * d_);
      for (int dir = 0; dir < 2 * d_; ++dir) {
        const Point y = step(K.sites()[i], dir);
        auto it = site_index_.find(y);
        if (it != site_index_.end()) {
          neighbor_[i][dir] = it->second;
        } else {
          auto bit = boundary_index_.find(y);
          int b;
          if (bit == boundary_index_.end()) {
            b = (int)boundary_.size();
            boundary_index_.emplace(y, b);
            boundary_.push_back(make_boundary(y));
          } else {
            b = bit->second;
          }
          neighbor_[i][dir] = -(b + 1);
        }
      }
    }
  }

  const SiteSet<FreeLatticeGreen>& window() const { return *K_; }
  const SamplerConfig& config() const { return cfg_; }

  /// All trajectories of one replica at level u_max, labels included.
  std::vector<Trajectory> sample_replica(long replica, double u_max) const {
    Rng meta(cfg_.seed, (std::uint64_t)replica, 0, 0);
    const long count = meta.poisson(u_max * K_->capacity());
    std::vector<Trajectory> out;
    out.reserve(count);
    for (long t = 0; t < count; ++t) {
      Rng rng(cfg_.seed, (std::uint64_t)replica, (std::uint64_t)(t + 1), 0);
      out.push_back(sample_trajectory(rng, u_max, replica, t));
    }
    return out;
  }

  /// Runs fn(replica, trajectories) for every replica, parallel over workers.
  /// fn must write only to per-replica slots; reductions are the caller's.
  template <class F>
  void for_each_replica(double u_max, F&& fn) const {
    parallel_for(cfg_.replicas, cfg_.workers, [&](long r) {
      fn(r, sample_replica(r, u_max));
    });
  }

  /// Occupation field of one replica's trajectories over a window inside K.
  OccupationField occupation_field(const std::vector<Trajectory>& trajectories,
                                   const std::vector<int>& window_k, double u) const {
    for (int w : window_k)
      if (w < 0 || w >= K_->size())
        throw std::invalid_argument("occupation_field: window must lie inside K");
    std::vector<int> slot(K_->size(), -1);
    OccupationField f;
    f.window_k = window_k;
    f.level = u;
    for (std::size_t i = 0; i < window_k.size(); ++i) {
      slot[window_k[i]] = (int)i;
      f.sites.push_back(K_->sites()[window_k[i]]);
    }
    f.continuous = Eigen::VectorXd::Zero((int)window_k.size());
    f.discrete = Eigen::VectorXi::Zero((int)window_k.size());
    for (const Trajectory& t : trajectories) {
      if (t.label > u) continue;
      Rng hold(t.seed, (std::uint64_t)t.replica, (std::uint64_t)(t.index + 1), 1);
      for (int v : t.visits) {
        if (slot[v] < 0) continue;
        f.continuous[slot[v]] += hold.exponential();
        f.discrete[slot[v]] += 1;
      }
    }
    return f;
  }

  /// Exact draw of the event {walk from K-site `start` never returns to K}
  /// (one step plus an escape certificate); used to cross-check e_K by
  /// Monte Carlo.
  bool sample_never_return(int start, Rng& rng) const {
    const int nb = neighbor_[start][(int)rng.below(2 * d_)];
    if (nb >= 0) return false;
    const BoundarySite& b = boundary_[-(nb + 1)];
    return !rng.bernoulli(b.hit_probability);
  }

 private:
  struct BoundarySite {
    Point site;
    double hit_probability = 0.0;
    std::vector<double> entry_cdf;  // conditional on returning
  };

  Point step(Point x, int dir) const {
    x[dir / 2] += (dir % 2) ? 1 : -1;
    return x;
  }

  BoundarySite make_boundary(const Point& y) const {
    BoundarySite b;
    b.site = y;
    Eigen::VectorXd q = K_->entry_distribution(y);
    double h = 0.0;
    for (int i = 0; i < q.size(); ++i) h += std::max(0.0, q[i]);
    b.hit_probability = std::min(h, 1.0);
    b.entry_cdf.resize(q.size());
    double acc = 0.0;
    for (int i = 0; i < q.size(); ++i) {
      acc += std::max(0.0, q[i]) / h;
      b.entry_cdf[i] = acc;
    }
    b.entry_cdf.back() = 1.0;
    return b;
  }

  Trajectory sample_trajectory(Rng& rng, double u_max, long replica, long index) const {
    Trajectory t;
    t.seed = cfg_.seed;
    t.replica = replica;
    t.index = index;
    t.label = rng.uniform(0.0, u_max);
    t.start_index = draw_from_cdf(start_cdf_, rng);
    if (cfg_.mode == SamplerConfig::EscapeMode::exact)
      forward_exact(t, rng);
    else
      forward_truncated(t, rng);
    if (cfg_.backward_steps > 0) backward_prefix(t, rng);
    return t;
  }

  void forward_exact(Trajectory& t, Rng& rng) const {
    int cur = t.start_index;
    t.visits.push_back(cur);
    for (;;) {
      const int nb = neighbor_[cur][(int)rng.below(2 * d_)];
      if (nb >= 0) {
        cur = nb;
        t.visits.push_back(cur);
        continue;
      }
      const BoundarySite& b = boundary_[-(nb + 1)];
      if (!rng.bernoulli(b.hit_probability)) return;  // certified escape
      cur = draw_from_cdf(b.entry_cdf, rng);
      t.visits.push_back(cur);
    }
  }

  // Benchmark mode: plain walk declared escaped once it leaves an R-ball
  // around K. Biased; kept for comparing against the exact certificates.
  void forward_truncated(Trajectory& t, Rng& rng) const {
    Point pos = K_->sites()[t.start_index];
    t.visits.push_back(t.start_index);
    const double r2 = cfg_.truncation_radius * cfg_.truncation_radius;
    for (;;) {
      pos = step(pos, (int)rng.below(2 * d_));
      auto it = site_index_.find(pos);
      if (it != site_index_.end()) {
        t.visits.push_back(it->second);
        continue;
      }
      double best = 1e300;
      for (const Point& s : K_->sites()) best = std::min(best, (double)(pos - s).norm_sq());
      if (best > r2) return;
    }
  }

  void backward_prefix(Trajectory& t, Rng& rng) const {
    Point cur = K_->sites()[t.start_index];
    double weights[2 * Point::kMaxDim];
    for (int n = 0; n < cfg_.backward_steps; ++n) {
      double total = 0.0;
      for (int dir = 0; dir < 2 * d_; ++dir) {
        const Point y = step(cur, dir);
        const double esc =
            site_index_.count(y) ? 0.0 : std::max(0.0, 1.0 - K_->hit_probability(y));
        weights[dir] = esc;
        total += esc;
      }
      const double pick = rng.uniform() * total;
      double acc = 0.0;
      int chosen = 2 * d_ - 1;
      for (int dir = 0; dir < 2 * d_; ++dir) {
        acc += weights[dir];
        if (pick <= acc) {
          chosen = dir;
          break;
        }
      }
      cur = step(cur, chosen);
      if (site_index_.count(cur))
        throw std::logic_error("sampler invariant violated: backward path re-entered K");
      t.backward.push_back(cur);
    }
  }

  static int draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
    const double x = rng.uniform();
    for (std::size_t i = 0; i < cdf.size(); ++i)
      if (x <= cdf[i]) return (int)i;
    return (int)cdf.size() - 1;
  }

  const SiteSet<FreeLatticeGreen>* K_;
  SamplerConfig cfg_;
  int d_;
  std::vector<double> start_cdf_;
  std::unordered_map<Point, int, PointHash> site_index_;
  std::vector<std::vector<int>> neighbor_;
  std::unordered_map<Point, int, PointHash> boundary_index_;
  std::vector<BoundarySite> boundary_;
};

}  // namespace interlace
