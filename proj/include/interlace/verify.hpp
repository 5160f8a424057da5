#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "interlace/functionals.hpp"
#include "interlace/gaussfield.hpp"
#include "interlace/green.hpp"
#include "interlace/parallel.hpp"
#include "interlace/potential.hpp"
#include "interlace/rods.hpp"
#include "interlace/sampler.hpp"
#include "interlace/stats.hpp"
#include "interlace/weighted_graph.hpp"

namespace interlace {
namespace verify {

struct VerifyOptions {
  std::uint64_t seed = 1;
  long replicas = 100000;
  long draws = 1000000;  // for the direct reference samplers
  int workers = 1;
};

// ---------------------------------------------------------------------------
// Elementary verification operations
// ---------------------------------------------------------------------------

/// Empirical mean of exp{-sum V L} against the exact subsets-route value.
inline TestVerdict verify_laplace(const SiteSet<FreeLatticeGreen>& K, const Eigen::VectorXd& V,
                                  double u, long replicas, std::uint64_t seed, int workers) {
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.replicas = replicas;
  cfg.workers = workers;
  cfg.backward_steps = 0;
  InterlacementSampler sampler(K, cfg);
  std::vector<int> win(K.size());
  for (int i = 0; i < K.size(); ++i) win[i] = i;
  std::vector<double> xs(replicas);
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& ts) {
    auto f = sampler.occupation_field(ts, win, u);
    xs[r] = std::exp(-V.dot(f.continuous));
  });
  const double ref = functionals::laplace_exact_subsets(K, V, u);
  return TestVerdict::moment(MomentEstimate::from_samples("laplace_vs_exact", xs), ref);
}

/// Vacancy probability P[field == 0 on K] against exp{-u cap(K)}; switches
/// to an exact binomial interval when the event is rare.
inline TestVerdict verify_vacancy(const SiteSet<FreeLatticeGreen>& K, double u, long replicas,
                                  std::uint64_t seed, int workers,
                                  const std::string& id = "vacancy_vs_cap") {
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.replicas = replicas;
  cfg.workers = workers;
  cfg.backward_steps = 0;
  InterlacementSampler sampler(K, cfg);
  std::vector<int> win(K.size());
  for (int i = 0; i < K.size(); ++i) win[i] = i;
  std::vector<double> hits(replicas);
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& ts) {
    auto f = sampler.occupation_field(ts, win, u);
    hits[r] = (f.discrete.sum() == 0) ? 1.0 : 0.0;
  });
  const double ref = std::exp(-u * K.capacity());
  long successes = 0;
  for (double h : hits) successes += (h > 0.5);
  if (ref * (double)replicas < 25.0) {  // normal SE invalid for rare events
    TestVerdict v = rare_event_verdict(id + "_binomial", successes, replicas, ref);
    return v;
  }
  return TestVerdict::moment(MomentEstimate::from_samples(id, hits), ref);
}

/// Single-site marginal against BESQ^0(u, g(0)/2): Laplace transforms on a
/// lambda grid, the atom at zero, and a two-sampler coupling check.
inline std::vector<TestVerdict> verify_marginal_besq(const FreeLatticeGreen& g, const Point& x,
                                                     double u, long replicas,
                                                     std::uint64_t seed, int workers) {
  const double g0 = g.at_zero();
  SiteSet<FreeLatticeGreen> K(g, {x});
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.replicas = replicas;
  cfg.workers = workers;
  cfg.backward_steps = 0;
  InterlacementSampler sampler(K, cfg);
  const std::vector<double> lambdas{0.1, 0.5, 1.0, 2.0};
  std::vector<std::vector<double>> transf(lambdas.size(),
                                          std::vector<double>(replicas));
  std::vector<double> atom(replicas);
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& ts) {
    auto f = sampler.occupation_field(ts, {0}, u);
    const double L = f.continuous[0];
    for (std::size_t i = 0; i < lambdas.size(); ++i)
      transf[i][r] = std::exp(-lambdas[i] * L);
    atom[r] = (f.discrete[0] == 0) ? 1.0 : 0.0;
  });

  std::vector<TestVerdict> out;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lam = lambdas[i];
    const double ref = std::exp(-lam * u / (1.0 + g0 * lam));
    out.push_back(TestVerdict::moment(
        MomentEstimate::from_samples("marginal_laplace_l" + std::to_string(lam), transf[i]),
        ref));
  }
  out.push_back(TestVerdict::moment(MomentEstimate::from_samples("marginal_atom", atom),
                                    std::exp(-u / g0)));

  // coupled check: direct BESQ^0(u, g0/2) draws vs the interlacement draws
  std::vector<double> direct((std::size_t)replicas);
  parallel_for(replicas, workers, [&](long r) {
    Rng rng(seed ^ 0x5eed5eedull, (std::uint64_t)r);
    direct[r] = std::exp(-0.5 * sample_besq0(u, 0.5 * g0, rng));
  });
  auto a = MomentEstimate::from_samples("interlacement_half", transf[1]);
  auto b = MomentEstimate::from_samples("besq_half", direct);
  TestVerdict v;
  v.id = "marginal_coupled_besq";
  v.reference = b.estimate;
  v.estimate = a.estimate;
  v.se = std::sqrt(a.se * a.se + b.se * b.se);
  v.z = (a.estimate - b.estimate) / v.se;
  v.pass = std::abs(v.z) <= 3.0;
  v.note = "two-sampler agreement at lambda = 0.5";
  out.push_back(v);
  return out;
}

/// Two-point characteristic function of L_{x',u} - L_{x,u} on a t grid
/// against exp{-2u (g0-g)t^2 / (1 + (g0^2-g^2)t^2)}.
inline std::vector<TestVerdict> verify_two_point_char(const FreeLatticeGreen& g, const Point& x,
                                                      const Point& xp, double u, long replicas,
                                                      std::uint64_t seed, int workers) {
  const double g0 = g.at_zero();
  const double gx = g.green_origin(xp - x);
  SiteSet<FreeLatticeGreen> K(g, {x, xp});
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.replicas = replicas;
  cfg.workers = workers;
  cfg.backward_steps = 0;
  InterlacementSampler sampler(K, cfg);
  const std::vector<double> ts{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<std::vector<double>> re(ts.size(), std::vector<double>(replicas));
  std::vector<std::vector<double>> im(ts.size(), std::vector<double>(replicas));
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& trajs) {
    auto f = sampler.occupation_field(trajs, {0, 1}, u);
    const double d = f.continuous[1] - f.continuous[0];
    for (std::size_t i = 0; i < ts.size(); ++i) {
      re[i][r] = std::cos(ts[i] * d);
      im[i][r] = std::sin(ts[i] * d);
    }
  });
  std::vector<TestVerdict> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double t = ts[i];
    const double ref =
        std::exp(-2.0 * u * (g0 - gx) * t * t / (1.0 + (g0 * g0 - gx * gx) * t * t));
    out.push_back(TestVerdict::moment(
        MomentEstimate::from_samples("char_re_t" + std::to_string(t), re[i]), ref));
    out.push_back(TestVerdict::moment(
        MomentEstimate::from_samples("char_im_t" + std::to_string(t), im[i]), 0.0));
  }
  return out;
}

/// High-level checks: scaled increment covariance vs the free-field
/// increment covariance, flat mean field, variance decay, third cumulant
/// against the exact series coefficient, and the discrete-count variance
/// identity. All references are exact at finite u.
inline std::vector<TestVerdict> verify_high_level_clt(const FreeLatticeGreen& g,
                                                      const std::vector<Point>& xs, double u,
                                                      long replicas, std::uint64_t seed,
                                                      int workers) {
  const double g0 = g.at_zero();
  std::vector<Point> sites{Point::zero(g.dim())};
  sites.insert(sites.end(), xs.begin(), xs.end());
  SiteSet<FreeLatticeGreen> K(g, sites);
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.replicas = replicas;
  cfg.workers = workers;
  cfg.backward_steps = 0;
  InterlacementSampler sampler(K, cfg);
  const int m = (int)sites.size();
  std::vector<int> win(m);
  for (int i = 0; i < m; ++i) win[i] = i;

  // V for the third-cumulant and the discrete identity: centered over
  // {0, x1, x2, x3} with unit weights on the first three non-origin sites.
  Eigen::VectorXd vbar = Eigen::VectorXd::Zero(m);
  const int nv = std::min(3, m - 1);
  for (int i = 1; i <= nv; ++i) vbar[i] = 1.0;
  vbar[0] = -(double)nv;

  const double root2u = std::sqrt(2.0 * u);
  std::vector<std::vector<double>> inc(m - 1, std::vector<double>(replicas));
  std::vector<double> mean_ratio(replicas), sv(replicas), svd(replicas);
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& ts) {
    auto f = sampler.occupation_field(ts, win, u);
    for (int i = 1; i < m; ++i) inc[i - 1][r] = (f.continuous[i] - f.continuous[0]) / root2u;
    mean_ratio[r] = f.continuous[1] / u;
    double s = 0.0, sd = 0.0;
    for (int i = 0; i < m; ++i) {
      s += vbar[i] * f.continuous[i];
      sd += vbar[i] * (double)f.discrete[i];
    }
    sv[r] = s / root2u;
    svd[r] = sd / root2u;
  });

  std::vector<TestVerdict> out;
  for (int i = 1; i < m; ++i)
    for (int j = i; j < m; ++j) {
      std::vector<double> prod(replicas);
      for (long r = 0; r < replicas; ++r) prod[r] = inc[i - 1][r] * inc[j - 1][r];
      const double ref = g.green_origin(sites[j] - sites[i]) + g0 - g.green_origin(sites[i]) -
                         g.green_origin(sites[j]);
      out.push_back(TestVerdict::moment(
          MomentEstimate::from_samples(
              "increment_cov_" + std::to_string(i) + "_" + std::to_string(j), prod),
          ref));
    }

  auto mr = MomentEstimate::from_samples("mean_field_ratio", mean_ratio);
  out.push_back(TestVerdict::moment(mr, 1.0));
  {
    double mean = 0.0;
    for (double v : mean_ratio) mean += v;
    mean /= (double)replicas;
    double var = 0.0;
    for (double v : mean_ratio) var += (v - mean) * (v - mean);
    var /= (double)replicas - 1.0;
    const double bound = 2.0 * g0 / u * 1.1;
    out.push_back(TestVerdict::condition(
        "mean_field_variance_bound", var <= bound,
        "Var(L/u) = " + std::to_string(var) + " <= " + std::to_string(bound)));
  }

  {
    // third cumulant of sum V (L_x - L_0)/sqrt(2u): the log-transform series
    // gives kappa_3 = 3! u (V,(GV)^2 1), scaled by (2u)^{-3/2}
    auto coeffs = functionals::series_coefficients(K, vbar, u, 3);
    const double ref = 6.0 * coeffs[2] * std::pow(2.0 * u, -1.5);
    double mean = 0.0;
    for (double v : sv) mean += v;
    mean /= (double)replicas;
    std::vector<double> cubes(replicas);
    for (long r = 0; r < replicas; ++r) cubes[r] = std::pow(sv[r] - mean, 3);
    out.push_back(
        TestVerdict::moment(MomentEstimate::from_samples("third_cumulant", cubes), ref));
  }

  {
    // discrete identity: Var(sum V (l_x - l_0))/2u = Var(sum V phi) - (1/2) sum V^2
    double mean = 0.0;
    for (double v : svd) mean += v;
    mean /= (double)replicas;
    std::vector<double> sq(replicas);
    for (long r = 0; r < replicas; ++r) sq[r] = (svd[r] - mean) * (svd[r] - mean);
    double contvar = 0.0;  // E (sum V phi)^2 = (V, G V) by centering
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        contvar += vbar[i] * vbar[j] * g.green_origin(sites[j] - sites[i]);
    const double ref = contvar - 0.5 * vbar.squaredNorm();
    out.push_back(TestVerdict::moment(
        MomentEstimate::from_samples("discrete_variance_identity", sq), ref));
  }
  return out;
}

/// Discrete-count variance identity on its own sampling pass:
/// Var(sum V (l_x - l_0)) / (2u) against (V,GV) - (1/2) sum V^2 for the
/// centered extension of V. The reference is exact at every u.
inline TestVerdict verify_discrete_high_level(const FreeLatticeGreen& g,
                                              const std::vector<Point>& xs,
                                              const Eigen::VectorXd& v, double u,
                                              long replicas, std::uint64_t seed, int workers) {
  if ((long)xs.size() != v.size())
    throw std::invalid_argument("verify_discrete_high_level: V size mismatch");
  std::vector<Point> sites{Point::zero(g.dim())};
  sites.insert(sites.end(), xs.begin(), xs.end());
  Eigen::VectorXd vbar(v.size() + 1);
  vbar[0] = -v.sum();
  vbar.tail(v.size()) = v;
  SiteSet<FreeLatticeGreen> K(g, sites);
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.replicas = replicas;
  cfg.workers = workers;
  cfg.backward_steps = 0;
  InterlacementSampler sampler(K, cfg);
  std::vector<int> win(K.size());
  for (int i = 0; i < K.size(); ++i) win[i] = i;
  const double root2u = std::sqrt(2.0 * u);
  std::vector<double> svd(replicas);
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& ts) {
    auto f = sampler.occupation_field(ts, win, u);
    double sd = 0.0;
    for (int i = 0; i < K.size(); ++i) sd += vbar[i] * (double)f.discrete[i];
    svd[r] = sd / root2u;
  });
  double mean = 0.0;
  for (double x : svd) mean += x;
  mean /= (double)replicas;
  std::vector<double> sq(replicas);
  for (long r = 0; r < replicas; ++r) sq[r] = (svd[r] - mean) * (svd[r] - mean);
  double contvar = 0.0;
  for (int i = 0; i < K.size(); ++i)
    for (int j = 0; j < K.size(); ++j)
      contvar += vbar[i] * vbar[j] * g.green_origin(sites[j] - sites[i]);
  const double ref = contvar - 0.5 * vbar.squaredNorm();
  return TestVerdict::moment(
      MomentEstimate::from_samples("discrete_high_level_variance", sq), ref);
}

// ---------------------------------------------------------------------------
// Named suites
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Point> random_sites(Rng& rng, int d, int count, int box) {
  std::unordered_map<Point, int, PointHash> seen;
  std::vector<Point> out;
  while ((int)out.size() < count) {
    Point p = Point::zero(d);
    for (int i = 0; i < d; ++i) p[i] = (int)rng.below(2 * box + 1) - box;
    if (seen.emplace(p, 1).second) out.push_back(p);
  }
  return out;
}

inline WeightedGraphGreen random_graph(Rng& rng, int n) {
  std::vector<Point> sites;
  for (int i = 0; i < n; ++i) sites.push_back(Point{i});
  std::vector<std::tuple<int, int, double>> edges;
  for (int i = 1; i < n; ++i) {
    const int j = (int)rng.below(i);  // spanning tree keeps it connected
    edges.emplace_back(j, i, rng.uniform(0.5, 2.0));
  }
  for (int extra = 0; extra < n / 2; ++extra) {
    int a = (int)rng.below(n), b = (int)rng.below(n);
    if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b), rng.uniform(0.1, 1.0));
  }
  std::vector<double> kill(n, 0.0);
  kill[rng.below(n)] = rng.uniform(0.5, 1.5);
  for (int i = 0; i < n; ++i)
    if (rng.bernoulli(0.3)) kill[i] += rng.uniform(0.0, 0.5);
  return WeightedGraphGreen(std::move(sites), edges, std::move(kill));
}

}  // namespace detail

/// Deterministic exact-identity suite: determinant and cofactor identities,
/// capacity route agreement, Laplace route agreement, weighted-graph route
/// agreement. Runs in seconds.
inline SuiteReport suite_exact_id(std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "exact-id";
  rep.seed = seed;
  Rng rng(seed, 0xe9ac);
  FreeLatticeGreen g(3);

  double max_det = 0.0, max_cof = 0.0, max_cap = 0.0, max_routes = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const int k = 2 + (int)rng.below(7);  // |K| in 2..8
    SiteSet<FreeLatticeGreen> K(g, detail::random_sites(rng, 3, k, 4));
    SubsetTable table(K);
    Eigen::VectorXd v(k), vpos(k);
    for (int i = 0; i < k; ++i) {
      v[i] = rng.uniform(-0.45, 0.45);
      vpos[i] = rng.uniform(0.0, 0.12);
    }
    auto idrep = functionals::det_identities(K, v, &table);
    max_det = std::max(max_det, std::abs(idrep.det_lhs - idrep.det_rhs));
    max_cof = std::max(max_cof, std::abs(idrep.cofactor_lhs - idrep.cofactor_rhs));
    max_cap = std::max(max_cap, std::abs(K.capacity() - table.capacity((1u << k) - 1)));
    const double u = rng.uniform(0.0, 2.0);
    const double ls = functionals::laplace_exact_subsets(K, vpos, u, &table);
    const double lo = functionals::laplace_exact_operator(K, vpos, u);
    max_routes = std::max(max_routes, std::abs(ls - lo));
  }
  rep.verdicts.push_back(TestVerdict::absolute("determinant_identity_max_err", max_det, 0.0, 1e-9));
  rep.verdicts.push_back(TestVerdict::absolute("cofactor_identity_max_err", max_cof, 0.0, 1e-9));
  rep.verdicts.push_back(TestVerdict::absolute("capacity_route_max_err", max_cap, 0.0, 1e-10));
  rep.verdicts.push_back(
      TestVerdict::absolute("laplace_route_max_err", max_routes, 0.0, 1e-10));

  double max_weighted = 0.0;
  for (int inst = 0; inst < 40; ++inst) {
    WeightedGraphGreen wg = detail::random_graph(rng, 2 + (int)rng.below(7));
    SiteSet<WeightedGraphGreen> K(wg, wg.sites());
    const double scale = wg.green_matrix().cwiseAbs().maxCoeff();
    Eigen::VectorXd v(K.size());
    for (int i = 0; i < K.size(); ++i)
      v[i] = rng.uniform(0.0, 0.3 / (scale * K.size()));
    auto wr = functionals::weighted_graph_functionals(K, v, rng.uniform(0.0, 2.0));
    max_weighted =
        std::max(max_weighted, std::abs(wr.exponential_moment_form - wr.laplace_form));
  }
  rep.verdicts.push_back(
      TestVerdict::absolute("weighted_route_max_err", max_weighted, 0.0, 1e-10));
  rep.finalize();
  return rep;
}

/// Sampler-versus-exact suite at u = 1 plus the reference samplers.
inline SuiteReport suite_marginals(const VerifyOptions& opt) {
  SuiteReport rep;
  rep.name = "marginals";
  rep.seed = opt.seed;
  FreeLatticeGreen g(3);
  const double g0 = g.at_zero();
  PotentialKernel2D a;

  // fixed 5-point window
  std::vector<Point> sites{Point{0, 0, 0}, Point{1, 0, 0}, Point{0, 1, 1}, Point{2, -1, 0},
                           Point{-1, 2, 1}};
  SiteSet<FreeLatticeGreen> K(g, sites);
  Eigen::VectorXd V(5);
  V << 0.8, 0.3, 0.5, 0.2, 0.4;
  rep.verdicts.push_back(verify_laplace(K, V, 1.0, opt.replicas, opt.seed + 1, opt.workers));
  rep.verdicts.push_back(verify_vacancy(K, 1.0, opt.replicas, opt.seed + 2, opt.workers));

  for (auto v : verify_marginal_besq(g, Point{0, 0, 0}, 1.0, opt.replicas, opt.seed + 3,
                                     opt.workers))
    rep.verdicts.push_back(v);
  for (auto v : verify_two_point_char(g, Point{0, 0, 0}, Point{2, 1, 0}, 1.0, opt.replicas,
                                      opt.seed + 4, opt.workers))
    rep.verdicts.push_back(v);

  // equilibrium measure and capacity from exact escape frequencies
  {
    SamplerConfig cfg;
    cfg.seed = opt.seed + 5;
    cfg.replicas = opt.replicas;
    cfg.workers = opt.workers;
    InterlacementSampler sampler(K, cfg);
    std::vector<std::vector<double>> esc(K.size(), std::vector<double>(opt.replicas));
    parallel_for(opt.replicas, opt.workers, [&](long r) {
      Rng rng(opt.seed + 5, (std::uint64_t)r, 77);
      for (int i = 0; i < K.size(); ++i)
        esc[i][r] = sampler.sample_never_return(i, rng) ? 1.0 : 0.0;
    });
    std::vector<double> capsum(opt.replicas, 0.0);
    for (int i = 0; i < K.size(); ++i) {
      auto est = MomentEstimate::from_samples("equilibrium_" + std::to_string(i), esc[i]);
      rep.verdicts.push_back(TestVerdict::moment(est, K.equilibrium()[i]));
      for (long r = 0; r < opt.replicas; ++r) capsum[r] += esc[i][r];
    }
    rep.verdicts.push_back(TestVerdict::moment(
        MomentEstimate::from_samples("capacity_escape_frequency", capsum), K.capacity()));
  }

  // P[no trajectory at all] = exp(-u cap K)
  {
    SamplerConfig cfg;
    cfg.seed = opt.seed + 6;
    cfg.replicas = opt.replicas;
    cfg.workers = opt.workers;
    cfg.backward_steps = 2;
    InterlacementSampler sampler(K, cfg);
    std::vector<double> none(opt.replicas);
    sampler.for_each_replica(1.0, [&](long r, const std::vector<Trajectory>& ts) {
      long kept = 0;
      for (const auto& t : ts) kept += (t.label <= 1.0);
      none[r] = kept == 0 ? 1.0 : 0.0;
    });
    rep.verdicts.push_back(TestVerdict::moment(
        MomentEstimate::from_samples("no_trajectory_probability", none),
        std::exp(-K.capacity())));
  }

  // rare-event vacancy with the binomial interval (singleton, large u)
  {
    SiteSet<FreeLatticeGreen> K0(g, {Point{0, 0, 0}});
    rep.verdicts.push_back(verify_vacancy(K0, 20.0 * g0, opt.replicas / 4, opt.seed + 7,
                                          opt.workers, "vacancy_rare"));
  }

  // non-factorization probe: P[L_{x'} > L_x, L_{x''} = L_x] >=
  // e^{-u cap{x,x''}} - e^{-u cap{x,x',x''}} (witnessed at 3 SE)
  {
    const Point x{0, 0, 0}, xp{1, 0, 0}, xpp{0, 1, 0};
    SiteSet<FreeLatticeGreen> K3(g, {x, xp, xpp});
    SamplerConfig cfg;
    cfg.seed = opt.seed + 8;
    cfg.replicas = opt.replicas;
    cfg.workers = opt.workers;
    InterlacementSampler sampler(K3, cfg);
    std::vector<double> ev(opt.replicas);
    sampler.for_each_replica(1.0, [&](long r, const std::vector<Trajectory>& ts) {
      auto f = sampler.occupation_field(ts, {0, 1, 2}, 1.0);
      ev[r] = (f.continuous[1] > f.continuous[0] && f.continuous[2] == f.continuous[0]) ? 1.0
                                                                                        : 0.0;
    });
    const double cap2 = capacity(g, {x, xpp});
    const double bound = std::exp(-cap2) - std::exp(-K3.capacity());
    auto est = MomentEstimate::from_samples("non_factorization_probe", ev);
    TestVerdict v;
    v.id = est.id;
    v.reference = bound;
    v.estimate = est.estimate;
    v.se = est.se;
    v.z = (est.estimate - bound) / est.se;
    v.pass = est.estimate >= bound - 3.0 * est.se && est.estimate > 0.0;
    v.note = "one-sided lower bound";
    rep.verdicts.push_back(v);
  }

  // discrete occupation-time functional against the transformed exact value
  {
    Eigen::VectorXd vd(5);
    vd << 0.3, 0.15, 0.2, 0.1, 0.25;
    SamplerConfig cfg;
    cfg.seed = opt.seed + 9;
    cfg.replicas = opt.replicas;
    cfg.workers = opt.workers;
    InterlacementSampler sampler(K, cfg);
    std::vector<double> xs(opt.replicas);
    sampler.for_each_replica(1.0, [&](long r, const std::vector<Trajectory>& ts) {
      auto f = sampler.occupation_field(ts, {0, 1, 2, 3, 4}, 1.0);
      double s = 0.0;
      for (int i = 0; i < 5; ++i) s += vd[i] * (double)f.discrete[i];
      xs[r] = std::exp(-s);
    });
    rep.verdicts.push_back(
        TestVerdict::moment(MomentEstimate::from_samples("discrete_laplace_vs_exact", xs),
                            functionals::discrete_laplace(K, vd, 1.0)));
  }

  // direct BESQ^0 sampler against its Laplace transform and atom
  {
    const double a2 = 1.0, tau = 0.5 * g0;
    const std::vector<double> lambdas{0.1, 0.5, 1.0, 2.0};
    std::vector<std::vector<double>> tr(lambdas.size(), std::vector<double>(opt.draws));
    std::vector<double> zero(opt.draws);
    parallel_for(opt.draws, opt.workers, [&](long i) {
      Rng rng(opt.seed + 10, (std::uint64_t)i);
      const double x = sample_besq0(a2, tau, rng);
      for (std::size_t l = 0; l < lambdas.size(); ++l) tr[l][i] = std::exp(-lambdas[l] * x);
      zero[i] = (x == 0.0) ? 1.0 : 0.0;
    });
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const double ref = std::exp(-lambdas[l] * a2 / (1.0 + 2.0 * tau * lambdas[l]));
      rep.verdicts.push_back(TestVerdict::moment(
          MomentEstimate::from_samples("besq_laplace_l" + std::to_string(lambdas[l]), tr[l]),
          ref));
    }
    rep.verdicts.push_back(TestVerdict::moment(
        MomentEstimate::from_samples("besq_atom", zero), std::exp(-a2 / (2.0 * tau))));
  }

  // pinned planar field: covariance entries and the energy identity
  {
    std::vector<Point> pts{Point{0, 0}, Point{1, 0}, Point{0, 1}, Point{2, 1}};
    PinnedFreeField2D psi(a, pts);
    const long n = opt.replicas;
    std::vector<std::vector<double>> prods;
    std::vector<double> refs;
    std::vector<std::string> ids;
    for (std::size_t i = 1; i < pts.size(); ++i)
      for (std::size_t j = i; j < pts.size(); ++j) {
        prods.emplace_back(n);
        refs.push_back(3.0 * (a(pts[i]) + a(pts[j]) - a(pts[j] - pts[i])));
        ids.push_back("pinned_cov_" + std::to_string(i) + "_" + std::to_string(j));
      }
    Eigen::VectorXd w = (Eigen::VectorXd(4) << 2, -1, -1, 0).finished();
    std::vector<double> wvar(n);
    parallel_for(n, opt.workers, [&](long r) {
      Rng rng(opt.seed + 11, (std::uint64_t)r);
      Eigen::VectorXd s = psi.sample(rng);
      int slot = 0;
      for (std::size_t i = 1; i < pts.size(); ++i)
        for (std::size_t j = i; j < pts.size(); ++j) prods[slot++][r] = s[i] * s[j];
      const double ws = w.dot(s);
      wvar[r] = ws * ws;
    });
    for (std::size_t k = 0; k < prods.size(); ++k)
      rep.verdicts.push_back(
          TestVerdict::moment(MomentEstimate::from_samples(ids[k], prods[k]), refs[k]));
    rep.verdicts.push_back(
        TestVerdict::moment(MomentEstimate::from_samples("pinned_energy_identity", wvar),
                            energy(a, pts, w)));
  }

  // product limit law: E[exp{i z R sum W psi}] vs the closed form
  {
    std::vector<Point> pts{Point{0, 0}, Point{1, 0}, Point{0, 1}};
    Eigen::VectorXd w = (Eigen::VectorXd(3) << 2, -1, -1).finished();
    PinnedFreeField2D psi(a, pts);
    const double alpha = 0.8;
    const double ew = energy(a, pts, w);
    const std::vector<double> zs{0.05, 0.15, 0.3};
    const long n = opt.draws / 2;
    std::vector<std::vector<double>> re(zs.size(), std::vector<double>(n));
    parallel_for(n, opt.workers, [&](long r) {
      Rng rng(opt.seed + 12, (std::uint64_t)r);
      const double R = std::sqrt(sample_besq0(alpha, 3.0 / (2.0 * kPi), rng));
      const double s = R * w.dot(psi.sample(rng));
      for (std::size_t i = 0; i < zs.size(); ++i) re[i][r] = std::cos(zs[i] * s);
    });
    for (std::size_t i = 0; i < zs.size(); ++i) {
      const double ref = limit_char_function(alpha, ew, zs[i]).real();
      rep.verdicts.push_back(TestVerdict::moment(
          MomentEstimate::from_samples("product_limit_z" + std::to_string(zs[i]), re[i]), ref));
    }
  }

  rep.finalize();
  return rep;
}

/// High-u suite: covariance of scaled increments, flat field, third
/// cumulant, discrete variance identity at u = 100.
inline SuiteReport suite_high_u(const VerifyOptions& opt) {
  SuiteReport rep;
  rep.name = "high-u";
  rep.seed = opt.seed;
  FreeLatticeGreen g(3);
  std::vector<Point> xs{Point{1, 0, 0}, Point{0, 2, 0}, Point{2, 2, 1}, Point{-1, 1, 3}};
  for (auto v : verify_high_level_clt(g, xs, 100.0, opt.replicas, opt.seed + 21, opt.workers))
    rep.verdicts.push_back(v);
  // the spec'd three-point discrete check on its own pass
  std::vector<Point> x3{Point{1, 0, 0}, Point{0, 1, 0}, Point{1, 1, 1}};
  rep.verdicts.push_back(verify_discrete_high_level(
      g, x3, (Eigen::VectorXd(3) << 1.0, -0.5, 0.75).finished(), 100.0, opt.replicas,
      opt.seed + 22, opt.workers));
  rep.finalize();
  return rep;
}

/// Rod-coefficient suite over N in {2^8 .. 2^16}.
inline SuiteReport suite_rods_coeffs(const VerifyOptions& opt) {
  SuiteReport rep;
  rep.name = "rods-coeffs";
  rep.seed = opt.seed;
  FreeLatticeGreen g(3);
  PotentialKernel2D a;
  std::vector<Point> lam{Point{0, 0}, Point{1, 0}, Point{0, 1}};
  Eigen::VectorXd w = (Eigen::VectorXd(3) << 2, -1, -1).finished();
  const double alpha = 1.0;
  const double ew = energy(a, lam, w);

  std::vector<long> grid;
  for (int k = 8; k <= 16; ++k) grid.push_back(1L << k);
  std::vector<double> a2s, a3s, taus, t2s, t3s;
  bool a1_zero = true;
  for (long n : grid) {
    auto c = coeff_a_n(g, lam, w, alpha, n, 3, opt.workers);
    auto t = coeff_tilde_a_n(g, alpha, n, 3, opt.workers);
    a1_zero = a1_zero && (c.a[0] == 0.0);
    a2s.push_back(c.a[1]);
    a3s.push_back(c.a[2]);
    t2s.push_back(t.a[1]);
    t3s.push_back(t.a[2]);
    taus.push_back(tau_n(g, n, opt.workers));
  }
  rep.verdicts.push_back(TestVerdict::condition("a1_exactly_zero", a1_zero));

  bool dec = true;
  for (std::size_t i = 1; i < a3s.size(); ++i) dec &= std::abs(a3s[i]) < std::abs(a3s[i - 1]);
  rep.verdicts.push_back(TestVerdict::condition("a3_strictly_decreasing", dec));
  {
    const double ratio = std::abs(a3s.back()) / std::abs(a3s.front());
    // The observed decay is C/sqrt(log N) (consecutive ratios match
    // sqrt(log N_i / log N_{i+1}) to four digits), which forces the ratio
    // over this grid to sqrt(8/16) ~ 0.707. Halving would need a grid
    // spanning a factor > 4 in log N.
    rep.verdicts.push_back(TestVerdict::condition(
        "a3_final_below_half_initial", ratio < 0.5,
        "ratio = " + std::to_string(ratio) + "; decay follows C/sqrt(log N)"));
  }
  {
    bool err_dec = std::abs(a2s.back() - 0.5 * alpha * ew) <
                   std::abs(a2s.front() - 0.5 * alpha * ew);
    for (std::size_t i = 1; i < a2s.size(); ++i)
      err_dec &= std::abs(a2s[i] - 0.5 * alpha * ew) <= std::abs(a2s[i - 1] - 0.5 * alpha * ew);
    rep.verdicts.push_back(TestVerdict::condition("a2_error_decreasing", err_dec));
    const std::vector<long> tail_n(grid.end() - 4, grid.end());
    const double extrap =
        extrapolate_in_inverse_log(tail_n, {a2s.end() - 4, a2s.end()});
    rep.verdicts.push_back(TestVerdict::absolute("a2_extrapolated", extrap, 0.5 * alpha * ew,
                                                 0.02 * 0.5 * alpha * ew));
  }
  {
    const std::vector<long> tail_n(grid.end() - 4, grid.end());
    const double e2 = extrapolate_in_inverse_log(tail_n, {t2s.end() - 4, t2s.end()});
    const double e3 = extrapolate_in_inverse_log(tail_n, {t3s.end() - 4, t3s.end()});
    const double r2 = alpha * 3.0 / kPi, r3 = alpha * 9.0 / (kPi * kPi);
    rep.verdicts.push_back(TestVerdict::absolute("tilde_a2_extrapolated", e2, r2, 0.02 * r2));
    rep.verdicts.push_back(TestVerdict::absolute("tilde_a3_extrapolated", e3, r3, 0.02 * r3));
    const double et = extrapolate_in_inverse_log(tail_n, {taus.end() - 4, taus.end()});
    rep.verdicts.push_back(TestVerdict::absolute("tau_extrapolated", et, 3.0 / (2.0 * kPi),
                                                 0.01 * 3.0 / (2.0 * kPi)));
  }
  {
    // scaling consistency: coefficients at (gamma u, V/sqrt(gamma))
    const long n = 1024;
    const double logn = std::log((double)n);
    const double u = alpha * logn / (double)n, gamma = 2.5;
    RodOperator base(g, lam, w / std::sqrt(logn), n, opt.workers);
    RodOperator scaled(g, lam, w / std::sqrt(logn * gamma), n, opt.workers);
    auto c0 = rod_series_coefficients(base, u, 6);
    auto c1 = rod_series_coefficients(scaled, gamma * u, 6);
    double max_rel = 0.0;
    for (int k = 2; k <= 6; ++k) {
      const double want = std::pow(gamma, 1.0 - 0.5 * k) * c0[k - 1];
      max_rel = std::max(max_rel, std::abs((c1[k - 1] - want) / want));
    }
    rep.verdicts.push_back(
        TestVerdict::absolute("scaling_law_max_rel_err", max_rel, 0.0, 1e-10));
  }
  {
    // FFT vs dense reference on a small instance
    Eigen::VectorXd w2 = (Eigen::VectorXd(2) << 1, -1).finished();
    std::vector<Point> lam2{Point{0, 0}, Point{1, 0}};
    RodOperator op(g, lam2, w2 / std::sqrt(std::log(1000.0)), 1000, opt.workers);
    Eigen::MatrixXd f = Eigen::MatrixXd::Ones(2, 1000);
    for (int rep_i = 0; rep_i < 2; ++rep_i) f = op.apply(f);  // exercise deeper powers
    const double diff = (op.apply(f) - op.apply_dense(f)).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    rep.verdicts.push_back(
        TestVerdict::absolute("fft_vs_dense_max_err", diff / scale, 0.0, 1e-10));
  }
  rep.finalize();
  return rep;
}

}  // namespace verify
}  // namespace interlace
