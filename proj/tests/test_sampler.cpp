#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "interlace/functionals.hpp"
#include "interlace/gaussfield.hpp"
#include "interlace/green.hpp"
#include "interlace/sampler.hpp"
#include "interlace/stats.hpp"

using namespace interlace;

namespace {
const std::vector<Point> kWindow{Point{0, 0, 0}, Point{1, 0, 0}, Point{0, 1, 1}};

SamplerConfig config(std::uint64_t seed, long replicas, int workers, int backward = 4) {
  SamplerConfig cfg;
  cfg.seed = seed;
  cfg.replicas = replicas;
  cfg.workers = workers;
  cfg.backward_steps = backward;
  return cfg;
}
}  // namespace

TEST_CASE("level zero produces no trajectories") {
  FreeLatticeGreen g(3);
  SiteSet<FreeLatticeGreen> K(g, kWindow);
  InterlacementSampler sampler(K, config(5, 1, 1));
  CHECK(sampler.sample_replica(0, 0.0).empty());
}

TEST_CASE("sampling is deterministic and scheduling independent") {
  FreeLatticeGreen g(3);
  SiteSet<FreeLatticeGreen> K(g, kWindow);
  auto run = [&](int workers) {
    InterlacementSampler sampler(K, config(99, 64, workers));
    std::vector<std::vector<Trajectory>> all(64);
    sampler.for_each_replica(1.5, [&](long r, const std::vector<Trajectory>& ts) {
      all[r] = ts;
    });
    return all;
  };
  auto a = run(1), b = run(4);
  REQUIRE(a.size() == b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    REQUIRE(a[r].size() == b[r].size());
    for (std::size_t t = 0; t < a[r].size(); ++t) {
      CHECK(a[r][t].label == b[r][t].label);
      CHECK(a[r][t].visits == b[r][t].visits);
      CHECK(a[r][t].backward == b[r][t].backward);
    }
  }
}

TEST_CASE("trajectory bookkeeping invariants") {
  FreeLatticeGreen g(3);
  SiteSet<FreeLatticeGreen> K(g, kWindow);
  InterlacementSampler sampler(K, config(7, 500, 2, 16));
  const double u = 2.0;
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& ts) {
    for (const auto& t : ts) {
      CHECK(t.label >= 0.0);
      CHECK(t.label <= u);
      REQUIRE(!t.visits.empty());
      CHECK(t.visits.front() == t.start_index);
      // the backward prefix never meets K (also hard-asserted inside)
      for (const Point& p : t.backward)
        for (const Point& s : K.sites()) CHECK(!(p == s));
    }
    auto f = sampler.occupation_field(ts, {0, 1, 2}, u);
    for (int i = 0; i < 3; ++i)
      CHECK((f.continuous[i] == 0.0) == (f.discrete[i] == 0));
  });
}

TEST_CASE("occupation fields are monotone under the label coupling") {
  FreeLatticeGreen g(3);
  SiteSet<FreeLatticeGreen> K(g, kWindow);
  InterlacementSampler sampler(K, config(31, 3000, 2, 0));
  const double umax = 2.0;
  sampler.for_each_replica(umax, [&](long r, const std::vector<Trajectory>& ts) {
    auto lo = sampler.occupation_field(ts, {0, 1, 2}, 0.7);
    auto hi = sampler.occupation_field(ts, {0, 1, 2}, 2.0);
    for (int i = 0; i < 3; ++i) {
      CHECK(lo.continuous[i] <= hi.continuous[i]);
      CHECK(lo.discrete[i] <= hi.discrete[i]);
    }
  });
}

TEST_CASE("vacancy probability and trajectory count match the capacity") {
  FreeLatticeGreen g(3);
  SiteSet<FreeLatticeGreen> K(g, kWindow);
  const long n = 40000;
  InterlacementSampler sampler(K, config(13, n, 2, 0));
  const double u = 1.0;
  std::vector<double> vac(n), count(n);
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& ts) {
    auto f = sampler.occupation_field(ts, {0, 1, 2}, u);
    vac[r] = f.discrete.sum() == 0 ? 1.0 : 0.0;
    count[r] = (double)ts.size();
  });
  auto v = MomentEstimate::from_samples("vacancy", vac);
  CHECK(std::abs(v.estimate - std::exp(-u * K.capacity())) <= 3.0 * v.se);
  auto c = MomentEstimate::from_samples("count", count);
  CHECK(std::abs(c.estimate - u * K.capacity()) <= 3.0 * c.se);
}

TEST_CASE("empirical Laplace functional matches the exact identity") {
  FreeLatticeGreen g(3);
  SiteSet<FreeLatticeGreen> K(g, kWindow);
  const long n = 40000;
  InterlacementSampler sampler(K, config(17, n, 2, 0));
  Eigen::VectorXd V = (Eigen::VectorXd(3) << 0.7, 0.4, 0.2).finished();
  const double u = 1.0;
  std::vector<double> xs(n);
  sampler.for_each_replica(u, [&](long r, const std::vector<Trajectory>& ts) {
    auto f = sampler.occupation_field(ts, {0, 1, 2}, u);
    xs[r] = std::exp(-V.dot(f.continuous));
  });
  auto est = MomentEstimate::from_samples("laplace", xs);
  const double ref = functionals::laplace_exact_subsets(K, V, u);
  CHECK(std::abs(est.estimate - ref) <= 3.0 * est.se);
}

TEST_CASE("truncation mode is a usable benchmark path") {
  FreeLatticeGreen g(3);
  SiteSet<FreeLatticeGreen> K(g, kWindow);
  SamplerConfig cfg = config(19, 2000, 2, 0);
  cfg.mode = SamplerConfig::EscapeMode::truncation;
  cfg.truncation_radius = 48.0;
  InterlacementSampler sampler(K, cfg);
  double mean = 0.0;
  sampler.for_each_replica(1.0, [&](long r, const std::vector<Trajectory>& ts) {
    auto f = sampler.occupation_field(ts, {0, 1, 2}, 1.0);
    mean += f.discrete.sum();
  });
  CHECK(mean > 0.0);  // biased mode, sanity only
}

TEST_CASE("BESQ^0 sampler") {
  Rng rng(23);
  SECTION("zero start sticks at zero") {
    for (int i = 0; i < 100; ++i) CHECK(sample_besq0(0.0, 1.3, rng) == 0.0);
  }
  SECTION("laplace transform and atom") {
    const double a2 = 1.7, tau = 0.6;
    const long n = 300000;
    std::vector<double> tr(n), zero(n);
    for (long i = 0; i < n; ++i) {
      const double x = sample_besq0(a2, tau, rng);
      tr[i] = std::exp(-0.8 * x);
      zero[i] = x == 0.0 ? 1.0 : 0.0;
    }
    auto t = MomentEstimate::from_samples("transform", tr);
    CHECK(std::abs(t.estimate - std::exp(-0.8 * a2 / (1.0 + 2.0 * tau * 0.8))) <= 3.0 * t.se);
    auto z = MomentEstimate::from_samples("atom", zero);
    CHECK(std::abs(z.estimate - std::exp(-a2 / (2.0 * tau))) <= 3.0 * z.se);
  }
}

TEST_CASE("pinned planar field sampler") {
  PotentialKernel2D a;
  std::vector<Point> pts{Point{0, 0}, Point{1, 0}, Point{2, 1}};
  PinnedFreeField2D psi(a, pts);
  Rng rng(29);
  const long n = 60000;
  std::vector<double> v1(n), v2(n), cross(n);
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd s = psi.sample(rng);
    REQUIRE(s[0] == 0.0);  // pinned at the origin
    v1[i] = s[1] * s[1];
    v2[i] = s[2] * s[2];
    cross[i] = s[1] * s[2];
  }
  auto e1 = MomentEstimate::from_samples("var1", v1);
  CHECK(std::abs(e1.estimate - 6.0 * a.at(1, 0)) <= 3.0 * e1.se);  // Var = 6 a(y)
  auto e2 = MomentEstimate::from_samples("var2", v2);
  CHECK(std::abs(e2.estimate - 6.0 * a.at(2, 1)) <= 3.0 * e2.se);
  auto ec = MomentEstimate::from_samples("cross", cross);
  const double ref = 3.0 * (a.at(1, 0) + a.at(2, 1) - a.at(1, 1));
  CHECK(std::abs(ec.estimate - ref) <= 3.0 * ec.se);
}

TEST_CASE("free-field increments match the differenced full field") {
  FreeLatticeGreen g(3);
  std::vector<Point> pts{Point{0, 0, 0}, Point{1, 0, 0}, Point{0, 2, 1}};
  FreeFieldIncrements phi(g, pts);
  // alternative construction: sample gamma with covariance g and difference
  Eigen::MatrixXd cov(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov(i, j) = g.green(pts[i], pts[j]);
  GaussianField gamma(cov);
  Rng r1(31), r2(37);
  const long n = 60000;
  std::vector<double> direct(n), alt(n);
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd s = phi.sample(r1);
    REQUIRE(s[0] == 0.0);
    direct[i] = s[1] * s[2];
    Eigen::VectorXd t = gamma.sample(r2);
    alt[i] = (t[1] - t[0]) * (t[2] - t[0]);
  }
  auto ed = MomentEstimate::from_samples("direct", direct);
  auto ea = MomentEstimate::from_samples("alt", alt);
  const double ref = g.green(pts[1], pts[2]) + g.at_zero() - g.green_origin(pts[1]) -
                     g.green_origin(pts[2]);
  CHECK(std::abs(ed.estimate - ref) <= 3.0 * ed.se);
  CHECK(std::abs(ea.estimate - ref) <= 3.0 * ea.se);
  const double se = std::sqrt(ed.se * ed.se + ea.se * ea.se);
  CHECK(std::abs(ed.estimate - ea.estimate) <= 3.0 * se);
}

TEST_CASE("covariance factorization reports indefinite matrices") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_AS(GaussianField(bad), std::runtime_error);
}

TEST_CASE("occupation field rejects windows outside K") {
  FreeLatticeGreen g(3);
  SiteSet<FreeLatticeGreen> K(g, kWindow);
  InterlacementSampler sampler(K, config(41, 1, 1));
  auto ts = sampler.sample_replica(0, 1.0);
  CHECK_THROWS_AS(sampler.occupation_field(ts, {0, 3}, 1.0), std::invalid_argument);
}
