#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "interlace/rng.hpp"
#include "interlace/stats.hpp"

using namespace interlace;

TEST_CASE("standard errors validated on a known Bernoulli stream") {
  Rng rng(77);
  const double p = 0.3;
  const long n = 50000;
  std::vector<double> xs(n);
  for (long i = 0; i < n; ++i) xs[i] = rng.bernoulli(p) ? 1.0 : 0.0;
  auto est = MomentEstimate::from_samples("bernoulli", xs);
  const double se_ref = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(est.estimate - p) <= 4.0 * se_ref);
  CHECK(std::abs(est.se / se_ref - 1.0) < 0.05);
  auto verdict = TestVerdict::moment(est, p);
  CHECK(verdict.pass == (std::abs(verdict.z) <= 3.0));
}

TEST_CASE("moment verdict threshold semantics") {
  MomentEstimate m;
  m.id = "x";
  m.estimate = 1.05;
  m.se = 0.01;
  m.replicas = 100;
  CHECK_FALSE(TestVerdict::moment(m, 1.0).pass);  // z = 5
  CHECK(TestVerdict::moment(m, 1.03).pass);       // z = 2
  m.se = 0.0;
  m.estimate = 2.0;
  CHECK(TestVerdict::moment(m, 2.0).pass);  // exact match, se = 0
  CHECK_FALSE(TestVerdict::moment(m, 2.1).pass);
}

TEST_CASE("clopper-pearson interval") {
  SECTION("edge cases") {
    auto ci = binomial_ci(0, 1000);
    CHECK(ci.lo == 0.0);
    CHECK(ci.hi > 0.0);
    CHECK(ci.hi < 0.02);
    auto full = binomial_ci(1000, 1000);
    CHECK(full.hi == 1.0);
    CHECK(full.lo > 0.98);
  }
  SECTION("covers the truth") {
    auto ci = binomial_ci(5, 10, 0.99);
    CHECK(ci.lo < 0.5);
    CHECK(ci.hi > 0.5);
  }
  SECTION("rare event verdict") {
    CHECK(rare_event_verdict("t", 2, 100000, 2.3e-5).pass);
    CHECK_FALSE(rare_event_verdict("t", 50, 100000, 2.3e-5).pass);
  }
}

TEST_CASE("suite-level exceedance policy") {
  SuiteReport rep;
  rep.name = "demo";
  for (int i = 0; i < 20; ++i) {
    TestVerdict v;
    v.id = "stat" + std::to_string(i);
    v.se = 0.01;
    v.z = (i == 0) ? 4.0 : 0.5;  // one exceedance among twenty
    v.pass = std::abs(v.z) <= 3.0;
    rep.verdicts.push_back(v);
  }
  rep.finalize();
  CHECK(rep.statistical_tests == 20);
  CHECK(rep.exceedances == 1);
  CHECK(rep.allowed_exceedances >= 1);  // binomially expected at M = 20
  CHECK(rep.pass);

  // a deterministic failure is never excused
  rep.verdicts.push_back(TestVerdict::condition("must_hold", false));
  rep.finalize();
  CHECK_FALSE(rep.pass);
}
