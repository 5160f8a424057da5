// Acceptance suite: one pass/fail line per criterion, exercised at the full
// Monte Carlo budgets. Exit code = number of failed criteria.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "interlace/box2d.hpp"
#include "interlace/green.hpp"
#include "interlace/rods.hpp"
#include "interlace/verify.hpp"
#include "oracles.hpp"

using namespace interlace;

namespace {

int failures = 0;

void line(const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : " -- ",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void subfail(const SuiteReport& rep) {
  for (const auto& v : rep.verdicts)
    if (!v.pass)
      std::printf("       failing check: %s (estimate %.6g, reference %.6g, z %.3g) %s\n",
                  v.id.c_str(), v.estimate, v.reference, v.z, v.note.c_str());
}

SuiteReport partition(const SuiteReport& rep, bool reference_samplers) {
  auto is_ref = [](const std::string& id) {
    return id.rfind("besq_", 0) == 0 || id.rfind("pinned_", 0) == 0 ||
           id.rfind("product_", 0) == 0;
  };
  SuiteReport out;
  out.name = rep.name + (reference_samplers ? "/reference" : "/sampler-vs-exact");
  out.seed = rep.seed;
  for (const auto& v : rep.verdicts)
    if (is_ref(v.id) == reference_samplers) out.verdicts.push_back(v);
  out.finalize();
  return out;
}

std::string policy(const SuiteReport& rep) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d checks, %d/%d exceedances", (int)rep.verdicts.size(),
                rep.exceedances, rep.allowed_exceedances);
  return buf;
}

}  // namespace

int main() {
  const int workers = default_workers();
  std::printf("acceptance run (workers = %d)\n", workers);

  // Criterion 1: exact identities
  {
    SuiteReport rep = verify::suite_exact_id(7);
    line("criterion 1: exact-identity suite", rep.pass, policy(rep));
    if (!rep.pass) subfail(rep);
  }

  // Criterion 2: Green-layer accuracy
  {
    FreeLatticeGreen g(3);
    PotentialKernel2D a;
    bool ok = true;
    std::string detail;

    std::vector<Point> pts{Point{0, 0, 0}, Point{1, 0, 0},  Point{1, 1, 0}, Point{2, 1, 0},
                           Point{3, 2, 1}, Point{4, 4, 4},  Point{5, 0, 0}, Point{6, 3, 2},
                           Point{8, 8, 0}, Point{10, 3, 0}, Point{12, 9, 4}, Point{16, 0, 0},
                           Point{9, 9, 9}};
    auto oracle = oracles::green3_path_sum(pts, {192, 384, 768, 1536});
    double worst = 0.0, worst_dual = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      worst = std::max(worst, std::abs(g.green_origin(pts[i]) - oracle[i]));
      if (i < 6)
        worst_dual =
            std::max(worst_dual, std::abs(oracles::green3_quadrature(pts[i]) - oracle[i]));
    }
    ok &= worst <= 1e-6 && worst_dual <= 1e-6;
    char buf[96];
    std::snprintf(buf, sizeof buf, "path-sum err %.2e, dual-oracle err %.2e", worst,
                  worst_dual);
    detail += buf;

    const double lim = 3.0 / (2.0 * kPi);
    double band = 0.0;
    for (const Point& x : {Point{32, 0, 0}, Point{36, 18, 9}, Point{40, 40, 0},
                           Point{37, 37, 37}, Point{64, 0, 0}, Point{48, 27, 13},
                           Point{45, 33, 20}})
      band = std::max(band, std::abs(x.norm() * g.green_origin(x) / lim - 1.0));
    ok &= band <= 0.02;

    double exit_err = 0.0;
    for (int L : {5, 10, 20}) {
      DirichletBoxGreen box(L);
      for (auto [y1, y2] : {std::pair{Point{0, 0}, Point{0, 0}},
                            std::pair{Point{1, -2}, Point{0, 3}},
                            std::pair{Point{L / 2, -L / 3}, Point{-L / 2, 1}}}) {
        double rhs = -a(y1 - y2);
        for (const auto& [b, prob] : box.exit_distribution(y1)) rhs += prob * a(b - y2);
        exit_err = std::max(exit_err, std::abs(box.green(y1, y2) - rhs));
      }
    }
    ok &= exit_err <= 1e-6;
    std::snprintf(buf, sizeof buf, ", exit-identity err %.2e", exit_err);
    detail += buf;

    const Point y1{1, 1}, y2{-2, 3};
    double prev = 1e300;
    bool trend = true;
    for (int L : {10, 20, 40, 80}) {
      DirichletBoxGreen box(L);
      const double err = std::abs(box.green(y1, y1) - box.green(y1, y2) - a(y1 - y2));
      trend &= err < prev;
      prev = err;
    }
    ok &= trend;
    line("criterion 2: green-layer accuracy", ok, detail);
  }

  // Criteria 3 and 6 share the marginals suite
  verify::VerifyOptions opt;
  opt.seed = 20260811;
  opt.replicas = 100000;
  opt.draws = 1000000;
  opt.workers = workers;
  {
    SuiteReport rep = verify::suite_marginals(opt);
    SuiteReport sampler_part = partition(rep, false);
    SuiteReport reference_part = partition(rep, true);
    line("criterion 3: sampler vs exact functionals", sampler_part.pass,
         policy(sampler_part));
    if (!sampler_part.pass) subfail(sampler_part);

    SuiteReport high = verify::suite_high_u(opt);
    line("criterion 4: high-level field checks", high.pass, policy(high));
    if (!high.pass) subfail(high);

    SuiteReport rods = verify::suite_rods_coeffs(opt);
    line("criterion 5: rod-coefficient trends", rods.pass, policy(rods));
    if (!rods.pass) subfail(rods);

    line("criterion 6: reference samplers", reference_part.pass, policy(reference_part));
    if (!reference_part.pass) subfail(reference_part);
  }

  // Criterion 7: determinism across worker counts
  {
    verify::VerifyOptions small = opt;
    small.replicas = 4000;
    small.draws = 20000;
    small.workers = 1;
    SuiteReport one = verify::suite_marginals(small);
    small.workers = 8;
    SuiteReport eight = verify::suite_marginals(small);
    bool same = one.verdicts.size() == eight.verdicts.size();
    for (std::size_t i = 0; same && i < one.verdicts.size(); ++i)
      same = one.verdicts[i].estimate == eight.verdicts[i].estimate &&
             one.verdicts[i].se == eight.verdicts[i].se;

    // fresh models so the kernel tables are genuinely rebuilt per worker count
    FreeLatticeGreen g1(3), g8(3);
    std::vector<Point> lam{Point{0, 0}, Point{1, 0}};
    Eigen::VectorXd w = (Eigen::VectorXd(2) << 1, -1).finished();
    auto c1 = coeff_a_n(g1, lam, w, 1.0, 512, 4, 1);
    auto c8 = coeff_a_n(g8, lam, w, 1.0, 512, 4, 8);
    same = same && c1.a == c8.a && tau_n(g1, 512, 1) == tau_n(g8, 512, 8);
    line("criterion 7: determinism across worker counts", same,
         "statistics identical for workers in {1, 8}");
  }

  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
