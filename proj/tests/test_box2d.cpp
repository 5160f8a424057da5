#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "interlace/box2d.hpp"
#include "interlace/green.hpp"

using namespace interlace;

TEST_CASE("L = 1 box against the killed-walk power series") {
  DirichletBoxGreen box(1);
  // brute force: 9 interior sites, transition matrix powers until decay
  std::vector<Point> sites;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y) sites.push_back(Point{x, y});
  const int n = (int)sites.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((sites[i] - sites[j]).norm_sq() == 1) p(i, j) = 0.25;
  Eigen::MatrixXd total = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < 400 && power.norm() > 1e-16; ++k) {
    power = power * p;
    total += power;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK_THAT(box.green(sites[i], sites[j]), Catch::Matchers::WithinAbs(total(i, j), 1e-12));
}

TEST_CASE("box green function is symmetric and rejects outside arguments") {
  DirichletBoxGreen box(4);
  // two independent sparse solves; symmetric up to solver roundoff
  CHECK_THAT(box.green(Point{1, 2}, Point{-3, 0}),
             Catch::Matchers::WithinAbs(box.green(Point{-3, 0}, Point{1, 2}), 1e-12));
  CHECK_THROWS_AS(box.green(Point{5, 0}, Point{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(box.green(Point{0, 0}, Point{0, -5}), std::invalid_argument);
}

TEST_CASE("exit decomposition identity against the potential kernel") {
  PotentialKernel2D a;
  for (int L : {5, 10, 20}) {
    DirichletBoxGreen box(L);
    for (auto [y1, y2] : {std::pair{Point{0, 0}, Point{0, 0}},
                          std::pair{Point{1, -2}, Point{0, 3}},
                          std::pair{Point{L / 2, 0}, Point{-L / 2, 1}}}) {
      double rhs = -a(y1 - y2);
      for (const auto& [b, prob] : box.exit_distribution(y1)) rhs += prob * a(b - y2);
      INFO("L = " << L << " y1 = " << y1 << " y2 = " << y2);
      CHECK_THAT(box.green(y1, y2), Catch::Matchers::WithinAbs(rhs, 1e-6));
    }
  }
}

TEST_CASE("variance-difference limit recovers the potential kernel") {
  PotentialKernel2D a;
  const Point y1{1, 1}, y2{-2, 3};
  const double ref = a(y1 - y2);
  double prev = 1e300;
  for (int L : {10, 20, 40}) {
    DirichletBoxGreen box(L);
    const double err = std::abs(box.green(y1, y1) - box.green(y1, y2) - ref);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 5e-2);
}

TEST_CASE("exit distribution is a probability measure") {
  DirichletBoxGreen box(6);
  double total = 0.0;
  for (const auto& [b, prob] : box.exit_distribution(Point{2, -1})) {
    CHECK(prob > 0.0);
    CHECK(!box.contains(b));
    total += prob;
  }
  CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
}
