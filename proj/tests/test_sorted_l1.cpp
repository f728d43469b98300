#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "gslope/sorted_l1.hpp"
#include "test_helpers.hpp"

using namespace gslope;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double objective(const LambdaSequence& lam, const VectorXd& y, const VectorXd& b) {
  return 0.5 * (b - y).squaredNorm() + sorted_l1_norm(lam, b);
}

}  // namespace

TEST_SUITE("sorted_l1") {

TEST_CASE("LambdaSequence validates") {
  CHECK_THROWS_AS(LambdaSequence{VectorXd()}, std::invalid_argument);
  CHECK_THROWS_AS(LambdaSequence(vec({1.0, 2.0})), std::invalid_argument);
  CHECK_THROWS_AS(LambdaSequence(vec({1.0, -0.1})), std::invalid_argument);
  CHECK_THROWS_AS(LambdaSequence(vec({std::nan(""), 0.0})), std::invalid_argument);
  LambdaSequence ok(vec({2.0, 1.0, 1.0, 0.0}));
  CHECK(ok.size() == 4);
  CHECK(ok.scaled(0.5).values[0] == 1.0);
  CHECK(ok.scaled(0.0).values[3] == 0.0);
  CHECK_THROWS_AS(ok.scaled(-1.0), std::invalid_argument);
}

TEST_CASE("sorted_l1_norm direct values") {
  LambdaSequence lam(vec({2.0, 1.0}));
  CHECK(sorted_l1_norm(lam, vec({-1.0, 3.0})) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(sorted_l1_norm(lam, vec({0.0, 0.0})) == 0.0);

  // constant lambda reduces to a scaled l1 norm
  LambdaSequence c(vec({1.5, 1.5, 1.5}));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    VectorXd b = testing::random_vector(rng, 3, 2.0);
    CHECK(sorted_l1_norm(c, b) ==
          doctest::Approx(1.5 * b.cwiseAbs().sum()).epsilon(1e-14));
  }
}

TEST_CASE("norm axioms") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    int p = 1 + int(rng() % 7);
    LambdaSequence lam(testing::random_lambda(rng, p, 2.0));
    VectorXd a = testing::random_vector(rng, p, 3.0);
    VectorXd b = testing::random_vector(rng, p, 3.0);
    if (a.cwiseAbs().maxCoeff() > 0) CHECK(sorted_l1_norm(lam, a) > 0.0);
    // powers of two make the homogeneity identity exact in floating point
    for (double s : {2.0, 0.5, -4.0})
      CHECK(sorted_l1_norm(lam, s * a) == std::abs(s) * sorted_l1_norm(lam, a));
    CHECK(sorted_l1_norm(lam, a + b) <=
          sorted_l1_norm(lam, a) + sorted_l1_norm(lam, b) + 1e-12);
  }
}

TEST_CASE("prox pinned values") {
  CHECK((prox_sorted_l1(LambdaSequence(vec({2.0, 1.0})), vec({3.0, 1.0})) -
         vec({1.0, 0.0})).norm() == doctest::Approx(0.0).epsilon(1e-14));

  LambdaSequence zero(vec({0.0, 0.0, 0.0}));
  VectorXd y = vec({0.3, -2.0, 1.1});
  CHECK((prox_sorted_l1(zero, y) - y).norm() == 0.0);

  // lambda_1 at least every prefix mean of sorted |y| kills the input
  VectorXd y2 = vec({1.0, -2.0, 3.0});
  CHECK(prox_sorted_l1(LambdaSequence(vec({3.0, 3.0, 3.0})), y2).norm() == 0.0);
  CHECK(prox_sorted_l1(LambdaSequence(vec({3.5, 2.75, 2.75})), y2).norm() == 0.0);
}

TEST_CASE("prox optimality certificate on random instances") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 300; ++t) {
    int p = 1 + int(rng() % 10);
    LambdaSequence lam(testing::random_lambda(rng, p, 2.0));
    VectorXd y = testing::random_vector(rng, p, 3.0);
    VectorXd b = prox_sorted_l1(lam, y);
    CHECK(in_dual_ball(lam, y - b, 1e-8));
    CHECK(std::abs((y - b).dot(b) - sorted_l1_norm(lam, b)) <= 1e-8);
  }
}

TEST_CASE("prox matches certified grid search at p = 2") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ul(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    double l1 = 0.1 + 0.9 * ul(rng);
    double l2 = l1 * ul(rng);
    double y0 = u(rng), y1 = u(rng);
    VectorXd b = prox_sorted_l1(LambdaSequence(vec({l1, l2})), vec({y0, y1}));
    auto g = testing::grid_prox2(y0, y1, l1, l2);
    CHECK(std::abs(b[0] - g[0]) <= 2e-4);
    CHECK(std::abs(b[1] - g[1]) <= 2e-4);
  }
}

TEST_CASE("prox objective dominance under perturbations") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    int p = 2 + int(rng() % 5);
    LambdaSequence lam(testing::random_lambda(rng, p, 2.0));
    VectorXd y = testing::random_vector(rng, p, 3.0);
    VectorXd b = prox_sorted_l1(lam, y);
    double fb = objective(lam, y, b);
    for (int s = 0; s < 2000; ++s) {
      VectorXd d(p);
      for (int i = 0; i < p; ++i) d[i] = nd(rng);
      d *= 1e-2 * std::pow(10.0, -(s % 3)) / d.norm();
      CHECK(fb <= objective(lam, y, b + d) + 1e-12);
    }
  }
}

TEST_CASE("prox is firmly nonexpansive") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    int p = 1 + int(rng() % 6);
    LambdaSequence lam(testing::random_lambda(rng, p, 2.0));
    VectorXd y1 = testing::random_vector(rng, p, 3.0);
    VectorXd y2 = testing::random_vector(rng, p, 3.0);
    VectorXd d = prox_sorted_l1(lam, y1) - prox_sorted_l1(lam, y2);
    CHECK(d.squaredNorm() <= d.dot(y1 - y2) + 1e-12);
    CHECK(d.norm() <= (y1 - y2).norm() + 1e-12);
  }
}

TEST_CASE("dual norm") {
  LambdaSequence lam(vec({2.0, 1.0}));
  CHECK(dual_norm(lam, vec({3.0, 0.0})) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(dual_norm(lam, vec({0.0, 0.0})) == 0.0);

  // constant lambda: brute force over prefix ratios collapses to max/c
  std::mt19937_64 rng(7);
  LambdaSequence c(vec({0.8, 0.8, 0.8, 0.8}));
  for (int t = 0; t < 20; ++t) {
    VectorXd x = testing::random_vector(rng, 4, 5.0);
    VectorXd a = x.cwiseAbs();
    std::sort(a.data(), a.data() + a.size(), std::greater<double>());
    double brute = 0.0, run = 0.0;
    for (int k = 0; k < 4; ++k) {
      run += a[k];
      brute = std::max(brute, run / (0.8 * (k + 1)));
    }
    CHECK(dual_norm(c, x) == doctest::Approx(brute).epsilon(1e-14));
    CHECK(dual_norm(c, x) == doctest::Approx(a[0] / 0.8).epsilon(1e-14));
  }

  CHECK_THROWS_AS(dual_norm(LambdaSequence(vec({0.0, 0.0})), vec({1.0, 1.0})),
                  std::domain_error);
}

TEST_CASE("dual ball membership") {
  VectorXd lam = vec({2.0, 1.0, 0.5});
  LambdaSequence L(lam);
  CHECK(in_dual_ball(L, lam, 0.0));
  CHECK_FALSE(in_dual_ball(L, 1.01 * lam, 1e-6));
  CHECK(in_dual_ball(L, vec({0.0, 0.0, 0.0}), 0.0));
}

TEST_CASE("diagonal solver reduces to the prox at d = 1") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 30; ++t) {
    int p = 1 + int(rng() % 8);
    LambdaSequence lam(testing::random_lambda(rng, p, 2.0));
    VectorXd y = testing::random_vector(rng, p, 3.0);
    VectorXd b = solve_diagonal_slope(VectorXd::Ones(p), lam, y, 1e-10);
    CHECK((b - prox_sorted_l1(lam, y)).norm() <= 1e-6);
  }
}

TEST_CASE("diagonal solver support and sign structure") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int t = 0; t < 50; ++t) {
    int p = 3 + int(rng() % 6);
    VectorXd d(p), y(p);
    // keep the products d_i |y_i| separated so the support claim is sharp
    std::vector<double> prods(p);
    for (int i = 0; i < p; ++i) prods[i] = 0.3 + 0.45 * i + 0.1 * u(rng);
    std::shuffle(prods.begin(), prods.end(), rng);
    for (int i = 0; i < p; ++i) {
      d[i] = u(rng);
      y[i] = prods[i] / d[i];
    }
    LambdaSequence lam(testing::random_lambda(rng, p, 1.0));
    DiagonalSolveStats stats;
    VectorXd b = solve_diagonal_slope(d, lam, y, 1e-10, 1e-10, &stats);
    REQUIRE(stats.converged);

    CHECK(b.minCoeff() >= -1e-8);  // y > 0 here

    int R = 0;
    for (int i = 0; i < p; ++i)
      if (b[i] != 0.0) ++R;
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return d[i] * std::abs(y[i]) > d[j] * std::abs(y[j]); });
    for (int r = 0; r < R; ++r) CHECK(b[order[r]] != 0.0);
    for (int r = R; r < p; ++r) CHECK(b[order[r]] == 0.0);
  }
}

TEST_CASE("diagonal solver exact path for all-zero lambda") {
  VectorXd d = vec({2.0, 0.5, 1.0});
  VectorXd y = vec({1.0, -3.0, 0.7});
  DiagonalSolveStats stats;
  VectorXd b = solve_diagonal_slope(d, LambdaSequence(vec({0.0, 0.0, 0.0})), y, 1e-8,
                                    1e-8, &stats);
  CHECK((b - y.cwiseQuotient(d)).norm() == 0.0);
  CHECK(stats.iterations == 0);
  CHECK(stats.converged);
}

TEST_CASE("diagonal solver reports nonconvergence") {
  // d_2 ~ 1e-9 makes the second coordinate move ~1e-18 per unit step while the
  // optimum sits near 1e9; the cap is reached with the residual far outside
  // the dual ball even though the gap itself is tiny.
  VectorXd d = vec({1.0, 1e-9});
  VectorXd y = vec({1.0, 1.0});
  LambdaSequence lam(vec({1e-12, 0.0}));
  try {
    solve_diagonal_slope(d, lam, y, 1e-10);
    FAIL("expected NonconvergenceError");
  } catch (const NonconvergenceError& e) {
    CHECK(e.iterations == 50000);
    CHECK(e.infeasibility > 1.0);
  }
}

}  // TEST_SUITE
