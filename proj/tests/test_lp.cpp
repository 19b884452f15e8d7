#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "polyflex/lp.hpp"
#include "polyflex/rng.hpp"

using namespace polyflex;

namespace {

LpProblem make(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  LpProblem lp;
  lp.objective = c;
  lp.constraint_matrix = a;
  lp.rhs = b;
  return lp;
}

} // namespace

TEST_CASE("simplex on a bounded triangle") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 1, -1, 0, 0, -1;
  Eigen::VectorXd b(3);
  b << 1, 0, 0;
  Eigen::VectorXd c(2);
  c << 1, 1;

  LpOutcome r = solve(make(a, b, c));
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.optimal_value == Catch::Approx(1.0).margin(1e-9));
  CHECK(((a * r.optimizer - b).array() <= 1e-9).all());
}

TEST_CASE("conflicting bounds are reported infeasible") {
  Eigen::MatrixXd a(2, 1);
  a << 1, -1;
  Eigen::VectorXd b(2);
  b << 0, -1; // x <= 0 and x >= 1
  Eigen::VectorXd c = Eigen::VectorXd::Ones(1);
  CHECK(solve(make(a, b, c)).status == LpStatus::Infeasible);
  CHECK_FALSE(is_feasible(a, b));
}

TEST_CASE("open halfspace is unbounded in the objective direction") {
  Eigen::MatrixXd a(1, 1);
  a << -1;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd c = Eigen::VectorXd::Ones(1);
  CHECK(solve(make(a, b, c)).status == LpStatus::Unbounded);
  CHECK(is_feasible(a, b));
}

TEST_CASE("zero objective reduces to a feasibility check") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 0, -1, 0;
  Eigen::VectorXd b(2);
  b << 2, -1;
  LpOutcome r = solve(make(a, b, Eigen::VectorXd::Zero(2)));
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.optimal_value == 0.0);
}

TEST_CASE("equality rows encoded as opposing inequalities") {
  // x1 + x2 = 1 with 0 <= xi <= 1, maximize x1.
  Eigen::MatrixXd a(6, 2);
  a << 1, 1, -1, -1, 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd b(6);
  b << 1, -1, 1, 0, 1, 0;
  Eigen::VectorXd c(2);
  c << 1, 0;

  LpOutcome r = solve(make(a, b, c));
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.optimal_value == Catch::Approx(1.0).margin(1e-9));
  CHECK(r.optimizer(0) + r.optimizer(1) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("degenerate vertex with a redundant cut") {
  // Unit square plus a diagonal passing exactly through (1,1).
  Eigen::MatrixXd a(5, 2);
  a << 1, 0, 0, 1, -1, 0, 0, -1, 1, 1;
  Eigen::VectorXd b(5);
  b << 1, 1, 0, 0, 2;
  Eigen::VectorXd c(2);
  c << 1, 1;

  LpOutcome r = solve(make(a, b, c));
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.optimal_value == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("negative right-hand sides force a nontrivial first phase") {
  // 1 <= x <= 3, 2 <= y <= 5, maximize -x - y; optimum at (1, 2).
  Eigen::MatrixXd a(4, 2);
  a << -1, 0, 1, 0, 0, -1, 0, 1;
  Eigen::VectorXd b(4);
  b << -1, 3, -2, 5;
  Eigen::VectorXd c(2);
  c << -1, -1;

  LpOutcome r = solve(make(a, b, c));
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.optimal_value == Catch::Approx(-3.0).margin(1e-9));
  CHECK(r.optimizer(0) == Catch::Approx(1.0).margin(1e-9));
  CHECK(r.optimizer(1) == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("optimum dominates sampled feasible points") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    DrawChain chain(substream(0xFEEDu, trial));
    const int d = 2 + static_cast<int>(chain.next_bits() % 3);
    const int extra = 4;

    // Box [-1,1]^d plus random cuts kept feasible at the origin.
    Eigen::MatrixXd a(2 * d + extra, d);
    Eigen::VectorXd b(2 * d + extra);
    for (int k = 0; k < d; ++k) {
      a.row(2 * k).setZero();
      a(2 * k, k) = 1.0;
      b(2 * k) = 1.0;
      a.row(2 * k + 1).setZero();
      a(2 * k + 1, k) = -1.0;
      b(2 * k + 1) = 1.0;
    }
    for (int i = 0; i < extra; ++i) {
      for (int k = 0; k < d; ++k) a(2 * d + i, k) = chain.uniform(-1.0, 1.0);
      if (a.row(2 * d + i).norm() < 1e-3) a(2 * d + i, 0) = 1.0;
      b(2 * d + i) = chain.uniform(0.1, 1.0);
    }
    Eigen::VectorXd c(d);
    for (int k = 0; k < d; ++k) c(k) = chain.uniform(-1.0, 1.0);

    LpOutcome r = solve(make(a, b, c));
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(((a * r.optimizer - b).array() <= 1e-8).all());

    for (int s = 0; s < 200; ++s) {
      Eigen::VectorXd x(d);
      for (int k = 0; k < d; ++k) x(k) = chain.uniform(-1.0, 1.0);
      if (((a * x - b).array() <= 0.0).all()) CHECK(c.dot(x) <= r.optimal_value + 1e-8);
    }
  }
}

TEST_CASE("solutions scale with the right-hand side and the objective") {
  Eigen::MatrixXd a(4, 2);
  a << 1, 2, -1, 1, 0, -1, -1, -1;
  Eigen::VectorXd b(4);
  b << 4, 1, 0, 0.5;
  Eigen::VectorXd c(2);
  c << 2, 1;

  LpOutcome base = solve(make(a, b, c));
  REQUIRE(base.status == LpStatus::Optimal);

  LpOutcome scaled_rhs = solve(make(a, 2.0 * b, c));
  REQUIRE(scaled_rhs.status == LpStatus::Optimal);
  CHECK(scaled_rhs.optimal_value == Catch::Approx(2.0 * base.optimal_value).margin(1e-8));

  LpOutcome scaled_obj = solve(make(a, b, 3.0 * c));
  REQUIRE(scaled_obj.status == LpStatus::Optimal);
  CHECK(scaled_obj.optimal_value == Catch::Approx(3.0 * base.optimal_value).margin(1e-8));
}

TEST_CASE("repeated solves are bitwise deterministic") {
  Eigen::MatrixXd a(5, 3);
  a << 1, 1, 1, -1, 2, 0, 0, -1, 3, 2, 0, -1, -1, -1, -1;
  Eigen::VectorXd b(5);
  b << 3, 2, 4, 5, 1;
  Eigen::VectorXd c(3);
  c << 1, -2, 0.5;

  LpOutcome first = solve(make(a, b, c));
  LpOutcome second = solve(make(a, b, c));
  REQUIRE(first.status == second.status);
  CHECK(first.optimal_value == second.optimal_value);
  CHECK(first.optimizer == second.optimizer);
}

TEST_CASE("shape mismatches are rejected") {
  LpProblem lp;
  lp.objective = Eigen::VectorXd::Ones(2);
  lp.constraint_matrix = Eigen::MatrixXd::Ones(1, 3);
  lp.rhs = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(solve(lp), DimensionMismatch);

  lp.constraint_matrix = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(solve(lp), DimensionMismatch);
}

TEST_CASE("near-duplicate rows do not corrupt the basis") {
  // Facet rows recovered from a noisy vertex set: rows 3 and 4 describe the
  // same plane but differ at the 1e-9 level, and the objective sits 1e-9 off
  // a facet normal. A pivot on the near-cancelling element destroys the
  // basis inverse and once produced a claimed optimum of 1.4e7 on this
  // coordinate-bounded polytope.
  Eigen::MatrixXd a(15, 4);
  Eigen::VectorXd b(15);
  a.row(0) << -1, 0, 0, 0;
  b(0) = -1.5666115336853679;
  a.row(1) << -0.68289505285845153, -0.73051649316182632, 2.6263317499987854e-14,
      -3.9188860739621329e-13;
  b(1) = -3.9925817720209293;
  a.row(2) << -0.53808343585389329, -0.57560649024442556, -0.61574620132662072,
      1.0318477114167492e-11;
  b(2) = -5.6094948445222768;
  a.row(3) << -0.44936096453474644, -0.48069698858068671, -0.51421821977179727,
      -0.55007704112840883;
  b(3) = -6.8853908113223463;
  a.row(4) << -0.44936096363040712, -0.48069698841885083, -0.51421821959786884,
      -0.55007704217118281;
  b(4) = -6.8853908100469186;
  a.row(5) << 0, -1, 0, 0;
  b(5) = -0.66492734157864497;
  a.row(6) << 0, 0, -1, 0;
  b(6) = -0.66492734157864342;
  a.row(7) << 0, 0, 0, -1;
  b(7) = -0.6649273415786412;
  a.row(8) << 0, 0, 0, 1;
  b(8) = 7.5725342656097574;
  a.row(9) << 0, 0, 1, 0;
  b(9) = 7.5725342656097574;
  a.row(10) << 0, 1, 0, 0;
  b(10) = 7.5725342656097592;
  a.row(11) << 0.44936096359731659, 0.48069698856772641, 0.51421821975752902,
      0.5500770419188642;
  b(11) = 8.8536369574953131;
  a.row(12) << 0.53808343585001062, 0.57560649025163135, 0.61574620132327762,
      -2.9177524063898672e-13;
  b(12) = 7.8111763675693036;
  a.row(13) << 0.68289505285808583, 0.73051649316216827, 1.960719382264863e-14,
      -2.9256912734306808e-13;
  b(13) = 6.6026885520984262;
  a.row(14) << 1, -3.4029833687535269e-10, -3.6370707104724121e-10, -3.8907005251774003e-10;
  b(14) = 5.1367153332427193;

  Eigen::VectorXd c(4);
  c << -0.53808343585021801, -0.57560649025154087, -0.61574620132318092, 0.0;

  LpOutcome out = solve(make(a, b, c));
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.optimal_value == Catch::Approx(-5.6094948445).margin(1e-6));
  CHECK((a * out.optimizer - b).maxCoeff() <= 1e-7);
}
