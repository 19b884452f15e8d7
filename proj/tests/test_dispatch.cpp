#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "polyflex/aggregation.hpp"
#include "polyflex/dispatch.hpp"
#include "polyflex/load_models.hpp"
#include "polyflex/polytope.hpp"
#include "polyflex/rng.hpp"

using namespace polyflex;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd row_matrix(std::initializer_list<double> values) {
  Eigen::MatrixXd m(1, static_cast<int>(values.size()));
  int j = 0;
  for (double v : values) m(0, j++) = v;
  return m;
}

HPolytope point_load(std::initializer_list<double> values) {
  Eigen::VectorXd x(static_cast<int>(values.size()));
  int j = 0;
  for (double v : values) x(j++) = v;
  return build_hypercube(HypercubeParams{x, x});
}

DispatchCase single_bus_case(int horizon, const Eigen::MatrixXd& cost, double g_lo,
                             double g_hi) {
  DispatchCase c;
  c.horizon = horizon;
  c.nodes = 1;
  c.cost = cost;
  c.gen_min = Eigen::MatrixXd::Constant(1, horizon, g_lo);
  c.gen_max = Eigen::MatrixXd::Constant(1, horizon, g_hi);
  return c;
}

HPolytope storage_net_pair_member(double cap, double initial) {
  StorageParams sp;
  sp.horizon = 2;
  sp.p_max = Eigen::VectorXd::Constant(2, 4.0);
  sp.p_min = Eigen::VectorXd::Constant(2, -4.0);
  sp.capacity = cap;
  sp.initial = initial;
  return build_storage_net(sp);
}

} // namespace

TEST_CASE("deferrable load runs in the cheap period") {
  DispatchCase c = single_bus_case(2, row_matrix({1.0, 2.0}), 0.0, 5.0);
  DeferrableParams dp;
  dp.horizon = 2;
  dp.p_max = Eigen::VectorXd::Ones(2);
  dp.energy = 1.0;
  dp.t_arrive = 0;
  dp.t_depart = 2;
  c.aggregates.push_back({0, build_deferrable(dp)});

  DispatchResult r = solve_dispatch(c);
  REQUIRE(r.objective == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(r.aggregate_x[0](0) == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(r.aggregate_x[0](1) == Catch::Approx(0.0).margin(1e-8));
  REQUIRE(r.generation(0, 0) == Catch::Approx(1.0).margin(1e-8));
  REQUIRE((r.injection.cwiseAbs().maxCoeff()) <= 1e-8);
}

TEST_CASE("a point aggregate reduces to net load economic dispatch") {
  DispatchCase c = single_bus_case(3, row_matrix({5.0, 1.0, 2.0}), 0.0, 10.0);
  c.aggregates.push_back({0, point_load({2.0, 3.0, 1.0})});
  DispatchResult r = solve_dispatch(c);
  REQUIRE(r.objective == Catch::Approx(5.0 * 2 + 1.0 * 3 + 2.0 * 1).margin(1e-8));
  REQUIRE(r.generation(0, 0) == Catch::Approx(2.0).margin(1e-8));
  REQUIRE(r.generation(0, 1) == Catch::Approx(3.0).margin(1e-8));
  REQUIRE(r.generation(0, 2) == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("storage aggregate shifts consumption toward cheap periods") {
  DispatchCase c = single_bus_case(3, row_matrix({3.0, 1.0, 2.0}), 0.0, 10.0);
  c.aggregates.push_back({0, point_load({4.0, 4.0, 4.0})});
  c.aggregates.push_back({0, storage_constraints(Eigen::VectorXd::Constant(3, 5.0), 2.0)});

  DispatchResult r = solve_dispatch(c);
  REQUIRE(r.objective == Catch::Approx(14.0).margin(1e-8));
  Eigen::VectorXd expect(3);
  expect << -2.0, 4.0, -4.0;
  REQUIRE((r.aggregate_x[1] - expect).cwiseAbs().maxCoeff() <= 1e-8);
  REQUIRE(contains(c.aggregates[1].set, r.aggregate_x[1]));

  // The induced state trajectory stays within the cap.
  double e = 2.0;
  for (int t = 0; t < 3; ++t) {
    e += r.aggregate_x[1](t);
    REQUIRE(e >= -1e-8);
    REQUIRE(e <= 5.0 + 1e-8);
  }

  DispatchResult again = solve_dispatch(c);
  REQUIRE(again.objective == r.objective);
  REQUIRE((again.aggregate_x[1] - r.aggregate_x[1]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("network dispatch routes power from the cheap bus") {
  DispatchCase c;
  c.horizon = 1;
  c.nodes = 3;
  c.cost = Eigen::MatrixXd(3, 1);
  c.cost << 1.0, 10.0, 10.0;
  c.gen_min = Eigen::MatrixXd::Zero(3, 1);
  c.gen_max = Eigen::MatrixXd::Constant(3, 1, 10.0);
  Eigen::MatrixXd b = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  c.susceptance = b;
  c.aggregates.push_back({1, point_load({6.0})});

  DispatchResult r = solve_dispatch(c);
  REQUIRE(r.objective == Catch::Approx(6.0).margin(1e-8));
  REQUIRE(r.generation(0, 0) == Catch::Approx(6.0).margin(1e-8));
  REQUIRE(r.angles(0, 0) == 0.0);

  // DC flow holds: injection equals the Laplacian applied to the angles.
  Eigen::VectorXd degree = b.rowwise().sum();
  Eigen::MatrixXd laplacian = Eigen::MatrixXd(degree.asDiagonal());
  laplacian -= b;
  Eigen::VectorXd residual = r.injection.col(0) - laplacian * r.angles.col(0);
  REQUIRE(residual.cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("a looser aggregate never dispatches at higher cost") {
  HPolytope one = storage_net_pair_member(6.0, 2.0);
  HPolytope two = storage_net_pair_member(3.0, 1.0);
  HPolytope om = aggregate_general({one, two});
  HPolytope exact = hull_to_h(exact_minkowski_oracle(one, two));

  DispatchCase c = single_bus_case(2, row_matrix({0.0, 1.0}), -10.0, 10.0);
  c.aggregates.push_back({0, om});
  double cost_om = solve_dispatch(c).objective;
  c.aggregates[0].set = exact;
  double cost_exact = solve_dispatch(c).objective;
  c.aggregates[0].set = point_load({6.0, 0.0}); // a vertex of the exact sum
  double cost_point = solve_dispatch(c).objective;

  REQUIRE(cost_om == Catch::Approx(-8.0).margin(1e-7));
  REQUIRE(cost_exact == Catch::Approx(-7.0).margin(1e-7));
  REQUIRE(cost_point == Catch::Approx(0.0).margin(1e-7));
  REQUIRE(cost_om <= cost_exact + 1e-7);
  REQUIRE(cost_exact <= cost_point + 1e-7);
}

TEST_CASE("storage constraint polytopes") {
  SECTION("one period is a symmetric interval around the charge") {
    Eigen::VectorXd s(1);
    s << 10.0;
    HPolytope p = storage_constraints(s, 5.0);
    HypercubeParams box;
    box.p_low = Eigen::VectorXd::Constant(1, -5.0);
    box.p_high = Eigen::VectorXd::Constant(1, 5.0);
    REQUIRE(same_set(p, build_hypercube(box)));
  }

  SECTION("membership matches the state recursion") {
    Eigen::VectorXd s = Eigen::VectorXd::Constant(3, 8.0);
    HPolytope p = storage_constraints(s, 0.0);
    DrawChain chain(substream(77, 4));
    for (int trial = 0; trial < 500; ++trial) {
      Eigen::VectorXd u(3);
      for (int t = 0; t < 3; ++t) u(t) = chain.uniform(-9.0, 9.0);
      double e = 0.0;
      bool ok = true;
      for (int t = 0; t < 3; ++t) {
        e += u(t);
        ok = ok && e >= -1e-9 && e <= 8.0 + 1e-9;
      }
      if (contains(p, u) != ok) {
        // Disagreement is only tolerable on the boundary.
        double worst = 0.0;
        double state = 0.0;
        for (int t = 0; t < 3; ++t) {
          state += u(t);
          worst = std::max({worst, -state, state - 8.0});
        }
        REQUIRE(std::abs(worst) <= 1e-6);
      }
    }
  }

  SECTION("a shrinking cap binds the whole prefix") {
    Eigen::VectorXd s(2);
    s << 10.0, 4.0;
    HPolytope p = storage_constraints(s, 0.0);
    Eigen::VectorXd e1(2), diag(2);
    e1 << 1.0, 0.0;
    diag << 1.0, 1.0;
    REQUIRE(tangent_offset(p, e1) == Catch::Approx(10.0).margin(1e-9));
    REQUIRE(tangent_offset(p, diag) == Catch::Approx(4.0).margin(1e-9));
  }

  SECTION("parameter validation") {
    Eigen::VectorXd s(1);
    s << 10.0;
    REQUIRE_THROWS_AS(storage_constraints(s, -0.5), InvalidParams);
    REQUIRE_THROWS_AS(storage_constraints(s, 10.5), InvalidParams);
    REQUIRE_THROWS_AS(storage_constraints(Eigen::VectorXd(), 0.0), InvalidParams);
    Eigen::VectorXd neg(2);
    neg << 5.0, -1.0;
    REQUIRE_THROWS_AS(storage_constraints(neg, 0.0), InvalidParams);
  }
}

TEST_CASE("infeasibility names the first impossible period") {
  DispatchCase c = single_bus_case(3, row_matrix({1.0, 1.0, 1.0}), 0.0, 3.0);
  c.aggregates.push_back({0, point_load({1.0, 5.0, 1.0})});
  try {
    solve_dispatch(c);
    FAIL("expected DispatchInfeasible");
  } catch (const DispatchInfeasible& e) {
    REQUIRE(e.period == 1);
  }
}

TEST_CASE("coupling infeasibility carries no single period") {
  DispatchCase c = single_bus_case(2, row_matrix({1.0, 1.0}), 0.0, 1.0);
  DeferrableParams dp;
  dp.horizon = 2;
  dp.p_max = Eigen::VectorXd::Constant(2, 10.0);
  dp.energy = 10.0;
  dp.t_arrive = 0;
  dp.t_depart = 2;
  c.aggregates.push_back({0, build_deferrable(dp)});
  try {
    solve_dispatch(c);
    FAIL("expected DispatchInfeasible");
  } catch (const DispatchInfeasible& e) {
    REQUIRE(e.period == -1);
  }
}

TEST_CASE("missing generator bounds can leave the cost unbounded") {
  DispatchCase c;
  c.horizon = 1;
  c.nodes = 2;
  c.cost = Eigen::MatrixXd(2, 1);
  c.cost << 1.0, 2.0;
  c.gen_min = Eigen::MatrixXd(2, 1);
  c.gen_min << 0.0, -kInf;
  c.gen_max = Eigen::MatrixXd(2, 1);
  c.gen_max << kInf, 10.0;
  Eigen::MatrixXd b(2, 2);
  b << 0.0, 1.0, 1.0, 0.0;
  c.susceptance = b;
  c.aggregates.push_back({0, point_load({1.0})});
  REQUIRE_THROWS_AS(solve_dispatch(c), UnboundedPolytope);
}

TEST_CASE("case validation rejects malformed inputs") {
  DispatchCase base = single_bus_case(2, row_matrix({1.0, 1.0}), 0.0, 5.0);

  DispatchCase bad_bus = base;
  bad_bus.aggregates.push_back({3, point_load({1.0, 1.0})});
  REQUIRE_THROWS_AS(solve_dispatch(bad_bus), InvalidParams);

  DispatchCase bad_dim = base;
  bad_dim.aggregates.push_back({0, point_load({1.0, 1.0, 1.0})});
  REQUIRE_THROWS_AS(solve_dispatch(bad_dim), DimensionMismatch);

  DispatchCase no_net = base;
  no_net.nodes = 2;
  no_net.cost = Eigen::MatrixXd::Ones(2, 2);
  no_net.gen_min = Eigen::MatrixXd::Zero(2, 2);
  no_net.gen_max = Eigen::MatrixXd::Constant(2, 2, 5.0);
  REQUIRE_THROWS_AS(solve_dispatch(no_net), InvalidParams);

  DispatchCase skew = no_net;
  Eigen::MatrixXd b(2, 2);
  b << 0.0, 1.0, 0.5, 0.0;
  skew.susceptance = b;
  REQUIRE_THROWS_AS(solve_dispatch(skew), InvalidParams);

  DispatchCase empty_agg = base;
  Eigen::MatrixXd ea(2, 2);
  ea << 1.0, 0.0, -1.0, 0.0;
  Eigen::VectorXd eb(2);
  eb << -1.0, -1.0;
  empty_agg.aggregates.push_back({0, HPolytope(ea, eb)});
  try {
    solve_dispatch(empty_agg);
    FAIL("expected EmptyPolytope");
  } catch (const EmptyPolytope& e) {
    REQUIRE(std::string(e.what()).find("aggregate 0") != std::string::npos);
  }

  DispatchCase open_agg = base;
  Eigen::MatrixXd ua(1, 2);
  ua << 1.0, 0.0;
  Eigen::VectorXd ub(1);
  ub << 1.0;
  open_agg.aggregates.push_back({0, HPolytope(ua, ub)});
  REQUIRE_THROWS_AS(solve_dispatch(open_agg), UnboundedPolytope);
}
