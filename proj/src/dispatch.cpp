#include "polyflex/dispatch.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "polyflex/lp.hpp"

namespace polyflex {
namespace {

struct AggregateRange {
  Eigen::VectorXd lo; // per-period consumption minimum
  Eigen::VectorXd hi;
};

void check_shape(const Eigen::MatrixXd& m, int nodes, int horizon, const char* name) {
  if (m.rows() != nodes || m.cols() != horizon)
    throw DimensionMismatch(std::string(name) + " must be nodes x horizon");
}

// Coordinate support probe. Doubles as the boundedness check: a polytope is
// bounded exactly when every coordinate support is finite, and tangent_offset
// already throws on the unbounded and empty cases.
AggregateRange probe_aggregate(const DispatchCase::Aggregate& agg, int index) {
  const int d = agg.set.dimension();
  AggregateRange r{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  try {
    for (int t = 0; t < d; ++t) {
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(d);
      dir(t) = 1.0;
      r.hi(t) = tangent_offset(agg.set, dir);
      dir(t) = -1.0;
      r.lo(t) = -tangent_offset(agg.set, dir);
    }
  } catch (const EmptyPolytope&) {
    throw EmptyPolytope("aggregate " + std::to_string(index) + " is empty");
  } catch (const UnboundedPolytope&) {
    throw UnboundedPolytope("aggregate " + std::to_string(index) + " is unbounded");
  }
  return r;
}

std::vector<AggregateRange> validate(const DispatchCase& c) {
  if (c.horizon < 1) throw InvalidParams("horizon must be at least 1");
  if (c.nodes < 1) throw InvalidParams("node count must be at least 1");
  check_shape(c.cost, c.nodes, c.horizon, "cost");
  check_shape(c.gen_min, c.nodes, c.horizon, "gen_min");
  check_shape(c.gen_max, c.nodes, c.horizon, "gen_max");
  if (c.nodes > 1 && !c.susceptance)
    throw InvalidParams("a susceptance matrix is required for more than one node");
  if (c.susceptance) {
    const Eigen::MatrixXd& b = *c.susceptance;
    if (b.rows() != c.nodes || b.cols() != c.nodes)
      throw DimensionMismatch("susceptance must be nodes x nodes");
    if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidParams("susceptance must be symmetric");
    if (b.minCoeff() < 0.0) throw InvalidParams("susceptances must be nonnegative");
  }

  std::vector<AggregateRange> ranges;
  ranges.reserve(c.aggregates.size());
  for (std::size_t a = 0; a < c.aggregates.size(); ++a) {
    const auto& agg = c.aggregates[a];
    if (agg.bus < 0 || agg.bus >= c.nodes)
      throw InvalidParams("aggregate " + std::to_string(a) + " names a bus out of range");
    if (agg.set.dimension() != c.horizon)
      throw DimensionMismatch("aggregate " + std::to_string(a) +
                              " does not span the horizon");
    ranges.push_back(probe_aggregate(agg, static_cast<int>(a)));
  }
  return ranges;
}

// System-wide single-period screen; valid with a network too, since DC flow
// is lossless and total generation still has to meet total consumption.
int certify_period(const DispatchCase& c, const std::vector<AggregateRange>& ranges) {
  for (int t = 0; t < c.horizon; ++t) {
    double gen_lo = 0.0, gen_hi = 0.0, load_lo = 0.0, load_hi = 0.0;
    for (int i = 0; i < c.nodes; ++i) {
      gen_lo += std::isfinite(c.gen_min(i, t)) ? c.gen_min(i, t)
                                               : -std::numeric_limits<double>::infinity();
      gen_hi += std::isfinite(c.gen_max(i, t)) ? c.gen_max(i, t)
                                               : std::numeric_limits<double>::infinity();
    }
    for (const AggregateRange& r : ranges) {
      load_lo += r.lo(t);
      load_hi += r.hi(t);
    }
    if (load_lo > gen_hi + kFeasibilityTol || load_hi < gen_lo - kFeasibilityTol) return t;
  }
  return -1;
}

} // namespace

DispatchResult solve_dispatch(const DispatchCase& c) {
  const std::vector<AggregateRange> ranges = validate(c);
  const int d = c.horizon;
  const int n = c.nodes;
  const int n_agg = static_cast<int>(c.aggregates.size());
  const bool network = c.susceptance.has_value();

  const int gen_base = 0;
  const int agg_base = n * d;
  const int angle_base = agg_base + n_agg * d;
  const int n_vars = angle_base + (network ? (n - 1) * d : 0);
  auto gen_var = [&](int i, int t) { return gen_base + i * d + t; };
  auto agg_var = [&](int a, int t) { return agg_base + a * d + t; };
  auto angle_var = [&](int i, int t) { return angle_base + (i - 1) * d + t; };

  int n_rows = 2 * n * d; // balance equalities as row pairs
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < d; ++t) {
      n_rows += std::isfinite(c.gen_max(i, t)) ? 1 : 0;
      n_rows += std::isfinite(c.gen_min(i, t)) ? 1 : 0;
    }
  for (const auto& agg : c.aggregates) n_rows += agg.set.rows();

  LpProblem lp;
  lp.objective = Eigen::VectorXd::Zero(n_vars);
  lp.constraint_matrix = Eigen::MatrixXd::Zero(n_rows, n_vars);
  lp.rhs = Eigen::VectorXd::Zero(n_rows);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < d; ++t) lp.objective(gen_var(i, t)) = -c.cost(i, t);

  int row = 0;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < d; ++t) {
      if (std::isfinite(c.gen_max(i, t))) {
        lp.constraint_matrix(row, gen_var(i, t)) = 1.0;
        lp.rhs(row++) = c.gen_max(i, t);
      }
      if (std::isfinite(c.gen_min(i, t))) {
        lp.constraint_matrix(row, gen_var(i, t)) = -1.0;
        lp.rhs(row++) = -c.gen_min(i, t);
      }
    }

  for (int a = 0; a < n_agg; ++a) {
    const HPolytope& set = c.aggregates[a].set;
    for (int r = 0; r < set.rows(); ++r) {
      for (int t = 0; t < d; ++t)
        lp.constraint_matrix(row, agg_var(a, t)) = set.a_matrix()(r, t);
      lp.rhs(row++) = set.b_vector()(r);
    }
  }

  // Nodal balance: generation minus local consumption equals the flow out of
  // the node, written with the network Laplacian applied to the angles.
  Eigen::MatrixXd laplacian;
  if (network) {
    const Eigen::MatrixXd& b = *c.susceptance;
    Eigen::VectorXd degree = b.rowwise().sum();
    laplacian = Eigen::MatrixXd(degree.asDiagonal());
    laplacian -= b;
  }
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < d; ++t) {
      Eigen::RowVectorXd balance = Eigen::RowVectorXd::Zero(n_vars);
      balance(gen_var(i, t)) = 1.0;
      for (int a = 0; a < n_agg; ++a)
        if (c.aggregates[a].bus == i) balance(agg_var(a, t)) -= 1.0;
      if (network)
        for (int j = 1; j < n; ++j) balance(angle_var(j, t)) = -laplacian(i, j);
      lp.constraint_matrix.row(row) = balance;
      lp.rhs(row++) = 0.0;
      lp.constraint_matrix.row(row) = -balance;
      lp.rhs(row++) = 0.0;
    }

  LpOutcome out = solve(lp);
  if (out.status == LpStatus::Infeasible) {
    int period = certify_period(c, ranges);
    if (period >= 0)
      throw DispatchInfeasible(period, "no dispatch balances period " +
                                           std::to_string(period));
    throw DispatchInfeasible(-1,
                             "dispatch infeasible through coupling across periods");
  }
  if (out.status == LpStatus::Unbounded)
    throw UnboundedPolytope("dispatch cost is unbounded; a generator bound is missing");

  DispatchResult result;
  result.generation = Eigen::MatrixXd(n, d);
  result.angles = Eigen::MatrixXd::Zero(n, d);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < d; ++t) result.generation(i, t) = out.optimizer(gen_var(i, t));
  if (network)
    for (int i = 1; i < n; ++i)
      for (int t = 0; t < d; ++t) result.angles(i, t) = out.optimizer(angle_var(i, t));
  result.aggregate_x.reserve(static_cast<std::size_t>(n_agg));
  for (int a = 0; a < n_agg; ++a) {
    Eigen::VectorXd x(d);
    for (int t = 0; t < d; ++t) x(t) = out.optimizer(agg_var(a, t));
    result.aggregate_x.push_back(std::move(x));
  }
  result.injection = result.generation;
  for (int a = 0; a < n_agg; ++a)
    result.injection.row(c.aggregates[a].bus) -= result.aggregate_x[a].transpose();
  result.objective = -out.optimal_value;
  return result;
}

HPolytope storage_constraints(const Eigen::VectorXd& s, double e0) {
  const int d = static_cast<int>(s.size());
  if (d < 1) throw InvalidParams("capacity trajectory must have at least one period");
  if (s.minCoeff() < 0.0) throw InvalidParams("capacities must be nonnegative");
  if (e0 < 0.0 || e0 > s(0))
    throw InvalidParams("initial charge must lie within the first-period capacity");

  // Prefix-sum rows: 0 <= e0 + sum_{i<=j} u(i) <= s(j).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * d, d);
  Eigen::VectorXd b(2 * d);
  for (int j = 0; j < d; ++j) {
    a.block(j, 0, 1, j + 1).setOnes();
    b(j) = s(j) - e0;
    a.block(d + j, 0, 1, j + 1).setConstant(-1.0);
    b(d + j) = e0;
  }
  return HPolytope(a, b);
}

} // namespace polyflex
