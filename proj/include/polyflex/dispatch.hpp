#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "polyflex/polytope.hpp"

namespace polyflex {

/// Multi-period dispatch over a horizon of D periods. Aggregate flexible
/// loads enter as polytopes over their consumption trajectories; generation
/// is bounded per node and period and priced linearly. With a susceptance
/// matrix the buses couple through DC power flow, otherwise nodes must be 1.
struct DispatchCase {
  int horizon = 0;
  int nodes = 1;
  Eigen::MatrixXd cost;    // nodes x horizon, marginal generation cost
  Eigen::MatrixXd gen_min; // nodes x horizon; -inf entries drop the bound
  Eigen::MatrixXd gen_max; // nodes x horizon; +inf entries drop the bound

  // Symmetric nonnegative susceptances, zero diagonal; required when nodes > 1.
  std::optional<Eigen::MatrixXd> susceptance;

  struct Aggregate {
    int bus = 0;
    HPolytope set; // consumption trajectories in R^horizon, bounded
  };
  std::vector<Aggregate> aggregates;
};

struct DispatchResult {
  Eigen::MatrixXd generation;                // nodes x horizon
  Eigen::MatrixXd injection;                 // generation minus local consumption
  Eigen::MatrixXd angles;                    // nodes x horizon, row 0 fixed to zero
  std::vector<Eigen::VectorXd> aggregate_x;  // chosen trajectory per aggregate
  double objective = 0.0;
};

/// No dispatch satisfies nodal balance. `period` is the first period whose
/// generation range cannot cover the aggregate consumption range, or -1 when
/// only the coupling across periods is to blame.
class DispatchInfeasible : public std::runtime_error {
 public:
  DispatchInfeasible(int period_index, const std::string& what_arg)
      : std::runtime_error(what_arg), period(period_index) {}
  int period;
};

/// Solves the dispatch LP: minimize generation cost subject to generator
/// bounds, aggregate membership, and per-node power balance (DC flow between
/// nodes when a network is present; node 0 is the angle reference).
/// Throws DispatchInfeasible / UnboundedPolytope, and InvalidParams or
/// DimensionMismatch for ill-formed cases.
DispatchResult solve_dispatch(const DispatchCase& c);

/// Feasible injection trajectories of a lossless unit-efficiency store whose
/// state e(j) = e0 + sum of the first j injections stays in [0, s(j)].
/// Requires 0 <= e0 <= s(0).
HPolytope storage_constraints(const Eigen::VectorXd& s, double e0);

} // namespace polyflex
