#pragma once

#include <Eigen/Dense>

#include "polyflex/common.hpp"

namespace polyflex {

enum class LpStatus { Optimal, Infeasible, Unbounded };

// maximize objective . x  subject to  constraint_matrix x <= rhs,  x free.
struct LpProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd constraint_matrix;
  Eigen::VectorXd rhs;
};

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  double optimal_value = 0.0;    // meaningful iff status == Optimal
  Eigen::VectorXd optimizer;     // meaningful iff status == Optimal
};

// Two-phase revised simplex, Bland's anti-cycling rule throughout, so the
// pivot sequence (and hence the returned optimizer) is deterministic.
// Throws IterationLimit after 50*(rows + dimension) pivots in a phase and
// DimensionMismatch on inconsistent shapes.
LpOutcome solve(const LpProblem& problem);

// Phase-1 feasibility of {x | a x <= b}.
bool is_feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

} // namespace polyflex
