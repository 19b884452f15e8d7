#pragma once

#include <Eigen/Dense>

#include <vector>

#include "polyflex/polytope.hpp"

namespace polyflex {

enum class RowOrigin { Original, TangentLp };

// Several loads rewritten over one shared row matrix. Every row of shared_a
// is redundant for each load at its recorded offset, so summing offsets gives
// an outer approximation of the Minkowski sum.
struct AlignedFamily {
  Eigen::MatrixXd shared_a;                       // c x D unique unit rows, lex sorted
  std::vector<Eigen::VectorXd> offsets;           // one R^c vector per load
  std::vector<std::vector<RowOrigin>> provenance; // [load][row]
  int lp_count = 0;                               // tangent programs actually run
};

// Rewrites the family over the union of normalized rows. Rows a load already
// has keep their offsets (tightest when duplicated); missing rows get tangent
// offsets, one LP per missing (load, row) pair.
AlignedFamily align(const std::vector<HPolytope>& polytopes);

// {z | a z <= sum of b_list}. Inputs must share the row matrix `a`; callers
// are responsible for each (a, b_k) being nonempty.
HPolytope sum_same_shape(const Eigen::MatrixXd& a, const std::vector<Eigen::VectorXd>& b_list);

struct AggregateInfo {
  int unique_rows = 0;
  int lp_count = 0;
};

// Outer approximation of the Minkowski sum of the loads: align, then sum the
// aligned offsets. Row count of the result equals the unique-row count.
HPolytope aggregate_general(const std::vector<HPolytope>& polytopes,
                            AggregateInfo* info = nullptr,
                            bool remove_input_redundancy = false);

// Vertex set of the exact pairwise Minkowski sum. A candidate x_i + y_j is a
// vertex exactly when the relative interiors of the two normal cones meet,
// decided by a small LP per pair. Subject to the enumeration size guards.
VPolytope exact_minkowski_oracle(const HPolytope& p1, const HPolytope& p2);

// Rebuilds `p` over the given row directions via tangent offsets. The result
// contains `p` by construction.
HPolytope outer_approx_with_rows(const Eigen::MatrixXd& rows, const HPolytope& p);

// Exact membership of z in P1 + P2: one feasibility LP over the split point.
bool contains_minkowski_sum_point(const HPolytope& p1, const HPolytope& p2,
                                  const Eigen::VectorXd& z, double tol = kFeasibilityTol);

} // namespace polyflex
