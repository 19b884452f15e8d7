#pragma once

#include <Eigen/Dense>
#include <vector>

#include "polyflex/common.hpp"

namespace polyflex {

/// Halfspace intersection {x | A x <= b}. Rows are scaled to unit Euclidean
/// norm on construction so offsets read as signed distances from the origin
/// and row comparisons are meaningful.
class HPolytope {
 public:
  HPolytope(Eigen::MatrixXd a, Eigen::VectorXd b);

  int dimension() const { return static_cast<int>(a_.cols()); }
  int rows() const { return static_cast<int>(a_.rows()); }
  const Eigen::MatrixXd& a_matrix() const { return a_; }
  const Eigen::VectorXd& b_vector() const { return b_; }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
};

/// Finite point set whose hull is the polytope; one point per row,
/// deduplicated and lexicographically sorted when produced by this library.
struct VPolytope {
  Eigen::MatrixXd vertices;

  int dimension() const { return static_cast<int>(vertices.cols()); }
  int count() const { return static_cast<int>(vertices.rows()); }
};

struct HalfspaceQuery {
  Eigen::VectorXd normal; // nonzero
  double offset = 0.0;
};

struct BoundingBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  double volume() const;
};

/// Membership with the library-wide absolute feasibility tolerance.
bool contains(const HPolytope& p, const Eigen::VectorXd& x);

/// Support value max{normal . x | x in p}. The smallest offset that makes the
/// halfspace {normal . x <= offset} redundant for p.
/// Throws EmptyPolytope / UnboundedPolytope.
double tangent_offset(const HPolytope& p, const Eigen::VectorXd& normal);

/// True when dropping the row does not change the set. Rows of an empty
/// polytope are reported non-redundant.
bool is_redundant(const HPolytope& p, int row_index);

/// Minimal representation of the same set (row order preserved).
HPolytope remove_redundancy(const HPolytope& p);

/// Componentwise support box; every face touches the polytope.
BoundingBox bounding_box(const HPolytope& p);

bool is_bounded(const HPolytope& p);
bool is_empty(const HPolytope& p);

/// All vertices of a bounded nonempty polytope, deduplicated within
/// kVertexMergeTol and sorted lexicographically. Enumerates row D-subsets,
/// so inputs are guarded: D <= kOracleMaxDim, rows <= kOracleMaxRows
/// (throws OracleScale beyond that).
VPolytope enumerate_vertices(const HPolytope& p);

/// Facet representation of the hull of a full-dimensional point set.
/// Guarded like enumerate_vertices (vertex count plays the row role);
/// throws LowerDimensional when the points span an affine subspace.
HPolytope hull_to_h(const VPolytope& v);

/// p subset-of q, decided by support values of q's rows.
bool subset_of(const HPolytope& p, const HPolytope& q, double tol = kFeasibilityTol);

/// Mutual containment.
bool same_set(const HPolytope& p, const HPolytope& q, double tol = kFeasibilityTol);

namespace detail {

struct VertexSet {
  Eigen::MatrixXd points;                     // deduped, lex sorted
  std::vector<std::vector<int>> active_rows;  // per point, rows tight at it
};

VertexSet enumerate_vertices_active(const HPolytope& p);

/// Extreme points of an arbitrary point list (small sets only); used by
/// tests and the Minkowski oracle plumbing.
Eigen::MatrixXd extreme_points(const Eigen::MatrixXd& points);

/// Affine rank of a point set (rank of differences against the first point).
int affine_rank(const Eigen::MatrixXd& points, double tol = 1e-9);

/// Lexicographic sort + Euclidean dedup of row-points.
Eigen::MatrixXd dedup_and_sort_points(const Eigen::MatrixXd& points, double tol);

} // namespace detail

} // namespace polyflex
