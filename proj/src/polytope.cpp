#include "polyflex/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "polyflex/lp.hpp"

namespace polyflex {
namespace {

LpOutcome support_lp(const HPolytope& p, const Eigen::VectorXd& direction) {
  LpProblem lp;
  lp.objective = direction;
  lp.constraint_matrix = p.a_matrix();
  lp.rhs = p.b_vector();
  return solve(lp);
}

bool rows_match(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b, double tol) {
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

// Next D-combination of {0..n-1} in lexicographic order; false when done.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j)
    idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

bool lex_less(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  for (int k = 0; k < a.size(); ++k) {
    if (a(k) < b(k)) return true;
    if (a(k) > b(k)) return false;
  }
  return false;
}

} // namespace

HPolytope::HPolytope(Eigen::MatrixXd a, Eigen::VectorXd b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != b_.size())
    throw DimensionMismatch("constraint matrix and offset vector disagree on row count");
  if (a_.rows() < 1 || a_.cols() < 1)
    throw InvalidParams("polytope needs at least one row and one dimension");
  for (int i = 0; i < a_.rows(); ++i) {
    double norm = a_.row(i).norm();
    if (norm < 1e-12)
      throw InvalidParams("polytope row " + std::to_string(i) + " is numerically zero");
    a_.row(i) /= norm;
    b_(i) /= norm;
  }
}

double BoundingBox::volume() const {
  double v = 1.0;
  for (int k = 0; k < lower.size(); ++k) v *= std::max(0.0, upper(k) - lower(k));
  return v;
}

bool contains(const HPolytope& p, const Eigen::VectorXd& x) {
  if (x.size() != p.dimension())
    throw DimensionMismatch("point dimension does not match polytope");
  return ((p.a_matrix() * x - p.b_vector()).array() <= kFeasibilityTol).all();
}

double tangent_offset(const HPolytope& p, const Eigen::VectorXd& normal) {
  if (normal.size() != p.dimension())
    throw DimensionMismatch("query normal dimension does not match polytope");
  if (normal.norm() < 1e-12) throw InvalidParams("query normal is numerically zero");
  LpOutcome r = support_lp(p, normal);
  if (r.status == LpStatus::Infeasible) throw EmptyPolytope("support query on an empty polytope");
  if (r.status == LpStatus::Unbounded)
    throw UnboundedPolytope("polytope is unbounded along the query direction");
  return r.optimal_value;
}

bool is_redundant(const HPolytope& p, int row_index) {
  if (row_index < 0 || row_index >= p.rows()) throw InvalidParams("row index out of range");
  const int n = p.rows();
  if (n == 1) return false;
  Eigen::MatrixXd a(n - 1, p.dimension());
  Eigen::VectorXd b(n - 1);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (i == row_index) continue;
    a.row(k) = p.a_matrix().row(i);
    b(k) = p.b_vector()(i);
    ++k;
  }
  LpProblem lp;
  lp.objective = p.a_matrix().row(row_index).transpose();
  lp.constraint_matrix = a;
  lp.rhs = b;
  LpOutcome r = solve(lp);
  if (r.status != LpStatus::Optimal) return false; // empty remainder or unbounded direction
  return r.optimal_value <= p.b_vector()(row_index) + kFeasibilityTol;
}

HPolytope remove_redundancy(const HPolytope& p) {
  if (is_empty(p)) throw EmptyPolytope("cannot reduce an empty polytope");
  const int n = p.rows();
  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  Eigen::VectorXd b = p.b_vector();

  // Near-identical normals collapse to the tightest offset first.
  for (int i = 0; i < n; ++i) {
    if (!alive[static_cast<std::size_t>(i)]) continue;
    for (int j = i + 1; j < n; ++j) {
      if (!alive[static_cast<std::size_t>(j)]) continue;
      if (rows_match(p.a_matrix().row(i), p.a_matrix().row(j), kRowMatchTol)) {
        b(i) = std::min(b(i), b(j));
        alive[static_cast<std::size_t>(j)] = 0;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!alive[static_cast<std::size_t>(i)]) continue;
    std::vector<int> others;
    for (int j = 0; j < n; ++j)
      if (alive[static_cast<std::size_t>(j)] && j != i) others.push_back(j);
    if (others.empty()) continue;
    Eigen::MatrixXd a(static_cast<int>(others.size()), p.dimension());
    Eigen::VectorXd bo(static_cast<int>(others.size()));
    for (std::size_t k = 0; k < others.size(); ++k) {
      a.row(static_cast<int>(k)) = p.a_matrix().row(others[k]);
      bo(static_cast<int>(k)) = b(others[k]);
    }
    LpProblem lp;
    lp.objective = p.a_matrix().row(i).transpose();
    lp.constraint_matrix = a;
    lp.rhs = bo;
    LpOutcome r = solve(lp);
    if (r.status == LpStatus::Optimal && r.optimal_value <= b(i) + kFeasibilityTol)
      alive[static_cast<std::size_t>(i)] = 0;
  }

  int kept = 0;
  for (char f : alive) kept += f;
  Eigen::MatrixXd a(kept, p.dimension());
  Eigen::VectorXd bk(kept);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (!alive[static_cast<std::size_t>(i)]) continue;
    a.row(k) = p.a_matrix().row(i);
    bk(k) = b(i);
    ++k;
  }
  return HPolytope(a, bk);
}

BoundingBox bounding_box(const HPolytope& p) {
  const int d = p.dimension();
  BoundingBox box;
  box.lower.resize(d);
  box.upper.resize(d);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < d; ++k) {
    e(k) = 1.0;
    box.upper(k) = tangent_offset(p, e);
    e(k) = -1.0;
    box.lower(k) = -tangent_offset(p, e);
    e(k) = 0.0;
  }
  return box;
}

bool is_bounded(const HPolytope& p) {
  const int d = p.dimension();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < d; ++k) {
    for (double s : {1.0, -1.0}) {
      e(k) = s;
      LpOutcome r = support_lp(p, e);
      e(k) = 0.0;
      if (r.status == LpStatus::Unbounded) return false;
      if (r.status == LpStatus::Infeasible) return true; // empty is trivially bounded
    }
  }
  return true;
}

bool is_empty(const HPolytope& p) {
  return !is_feasible(p.a_matrix(), p.b_vector());
}

namespace detail {

int affine_rank(const Eigen::MatrixXd& points, double tol) {
  if (points.rows() <= 1) return 0;
  Eigen::MatrixXd diffs = points.bottomRows(points.rows() - 1).rowwise() - points.row(0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(diffs);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

Eigen::MatrixXd dedup_and_sort_points(const Eigen::MatrixXd& points, double tol) {
  std::vector<int> order(static_cast<std::size_t>(points.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return lex_less(points.row(a), points.row(b)); });

  std::vector<int> kept;
  for (int idx : order) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      if (points(idx, 0) - points(*it, 0) > tol) break; // sorted on first coordinate
      if ((points.row(idx) - points.row(*it)).norm() <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(idx);
  }

  Eigen::MatrixXd out(static_cast<int>(kept.size()), points.cols());
  for (std::size_t i = 0; i < kept.size(); ++i) out.row(static_cast<int>(i)) = points.row(kept[i]);
  return out;
}

VertexSet enumerate_vertices_active(const HPolytope& p) {
  const int d = p.dimension();
  const int n = p.rows();
  if (d > kOracleMaxDim || n > kOracleMaxRows)
    throw OracleScale("vertex enumeration guard: need D <= " + std::to_string(kOracleMaxDim) +
                      " and rows <= " + std::to_string(kOracleMaxRows));
  if (is_empty(p)) throw EmptyPolytope("vertex enumeration on an empty polytope");
  if (!is_bounded(p)) throw UnboundedPolytope("vertex enumeration needs a bounded polytope");

  std::vector<Eigen::VectorXd> candidates;
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) idx[static_cast<std::size_t>(k)] = k;
  if (n >= d) {
    do {
      Eigen::MatrixXd s(d, d);
      Eigen::VectorXd bs(d);
      for (int k = 0; k < d; ++k) {
        s.row(k) = p.a_matrix().row(idx[static_cast<std::size_t>(k)]);
        bs(k) = p.b_vector()(idx[static_cast<std::size_t>(k)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(s);
      lu.setThreshold(1e-9);
      if (!lu.isInvertible()) continue;
      Eigen::VectorXd x = lu.solve(bs);
      if (((p.a_matrix() * x - p.b_vector()).array() <= kFeasibilityTol).all())
        candidates.push_back(x);
    } while (next_combination(idx, n));
  }
  if (candidates.empty())
    throw EmptyPolytope("no vertex found; polytope is degenerate beyond tolerances");

  Eigen::MatrixXd pts(static_cast<int>(candidates.size()), d);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    pts.row(static_cast<int>(i)) = candidates[i].transpose();

  VertexSet vs;
  vs.points = dedup_and_sort_points(pts, kVertexMergeTol);
  vs.active_rows.resize(static_cast<std::size_t>(vs.points.rows()));
  for (int i = 0; i < vs.points.rows(); ++i) {
    Eigen::VectorXd residual = p.a_matrix() * vs.points.row(i).transpose() - p.b_vector();
    double act_tol = kVertexMergeTol * (1.0 + vs.points.row(i).cwiseAbs().maxCoeff());
    for (int r = 0; r < n; ++r)
      if (std::abs(residual(r)) <= act_tol) vs.active_rows[static_cast<std::size_t>(i)].push_back(r);
  }
  return vs;
}

Eigen::MatrixXd extreme_points(const Eigen::MatrixXd& points) {
  const int d = static_cast<int>(points.cols());
  Eigen::MatrixXd pts = dedup_and_sort_points(points, kVertexMergeTol);
  const int m = static_cast<int>(pts.rows());
  if (m <= 1) return pts;

  // p_i is extreme iff some direction separates it strictly from the rest:
  // max t s.t. w.(p_i - p_j) >= t for all j, |w_k| <= 1.
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    Eigen::MatrixXd a(m - 1 + 2 * d, d + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m - 1 + 2 * d);
    int r = 0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      Eigen::RowVectorXd diff = pts.row(j) - pts.row(i);
      double norm = diff.norm();
      a.row(r).head(d) = diff / norm; // w.(p_j - p_i)/|..| + t <= 0
      a(r, d) = 1.0;
      ++r;
    }
    for (int k = 0; k < d; ++k) {
      a.row(r).setZero();
      a(r, k) = 1.0;
      b(r) = 1.0;
      ++r;
      a.row(r).setZero();
      a(r, k) = -1.0;
      b(r) = 1.0;
      ++r;
    }
    LpProblem lp;
    lp.objective = Eigen::VectorXd::Zero(d + 1);
    lp.objective(d) = 1.0;
    lp.constraint_matrix = a;
    lp.rhs = b;
    LpOutcome out = solve(lp);
    if (out.status == LpStatus::Optimal && out.optimal_value > 1e-7) keep.push_back(i);
  }

  Eigen::MatrixXd result(static_cast<int>(keep.size()), d);
  for (std::size_t i = 0; i < keep.size(); ++i) result.row(static_cast<int>(i)) = pts.row(keep[i]);
  return result;
}

} // namespace detail

VPolytope enumerate_vertices(const HPolytope& p) {
  return VPolytope{detail::enumerate_vertices_active(p).points};
}

HPolytope hull_to_h(const VPolytope& v) {
  const int d = v.dimension();
  const int m = v.count();
  double work = m * d; // C(m, d) plane candidates, each side-tested against m points
  for (int k = 0; k < d && work <= kHullWorkBudget; ++k) work *= double(m - k) / double(k + 1);
  if (d > kOracleMaxDim || work > kHullWorkBudget)
    throw OracleScale("hull conversion guard: need D <= " + std::to_string(kOracleMaxDim) +
                      " and a tractable candidate-plane count");
  if (m < d + 1 || detail::affine_rank(v.vertices) < d)
    throw LowerDimensional("point set spans an affine subspace; no facet representation");

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> offsets;
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) idx[static_cast<std::size_t>(k)] = k;
  do {
    Eigen::VectorXd normal;
    if (d == 1) {
      normal = Eigen::VectorXd::Ones(1);
    } else {
      Eigen::MatrixXd diffs(d - 1, d);
      for (int k = 1; k < d; ++k)
        diffs.row(k - 1) =
            v.vertices.row(idx[static_cast<std::size_t>(k)]) - v.vertices.row(idx[0]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(diffs);
      lu.setThreshold(1e-9);
      if (lu.rank() != d - 1) continue;
      Eigen::MatrixXd kernel = lu.kernel();
      if (kernel.cols() != 1) continue;
      normal = kernel.col(0);
    }
    normal /= normal.norm();
    double offset = normal.dot(v.vertices.row(idx[0]));

    Eigen::VectorXd side = v.vertices * normal - Eigen::VectorXd::Constant(m, offset);
    const double tol = kFeasibilityTol * (1.0 + std::abs(offset));
    if (side.maxCoeff() <= tol) {
      rows.emplace_back(normal.transpose());
      offsets.push_back(offset);
    } else if (side.minCoeff() >= -tol) {
      rows.emplace_back(-normal.transpose());
      offsets.push_back(-offset);
    }
  } while (next_combination(idx, m));

  if (rows.empty()) throw LowerDimensional("no supporting facet found");

  // Sort facets lexicographically and drop duplicates (same plane reached
  // through different vertex subsets). Normals computed from different
  // subsets of one facet's vertices disagree by far more than kRowMatchTol,
  // so near-parallel rows with near-equal offsets count as the same plane;
  // noise-level interleaving in the sort order means a twin is not
  // necessarily adjacent, hence the scan over every kept row.
  std::vector<int> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (lex_less(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)])) return true;
    if (lex_less(rows[static_cast<std::size_t>(b)], rows[static_cast<std::size_t>(a)])) return false;
    return offsets[static_cast<std::size_t>(a)] < offsets[static_cast<std::size_t>(b)];
  });
  std::vector<int> kept;
  for (int i : order) {
    bool duplicate = false;
    for (int k : kept) {
      if (rows_match(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(k)],
                     kNearParallelAngle) &&
          std::abs(offsets[static_cast<std::size_t>(i)] - offsets[static_cast<std::size_t>(k)]) <=
              kNearParallelAngle * (1.0 + std::abs(offsets[static_cast<std::size_t>(i)]))) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(i);
  }

  // Each kept offset becomes the support value over the vertex set, so every
  // vertex satisfies every row exactly.
  Eigen::MatrixXd a(static_cast<int>(kept.size()), d);
  Eigen::VectorXd b(static_cast<int>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    a.row(static_cast<int>(i)) = rows[static_cast<std::size_t>(kept[i])];
    b(static_cast<int>(i)) = (v.vertices * a.row(static_cast<int>(i)).transpose()).maxCoeff();
  }
  return HPolytope(a, b);
}

bool subset_of(const HPolytope& p, const HPolytope& q, double tol) {
  if (p.dimension() != q.dimension())
    throw DimensionMismatch("polytopes live in different dimensions");
  for (int i = 0; i < q.rows(); ++i) {
    try {
      if (tangent_offset(p, q.a_matrix().row(i).transpose()) > q.b_vector()(i) + tol) return false;
    } catch (const EmptyPolytope&) {
      return true;
    } catch (const UnboundedPolytope&) {
      return false;
    }
  }
  return true;
}

bool same_set(const HPolytope& p, const HPolytope& q, double tol) {
  return subset_of(p, q, tol) && subset_of(q, p, tol);
}

} // namespace polyflex
