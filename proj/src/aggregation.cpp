#include "polyflex/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "polyflex/lp.hpp"

namespace polyflex {
namespace {

constexpr int kMaxVertexPairs = 50000;

bool lex_row_less(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  for (int k = 0; k < a.size(); ++k) {
    if (a(k) < b(k)) return true;
    if (a(k) > b(k)) return false;
  }
  return false;
}

struct TaggedRow {
  int load;
  int row;
};

} // namespace

AlignedFamily align(const std::vector<HPolytope>& polytopes) {
  if (polytopes.empty()) throw InvalidParams("cannot align an empty load list");
  const int d = polytopes[0].dimension();
  const int n = static_cast<int>(polytopes.size());
  for (int k = 0; k < n; ++k) {
    if (polytopes[static_cast<std::size_t>(k)].dimension() != d)
      throw DimensionMismatch("load " + std::to_string(k) + " lives in a different dimension");
    if (is_empty(polytopes[static_cast<std::size_t>(k)]))
      throw EmptyPolytope("load " + std::to_string(k) + " is empty");
    if (!is_bounded(polytopes[static_cast<std::size_t>(k)]))
      throw UnboundedPolytope("load " + std::to_string(k) + " is unbounded");
  }

  // Sort every row of every load once, then group equal rows.
  std::vector<TaggedRow> tagged;
  for (int k = 0; k < n; ++k)
    for (int r = 0; r < polytopes[static_cast<std::size_t>(k)].rows(); ++r)
      tagged.push_back({k, r});
  auto row_of = [&](const TaggedRow& t) -> Eigen::RowVectorXd {
    return polytopes[static_cast<std::size_t>(t.load)].a_matrix().row(t.row);
  };
  std::sort(tagged.begin(), tagged.end(),
            [&](const TaggedRow& x, const TaggedRow& y) { return lex_row_less(row_of(x), row_of(y)); });

  std::vector<Eigen::RowVectorXd> unique_rows;
  // For each (unique row, load): the tightest original offset, if any.
  std::vector<std::vector<double>> given(static_cast<std::size_t>(n));
  constexpr double kMissing = std::numeric_limits<double>::infinity();

  for (const TaggedRow& t : tagged) {
    Eigen::RowVectorXd row = row_of(t);
    double offset = polytopes[static_cast<std::size_t>(t.load)].b_vector()(t.row);
    bool fresh = unique_rows.empty() ||
                 (row - unique_rows.back()).cwiseAbs().maxCoeff() > kRowMatchTol;
    if (fresh) {
      unique_rows.push_back(row);
      for (int k = 0; k < n; ++k) given[static_cast<std::size_t>(k)].push_back(kMissing);
    }
    double& slot = given[static_cast<std::size_t>(t.load)].back();
    slot = std::min(slot, offset);
  }

  const int c = static_cast<int>(unique_rows.size());
  for (int i = 0; i + 1 < c; ++i) {
    double cosine = std::min(1.0, std::abs(unique_rows[static_cast<std::size_t>(i)].dot(
                                      unique_rows[static_cast<std::size_t>(i + 1)])));
    if (cosine < 1.0 && std::acos(cosine) < kNearParallelAngle)
      warn("rows " + std::to_string(i) + " and " + std::to_string(i + 1) +
           " are nearly parallel but not merged; offsets may be ill-conditioned");
  }

  AlignedFamily fam;
  fam.shared_a.resize(c, d);
  for (int i = 0; i < c; ++i) fam.shared_a.row(i) = unique_rows[static_cast<std::size_t>(i)];
  fam.offsets.assign(static_cast<std::size_t>(n), Eigen::VectorXd(c));
  fam.provenance.assign(static_cast<std::size_t>(n),
                        std::vector<RowOrigin>(static_cast<std::size_t>(c), RowOrigin::Original));

  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < c; ++i) {
      double have = given[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      if (have == kMissing) {
        fam.offsets[static_cast<std::size_t>(k)](i) = tangent_offset(
            polytopes[static_cast<std::size_t>(k)], fam.shared_a.row(i).transpose());
        fam.provenance[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
            RowOrigin::TangentLp;
        ++fam.lp_count;
      } else {
        fam.offsets[static_cast<std::size_t>(k)](i) = have;
      }
    }
  }
  return fam;
}

HPolytope sum_same_shape(const Eigen::MatrixXd& a,
                         const std::vector<Eigen::VectorXd>& b_list) {
  if (b_list.empty()) throw InvalidParams("need at least one offset vector");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(a.rows());
  for (const Eigen::VectorXd& b : b_list) {
    if (b.size() != a.rows())
      throw DimensionMismatch("offset vector length does not match the row count");
    total += b;
  }
  return HPolytope(a, total);
}

HPolytope aggregate_general(const std::vector<HPolytope>& polytopes, AggregateInfo* info,
                            bool remove_input_redundancy) {
  const std::vector<HPolytope>* inputs = &polytopes;
  std::vector<HPolytope> reduced;
  if (remove_input_redundancy) {
    reduced.reserve(polytopes.size());
    for (const HPolytope& p : polytopes) reduced.push_back(remove_redundancy(p));
    inputs = &reduced;
  }
  AlignedFamily fam = align(*inputs);
  if (info) {
    info->unique_rows = static_cast<int>(fam.shared_a.rows());
    info->lp_count = fam.lp_count;
  }
  return sum_same_shape(fam.shared_a, fam.offsets);
}

VPolytope exact_minkowski_oracle(const HPolytope& p1, const HPolytope& p2) {
  if (p1.dimension() != p2.dimension())
    throw DimensionMismatch("summands live in different dimensions");
  const int d = p1.dimension();
  detail::VertexSet v1 = detail::enumerate_vertices_active(p1);
  detail::VertexSet v2 = detail::enumerate_vertices_active(p2);
  const int n1 = static_cast<int>(v1.points.rows());
  const int n2 = static_cast<int>(v2.points.rows());
  if (n1 * n2 > kMaxVertexPairs)
    throw OracleScale("pairwise vertex candidates exceed the oracle budget");

  // x_i + y_j is a vertex of the sum exactly when some direction exposes both
  // vertices alone, i.e. the relative interiors of the normal cones meet.
  // Search for c = A1_act' mu = A2_act' nu with mu, nu >= t, sum = 1, max t.
  std::vector<Eigen::VectorXd> found;
  for (int i = 0; i < n1; ++i) {
    const auto& act1 = v1.active_rows[static_cast<std::size_t>(i)];
    const int m1 = static_cast<int>(act1.size());
    for (int j = 0; j < n2; ++j) {
      const auto& act2 = v2.active_rows[static_cast<std::size_t>(j)];
      const int m2 = static_cast<int>(act2.size());
      const int vars = m1 + m2 + 1; // mu, nu, t
      const int rows = 2 * d + m1 + m2 + 2;
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, vars);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
      for (int r = 0; r < m1; ++r) {
        a.block(0, r, d, 1) = p1.a_matrix().row(act1[static_cast<std::size_t>(r)]).transpose();
        a(2 * d + r, r) = -1.0; // t - mu_r <= 0
        a(2 * d + r, vars - 1) = 1.0;
      }
      for (int s = 0; s < m2; ++s) {
        a.block(0, m1 + s, d, 1) =
            -p2.a_matrix().row(act2[static_cast<std::size_t>(s)]).transpose();
        a(2 * d + m1 + s, m1 + s) = -1.0;
        a(2 * d + m1 + s, vars - 1) = 1.0;
      }
      a.block(d, 0, d, vars) = -a.block(0, 0, d, vars); // equality c1 = c2
      a.row(rows - 2).head(m1 + m2).setOnes();          // sum of weights = 1
      a.row(rows - 1).head(m1 + m2).setConstant(-1.0);
      b(rows - 2) = 1.0;
      b(rows - 1) = -1.0;

      LpProblem lp;
      lp.objective = Eigen::VectorXd::Zero(vars);
      lp.objective(vars - 1) = 1.0;
      lp.constraint_matrix = a;
      lp.rhs = b;
      LpOutcome out = solve(lp);
      if (out.status == LpStatus::Optimal && out.optimal_value > 1e-7)
        found.push_back(v1.points.row(i) + v2.points.row(j));
    }
  }
  if (found.empty()) throw EmptyPolytope("no sum vertex certified; inputs degenerate");

  Eigen::MatrixXd pts(static_cast<int>(found.size()), d);
  for (std::size_t i = 0; i < found.size(); ++i) pts.row(static_cast<int>(i)) = found[i];
  return VPolytope{detail::dedup_and_sort_points(pts, kVertexMergeTol)};
}

HPolytope outer_approx_with_rows(const Eigen::MatrixXd& rows, const HPolytope& p) {
  if (rows.cols() != p.dimension())
    throw DimensionMismatch("row directions do not match the polytope dimension");
  if (rows.rows() < 1) throw InvalidParams("need at least one row direction");
  Eigen::VectorXd b(rows.rows());
  for (int i = 0; i < rows.rows(); ++i) b(i) = tangent_offset(p, rows.row(i).transpose());
  return HPolytope(rows, b);
}

bool contains_minkowski_sum_point(const HPolytope& p1, const HPolytope& p2,
                                  const Eigen::VectorXd& z, double tol) {
  if (p1.dimension() != p2.dimension())
    throw DimensionMismatch("summands live in different dimensions");
  if (z.size() != p1.dimension())
    throw DimensionMismatch("point dimension does not match the summands");
  // Split z = x + (z - x): feasibility over x.
  Eigen::MatrixXd a(p1.rows() + p2.rows(), p1.dimension());
  a << p1.a_matrix(), -p2.a_matrix();
  Eigen::VectorXd b(a.rows());
  b.head(p1.rows()) = p1.b_vector().array() + tol;
  b.tail(p2.rows()) = (p2.b_vector() - p2.a_matrix() * z).array() + tol;
  return is_feasible(a, b);
}

} // namespace polyflex
