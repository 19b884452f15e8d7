#include "polyflex/lp.hpp"

#include <cmath>
#include <vector>

#include "polyflex/common.hpp"

namespace polyflex {
namespace {

constexpr double kPivotTol = 1e-9;
// Pivot eligibility is relative to the entering column's magnitude: dividing
// a basis-inverse row by an element orders of magnitude below its neighbors
// (near-duplicate constraint rows produce them) destroys conditioning.
constexpr double kRelPivotTol = 1e-7;
constexpr int kRefactorEvery = 64;

// Column index space of the equality system:
//   [0, d)        structural x+ parts
//   [d, 2d)       structural x- parts
//   [2d, 2d+n)    slacks, coefficient sign_i in row i
//   [2d+n, ...)   artificials for rows that started with negative rhs
struct Tableau {
  int n = 0;
  int d = 0;
  int art_begin = 0;
  int total_cols = 0;
  Eigen::MatrixXd a_signed;      // diag(sign) * A
  Eigen::VectorXd sign;          // +-1 per row
  Eigen::VectorXd rhs;           // sign .* b, nonnegative
  std::vector<int> art_row;      // artificial k lives in row art_row[k]

  bool is_structural(int j) const { return j < 2 * d; }
  bool is_artificial(int j) const { return j >= art_begin; }

  Eigen::VectorXd column(int j) const {
    if (j < d) return a_signed.col(j);
    if (j < 2 * d) return -a_signed.col(j - d);
    if (j < art_begin) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j - 2 * d) = sign(j - 2 * d);
      return e;
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(art_row[static_cast<std::size_t>(j - art_begin)]) = 1.0;
    return e;
  }
};

struct Basis {
  std::vector<int> cols;      // one column per row
  std::vector<char> in_basis; // over all columns
  Eigen::MatrixXd binv;
  Eigen::VectorXd xb;
};

void refactorize(const Tableau& t, Basis& basis) {
  Eigen::MatrixXd b(t.n, t.n);
  for (int k = 0; k < t.n; ++k) b.col(k) = t.column(basis.cols[static_cast<std::size_t>(k)]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  if (!lu.isInvertible())
    throw IterationLimit("simplex basis became numerically singular");
  basis.binv = lu.inverse();
  basis.xb = basis.binv * t.rhs;
}

// One simplex phase; cost is over the full column space, `allowed` masks
// entering candidates. Returns false when the phase hit an unbounded ray.
// Optimality and unboundedness are only declared on a freshly factorized
// basis; a claim made after product-form updates triggers a refactorization
// and one more pricing pass instead.
bool run_phase(const Tableau& t, Basis& basis, const Eigen::VectorXd& cost,
               const std::vector<char>& allowed, bool forbid_artificial_growth,
               int max_iters) {
  double cmax = cost.size() > 0 ? cost.cwiseAbs().maxCoeff() : 0.0;
  const double rc_tol = 1e-9 * (1.0 + cmax);
  int since_refactor = 0;

  for (int iter = 0; iter < max_iters; ++iter) {
    // y = cB' Binv, then reduced costs.
    Eigen::VectorXd cb(t.n);
    for (int k = 0; k < t.n; ++k) cb(k) = cost(basis.cols[static_cast<std::size_t>(k)]);
    Eigen::VectorXd y = basis.binv.transpose() * cb;
    Eigen::VectorXd dots = t.a_signed.transpose() * y; // structural pricing in one pass

    int entering = -1;
    for (int j = 0; j < t.total_cols && entering < 0; ++j) {
      if (!allowed[static_cast<std::size_t>(j)] || basis.in_basis[static_cast<std::size_t>(j)]) continue;
      double rc;
      if (j < t.d) rc = cost(j) - dots(j);
      else if (j < 2 * t.d) rc = cost(j) + dots(j - t.d);
      else if (j < t.art_begin) rc = cost(j) - y(j - 2 * t.d) * t.sign(j - 2 * t.d);
      else rc = cost(j) - y(t.art_row[static_cast<std::size_t>(j - t.art_begin)]);
      if (rc > rc_tol) entering = j; // Bland: first improving index
    }
    if (entering < 0) {
      if (since_refactor > 0) {
        refactorize(t, basis);
        since_refactor = 0;
        continue;
      }
      return true; // optimal for this phase
    }

    Eigen::VectorXd dir = basis.binv * t.column(entering);
    const double pivot_tol = std::max(kPivotTol, kRelPivotTol * dir.cwiseAbs().maxCoeff());

    int leaving = -1;
    if (forbid_artificial_growth) {
      // An artificial parked at zero must not move; pivot it out at zero
      // step. A coefficient below the pivot tolerance stays put instead:
      // the artificial then drifts by at most step * pivot_tol, which is
      // harmless, while pivoting on it would not be.
      for (int k = 0; k < t.n; ++k) {
        int bc = basis.cols[static_cast<std::size_t>(k)];
        if (t.is_artificial(bc) && std::abs(dir(k)) > pivot_tol &&
            (leaving < 0 || bc < basis.cols[static_cast<std::size_t>(leaving)]))
          leaving = k;
      }
    }
    if (leaving < 0) {
      double best = 0.0;
      for (int k = 0; k < t.n; ++k) {
        if (dir(k) <= pivot_tol) continue;
        double ratio = std::max(basis.xb(k), 0.0) / dir(k);
        if (leaving < 0 || ratio < best - 1e-12 ||
            (ratio < best + 1e-12 &&
             basis.cols[static_cast<std::size_t>(k)] < basis.cols[static_cast<std::size_t>(leaving)]))
        {
          leaving = k;
          best = ratio;
        }
      }
    }
    if (leaving < 0) {
      if (since_refactor > 0) {
        refactorize(t, basis);
        since_refactor = 0;
        continue;
      }
      return false; // unbounded ray
    }

    double step = basis.xb(leaving) / dir(leaving);
    for (int k = 0; k < t.n; ++k)
      if (k != leaving) basis.xb(k) -= dir(k) * step;
    basis.xb(leaving) = step;

    basis.binv.row(leaving) /= dir(leaving);
    for (int k = 0; k < t.n; ++k)
      if (k != leaving && std::abs(dir(k)) > 0.0)
        basis.binv.row(k) -= dir(k) * basis.binv.row(leaving);

    basis.in_basis[static_cast<std::size_t>(basis.cols[static_cast<std::size_t>(leaving)])] = 0;
    basis.cols[static_cast<std::size_t>(leaving)] = entering;
    basis.in_basis[static_cast<std::size_t>(entering)] = 1;

    if (++since_refactor >= kRefactorEvery) {
      refactorize(t, basis);
      since_refactor = 0;
    }
  }
  throw IterationLimit("simplex exceeded its pivot budget");
}

} // namespace

LpOutcome solve(const LpProblem& problem) {
  const auto n = static_cast<int>(problem.constraint_matrix.rows());
  const auto d = static_cast<int>(problem.constraint_matrix.cols());
  if (problem.objective.size() != d)
    throw DimensionMismatch("objective length does not match constraint columns");
  if (problem.rhs.size() != n)
    throw DimensionMismatch("rhs length does not match constraint rows");
  if (d < 1) throw DimensionMismatch("problem needs at least one variable");

  LpOutcome out;
  if (n == 0) {
    // No constraints: bounded only for a zero objective.
    if (problem.objective.cwiseAbs().maxCoeff() == 0.0) {
      out.status = LpStatus::Optimal;
      out.optimal_value = 0.0;
      out.optimizer = Eigen::VectorXd::Zero(d);
    } else {
      out.status = LpStatus::Unbounded;
    }
    return out;
  }

  Tableau t;
  t.n = n;
  t.d = d;
  t.sign = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i)
    if (problem.rhs(i) < 0.0) t.sign(i) = -1.0;
  t.a_signed = t.sign.asDiagonal() * problem.constraint_matrix;
  t.rhs = t.sign.cwiseProduct(problem.rhs);
  for (int i = 0; i < n; ++i)
    if (t.sign(i) < 0.0) t.art_row.push_back(i);
  t.art_begin = 2 * d + n;
  t.total_cols = t.art_begin + static_cast<int>(t.art_row.size());

  Basis basis;
  basis.cols.resize(static_cast<std::size_t>(n));
  basis.in_basis.assign(static_cast<std::size_t>(t.total_cols), 0);
  {
    int next_art = 0;
    for (int i = 0; i < n; ++i) {
      int col = t.sign(i) > 0.0 ? 2 * d + i : t.art_begin + next_art++;
      basis.cols[static_cast<std::size_t>(i)] = col;
      basis.in_basis[static_cast<std::size_t>(col)] = 1;
    }
  }
  basis.binv = Eigen::MatrixXd::Identity(n, n);
  basis.xb = t.rhs;

  const int max_iters = 50 * (n + d);

  if (!t.art_row.empty()) {
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(t.total_cols);
    for (int j = t.art_begin; j < t.total_cols; ++j) phase1_cost(j) = -1.0;
    std::vector<char> allowed(static_cast<std::size_t>(t.total_cols), 1);
    if (!run_phase(t, basis, phase1_cost, allowed, false, max_iters))
      throw IterationLimit("phase one reported an unbounded ray");

    double infeas = 0.0;
    for (int k = 0; k < n; ++k)
      if (t.is_artificial(basis.cols[static_cast<std::size_t>(k)]))
        infeas += std::max(basis.xb(k), 0.0);
    if (infeas > 1e-8 * (1.0 + problem.rhs.cwiseAbs().maxCoeff())) {
      out.status = LpStatus::Infeasible;
      return out;
    }
  }

  Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(t.total_cols);
  phase2_cost.head(d) = problem.objective;
  phase2_cost.segment(d, d) = -problem.objective;
  std::vector<char> allowed(static_cast<std::size_t>(t.total_cols), 1);
  for (int j = t.art_begin; j < t.total_cols; ++j) allowed[static_cast<std::size_t>(j)] = 0;

  if (!run_phase(t, basis, phase2_cost, allowed, !t.art_row.empty(), max_iters)) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < n; ++k) {
    int col = basis.cols[static_cast<std::size_t>(k)];
    if (col < d) x(col) += basis.xb(k);
    else if (col < 2 * d) x(col - d) -= basis.xb(k);
  }

  // Tripwire: a claimed optimum must satisfy the constraints it was solved
  // under. Failing this means the factorized basis itself is too
  // ill-conditioned to trust, which is an error, not an answer.
  const double residual = (problem.constraint_matrix * x - problem.rhs).maxCoeff();
  const double scale =
      1.0 + problem.rhs.cwiseAbs().maxCoeff() + x.cwiseAbs().maxCoeff();
  if (residual > 1e-7 * scale)
    throw IterationLimit("simplex lost primal feasibility beyond tolerance");

  out.status = LpStatus::Optimal;
  out.optimizer = x;
  out.optimal_value = problem.objective.dot(x);
  return out;
}

bool is_feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(a.cols());
  p.constraint_matrix = a;
  p.rhs = b;
  return solve(p).status == LpStatus::Optimal;
}

} // namespace polyflex
