#include "polyflex/volume.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "polyflex/rng.hpp"

namespace polyflex {
namespace {

constexpr double kZ95 = 1.959963984540054;

int clamp_threads(int threads, std::int64_t samples) {
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, 64);
  if (samples < 10000) return 1;
  return static_cast<int>(std::min<std::int64_t>(threads, samples));
}

void fill_sample(Eigen::VectorXd& x, const BoundingBox& box, std::uint64_t seed, std::int64_t s) {
  for (int k = 0; k < x.size(); ++k) {
    double u = counter_uniform(seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k));
    x(k) = box.lower(k) + (box.upper(k) - box.lower(k)) * u;
  }
}

bool inside(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x) {
  return ((a * x - b).array() <= kFeasibilityTol).all();
}

// One reduction over the shared sample stream; per-range counts are summed in
// range order, so the result is independent of the worker count.
template <typename CountFn>
void run_partitioned(std::int64_t samples, int threads, CountFn&& count_range) {
  if (threads <= 1) {
    count_range(0, samples, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::int64_t chunk = (samples + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    std::int64_t lo = t * chunk;
    std::int64_t hi = std::min<std::int64_t>(samples, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&count_range, lo, hi, t] { count_range(lo, hi, t); });
  }
  for (auto& th : pool) th.join();
}

BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) {
  BoundingBox out;
  out.lower = a.lower.cwiseMin(b.lower);
  out.upper = a.upper.cwiseMax(b.upper);
  return out;
}

} // namespace

VolumeEstimate mc_volume_in_box(const HPolytope& p, const BoundingBox& box, std::int64_t samples,
                                std::uint64_t seed, int threads) {
  if (samples < 1) throw InvalidParams("sample budget must be at least 1");
  if (box.lower.size() != p.dimension())
    throw DimensionMismatch("box dimension does not match the polytope");
  threads = clamp_threads(threads, samples);

  std::vector<std::int64_t> hits(static_cast<std::size_t>(threads), 0);
  const Eigen::MatrixXd& a = p.a_matrix();
  const Eigen::VectorXd& b = p.b_vector();
  run_partitioned(samples, threads, [&](std::int64_t lo, std::int64_t hi, int slot) {
    Eigen::VectorXd x(p.dimension());
    std::int64_t local = 0;
    for (std::int64_t s = lo; s < hi; ++s) {
      fill_sample(x, box, seed, s);
      if (inside(a, b, x)) ++local;
    }
    hits[static_cast<std::size_t>(slot)] = local;
  });

  VolumeEstimate est;
  est.samples = samples;
  est.box = box;
  for (std::int64_t h : hits) est.hit_count += h;
  const double box_volume = box.volume();
  const double rate = static_cast<double>(est.hit_count) / static_cast<double>(samples);
  est.volume = box_volume * rate;
  est.ci_halfwidth_95 =
      kZ95 * box_volume * std::sqrt(rate * (1.0 - rate) / static_cast<double>(samples));
  return est;
}

VolumeEstimate mc_volume(const HPolytope& p, std::int64_t samples, std::uint64_t seed,
                         int threads) {
  return mc_volume_in_box(p, bounding_box(p), samples, seed, threads);
}

namespace detail {

double volume_from_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const Eigen::MatrixXd& vertices, int dim) {
  if (dim == 1) {
    return vertices.col(0).maxCoeff() - vertices.col(0).minCoeff();
  }
  const int m = static_cast<int>(a.rows());
  const int v = static_cast<int>(vertices.rows());
  if (v < dim + 1) return 0.0;

  Eigen::VectorXd centroid = vertices.colwise().mean();
  const double coord_scale = 1.0 + vertices.cwiseAbs().maxCoeff();

  // Rows describing one plane would count its facet twice. Normals derived
  // from noisy vertex sets can disagree well above kRowMatchTol, so the
  // near-parallel threshold decides sameness here.
  std::vector<char> skip(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (!skip[static_cast<std::size_t>(j)] &&
          (a.row(i) - a.row(j)).cwiseAbs().maxCoeff() <= kNearParallelAngle &&
          std::abs(b(i) - b(j)) <= kNearParallelAngle * coord_scale)
        skip[static_cast<std::size_t>(j)] = 1;

  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    if (skip[static_cast<std::size_t>(i)]) continue;
    Eigen::VectorXd residual = vertices * a.row(i).transpose() - Eigen::VectorXd::Constant(v, b(i));
    const double act_tol = kVertexMergeTol * (1.0 + std::abs(b(i)) + coord_scale);
    std::vector<int> active;
    for (int j = 0; j < v; ++j)
      if (std::abs(residual(j)) <= act_tol) active.push_back(j);
    if (static_cast<int>(active.size()) < dim) continue;

    Eigen::MatrixXd facet_pts(static_cast<int>(active.size()), dim);
    for (std::size_t j = 0; j < active.size(); ++j)
      facet_pts.row(static_cast<int>(j)) = vertices.row(active[j]);
    if (polyflex::detail::affine_rank(facet_pts) != dim - 1) continue; // a face, not a facet

    const double height = b(i) - a.row(i).dot(centroid);
    if (height <= 0.0) continue; // centroid on the plane: flat pyramid

    // Orthonormal basis of the facet plane and the origin shift into it.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.row(i).transpose());
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd basis = q.rightCols(dim - 1);
    Eigen::RowVectorXd origin = facet_pts.row(0);

    Eigen::MatrixXd local_pts = (facet_pts.rowwise() - origin) * basis;

    // Project the remaining rows into the plane for the recursive call.
    // Renormalizing lets the dedup pass below catch rows that restrict to the
    // same hyperplane of the plane; without it a redundant row tight on a
    // ridge would shadow the true neighbor row and the ridge counts twice.
    std::vector<int> keep;
    for (int r = 0; r < m; ++r) {
      if (r == i || skip[static_cast<std::size_t>(r)]) continue;
      if ((a.row(r) * basis).norm() > 1e-10) keep.push_back(r);
    }
    Eigen::MatrixXd sub_a(static_cast<int>(keep.size()), dim - 1);
    Eigen::VectorXd sub_b(static_cast<int>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
      Eigen::RowVectorXd g = a.row(keep[r]) * basis;
      const double scale = g.norm();
      sub_a.row(static_cast<int>(r)) = g / scale;
      sub_b(static_cast<int>(r)) = (b(keep[r]) - a.row(keep[r]).dot(origin)) / scale;
    }

    total += height * volume_from_vertices(sub_a, sub_b, local_pts, dim - 1) / dim;
  }
  return total;
}

} // namespace detail

ExactVolume exact_volume(const HPolytope& p) {
  polyflex::detail::VertexSet vs = polyflex::detail::enumerate_vertices_active(p);
  ExactVolume out;
  if (polyflex::detail::affine_rank(vs.points) < p.dimension()) {
    out.lower_dimensional = true;
    return out;
  }
  out.volume =
      detail::volume_from_vertices(p.a_matrix(), p.b_vector(), vs.points, p.dimension());
  return out;
}

std::optional<double> axis_box_volume(const HPolytope& p) {
  const int d = p.dimension();
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(d, -std::numeric_limits<double>::infinity());
  for (int i = 0; i < p.rows(); ++i) {
    int axis = -1;
    for (int k = 0; k < d; ++k) {
      if (std::abs(p.a_matrix()(i, k)) > 1e-12) {
        if (axis >= 0) return std::nullopt; // more than one coordinate involved
        axis = k;
      }
    }
    if (axis < 0) return std::nullopt;
    // Rows are unit norm, so the entry is +-1.
    if (p.a_matrix()(i, axis) > 0)
      upper(axis) = std::min(upper(axis), p.b_vector()(i));
    else
      lower(axis) = std::max(lower(axis), -p.b_vector()(i));
  }
  double volume = 1.0;
  for (int k = 0; k < d; ++k) {
    if (!std::isfinite(upper(k)) || !std::isfinite(lower(k))) return std::nullopt;
    volume *= std::max(0.0, upper(k) - lower(k));
  }
  return volume;
}

ErrorRatio compare_volumes(const HPolytope& p_approx, const HPolytope& p_ref, VolumeMethod method,
                           std::int64_t budget, std::uint64_t seed, int threads,
                           bool ref_is_subset) {
  if (p_approx.dimension() != p_ref.dimension())
    throw DimensionMismatch("volume ratio needs a common dimension");
  ErrorRatio out;

  if (method == VolumeMethod::Exact) {
    ExactVolume va = exact_volume(p_approx);
    ExactVolume vr = exact_volume(p_ref);
    if (va.lower_dimensional || vr.lower_dimensional || vr.volume <= 0.0)
      throw InvalidParams("volume ratio undefined for flat or zero-volume reference");
    out.ratio = va.volume / vr.volume;
    out.percent_error = (out.ratio - 1.0) * 100.0;
    out.containment_violation = ref_is_subset && out.ratio < 1.0 - 1e-9;
    return out;
  }

  if (budget < 1) throw InvalidParams("sample budget must be at least 1");
  const BoundingBox box = union_box(bounding_box(p_approx), bounding_box(p_ref));
  const int threads_used = clamp_threads(threads, budget);

  struct Counts {
    std::int64_t approx = 0, ref = 0, both = 0;
  };
  std::vector<Counts> counts(static_cast<std::size_t>(threads_used));
  run_partitioned(budget, threads_used, [&](std::int64_t lo, std::int64_t hi, int slot) {
    Eigen::VectorXd x(p_approx.dimension());
    Counts local;
    for (std::int64_t s = lo; s < hi; ++s) {
      fill_sample(x, box, seed, s);
      bool in_a = inside(p_approx.a_matrix(), p_approx.b_vector(), x);
      bool in_r = inside(p_ref.a_matrix(), p_ref.b_vector(), x);
      local.approx += in_a;
      local.ref += in_r;
      local.both += in_a && in_r;
    }
    counts[static_cast<std::size_t>(slot)] = local;
  });

  Counts sum;
  for (const Counts& c : counts) {
    sum.approx += c.approx;
    sum.ref += c.ref;
    sum.both += c.both;
  }
  if (sum.ref == 0) throw InvalidParams("reference caught no samples; raise the budget");

  const double n = static_cast<double>(budget);
  const double pa = static_cast<double>(sum.approx) / n;
  const double pr = static_cast<double>(sum.ref) / n;
  const double pb = static_cast<double>(sum.both) / n;
  out.ratio = pa / pr;

  // Delta method on the paired counts; the shared stream makes the covariance
  // term large and the ratio variance small for near-equal sets.
  const double var =
      (pa * (1.0 - pa) / (pr * pr) + pa * pa * pr * (1.0 - pr) / (pr * pr * pr * pr) -
       2.0 * pa * (pb - pa * pr) / (pr * pr * pr)) /
      n;
  out.ratio_ci_95 = kZ95 * std::sqrt(std::max(0.0, var));
  out.percent_error = (out.ratio - 1.0) * 100.0;
  out.containment_violation = ref_is_subset && out.ratio < 1.0 - out.ratio_ci_95 - 1e-12;
  return out;
}

} // namespace polyflex
