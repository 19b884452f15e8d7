#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "polyflex/polytope.hpp"

namespace polyflex {

struct VolumeEstimate {
  double volume = 0.0;
  std::int64_t samples = 0;
  std::int64_t hit_count = 0;
  double ci_halfwidth_95 = 0.0; // normal approximation to the binomial
  BoundingBox box;
};

// Rejection sampling against the bounding box with a counter-based sample
// stream: results are identical for any thread count.
VolumeEstimate mc_volume(const HPolytope& p, std::int64_t samples, std::uint64_t seed,
                         int threads = 1);
VolumeEstimate mc_volume_in_box(const HPolytope& p, const BoundingBox& box, std::int64_t samples,
                                std::uint64_t seed, int threads = 1);

struct ExactVolume {
  double volume = 0.0;
  bool lower_dimensional = false; // flat sets report volume 0
};

// Pyramid decomposition fanned from the vertex centroid over the facets,
// recursing within each facet plane. No sampling involved.
ExactVolume exact_volume(const HPolytope& p);

enum class VolumeMethod { Exact, MonteCarlo };

struct ErrorRatio {
  double ratio = 0.0;         // V_approx / V_reference
  double percent_error = 0.0; // (ratio - 1) * 100
  double ratio_ci_95 = 0.0;   // 0 when exact
  bool containment_violation = false;
};

// Volume ratio of two polytopes. Monte Carlo estimates share one sample
// stream and one box, which cancels most of the common variance; when the
// reference is a subset the per-stream ratio can never drop below 1, so a
// drop beyond the CI is flagged.
ErrorRatio compare_volumes(const HPolytope& p_approx, const HPolytope& p_ref, VolumeMethod method,
                           std::int64_t budget, std::uint64_t seed, int threads = 1,
                           bool ref_is_subset = true);

// Closed form for polytopes whose rows are all +-e_i; nullopt otherwise.
std::optional<double> axis_box_volume(const HPolytope& p);

namespace detail {

// Volume of the polytope with the given facet rows and vertex set; entry
// point for callers that already hold both representations.
double volume_from_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const Eigen::MatrixXd& vertices, int dim);

} // namespace detail

} // namespace polyflex
