#pragma once

#include <stdexcept>
#include <string>

namespace polyflex {

// Numerical tolerances shared across the library. Values are part of the
// documented behaviour; tests pin against them.
inline constexpr double kFeasibilityTol = 1e-8;    // absolute, constraint residuals
inline constexpr double kValueTol = 1e-7;          // relative, objective values
inline constexpr double kVertexMergeTol = 1e-7;    // Euclidean, vertex dedup
inline constexpr double kRowMatchTol = 1e-9;       // per component, normalized rows
// Directions closer than this count as the same plane where normals carry
// numerical noise (vertex-derived facets); also the warning threshold.
inline constexpr double kNearParallelAngle = 1e-6;

// Size guard for the enumeration-based oracle paths.
inline constexpr int kOracleMaxDim = 6;
inline constexpr int kOracleMaxRows = 40;

// Work cap for facet recovery from a vertex set: C(V, D) candidate planes,
// each side-tested against all V points.
inline constexpr double kHullWorkBudget = 2.5e8;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyPolytope : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnboundedPolytope : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input exceeds the documented enumeration size guard.
struct OracleScale : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Vertex data spans an affine subspace of dimension < D.
struct LowerDimensional : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation applied to a space it is not defined on.
struct UnsupportedSpace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simplex exceeded its pivot budget; numerical trouble, not a silent answer.
struct IterationLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hook for non-fatal diagnostics (near-parallel rows and the like).
using WarnFn = void (*)(const std::string&);
void set_warn_handler(WarnFn fn); // nullptr restores the stderr default
void warn(const std::string& message);

} // namespace polyflex
