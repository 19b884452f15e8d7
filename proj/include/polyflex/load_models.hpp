#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "polyflex/polytope.hpp"

namespace polyflex {

// Charging/discharging storage over a horizon of D periods. The feasible set
// lives in R^{2D}, stacked as [x_in; x_out] with x_in >= 0 and x_out <= 0.
struct StorageParams {
  int horizon = 0;
  Eigen::VectorXd p_max; // kW, charging bound, >= 0
  Eigen::VectorXd p_min; // kW, discharging bound, <= 0
  double capacity = 0.0; // kWh
  double initial = 0.0;  // kWh, 0 <= initial <= capacity
  double alpha = 1.0;    // retained energy fraction per period, (0, 1]
  double eta_in = 1.0;   // (0, 1]
  double eta_out = 1.0;  // (0, 1]
};

// Thermostatically controlled load with first-order thermal dynamics
//   theta(t+1) = (1-a) theta(t) + a theta_a(t+1) - b x(t+1)
// whose feasible power profiles keep theta inside [theta_r - delta, theta_r + delta].
struct TclParams {
  double a = 0.0;          // thermal retention rate per period, (0, 1)
  double b = 0.0;          // degC per kWh of cooling, > 0
  Eigen::VectorXd theta_a; // ambient trajectory, degC, one entry per period
  double theta_r = 0.0;    // setpoint, degC
  double delta = 0.0;      // deadband half-width, degC, > 0
  double p_m = 0.0;        // rated power, kW, > 0
  double theta_0 = 0.0;    // initial temperature inside the deadband
};

// Fixed-energy load with per-period power caps, active on [t_arrive, t_depart).
struct DeferrableParams {
  int horizon = 0;
  Eigen::VectorXd p_max; // kW, >= 0
  double energy = 0.0;   // kWh, > 0
  int t_arrive = 0;      // first active period
  int t_depart = 0;      // one past the last active period
};

struct HypercubeParams {
  Eigen::VectorXd p_low;
  Eigen::VectorXd p_high;
};

// Ramp band between consecutive periods: |x(i+1) - x(i)| <= delta_ramp.
struct DiffConstraint {
  double delta_ramp = 0.0;
};

HPolytope build_storage(const StorageParams& p);
HPolytope build_tcl(const TclParams& p, int horizon);
HPolytope build_deferrable(const DeferrableParams& p);
HPolytope build_hypercube(const HypercubeParams& p);
HPolytope add_diff_constraints(const HPolytope& p, const DiffConstraint& c);

// Net-power view of a non-dissipative, unit-efficiency storage load: one
// coordinate per period instead of the stacked in/out pair. This is the space
// the pairwise benchmarks work in, since its dimension equals the horizon.
HPolytope build_storage_net(const StorageParams& p);

enum class LoadKind { Storage, Tcl, Deferrable, Hypercube };
enum class Heterogeneity { Low, High };

struct LoadSpec {
  LoadKind kind = LoadKind::Hypercube;
  std::optional<StorageParams> storage;
  std::optional<TclParams> tcl;
  std::optional<DeferrableParams> deferrable;
  std::optional<HypercubeParams> hypercube;
  std::optional<double> diff_ramp;
};

// Builds the polytope for a parsed load description. Ramp rows on the stacked
// storage space are rejected: the band is defined on a power trajectory, not
// on the in/out pair.
HPolytope build_from_spec(const LoadSpec& spec);

// Population draws. Each load k consumes a fixed-order parameter stream from
// substream(seed, k), so populations are bit-reproducible and a load's
// physical parameters do not depend on the slot count it is built for.
TclParams draw_tcl(Heterogeneity h, int slots, std::uint64_t seed, std::uint64_t index,
                   double ambient = 32.0);
StorageParams draw_storage(int horizon, std::uint64_t seed, std::uint64_t index);

std::vector<TclParams> generate_tcl_population(int count, Heterogeneity h, int slots,
                                               std::uint64_t seed, double ambient = 32.0);
std::vector<StorageParams> generate_storage_population(int count, int horizon,
                                                       std::uint64_t seed);

} // namespace polyflex
