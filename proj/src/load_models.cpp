#include "polyflex/load_models.hpp"

#include <cmath>
#include <string>

#include "polyflex/rng.hpp"

namespace polyflex {
namespace {

// Population means: thermal capacitance (kWh/degC), thermal resistance
// (degC/kW), rated power (kW), coefficient of performance, setpoint (degC),
// deadband half-width (degC).
constexpr double kMeanC = 2.0;
constexpr double kMeanR = 2.0;
constexpr double kMeanPm = 5.6;
constexpr double kMeanCop = 2.5;
constexpr double kMeanThetaR = 22.5;
constexpr double kMeanDelta = 0.3;

// Generator tags keep the tcl and storage parameter streams disjoint.
constexpr std::uint64_t kTclStream = 1;
constexpr std::uint64_t kStorageStream = 2;

void check_storage(const StorageParams& p) {
  if (p.horizon < 1) throw InvalidParams("storage horizon must be at least 1");
  if (p.p_max.size() != p.horizon || p.p_min.size() != p.horizon)
    throw InvalidParams("storage power bounds must have one entry per period");
  if ((p.p_max.array() < 0).any() || (p.p_min.array() > 0).any())
    throw InvalidParams("storage needs p_min <= 0 <= p_max");
  if (p.capacity < 0 || p.initial < 0 || p.initial > p.capacity)
    throw InvalidParams("storage needs 0 <= initial <= capacity");
  if (!(p.alpha > 0) || p.alpha > 1) throw InvalidParams("storage dissipation must be in (0, 1]");
  if (!(p.eta_in > 0) || p.eta_in > 1 || !(p.eta_out > 0) || p.eta_out > 1)
    throw InvalidParams("storage efficiencies must be in (0, 1]");
}

} // namespace

HPolytope build_storage(const StorageParams& p) {
  check_storage(p);
  const int d = p.horizon;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6 * d, 2 * d);
  Eigen::VectorXd b(6 * d);
  int r = 0;
  for (int i = 0; i < d; ++i) {
    a(r, i) = 1.0;
    b(r) = p.p_max(i);
    ++r;
  }
  for (int i = 0; i < d; ++i) {
    a(r, i) = -1.0;
    b(r) = 0.0;
    ++r;
  }
  for (int i = 0; i < d; ++i) {
    a(r, d + i) = 1.0;
    b(r) = 0.0;
    ++r;
  }
  for (int i = 0; i < d; ++i) {
    a(r, d + i) = -1.0;
    b(r) = -p.p_min(i);
    ++r;
  }
  // Stored energy after period j: alpha^j S0 + sum_i alpha^(j-i) (eta_in x_in(i)
  // + eta_out x_out(i)), kept inside [0, capacity].
  double alpha_j = 1.0;
  for (int j = 1; j <= d; ++j) {
    alpha_j *= p.alpha;
    double coef = 1.0;
    for (int i = j; i >= 1; --i) {
      a(r, i - 1) = p.eta_in * coef;
      a(r, d + i - 1) = p.eta_out * coef;
      coef *= p.alpha;
    }
    b(r) = p.capacity - alpha_j * p.initial;
    a.row(r + d) = -a.row(r);
    b(r + d) = alpha_j * p.initial;
    ++r;
  }
  return HPolytope(a, b);
}

HPolytope build_storage_net(const StorageParams& p) {
  check_storage(p);
  if (std::abs(p.alpha - 1.0) > 1e-12 || std::abs(p.eta_in - 1.0) > 1e-12 ||
      std::abs(p.eta_out - 1.0) > 1e-12)
    throw InvalidParams("net-power storage view needs unit dissipation and efficiencies");
  const int d = p.horizon;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4 * d, d);
  Eigen::VectorXd b(4 * d);
  int r = 0;
  for (int i = 0; i < d; ++i) {
    a(r, i) = 1.0;
    b(r) = p.p_max(i);
    ++r;
  }
  for (int i = 0; i < d; ++i) {
    a(r, i) = -1.0;
    b(r) = -p.p_min(i);
    ++r;
  }
  for (int j = 1; j <= d; ++j) {
    a.row(r).head(j).setOnes();
    b(r) = p.capacity - p.initial;
    a.row(r + d) = -a.row(r);
    b(r + d) = p.initial;
    ++r;
  }
  return HPolytope(a, b);
}

HPolytope build_tcl(const TclParams& p, int horizon) {
  if (horizon < 1) throw InvalidParams("tcl horizon must be at least 1");
  if (p.theta_a.size() != horizon)
    throw InvalidParams("tcl ambient trajectory must have one entry per period");
  if (!(p.a > 0) || p.a >= 1) throw InvalidParams("tcl retention rate must be in (0, 1)");
  if (!(p.b > 0)) throw InvalidParams("tcl thermal gain must be positive");
  if (!(p.delta > 0)) throw InvalidParams("tcl deadband half-width must be positive");
  if (!(p.p_m > 0)) throw InvalidParams("tcl rated power must be positive");
  if (std::abs(p.theta_0 - p.theta_r) > p.delta)
    throw InvalidParams("tcl initial temperature must start inside the deadband");

  const int d = horizon;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4 * d, d);
  Eigen::VectorXd b(4 * d);

  // Free response of theta(t+1) = (1-a) theta(t) + a theta_a(t+1); the power
  // terms enter through the lower-triangular (1-a)^(j-i) weights.
  Eigen::VectorXd free_response(d + 1);
  free_response(0) = p.theta_0;
  for (int j = 1; j <= d; ++j)
    free_response(j) = (1.0 - p.a) * free_response(j - 1) + p.a * p.theta_a(j - 1);

  int r = 0;
  for (int j = 1; j <= d; ++j) {
    double coef = 1.0;
    for (int i = j; i >= 1; --i) {
      a(r + 1, i - 1) = coef;
      coef *= 1.0 - p.a;
    }
    a.row(r) = -a.row(r + 1);
    b(r) = (p.theta_r + p.delta - free_response(j)) / p.b;
    b(r + 1) = (free_response(j) - p.theta_r + p.delta) / p.b;
    r += 2;
  }
  for (int i = 0; i < d; ++i) {
    a(r, i) = 1.0;
    b(r) = p.p_m;
    ++r;
    a(r, i) = -1.0;
    b(r) = 0.0;
    ++r;
  }

  HPolytope poly(a, b);
  if (is_empty(poly))
    throw EmptyPolytope("tcl polytope is empty: rated power cannot hold the deadband");
  return poly;
}

HPolytope build_deferrable(const DeferrableParams& p) {
  if (p.horizon < 1) throw InvalidParams("deferrable horizon must be at least 1");
  if (p.p_max.size() != p.horizon)
    throw InvalidParams("deferrable power caps must have one entry per period");
  if ((p.p_max.array() < 0).any()) throw InvalidParams("deferrable power caps must be nonnegative");
  if (!(p.energy > 0)) throw InvalidParams("deferrable energy target must be positive");
  if (p.t_arrive < 0 || p.t_depart <= p.t_arrive || p.t_depart > p.horizon)
    throw InvalidParams("deferrable window must satisfy 0 <= arrive < depart <= horizon");

  const int d = p.horizon;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * d + 2, d);
  Eigen::VectorXd b(2 * d + 2);
  int r = 0;
  for (int i = 0; i < d; ++i) {
    a(r, i) = 1.0;
    b(r) = (i >= p.t_arrive && i < p.t_depart) ? p.p_max(i) : 0.0;
    ++r;
  }
  for (int i = 0; i < d; ++i) {
    a(r, i) = -1.0;
    b(r) = 0.0;
    ++r;
  }
  a.row(r).setOnes();
  b(r) = p.energy;
  a.row(r + 1).setConstant(-1.0);
  b(r + 1) = -p.energy;

  HPolytope poly(a, b);
  if (is_empty(poly))
    throw EmptyPolytope("deferrable energy target is unreachable within the window caps");
  return poly;
}

HPolytope build_hypercube(const HypercubeParams& p) {
  const int d = static_cast<int>(p.p_low.size());
  if (d < 1 || p.p_high.size() != d)
    throw InvalidParams("hypercube bounds must be nonempty and equally sized");
  if ((p.p_low.array() > p.p_high.array()).any())
    throw InvalidParams("hypercube needs p_low <= p_high");
  Eigen::MatrixXd a(2 * d, d);
  a << Eigen::MatrixXd::Identity(d, d), -Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b(2 * d);
  b << p.p_high, -p.p_low;
  return HPolytope(a, b);
}

HPolytope add_diff_constraints(const HPolytope& p, const DiffConstraint& c) {
  if (c.delta_ramp < 0) throw InvalidParams("ramp band width must be nonnegative");
  const int d = p.dimension();
  if (d == 1) return p;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p.rows() + 2 * (d - 1), d);
  Eigen::VectorXd b(a.rows());
  a.topRows(p.rows()) = p.a_matrix();
  b.head(p.rows()) = p.b_vector();
  int r = p.rows();
  for (int i = 0; i + 1 < d; ++i) {
    a(r, i) = -1.0;
    a(r, i + 1) = 1.0;
    b(r) = c.delta_ramp;
    ++r;
    a(r, i) = 1.0;
    a(r, i + 1) = -1.0;
    b(r) = c.delta_ramp;
    ++r;
  }
  return HPolytope(a, b);
}

HPolytope build_from_spec(const LoadSpec& spec) {
  switch (spec.kind) {
    case LoadKind::Storage: {
      if (!spec.storage) throw InvalidParams("storage load spec lacks its parameter block");
      if (spec.diff_ramp)
        throw UnsupportedSpace("ramp rows are undefined on the stacked charge/discharge space");
      return build_storage(*spec.storage);
    }
    case LoadKind::Tcl: {
      if (!spec.tcl) throw InvalidParams("tcl load spec lacks its parameter block");
      HPolytope p = build_tcl(*spec.tcl, static_cast<int>(spec.tcl->theta_a.size()));
      if (spec.diff_ramp) p = add_diff_constraints(p, DiffConstraint{*spec.diff_ramp});
      return p;
    }
    case LoadKind::Deferrable: {
      if (!spec.deferrable) throw InvalidParams("deferrable load spec lacks its parameter block");
      HPolytope p = build_deferrable(*spec.deferrable);
      if (spec.diff_ramp) p = add_diff_constraints(p, DiffConstraint{*spec.diff_ramp});
      return p;
    }
    case LoadKind::Hypercube: {
      if (!spec.hypercube) throw InvalidParams("hypercube load spec lacks its parameter block");
      HPolytope p = build_hypercube(*spec.hypercube);
      if (spec.diff_ramp) p = add_diff_constraints(p, DiffConstraint{*spec.diff_ramp});
      return p;
    }
  }
  throw InvalidParams("unknown load kind");
}

TclParams draw_tcl(Heterogeneity h, int slots, std::uint64_t seed, std::uint64_t index,
                   double ambient) {
  if (slots < 1) throw InvalidParams("slot count must be at least 1");
  DrawChain chain(substream(substream(seed, kTclStream), index));
  const double half = h == Heterogeneity::Low ? 0.1 : 0.2;
  auto draw = [&](double mu) { return chain.uniform((1.0 - half) * mu, (1.0 + half) * mu); };

  const double c = draw(kMeanC);
  const double r = draw(kMeanR);
  const double pm = draw(kMeanPm);
  const double cop = draw(kMeanCop);
  const double theta_r = draw(kMeanThetaR);
  const double delta = draw(kMeanDelta);
  const double theta_0 = chain.uniform(theta_r - delta, theta_r + delta);

  // Hourly constants a = 1/(RC), b = cop/C; the per-slot pair keeps the
  // steady-state gain b/a = R cop at any discretization.
  const double a_hour = 1.0 / (r * c);
  const double a_slot = 1.0 - std::pow(1.0 - a_hour, 1.0 / slots);

  TclParams p;
  p.a = a_slot;
  p.b = r * cop * a_slot;
  p.theta_a = Eigen::VectorXd::Constant(slots, ambient);
  p.theta_r = theta_r;
  p.delta = delta;
  p.p_m = pm;
  p.theta_0 = theta_0;
  return p;
}

StorageParams draw_storage(int horizon, std::uint64_t seed, std::uint64_t index) {
  if (horizon < 1) throw InvalidParams("storage horizon must be at least 1");
  DrawChain chain(substream(substream(seed, kStorageStream), index));
  const double power = chain.uniform(30.0, 70.0);
  const double capacity = chain.uniform(120.0, 280.0);
  const double initial = chain.uniform(0.0, capacity);

  StorageParams p;
  p.horizon = horizon;
  p.p_max = Eigen::VectorXd::Constant(horizon, power);
  p.p_min = Eigen::VectorXd::Constant(horizon, -power);
  p.capacity = capacity;
  p.initial = initial;
  p.alpha = 1.0;
  p.eta_in = 1.0;
  p.eta_out = 1.0;
  return p;
}

std::vector<TclParams> generate_tcl_population(int count, Heterogeneity h, int slots,
                                               std::uint64_t seed, double ambient) {
  if (count < 1) throw InvalidParams("population count must be at least 1");
  std::vector<TclParams> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    out.push_back(draw_tcl(h, slots, seed, static_cast<std::uint64_t>(k), ambient));
  return out;
}

std::vector<StorageParams> generate_storage_population(int count, int horizon,
                                                       std::uint64_t seed) {
  if (count < 1) throw InvalidParams("population count must be at least 1");
  std::vector<StorageParams> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    out.push_back(draw_storage(horizon, seed, static_cast<std::uint64_t>(k)));
  return out;
}

} // namespace polyflex
