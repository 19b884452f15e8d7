#include "polyflex/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>

#include "polyflex/aggregation.hpp"

namespace polyflex {
namespace io {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw InvalidParams(what); }

const json& field(const json& j, const char* key, const char* context) {
  auto it = j.find(key);
  if (it == j.end()) fail(std::string(context) + ": missing field '" + key + "'");
  return *it;
}

double number(const json& j, const char* context) {
  if (!j.is_number()) fail(std::string(context) + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const char* context) {
  if (!j.is_number_integer()) fail(std::string(context) + ": expected an integer");
  return j.get<int>();
}

Eigen::VectorXd vector(const json& j, const char* context) {
  if (!j.is_array()) fail(std::string(context) + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<int>(j.size()));
  int k = 0;
  for (const auto& e : j) v(k++) = number(e, context);
  return v;
}

// Scalar entries broadcast to a constant trajectory of the given length.
Eigen::VectorXd vector_or_constant(const json& j, int length, const char* context) {
  if (j.is_number()) return Eigen::VectorXd::Constant(length, j.get<double>());
  Eigen::VectorXd v = vector(j, context);
  if (v.size() != length)
    fail(std::string(context) + ": expected " + std::to_string(length) + " entries");
  return v;
}

Eigen::MatrixXd matrix(const json& j, const char* context) {
  if (!j.is_array() || j.empty()) fail(std::string(context) + ": expected a matrix");
  const int rows = static_cast<int>(j.size());
  Eigen::VectorXd first = vector(j.at(0), context);
  Eigen::MatrixXd m(rows, first.size());
  m.row(0) = first;
  for (int r = 1; r < rows; ++r) {
    Eigen::VectorXd row = vector(j.at(r), context);
    if (row.size() != m.cols()) fail(std::string(context) + ": ragged matrix");
    m.row(r) = row;
  }
  return m;
}

// Scalar, one trajectory shared by all nodes, or a full nodes x horizon grid.
Eigen::MatrixXd node_grid(const json& j, int nodes, int horizon, const char* context) {
  if (j.is_number())
    return Eigen::MatrixXd::Constant(nodes, horizon, j.get<double>());
  if (j.is_array() && !j.empty() && j.at(0).is_number()) {
    Eigen::VectorXd row = vector(j, context);
    if (row.size() != horizon)
      fail(std::string(context) + ": expected " + std::to_string(horizon) + " periods");
    Eigen::MatrixXd m(nodes, horizon);
    m.rowwise() = row.transpose();
    return m;
  }
  Eigen::MatrixXd m = matrix(j, context);
  if (m.rows() != nodes || m.cols() != horizon)
    fail(std::string(context) + ": expected a nodes x horizon matrix");
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r)));
  return out;
}

LoadKind kind_from_string(const std::string& s) {
  if (s == "storage") return LoadKind::Storage;
  if (s == "tcl") return LoadKind::Tcl;
  if (s == "deferrable") return LoadKind::Deferrable;
  if (s == "hypercube") return LoadKind::Hypercube;
  fail("load spec: unknown kind '" + s + "'");
}

const char* kind_to_string(LoadKind k) {
  switch (k) {
    case LoadKind::Storage: return "storage";
    case LoadKind::Tcl: return "tcl";
    case LoadKind::Deferrable: return "deferrable";
    case LoadKind::Hypercube: return "hypercube";
  }
  fail("load spec: unknown kind enum");
}

StorageParams storage_from_json(const json& p) {
  const char* ctx = "storage params";
  StorageParams s;
  s.horizon = integer(field(p, "horizon", ctx), ctx);
  s.p_max = vector_or_constant(field(p, "p_max", ctx), s.horizon, ctx);
  s.p_min = vector_or_constant(field(p, "p_min", ctx), s.horizon, ctx);
  s.capacity = number(field(p, "capacity", ctx), ctx);
  s.initial = number(field(p, "initial", ctx), ctx);
  if (p.contains("alpha")) s.alpha = number(p.at("alpha"), ctx);
  if (p.contains("eta_in")) s.eta_in = number(p.at("eta_in"), ctx);
  if (p.contains("eta_out")) s.eta_out = number(p.at("eta_out"), ctx);
  return s;
}

TclParams tcl_from_json(const json& p, int horizon) {
  const char* ctx = "tcl params";
  TclParams t;
  t.a = number(field(p, "a", ctx), ctx);
  t.b = number(field(p, "b", ctx), ctx);
  t.theta_a = vector_or_constant(field(p, "theta_a", ctx), horizon, ctx);
  t.theta_r = number(field(p, "theta_r", ctx), ctx);
  t.delta = number(field(p, "delta", ctx), ctx);
  t.p_m = number(field(p, "p_m", ctx), ctx);
  t.theta_0 = number(field(p, "theta_0", ctx), ctx);
  return t;
}

DeferrableParams deferrable_from_json(const json& p) {
  const char* ctx = "deferrable params";
  DeferrableParams d;
  d.horizon = integer(field(p, "horizon", ctx), ctx);
  d.p_max = vector_or_constant(field(p, "p_max", ctx), d.horizon, ctx);
  d.energy = number(field(p, "energy", ctx), ctx);
  d.t_arrive = p.contains("t_arrive") ? integer(p.at("t_arrive"), ctx) : 0;
  d.t_depart = p.contains("t_depart") ? integer(p.at("t_depart"), ctx) : d.horizon;
  return d;
}

HypercubeParams hypercube_from_json(const json& p) {
  const char* ctx = "hypercube params";
  HypercubeParams h;
  h.p_low = vector(field(p, "p_low", ctx), ctx);
  h.p_high = vector(field(p, "p_high", ctx), ctx);
  return h;
}

} // namespace

json polytope_to_json(const HPolytope& p) {
  const int m = p.rows();
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    for (int k = 0; k < p.dimension(); ++k) {
      if (p.a_matrix()(i, k) != p.a_matrix()(j, k))
        return p.a_matrix()(i, k) < p.a_matrix()(j, k);
    }
    return p.b_vector()(i) < p.b_vector()(j);
  });
  json a = json::array();
  json b = json::array();
  for (int idx : order) {
    a.push_back(vector_to_json(p.a_matrix().row(idx)));
    b.push_back(p.b_vector()(idx));
  }
  return json{{"dimension", p.dimension()}, {"A", a}, {"b", b}};
}

HPolytope polytope_from_json(const json& j) {
  const char* ctx = "polytope";
  Eigen::MatrixXd a = matrix(field(j, "A", ctx), ctx);
  Eigen::VectorXd b = vector(field(j, "b", ctx), ctx);
  if (j.contains("dimension") && integer(j.at("dimension"), ctx) != a.cols())
    fail("polytope: declared dimension does not match the A matrix");
  if (b.size() != a.rows()) fail("polytope: A and b row counts differ");
  return HPolytope(a, b);
}

LoadSpec load_spec_from_json(const json& j) {
  const char* ctx = "load spec";
  LoadSpec spec;
  const json& kind = field(j, "kind", ctx);
  if (!kind.is_string()) fail("load spec: kind must be a string");
  spec.kind = kind_from_string(kind.get<std::string>());
  const json& params = field(j, "params", ctx);
  switch (spec.kind) {
    case LoadKind::Storage:
      spec.storage = storage_from_json(params);
      break;
    case LoadKind::Tcl:
      // theta_a carries the horizon; a scalar ambient is broadcast to it.
      spec.tcl = tcl_from_json(params, integer(field(params, "horizon", ctx), ctx));
      break;
    case LoadKind::Deferrable:
      spec.deferrable = deferrable_from_json(params);
      break;
    case LoadKind::Hypercube:
      spec.hypercube = hypercube_from_json(params);
      break;
  }
  if (j.contains("diff_ramp")) spec.diff_ramp = number(j.at("diff_ramp"), ctx);
  return spec;
}

json load_spec_to_json(const LoadSpec& spec) {
  json params;
  switch (spec.kind) {
    case LoadKind::Storage: {
      const StorageParams& s = *spec.storage;
      params = json{{"horizon", s.horizon},     {"p_max", vector_to_json(s.p_max)},
                    {"p_min", vector_to_json(s.p_min)}, {"capacity", s.capacity},
                    {"initial", s.initial},     {"alpha", s.alpha},
                    {"eta_in", s.eta_in},       {"eta_out", s.eta_out}};
      break;
    }
    case LoadKind::Tcl: {
      const TclParams& t = *spec.tcl;
      params = json{{"horizon", static_cast<int>(t.theta_a.size())},
                    {"a", t.a},
                    {"b", t.b},
                    {"theta_a", vector_to_json(t.theta_a)},
                    {"theta_r", t.theta_r},
                    {"delta", t.delta},
                    {"p_m", t.p_m},
                    {"theta_0", t.theta_0}};
      break;
    }
    case LoadKind::Deferrable: {
      const DeferrableParams& d = *spec.deferrable;
      params = json{{"horizon", d.horizon},   {"p_max", vector_to_json(d.p_max)},
                    {"energy", d.energy},     {"t_arrive", d.t_arrive},
                    {"t_depart", d.t_depart}};
      break;
    }
    case LoadKind::Hypercube: {
      const HypercubeParams& h = *spec.hypercube;
      params = json{{"p_low", vector_to_json(h.p_low)},
                    {"p_high", vector_to_json(h.p_high)}};
      break;
    }
  }
  json out{{"kind", kind_to_string(spec.kind)}, {"params", params}};
  if (spec.diff_ramp) out["diff_ramp"] = *spec.diff_ramp;
  return out;
}

std::vector<HPolytope> loads_from_json(const json& file) {
  if (!file.is_array()) fail("population file: expected a JSON array of loads");
  std::vector<HPolytope> loads;
  loads.reserve(file.size());
  for (std::size_t k = 0; k < file.size(); ++k) {
    const json& entry = file.at(k);
    try {
      if (entry.contains("A"))
        loads.push_back(polytope_from_json(entry));
      else
        loads.push_back(build_from_spec(load_spec_from_json(entry)));
    } catch (const EmptyPolytope& e) {
      throw EmptyPolytope("load " + std::to_string(k) + ": " + e.what());
    } catch (const InvalidParams& e) {
      throw InvalidParams("load " + std::to_string(k) + ": " + e.what());
    }
  }
  return loads;
}

ParsedDispatch dispatch_case_from_json(const json& j) {
  const char* ctx = "dispatch case";
  ParsedDispatch parsed;
  DispatchCase& c = parsed.dispatch_case;
  c.horizon = integer(field(j, "horizon", ctx), ctx);
  c.nodes = j.contains("nodes") ? integer(j.at("nodes"), ctx) : 1;
  if (c.horizon < 1) fail("dispatch case: horizon must be at least 1");
  if (c.nodes < 1) fail("dispatch case: nodes must be at least 1");
  c.cost = node_grid(field(j, "cost", ctx), c.nodes, c.horizon, "dispatch case cost");
  c.gen_min = j.contains("gen_min")
                  ? node_grid(j.at("gen_min"), c.nodes, c.horizon, "dispatch case gen_min")
                  : Eigen::MatrixXd::Zero(c.nodes, c.horizon);
  c.gen_max = j.contains("gen_max")
                  ? node_grid(j.at("gen_max"), c.nodes, c.horizon, "dispatch case gen_max")
                  : Eigen::MatrixXd::Constant(c.nodes, c.horizon,
                                              std::numeric_limits<double>::infinity());
  if (j.contains("susceptance"))
    c.susceptance = matrix(j.at("susceptance"), "dispatch case susceptance");

  const json& aggs = field(j, "aggregates", ctx);
  if (!aggs.is_array()) fail("dispatch case: aggregates must be an array");
  for (std::size_t k = 0; k < aggs.size(); ++k) {
    const json& entry = aggs.at(k);
    const std::string agg_ctx = "aggregate " + std::to_string(k);
    int bus = entry.contains("bus") ? integer(entry.at("bus"), agg_ctx.c_str()) : 0;
    if (entry.contains("polytope")) {
      c.aggregates.push_back({bus, polytope_from_json(entry.at("polytope"))});
      parsed.aggregate_loads.emplace_back();
    } else if (entry.contains("loads")) {
      std::vector<HPolytope> loads = loads_from_json(entry.at("loads"));
      if (loads.empty()) fail(agg_ctx + ": loads array is empty");
      c.aggregates.push_back({bus, aggregate_general(loads)});
      parsed.aggregate_loads.push_back(std::move(loads));
    } else {
      fail(agg_ctx + ": expected 'polytope' or 'loads'");
    }
  }
  return parsed;
}

json dispatch_result_to_json(const DispatchResult& r) {
  json aggs = json::array();
  for (const Eigen::VectorXd& x : r.aggregate_x) aggs.push_back(vector_to_json(x));
  return json{{"objective", r.objective},
              {"generation", matrix_to_json(r.generation)},
              {"injection", matrix_to_json(r.injection)},
              {"angles", matrix_to_json(r.angles)},
              {"aggregates", aggs}};
}

std::string dispatch_result_to_csv(const DispatchCase& c, const DispatchResult& r) {
  std::string out = "entity,kind,bus,period,value\n";
  auto emit = [&out](int entity, const char* kind, int bus, int period, double value) {
    out += csv_line({std::to_string(entity), kind, std::to_string(bus),
                     std::to_string(period), format_number(value)});
    out += '\n';
  };
  for (int i = 0; i < r.generation.rows(); ++i)
    for (int t = 0; t < r.generation.cols(); ++t)
      emit(i, "generation", i, t, r.generation(i, t));
  for (int i = 0; i < r.injection.rows(); ++i)
    for (int t = 0; t < r.injection.cols(); ++t) emit(i, "injection", i, t, r.injection(i, t));
  for (int i = 0; i < r.angles.rows(); ++i)
    for (int t = 0; t < r.angles.cols(); ++t) emit(i, "angle", i, t, r.angles(i, t));
  for (std::size_t a = 0; a < r.aggregate_x.size(); ++a)
    for (int t = 0; t < r.aggregate_x[a].size(); ++t)
      emit(static_cast<int>(a), "aggregate", c.aggregates[a].bus, t, r.aggregate_x[a](t));
  return out;
}

std::string format_number(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

} // namespace io
} // namespace polyflex
