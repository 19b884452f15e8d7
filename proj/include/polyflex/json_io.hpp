#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "polyflex/dispatch.hpp"
#include "polyflex/load_models.hpp"
#include "polyflex/polytope.hpp"

namespace polyflex {
namespace io {

/// Polytopes travel as {"dimension": D, "A": [[...], ...], "b": [...]}.
/// Readers normalize rows on construction; the writer emits rows sorted
/// lexicographically so equal sets serialize to identical files.
nlohmann::json polytope_to_json(const HPolytope& p);
HPolytope polytope_from_json(const nlohmann::json& j);

/// Loads travel as {"kind": ..., "params": {...}, "diff_ramp": optional}.
LoadSpec load_spec_from_json(const nlohmann::json& j);
nlohmann::json load_spec_to_json(const LoadSpec& spec);

/// A population file is a JSON array whose entries are either load specs or
/// raw polytope objects (recognized by an "A" key). Build failures carry the
/// offending array index.
std::vector<HPolytope> loads_from_json(const nlohmann::json& file);

/// Dispatch cases keep the original per-aggregate load lists next to the
/// assembled case so callers can run exact-sum diagnostics afterwards.
struct ParsedDispatch {
  DispatchCase dispatch_case;
  std::vector<std::vector<HPolytope>> aggregate_loads; // empty list: direct polytope
};
ParsedDispatch dispatch_case_from_json(const nlohmann::json& j);

nlohmann::json dispatch_result_to_json(const DispatchResult& r);

/// Long-format trajectory export: entity,kind,bus,period,value with one row
/// per generation, injection, angle, and aggregate coordinate.
std::string dispatch_result_to_csv(const DispatchCase& c, const DispatchResult& r);

/// Fixed "%.12g" rendering used by every CSV writer.
std::string format_number(double v);
std::string csv_line(const std::vector<std::string>& fields);

} // namespace io
} // namespace polyflex
