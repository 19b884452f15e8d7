#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polyflex/load_models.hpp"

namespace polyflex {

/// Pairwise storage benchmark: exact-oracle error ratios at small dimensions
/// plus Monte-Carlo volume growth of the same aggregates at larger ones.
struct StorageBenchConfig {
  int pairs = 50;                          // oracle pairs per dimension
  std::vector<int> oracle_dims = {2, 3, 4};
  int growth_min_dim = 2;
  int growth_max_dim = 20;
  int growth_pairs = 1;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct StorageBenchResult {
  std::string pairs_csv;  // D,pair_id,v_exact,v_om,ratio,percent_error
  std::string growth_csv; // D,pair_id,v_om,ci,samples,seed
  int discarded = 0;      // pairs whose exact reference exceeded the guards

  struct PairRow {
    int dim = 0;
    int pair_id = 0;
    double v_exact = 0.0;
    double v_om = 0.0;
    double ratio = 0.0;
    double percent_error = 0.0;
  };
  std::vector<PairRow> pair_rows;

  struct GrowthRow {
    int dim = 0;
    int pair_id = 0;
    double v_om = 0.0;
    double ci = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
  };
  std::vector<GrowthRow> growth_rows;

  struct DimSummary {
    int dim = 0;
    int cases = 0;
    double mean_percent_error = 0.0;
    double max_percent_error = 0.0;
  };
  std::vector<DimSummary> summary;
};

StorageBenchResult run_bench_storage(const StorageBenchConfig& config);

/// Slot-count sweep over TCL populations at both heterogeneity levels. Loads
/// are first rebuilt over the population-mean dissipation row structure, so
/// every load shares one row matrix and aggregation needs no extra programs.
struct TclBenchConfig {
  int population = 10;
  std::vector<int> slot_counts = {1, 2, 3, 4};
  double ambient = 32.0;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct TclBenchResult {
  std::string csv; // slots,heterogeneity,om_volume,ci,ref_volume,samples,seed
  int regenerated = 0; // draws discarded for unreachable deadbands

  struct Row {
    int slots = 0;
    Heterogeneity heterogeneity = Heterogeneity::Low;
    double om_volume = 0.0;
    double ci = 0.0;
    std::optional<double> ref_volume; // exact pairwise sum, population 2 only
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
  };
  std::vector<Row> rows;
};

TclBenchResult run_bench_tcl(const TclBenchConfig& config);

/// Config files are single JSON objects with "schema_version": 1; absent
/// fields keep their defaults.
StorageBenchConfig storage_bench_config_from_json(const nlohmann::json& j);
TclBenchConfig tcl_bench_config_from_json(const nlohmann::json& j);

} // namespace polyflex
