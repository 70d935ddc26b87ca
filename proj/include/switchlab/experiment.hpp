#pragma once

// Orchestration behind the command-line tool: eps sweeps with parallel
// replications, analytic blocks, and the file formats the tool writes.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "switchlab/analytics.hpp"
#include "switchlab/config.hpp"
#include "switchlab/simulator.hpp"

namespace switchlab {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitCrossCheck = 2, kExitInfeasible = 3 };

/// --jobs flag, else SWITCHLAB_JOBS, else hardware concurrency (>= 1).
int resolve_jobs(std::optional<int> flag);

/// Runs `count` independent tasks on `jobs` worker threads. Results land at
/// their task index, so output never depends on completion order.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

/// Seed of replication `rep` at `epsilon`: keyed on the bit pattern of eps
/// and the replication index, never on positions in the grid.
std::uint64_t replication_seed(std::uint64_t master, double epsilon, int rep);

RunConfig make_run_config(const ExperimentConfig& cfg, double epsilon, int rep);

struct SweepRow {
  double epsilon = 0.0;
  Estimate scaled_weighted_qsum;  // eps * E[sum c Q]
  double perp_norm_mean = 0.0;
  double perp_norm2_mean = 0.0;
  double parallel_norm_mean = 0.0;
  Estimate unused_service_rate;
  std::int64_t slots = 0;  // measured slots per replication
  int replications = 0;
  double max_abs_drift = 0.0;
  std::int64_t invariant_violations = 0;
};

struct AnalyticBlock {
  ZetaPair zeta;
  FlatVector sigma2;
  double ht_limit = 0.0;
  double ht_limit_c_weighted = 0.0;
  std::optional<double> remark_n2{};
  /// Lower bound per eps, present for n <= 3.
  std::vector<LowerBoundResult> lower_bounds{};
};

struct SweepReport {
  ExperimentConfig config;
  std::vector<SweepRow> rows;           // in epsilon_grid order
  std::vector<RunStats> pooled;         // per eps, replications pooled
  std::optional<AnalyticBlock> analytic;
  std::optional<SscTable> ssc;
  std::string config_hash;
};

/// Pools replication stats at one eps into a single RunStats.
RunStats pool_runs(const std::vector<RunStats>& reps);

AnalyticBlock compute_analytics(const ExperimentConfig& cfg, bool with_lower_bounds);

SweepReport run_sweep(const ExperimentConfig& cfg, int jobs);

nlohmann::json to_json(const ZetaPair& z);
nlohmann::json to_json(const LowerBoundResult& lb, bool include_orderings);
nlohmann::json to_json(const RunStats& s);
nlohmann::json to_json(const SweepReport& r);
nlohmann::json zeta_report(const ExperimentConfig& cfg, const AnalyticBlock& a);

/// Fixed header: epsilon, scaled_weighted_qsum, stderr, perp_norm_mean,
/// perp_norm2_mean, unused_service_rate, slots, replications.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// Reads what write_sweep_csv wrote; throws std::runtime_error on a bad header
/// or row. Only the CSV columns are filled.
std::vector<SweepRow> read_sweep_csv(std::istream& in);

/// Shortest round-trip decimal, '.' separator, no locale.
std::string format_double(double v);

}  // namespace switchlab
