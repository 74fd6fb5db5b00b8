#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ais/config.hpp"
#include "ais/hidaisee.hpp"
#include "ais/metrics.hpp"

namespace ais {

/// %.12g, with the literal tokens inf / -inf / nan.
std::string format_number(double v);

/// Per-seed trace CSV. Columns:
///   t,arm,x,y,z_hat_total,instant_regret,cum_regret,partition_count
/// plus alpha_regret when `alpha_column`. x coordinates are joined with ';'
/// and missing optional values are left empty.
void write_trace_csv(std::ostream& os, std::span<const RunRecord> trace, bool alpha_column);

struct ReplicateResult {
  std::uint64_t seed = 0;
  std::vector<RunRecord> trace;
  std::vector<TreeSnapshot> snapshots;  ///< hidaisee only
};

/// Shared, read-only inputs of a run (target, arms, oracle); built once and
/// used by every replicate.
class PreparedRun {
 public:
  explicit PreparedRun(RunConfig config);
  ~PreparedRun();
  PreparedRun(PreparedRun&&) noexcept;

  const RunConfig& config() const noexcept;
  /// Target warnings (parameters outside the studied ranges, ...).
  std::vector<std::string> warnings() const;
  /// Runs one replicate; safe to call concurrently.
  ReplicateResult run(std::uint64_t seed) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RunOptions {
  std::filesystem::path out_root = ".";
  std::size_t jobs = 1;
  std::uint64_t seed_offset = 0;
  /// Receives non-fatal messages (target warnings).
  std::function<void(const std::string&)> on_warning;
};

/// Final per-seed values of an experiment, in seed order.
struct ExperimentSummary {
  std::filesystem::path dir;
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_z_hat;
  std::vector<std::optional<double>> final_instant_regret;
  std::vector<std::optional<double>> final_cum_regret;
  std::vector<std::size_t> final_partition_count;
};

/// Runs every seed (seed + offset) over `jobs` workers and writes, under
/// out_root/name: config.json, seed_<s>.csv (unless write_traces is off),
/// seed_<s>_tree.json for hidaisee, and aggregate.csv with the per-t mean and
/// sample std over seeds. Output bytes do not depend on `jobs`.
ExperimentSummary run_experiment(const RunConfig& config, const RunOptions& options);

struct SweepRow {
  nlohmann::json value;
  std::string label;
  double mean_final_cum_regret = 0.0;
  double std_final_cum_regret = 0.0;
  double mean_final_instant_regret = 0.0;
  double std_final_instant_regret = 0.0;
  double mean_final_z_hat = 0.0;
  double mean_final_partition_count = 0.0;
  bool has_regret = false;
};

/// Runs every axis value as an experiment (out_root/<base name>/<axis>=<v>)
/// and writes out_root/<base name>/summary.csv.
std::vector<SweepRow> run_sweep(const SweepConfig& sweep, const RunOptions& options);

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// by index is rethrown after every worker has stopped.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_std(std::span<const double> values);

struct Recipe {
  std::string name;
  std::string description;
  bool is_sweep = false;
  nlohmann::json config;  ///< RunConfig or SweepConfig JSON
};

/// Built-in experiment recipes with the experiment defaults.
std::span<const Recipe> recipes();
const Recipe& find_recipe(std::string_view name);

}  // namespace ais
