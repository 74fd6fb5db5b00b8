#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ais/boost.hpp"
#include "ais/hidaisee.hpp"
#include "ais/partition.hpp"

namespace ais {

enum class RunMode { daisee, alpha, hidaisee, synthetic_arms };

std::string_view to_string(RunMode mode);
RunMode run_mode_from_string(std::string_view name);

/// One experiment: a sampler on a target, replicated over seeds.
///
/// JSON form (every key optional except where noted):
///   {"name": "run", "mode": "daisee", "target": {...}, "K": 10,
///    "tau": 0.5 | [..per arm..] | "auto",
///    "boost": {"form": "ucb_sqrt", "scale": 1, "exponent": 0.5},
///    "alpha": 2, "split": {"n_min": 10, "ess_ratio": 0.5, "tau_rule": "halve"},
///    "lazy_masses": false, "synthetic": {"p": 0.01}, "T": 100000,
///    "seeds": [1, 2], "regret_tracking": true, "adapt": true,
///    "write_traces": true}
struct RunConfig {
  std::string name = "run";
  RunMode mode = RunMode::daisee;
  nlohmann::json target = {{"family", "step-1d"}, {"params", nlohmann::json::object()}};
  std::size_t k = 10;
  TauSpec tau = TauAuto{};
  BoostSpec boost;
  std::optional<double> alpha;
  SplitPolicy split;
  std::optional<TauRule> tau_rule;
  bool lazy_masses = false;
  double synthetic_p = 0.01;
  std::uint64_t iterations = 100000;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  bool regret_tracking = true;
  bool adapt = true;
  bool write_traces = true;

  /// Cross-field checks; throws ConfigError naming the offending field.
  void validate() const;
  bool fixed_partition() const noexcept { return mode != RunMode::hidaisee; }

  bool operator==(const RunConfig& other) const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

enum class SweepAxis { boost_form, boost_exponent, boost_scale, tau, k, delta, ratio, ess_ratio };

std::string_view to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(std::string_view name);

/// A parameter sweep over one axis of a base run.
///   {"base": {...}, "axis": "K", "values": [5, 10], "replicates": 10}
/// replicates = n replaces the base seeds with 1..n; 0 keeps them.
/// Axis meanings:
///   boost_form      values are form names
///   boost_exponent  switches the base boost to `power` with that exponent
///   boost_scale     boost.scale
///   tau             shared tau
///   K               number of cells (and the K parameter of vary-k targets)
///   delta           the delta parameter of the target
///   ratio           Z_max / Z_min of a vary-ratio target; delta is solved for
///   ess_ratio       split.ess_ratio
struct SweepConfig {
  RunConfig base;
  SweepAxis axis = SweepAxis::tau;
  std::vector<nlohmann::json> values;
  std::size_t replicates = 0;

  void validate() const;
  bool operator==(const SweepConfig&) const = default;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& config);

/// The base config with one axis value applied; the name gains a
/// "<axis>=<value>" suffix.
RunConfig apply_axis(const SweepConfig& sweep, const nlohmann::json& value);

/// delta in [0, 1/K) at which the vary-ratio target's max/min equal-cell mass
/// ratio equals `ratio` (bisection on the oracle).
double solve_ratio_delta(std::size_t k, double ratio);
/// Z_max / Z_min over the K equal cells of vary-ratio(K, delta).
double vary_ratio_mass_ratio(std::size_t k, double delta);

}  // namespace ais
