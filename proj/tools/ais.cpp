#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ais/config.hpp"
#include "ais/errors.hpp"
#include "ais/experiment.hpp"
#include "ais/oracle.hpp"
#include "ais/targets.hpp"

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ais::ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ais::ConfigError(path + ": " + e.what());
  }
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ais::ConfigError*>(&e)) return "config";
  if (dynamic_cast<const ais::PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const ais::OracleError*>(&e)) return "oracle";
  if (dynamic_cast<const ais::SamplingError*>(&e)) return "sampling";
  if (dynamic_cast<const ais::DegenerateProposalError*>(&e)) return "degenerate_proposal";
  if (dynamic_cast<const ais::Error*>(&e)) return "runtime";
  return "internal";
}

// Partition file: {"K": 4} for equal cells of the target domain, or
// {"cells": [{"lo": [...], "hi": [...]}, ...]}; optional "alpha".
std::vector<ais::Rectangle> partition_from_json(const json& j, const ais::TargetDensity& target) {
  if (j.contains("K")) return ais::equal_cells(target.domain(), j.at("K").get<std::size_t>());
  if (!j.contains("cells") || !j["cells"].is_array()) {
    throw ais::ConfigError("partition: expected \"K\" or a \"cells\" array");
  }
  std::vector<ais::Rectangle> cells;
  for (const auto& c : j["cells"]) {
    cells.emplace_back(c.at("lo").get<std::vector<double>>(), c.at("hi").get<std::vector<double>>());
  }
  return cells;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partition-based adaptive importance sampling experiments"};
  app.require_subcommand(1);

  ais::RunOptions options;
  if (const char* env = std::getenv("AIS_OUT_DIR"); env && *env) options.out_root = env;
  std::string out_dir;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed_offset = 0;
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--out-dir", out_dir, "Output root (default: $AIS_OUT_DIR or .)");
    cmd->add_option("--jobs", jobs, "Parallel replicates")->check(CLI::PositiveNumber);
    cmd->add_option("--seed-offset", seed_offset, "Added to every seed");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "RunConfig JSON")->required();
  add_run_flags(run);

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("config", config_path, "SweepConfig JSON")->required();
  add_run_flags(sweep);

  std::string target_path, partition_path;
  auto* oracle = app.add_subcommand("oracle", "Print the quadrature oracle table as JSON");
  oracle->add_option("target", target_path, "Target JSON")->required();
  oracle->add_option("partition", partition_path, "Partition JSON")->required();

  std::string recipe_name;
  auto* list = app.add_subcommand("recipes", "List built-in recipes, or print one as JSON");
  list->add_option("name", recipe_name, "Recipe to print");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!out_dir.empty()) options.out_root = out_dir;
    options.jobs = jobs;
    options.seed_offset = seed_offset;
    options.on_warning = [](const std::string& w) { std::cerr << "warning: " << w << '\n'; };

    if (*run) {
      const auto config = ais::run_config_from_json(read_json(config_path));
      const auto summary = ais::run_experiment(config, options);
      std::cout << summary.dir.string() << '\n';
    } else if (*sweep) {
      const auto config = ais::sweep_config_from_json(read_json(config_path));
      ais::run_sweep(config, options);
      std::cout << (options.out_root / config.base.name / "summary.csv").string() << '\n';
    } else if (*oracle) {
      const auto target = ais::target_from_json(read_json(target_path));
      const auto pj = read_json(partition_path);
      std::optional<double> alpha;
      if (pj.contains("alpha") && !pj["alpha"].is_null()) alpha = pj["alpha"].get<double>();
      const auto table = ais::oracle_table(target, partition_from_json(pj, target), alpha);
      std::cout << ais::to_json(table).dump(2) << '\n';
    } else if (*list) {
      if (recipe_name.empty()) {
        for (const auto& r : ais::recipes()) {
          std::cout << r.name << (r.is_sweep ? "  [sweep]  " : "  [run]    ") << r.description << '\n';
        }
      } else {
        std::cout << ais::find_recipe(recipe_name).config.dump(2) << '\n';
      }
    }
  } catch (const std::exception& e) {
    json err = {{"error", {{"type", error_type(e)}, {"message", e.what()}}}};
    if (const auto* o = dynamic_cast<const ais::OracleError*>(&e)) {
      err["error"]["estimate"] = o->estimate();
      err["error"]["error_bound"] = o->error_bound();
    }
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}
