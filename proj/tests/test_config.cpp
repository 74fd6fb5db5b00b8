#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "ais/config.hpp"
#include "ais/errors.hpp"
#include "ais/experiment.hpp"

namespace ais {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using ::testing::HasSubstr;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("ais_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream is(p);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

RunConfig small_daisee() {
  RunConfig c;
  c.name = "small";
  c.target = {{"family", "exp-flat"}};
  c.k = 4;
  c.iterations = 500;
  c.seeds = {1, 2, 3};
  return c;
}

TEST(RunConfigJson, RoundTrip) {
  RunConfig c = small_daisee();
  c.mode = RunMode::alpha;
  c.alpha = 2.0;
  c.tau = TauPerArm{{0.1, 0.2, 0.3, 0.4}};
  c.boost = {BoostForm::power, 0.3, 0.4};
  EXPECT_EQ(run_config_from_json(to_json(c)), c);

  RunConfig h;
  h.mode = RunMode::hidaisee;
  h.target = {{"family", "banana"}, {"params", {{"lo", {-10.0, -5.0}}, {"hi", {10.0, 5.0}}}}};
  h.tau = TauShared{3.0};
  h.tau_rule = TauRule::constant;
  h.split = {.n_min = 20, .ess_ratio = 0.7};
  h.lazy_masses = true;
  EXPECT_EQ(run_config_from_json(to_json(h)), h);

  RunConfig s;
  s.mode = RunMode::synthetic_arms;
  s.k = 100;
  s.tau = TauShared{0.015};
  s.synthetic_p = 0.02;
  EXPECT_EQ(run_config_from_json(to_json(s)), s);
  EXPECT_EQ(run_config_from_json(json::parse(to_json(s).dump())), s);
}

TEST(RunConfigJson, ErrorsNameTheField) {
  auto error_of = [](const json& j) {
    try {
      run_config_from_json(j);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_THAT(error_of({{"boost", {{"form", "greedy"}}}}), HasSubstr("boost.form"));
  EXPECT_THAT(error_of({{"boost", {{"scale", -1}}}}), HasSubstr("boost"));
  EXPECT_THAT(error_of({{"T", "many"}}), HasSubstr("T"));
  EXPECT_THAT(error_of({{"seeds", {1, -2}}}), HasSubstr("seeds[1]"));
  EXPECT_THAT(error_of({{"mode", "alpha"}, {"tau", 1.0}}), HasSubstr("alpha"));
  EXPECT_THAT(error_of({{"mode", "alpha"}, {"alpha", 2.0}}), HasSubstr("tau"));
  EXPECT_THAT(error_of({{"mode", "alpha"}, {"alpha", 3.0}, {"tau", 1.0}}), HasSubstr("alpha"));
  EXPECT_THAT(error_of({{"K", 4}, {"tau", {1.0, 2.0}}}), HasSubstr("tau"));
  EXPECT_THAT(error_of({{"K", 20}, {"T", 10}}), HasSubstr("T"));
  EXPECT_THAT(error_of({{"colour", "red"}}), HasSubstr("colour"));
  EXPECT_THAT(error_of({{"target", {{"family", "nope"}}}}), HasSubstr("target"));
  EXPECT_THAT(error_of({{"mode", "hidaisee"}, {"tau", 1.0}}), HasSubstr("split.tau_rule"));
  EXPECT_THAT(error_of({{"mode", "hidaisee"}, {"split", {{"ess_ratio", 1.5}}}}), HasSubstr("split"));
  EXPECT_THAT(error_of({{"mode", "synthetic-arms"}}), HasSubstr("tau"));
}

TEST(SweepConfigJson, RoundTripAndDefaults) {
  json j = {{"base", to_json(small_daisee())}, {"axis", "boost_exponent"}, {"replicates", 2}};
  const auto s = sweep_config_from_json(j);
  ASSERT_EQ(s.values.size(), 10u);
  EXPECT_DOUBLE_EQ(s.values.front().get<double>(), 0.1);
  EXPECT_DOUBLE_EQ(s.values.back().get<double>(), 1.0);
  EXPECT_EQ(sweep_config_from_json(to_json(s)), s);
  EXPECT_THROW(sweep_config_from_json({{"base", to_json(small_daisee())}, {"axis", "ess_ratio"}, {"values", {0.5}}}),
               ConfigError);
  EXPECT_THROW(sweep_config_from_json({{"base", to_json(small_daisee())}, {"axis", "K"}, {"values", json::array()}}),
               ConfigError);
}

TEST(SweepConfig, ApplyAxis) {
  SweepConfig s;
  s.base = small_daisee();
  s.base.target = {{"family", "vary-k"}, {"params", {{"K", 10}}}};
  s.axis = SweepAxis::k;
  s.replicates = 4;
  const auto c = apply_axis(s, 20);
  EXPECT_EQ(c.k, 20u);
  EXPECT_EQ(c.target["params"]["K"], 20);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3, 4}));
  EXPECT_EQ(c.name, "small/K=20");

  s.axis = SweepAxis::boost_exponent;
  const auto e = apply_axis(s, 0.3);
  EXPECT_EQ(e.boost.form, BoostForm::power);
  EXPECT_EQ(e.boost.exponent, 0.3);

  s.axis = SweepAxis::boost_form;
  EXPECT_EQ(apply_axis(s, "inverse_n").boost.form, BoostForm::inverse_n);
  const auto tuned = apply_axis(s, json{{"form", "log_over_n"}, {"scale", 0.3}});
  EXPECT_EQ(tuned.boost.form, BoostForm::log_over_n);
  EXPECT_EQ(tuned.boost.scale, 0.3);
  EXPECT_EQ(tuned.name, "small/boost_form=log_over_n");
  s.values = {json{{"form", "inverse_n"}, {"scale", -1.0}}};
  EXPECT_THROW(s.validate(), ConfigError);
  s.values = {json{{"form", "inverse_n"}, {"scael", 1.0}}};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(SweepConfig, RatioAxisSolvesDelta) {
  for (double ratio : {2.0, 10.0, 50.0}) {
    const double delta = solve_ratio_delta(10, ratio);
    EXPECT_NEAR(vary_ratio_mass_ratio(10, delta), ratio, 1e-9 * ratio);
    // Closed form for K = 10 cells: (1.01 - 9.79 d) / (0.01 + 0.11 d).
    EXPECT_NEAR((1.01 - 9.79 * delta) / (0.01 + 0.11 * delta), ratio, 1e-6 * ratio);
  }
  EXPECT_THROW(solve_ratio_delta(10, 1e6), ConfigError);
}

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(1e-20), "1e-20");
}

TEST(Experiment, TEqualsKWritesKRows) {
  TempDir dir;
  RunConfig c = small_daisee();
  c.iterations = 4;
  c.seeds = {1};
  run_experiment(c, {.out_root = dir.path()});
  const auto rows = read_csv(dir.path() / "small" / "seed_1.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "arm", "x", "y", "z_hat_total", "instant_regret", "cum_regret",
                                               "partition_count"}));
  EXPECT_EQ(rows[1][5], "");
}

TEST(Experiment, DeterministicBytesRegardlessOfJobs) {
  TempDir a, b;
  RunConfig c = small_daisee();
  c.seeds = {1, 2};
  run_experiment(c, {.out_root = a.path(), .jobs = 1});
  run_experiment(c, {.out_root = b.path(), .jobs = 2});
  for (auto f : {"seed_1.csv", "seed_2.csv", "aggregate.csv", "config.json"}) {
    EXPECT_EQ(slurp(a.path() / "small" / f), slurp(b.path() / "small" / f)) << f;
  }
  TempDir again;
  run_experiment(c, {.out_root = again.path(), .jobs = 1});
  EXPECT_EQ(slurp(a.path() / "small" / "aggregate.csv"), slurp(again.path() / "small" / "aggregate.csv"));
}

TEST(Experiment, AggregateIsMeanOfSeeds) {
  TempDir dir;
  run_experiment(small_daisee(), {.out_root = dir.path(), .seed_offset = 100});
  const auto agg = read_csv(dir.path() / "small" / "aggregate.csv");
  std::vector<std::vector<std::vector<std::string>>> seeds;
  for (int s : {101, 102, 103}) seeds.push_back(read_csv(dir.path() / "small" / ("seed_" + std::to_string(s) + ".csv")));
  ASSERT_EQ(agg.size(), seeds[0].size());
  // seed columns: z_hat_total 4, instant 5, cum 6; aggregate means at 1, 3, 5.
  const std::pair<int, int> columns[] = {{4, 1}, {5, 3}, {6, 5}};
  for (std::size_t row = 1; row < agg.size(); ++row) {
    for (auto [sc, ac] : columns) {
      if (seeds[0][row][sc].empty()) {
        ASSERT_EQ(agg[row][ac], "");
        continue;
      }
      double mean = 0.0;
      for (const auto& s : seeds) mean += std::stod(s[row][sc]);
      mean /= 3.0;
      // Both sides went through %.12g, so agreement is limited to 12 digits.
      ASSERT_NEAR(std::stod(agg[row][ac]), mean, 1e-11 * std::max(1.0, std::abs(mean))) << row;
    }
  }
}

TEST(Experiment, HiDaiseeWritesTreeSnapshots) {
  TempDir dir;
  RunConfig c;
  c.name = "tree";
  c.mode = RunMode::hidaisee;
  c.target = {{"family", "exp-flat"}};
  c.iterations = 300;
  c.seeds = {5};
  run_experiment(c, {.out_root = dir.path()});
  const auto snaps = json::parse(slurp(dir.path() / "tree" / "seed_5_tree.json"));
  ASSERT_TRUE(snaps.is_array());
  EXPECT_EQ(snaps.back().at("t"), 300);
}

TEST(Experiment, AlphaModeAddsColumn) {
  TempDir dir;
  RunConfig c = small_daisee();
  c.mode = RunMode::alpha;
  c.alpha = 2.0;
  c.tau = TauShared{0.05};
  c.seeds = {1};
  run_experiment(c, {.out_root = dir.path()});
  const auto rows = read_csv(dir.path() / "small" / "seed_1.csv");
  EXPECT_EQ(rows[0].back(), "alpha_regret");
  EXPECT_FALSE(rows.back().back().empty());
}

TEST(Experiment, InfiniteRegretIsWrittenAsInf) {
  TempDir dir;
  RunConfig c;
  c.name = "none";
  c.mode = RunMode::synthetic_arms;
  c.k = 100;
  c.tau = TauShared{0.01};
  c.boost.form = BoostForm::none;
  c.iterations = 3000;
  c.seeds = {1};
  run_experiment(c, {.out_root = dir.path()});
  const auto rows = read_csv(dir.path() / "none" / "seed_1.csv");
  EXPECT_EQ(rows.back()[6], "inf");
}

TEST(Sweep, SummaryRows) {
  TempDir dir;
  SweepConfig s;
  s.base = small_daisee();
  s.base.name = "sw";
  s.base.write_traces = false;
  s.axis = SweepAxis::tau;
  s.values = {0.05};
  s.replicates = 3;
  const auto rows = run_sweep(s, {.out_root = dir.path()});
  ASSERT_EQ(rows.size(), 1u);
  const auto summary = read_csv(dir.path() / "sw" / "summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[1][0], "tau");
  EXPECT_EQ(summary[1][1], "0.05");
  // One value: the row equals the final aggregate line of that run.
  const auto agg = read_csv(dir.path() / "sw" / "tau=0.05" / "aggregate.csv");
  EXPECT_NEAR(std::stod(summary[1][2]), std::stod(agg.back()[5]), 1e-9);
  EXPECT_FALSE(fs::exists(dir.path() / "sw" / "tau=0.05" / "seed_1.csv"));
}

TEST(ParallelFor, RethrowsLowestIndexError) {
  try {
    parallel_for(10, 3, [](std::size_t i) {
      if (i == 4) throw ConfigError("four");
    });
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "four");
  }
}

TEST(Recipes, ListAndDefaults) {
  std::vector<std::string> names;
  for (const auto& r : recipes()) {
    names.push_back(r.name);
    if (r.is_sweep) {
      EXPECT_NO_THROW(sweep_config_from_json(r.config)) << r.name;
    } else {
      EXPECT_NO_THROW(run_config_from_json(r.config)) << r.name;
    }
  }
  EXPECT_EQ(names, (std::vector<std::string>{"fig1ab", "fig1c", "fig1d", "fig2a-tau", "fig2b-k", "fig2c-ratio",
                                             "fig2d-perarm", "fig2e-sensitivity", "fig3-expflat", "fig4-banana"}));
  const auto fig2d = sweep_config_from_json(find_recipe("fig2d-perarm").config);
  ASSERT_EQ(fig2d.values.size(), 2u);
  const auto shared_mode = apply_axis(fig2d, fig2d.values[0]);
  const auto perarm = apply_axis(fig2d, fig2d.values[1]);
  EXPECT_EQ(perarm.k, 5u);
  EXPECT_EQ(perarm.target.at("family"), "per-arm-tau");
  EXPECT_TRUE(std::holds_alternative<TauShared>(shared_mode.tau));
  ASSERT_TRUE(std::holds_alternative<TauPerArm>(perarm.tau));
  EXPECT_EQ(std::get<TauPerArm>(perarm.tau).values, (std::vector<double>{2.0, 2.0, 0.9, 0.9, 0.9}));
  EXPECT_EQ(perarm.name, "fig2d-perarm/tau=per-arm");
  const auto shared = sweep_config_from_json(find_recipe("fig2e-sensitivity").config);
  EXPECT_EQ(shared.axis, SweepAxis::tau);
  const auto banana = sweep_config_from_json(find_recipe("fig4-banana").config);
  EXPECT_EQ(banana.values, (std::vector<json>{0.5, 0.7, 0.95}));
  const auto fig1c = sweep_config_from_json(find_recipe("fig1c").config);
  EXPECT_EQ(fig1c.base.iterations, 100000u);
  EXPECT_EQ(fig1c.replicates, 10u);
  EXPECT_THROW(find_recipe("fig9"), ConfigError);
}

}  // namespace
}  // namespace ais
