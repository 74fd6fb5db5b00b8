#include "ais/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "ais/alpha.hpp"
#include "ais/daisee.hpp"
#include "ais/errors.hpp"
#include "ais/oracle.hpp"
#include "ais/targets.hpp"

namespace ais {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

double rounded(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

void check_written(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw Error("failed writing '" + path.string() + "'");
}

// Per-t columns kept for the aggregate; NaN marks a missing value.
struct Columns {
  std::vector<std::uint64_t> t;
  std::vector<double> z_hat, instant, cum, partitions, alpha;
};

Columns columns_of(const std::vector<RunRecord>& trace) {
  constexpr double missing = std::numeric_limits<double>::quiet_NaN();
  Columns c;
  const std::size_t n = trace.size();
  c.t.reserve(n);
  c.z_hat.reserve(n);
  c.instant.reserve(n);
  c.cum.reserve(n);
  c.partitions.reserve(n);
  c.alpha.reserve(n);
  for (const auto& r : trace) {
    c.t.push_back(r.t);
    c.z_hat.push_back(rounded(r.z_hat_total));
    c.instant.push_back(r.instant_regret ? rounded(*r.instant_regret) : missing);
    c.cum.push_back(r.cum_regret ? rounded(*r.cum_regret) : missing);
    c.partitions.push_back(static_cast<double>(r.partition_count));
    c.alpha.push_back(r.alpha_regret ? rounded(*r.alpha_regret) : missing);
  }
  return c;
}

void write_mean_std(std::ostream& os, const std::vector<Columns>& runs, std::vector<double> Columns::*field,
                    std::size_t row, std::vector<double>& scratch) {
  scratch.clear();
  for (const auto& r : runs) {
    const double v = (r.*field)[row];
    if (std::isnan(v)) {
      os << ",,";
      return;
    }
    scratch.push_back(v);
  }
  const auto [m, s] = mean_std(scratch);
  os << ',' << format_number(m) << ',' << format_number(s);
}

}  // namespace

void write_trace_csv(std::ostream& os, std::span<const RunRecord> trace, bool alpha_column) {
  os << "t,arm,x,y,z_hat_total,instant_regret,cum_regret,partition_count";
  if (alpha_column) os << ",alpha_regret";
  os << '\n';
  for (const auto& r : trace) {
    os << r.t << ',' << r.arm << ',';
    for (std::size_t d = 0; d < r.x.size(); ++d) os << (d ? ";" : "") << format_number(r.x[d]);
    os << ',' << format_number(r.y) << ',' << format_number(r.z_hat_total) << ',' << optional_cell(r.instant_regret)
       << ',' << optional_cell(r.cum_regret) << ',' << r.partition_count;
    if (alpha_column) os << ',' << optional_cell(r.alpha_regret);
    os << '\n';
  }
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  std::vector<std::exception_ptr> errors(n);
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct PreparedRun::Impl {
  RunConfig config;
  std::optional<TargetDensity> target;
  std::optional<SyntheticArms> synthetic;
  std::vector<Arm> arms;
  std::optional<OracleTable> oracle;
};

PreparedRun::PreparedRun(RunConfig config) : impl_(std::make_unique<Impl>()) {
  config.validate();
  impl_->config = std::move(config);
  const auto& c = impl_->config;
  if (c.mode == RunMode::synthetic_arms) {
    impl_->synthetic.emplace(c.k, c.synthetic_p);
    impl_->arms = make_equal_partition(Rectangle::interval(0.0, 1.0), c.k, c.tau);
    if (c.regret_tracking) impl_->oracle = impl_->synthetic->oracle();
    return;
  }
  impl_->target.emplace(target_from_json(c.target));
  if (c.mode == RunMode::hidaisee) return;
  impl_->arms = make_equal_partition(impl_->target->domain(), c.k, c.tau, impl_->target->sup_bound());
  if (c.regret_tracking) {
    std::vector<Rectangle> cells;
    for (const auto& a : impl_->arms) cells.push_back(a.cell);
    impl_->oracle = oracle_table(*impl_->target, std::move(cells), c.alpha);
  }
}

PreparedRun::~PreparedRun() = default;
PreparedRun::PreparedRun(PreparedRun&&) noexcept = default;

const RunConfig& PreparedRun::config() const noexcept { return impl_->config; }

std::vector<std::string> PreparedRun::warnings() const {
  return impl_->target ? impl_->target->warnings() : std::vector<std::string>{};
}

ReplicateResult PreparedRun::run(std::uint64_t seed) const {
  const auto& c = impl_->config;
  ReplicateResult out;
  out.seed = seed;
  if (c.mode == RunMode::hidaisee) {
    HiDaiseeOptions options;
    options.boost = c.boost;
    options.split = c.split;
    if (const auto* s = std::get_if<TauShared>(&c.tau)) options.root_tau = s->value;
    options.tau_rule = c.tau_rule.value_or(TauRule::halve);
    options.lazy_masses = c.lazy_masses;
    HiDaisee engine(*impl_->target, options, seed);
    std::optional<LeafOracle> oracle;
    if (c.regret_tracking) oracle.emplace(*impl_->target);
    auto run = run_hidaisee(engine, c.iterations, oracle ? &*oracle : nullptr);
    out.trace = std::move(run.trace);
    out.snapshots = std::move(run.snapshots);
    return out;
  }
  DaiseeOptions options;
  options.boost = c.boost;
  options.alpha = c.alpha;
  options.adapt = c.adapt;
  Daisee engine(impl_->arms, options, seed);
  const OracleTable* oracle = impl_->oracle ? &*impl_->oracle : nullptr;
  if (impl_->synthetic) {
    out.trace = run_daisee(engine, *impl_->synthetic, c.iterations, oracle);
  } else {
    out.trace = run_daisee(engine, TargetPulls(*impl_->target), c.iterations, oracle);
  }
  return out;
}

ExperimentSummary run_experiment(const RunConfig& config, const RunOptions& options) {
  const PreparedRun prepared(config);
  if (options.on_warning) {
    for (const auto& w : prepared.warnings()) options.on_warning(w);
  }
  ExperimentSummary summary;
  summary.dir = options.out_root / config.name;
  fs::create_directories(summary.dir);
  {
    const auto path = summary.dir / "config.json";
    auto os = open_output(path);
    os << to_json(config).dump(2) << '\n';
    check_written(os, path);
  }

  const std::size_t n = config.seeds.size();
  for (auto s : config.seeds) summary.seeds.push_back(s + options.seed_offset);
  std::vector<Columns> columns(n);
  summary.final_z_hat.resize(n);
  summary.final_instant_regret.resize(n);
  summary.final_cum_regret.resize(n);
  summary.final_partition_count.resize(n);
  const bool alpha_column = config.mode == RunMode::alpha && config.regret_tracking;

  parallel_for(n, options.jobs, [&](std::size_t i) {
    const std::uint64_t seed = summary.seeds[i];
    auto result = prepared.run(seed);
    const std::string stem = "seed_" + std::to_string(seed);
    if (config.write_traces) {
      const auto path = summary.dir / (stem + ".csv");
      auto os = open_output(path);
      write_trace_csv(os, result.trace, alpha_column);
      check_written(os, path);
    }
    if (config.mode == RunMode::hidaisee) {
      const auto path = summary.dir / (stem + "_tree.json");
      json snaps = json::array();
      for (const auto& s : result.snapshots) snaps.push_back(to_json(s));
      auto os = open_output(path);
      os << snaps.dump() << '\n';
      check_written(os, path);
    }
    const auto& last = result.trace.back();
    summary.final_z_hat[i] = last.z_hat_total;
    summary.final_cum_regret[i] = last.cum_regret;
    summary.final_instant_regret[i] = last.instant_regret;
    summary.final_partition_count[i] = last.partition_count;
    columns[i] = columns_of(result.trace);
  });

  const auto path = summary.dir / "aggregate.csv";
  auto os = open_output(path);
  os << "t,mean_z_hat_total,std_z_hat_total,mean_instant_regret,std_instant_regret,mean_cum_regret,std_cum_regret,"
        "mean_partition_count,std_partition_count";
  if (alpha_column) os << ",mean_alpha_regret,std_alpha_regret";
  os << '\n';
  std::vector<double> scratch;
  for (std::size_t row = 0; row < columns[0].t.size(); ++row) {
    os << columns[0].t[row];
    write_mean_std(os, columns, &Columns::z_hat, row, scratch);
    write_mean_std(os, columns, &Columns::instant, row, scratch);
    write_mean_std(os, columns, &Columns::cum, row, scratch);
    write_mean_std(os, columns, &Columns::partitions, row, scratch);
    if (alpha_column) write_mean_std(os, columns, &Columns::alpha, row, scratch);
    os << '\n';
  }
  check_written(os, path);
  return summary;
}

std::vector<SweepRow> run_sweep(const SweepConfig& sweep, const RunOptions& options) {
  sweep.validate();
  const fs::path dir = options.out_root / sweep.base.name;
  fs::create_directories(dir);
  {
    const auto path = dir / "sweep.json";
    auto os = open_output(path);
    os << to_json(sweep).dump(2) << '\n';
    check_written(os, path);
  }
  std::vector<SweepRow> rows;
  for (const auto& value : sweep.values) {
    const RunConfig config = apply_axis(sweep, value);
    const auto result = run_experiment(config, options);
    SweepRow row;
    row.value = value;
    row.label = value.is_string() ? value.get<std::string>() : format_number(value.get<double>());
    std::vector<double> cum, inst, z, parts;
    for (std::size_t i = 0; i < result.seeds.size(); ++i) {
      if (result.final_cum_regret[i]) cum.push_back(*result.final_cum_regret[i]);
      if (result.final_instant_regret[i]) inst.push_back(*result.final_instant_regret[i]);
      z.push_back(result.final_z_hat[i]);
      parts.push_back(static_cast<double>(result.final_partition_count[i]));
    }
    row.has_regret = cum.size() == result.seeds.size() && !cum.empty();
    if (row.has_regret) {
      std::tie(row.mean_final_cum_regret, row.std_final_cum_regret) = mean_std(cum);
      std::tie(row.mean_final_instant_regret, row.std_final_instant_regret) = mean_std(inst);
    }
    row.mean_final_z_hat = mean_std(z).first;
    row.mean_final_partition_count = mean_std(parts).first;
    rows.push_back(std::move(row));
  }

  const auto path = dir / "summary.csv";
  auto os = open_output(path);
  os << "axis,value,mean_final_cum_regret,std_final_cum_regret,mean_final_instant_regret,std_final_instant_regret,"
        "mean_final_z_hat,mean_final_partition_count\n";
  for (const auto& r : rows) {
    os << to_string(sweep.axis) << ',' << r.label;
    if (r.has_regret) {
      os << ',' << format_number(r.mean_final_cum_regret) << ',' << format_number(r.std_final_cum_regret) << ','
         << format_number(r.mean_final_instant_regret) << ',' << format_number(r.std_final_instant_regret);
    } else {
      os << ",,,,";
    }
    os << ',' << format_number(r.mean_final_z_hat) << ',' << format_number(r.mean_final_partition_count) << '\n';
  }
  check_written(os, path);
  return rows;
}

namespace {

std::vector<Recipe> build_recipes() {
  const json ten_seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  // Shared tau for the 100-arm synthetic problem, picked by a grid search on
  // cumulative regret.
  const double synthetic_tau = 0.015;
  const json synthetic = {{"name", "fig1"},
                          {"mode", "synthetic-arms"},
                          {"K", 100},
                          {"tau", synthetic_tau},
                          {"synthetic", {{"p", 0.01}}},
                          {"boost", {{"form", "ucb_sqrt"}}},
                          {"T", 100000},
                          {"seeds", ten_seeds}};
  auto with = [](json base, const json& patch) {
    base.merge_patch(patch);
    return base;
  };
  std::vector<Recipe> out;
  out.push_back({"fig1ab", "100 synthetic arms, ucb_sqrt boost: proposal recovery over time", false,
                 with(synthetic, {{"name", "fig1ab"}})});
  out.push_back({"fig1c", "100 synthetic arms: boost form comparison (ucb_sqrt, log t/N, 1/N, none)", true,
                 {{"base", with(synthetic, {{"name", "fig1c"}, {"write_traces", false}})},
                  {"axis", "boost_form"},
                  // Multipliers tuned by grid search on seeds 101..110.
                  {"values",
                   {"ucb_sqrt", {{"form", "log_over_n"}, {"scale", 0.3}}, {{"form", "inverse_n"}, {"scale", 3.0}}, "none"}},
                  {"replicates", 10}}});
  out.push_back({"fig1d", "100 synthetic arms: boost (log t / N)^e for e = 0.1 .. 1.0, scale c * tau", true,
                 {{"base", with(synthetic, {{"name", "fig1d"},
                                            {"write_traces", false},
                                            {"boost", {{"form", "power"}, {"scale", ucb_constant() * synthetic_tau}}}})},
                  {"axis", "boost_exponent"},
                  {"values", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}},
                  {"replicates", 10}}});
  const json step = {{"mode", "daisee"}, {"tau", "auto"}, {"boost", {{"form", "ucb_sqrt"}}},
                     {"T", 100000},      {"seeds", ten_seeds}, {"write_traces", false}};
  out.push_back({"fig2a-tau", "vary-tau target, K = 10, auto tau: regret against delta", true,
                 {{"base", with(step, {{"name", "fig2a-tau"},
                                       {"K", 10},
                                       {"target", {{"family", "vary-tau"}, {"params", {{"delta", 1.0}}}}}})},
                  {"axis", "delta"},
                  {"values", {0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0}},
                  {"replicates", 10}}});
  out.push_back({"fig2b-k", "vary-k target: regret against the number of arms", true,
                 {{"base", with(step, {{"name", "fig2b-k"},
                                       {"K", 10},
                                       {"target", {{"family", "vary-k"}, {"params", {{"K", 10}}}}}})},
                  {"axis", "K"},
                  {"values", {5, 10, 20, 50, 100}},
                  {"replicates", 10}}});
  out.push_back({"fig2c-ratio", "vary-ratio target, K = 10: regret against Z_max / Z_min", true,
                 {{"base", with(step, {{"name", "fig2c-ratio"},
                                       {"K", 10},
                                       {"target", {{"family", "vary-ratio"}, {"params", {{"K", 10}, {"delta", 0.0}}}}}})},
                  {"axis", "ratio"},
                  {"values", {1.5, 2, 5, 10, 20, 50, 100}},
                  {"replicates", 10}}});
  // Shared tau = (M / 2) * vol against per-arm tau_a = (M_a / 2) * vol.
  out.push_back({"fig2d-perarm", "per-arm-tau target, K = 5: shared tau against per-arm tau (M_a / 2) * vol", true,
                 {{"base", with(step, {{"name", "fig2d-perarm"},
                                       {"K", 5},
                                       {"target", {{"family", "per-arm-tau"}}},
                                       {"write_traces", true}})},
                  {"axis", "tau"},
                  {"values", {2.0, {2.0, 2.0, 0.9, 0.9, 0.9}}},
                  {"replicates", 10}}});
  out.push_back({"fig2e-sensitivity", "per-arm-tau target, K = 5: shared tau grid", true,
                 {{"base", with(step, {{"name", "fig2e-sensitivity"},
                                       {"K", 5},
                                       {"target", {{"family", "per-arm-tau"}}},
                                       {"tau", 1.0}})},
                  {"axis", "tau"},
                  {"values", {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0}},
                  {"replicates", 10}}});
  out.push_back({"fig3-expflat", "HiDaisee on exp-flat, ess_ratio 0.5, auto tau", false,
                 {{"name", "fig3-expflat"},
                  {"mode", "hidaisee"},
                  {"target", {{"family", "exp-flat"}}},
                  {"tau", "auto"},
                  {"split", {{"n_min", 10}, {"ess_ratio", 0.5}}},
                  {"T", 100000},
                  {"seeds", ten_seeds}}});
  out.push_back({"fig4-banana", "HiDaisee on the 2D banana for ess_ratio 0.5, 0.7, 0.95", true,
                 {{"base",
                   {{"name", "fig4-banana"},
                    {"mode", "hidaisee"},
                    {"target", {{"family", "banana"}}},
                    {"tau", "auto"},
                    {"split", {{"n_min", 10}, {"ess_ratio", 0.5}}},
                    {"T", 100000},
                    {"seeds", ten_seeds},
                    {"regret_tracking", false},
                    {"write_traces", false}}},
                  {"axis", "ess_ratio"},
                  {"values", {0.5, 0.7, 0.95}},
                  {"replicates", 10}}});
  return out;
}

}  // namespace

std::span<const Recipe> recipes() {
  static const std::vector<Recipe> all = build_recipes();
  return all;
}

const Recipe& find_recipe(std::string_view name) {
  for (const auto& r : recipes()) {
    if (r.name == name) return r;
  }
  throw ConfigError("unknown recipe '" + std::string(name) + "'");
}

}  // namespace ais
