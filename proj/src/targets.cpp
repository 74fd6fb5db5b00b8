#include "ais/targets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <sstream>

#include "ais/errors.hpp"

namespace ais {

namespace {

constexpr std::array<std::string_view, 8> kBuiltinNames = {
    "step-1d", "uniform", "vary-tau", "vary-k", "vary-ratio", "per-arm-tau", "exp-flat", "banana"};

double number_param(const nlohmann::json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_number()) throw ConfigError(std::string("target param '") + key + "' must be a number");
  return v.get<double>();
}

double required_param(const nlohmann::json& params, const char* key, std::string_view family) {
  if (!params.contains(key)) {
    throw ConfigError(std::string(family) + ": missing param '" + key + "'");
  }
  return number_param(params, key, 0.0);
}

std::vector<double> vector_param(const nlohmann::json& params, const char* key,
                                 std::vector<double> fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_array()) throw ConfigError(std::string("target param '") + key + "' must be an array");
  return v.get<std::vector<double>>();
}

int integer_param(double value, std::string_view what) {
  if (value != std::floor(value) || value < 1.0 || value > 1e9) {
    throw ConfigError(std::string(what) + " must be a positive integer");
  }
  return static_cast<int>(value);
}

TargetDensity step_target(std::string family, PiecewiseConstantSpec spec, const Rectangle& domain) {
  spec.validate(domain);
  const double sup = *std::max_element(spec.levels.begin(), spec.levels.end());
  auto shared = std::make_shared<const PiecewiseConstantSpec>(spec);
  TargetDensity target(std::move(family), domain,
                       [shared](std::span<const double> x) { return shared->level_at(x[0]); }, sup);
  target.with_discontinuities(0, spec.breakpoints);
  target.with_pieces(std::move(spec));
  return target;
}

// Literal reading of the ratio-sweep density:
//   10*1(0 < x <= 1/K - d) + 0.1*1(1/K - d < x <= 1/K)
//   + 10*1(frac(10x) < d/(K-1)) + 0.1*1(frac(10x) >= d/(K-1)).
// The last two indicators are complementary, so every point receives one of
// them in addition to the first-arm terms. frac(10x) < c is evaluated as
// j/10 <= x < (j + c)/10 against the same doubles used as breakpoints.
double vary_ratio_edge(int j, double c) { return (j + c) / 10.0; }

double vary_ratio_eval(double x, int k, double delta) {
  const double inv_k = 1.0 / k;
  double f = 0.0;
  if (x > 0.0 && x <= inv_k - delta) f += 10.0;
  if (x > inv_k - delta && x <= inv_k) f += 0.1;
  const double c = delta / (k - 1);
  int j = static_cast<int>(std::floor(10.0 * x));
  while (j > 0 && vary_ratio_edge(j, 0.0) > x) --j;
  while (vary_ratio_edge(j + 1, 0.0) <= x) ++j;
  f += x < vary_ratio_edge(j, c) ? 10.0 : 0.1;
  return f;
}

TargetDensity make_vary_ratio(const nlohmann::json& params) {
  const int k = integer_param(required_param(params, "K", "vary-ratio"), "vary-ratio K");
  const double delta = required_param(params, "delta", "vary-ratio");
  if (k < 2) throw ConfigError("vary-ratio: K must be at least 2");
  if (!(delta >= 0.0) || !(delta < 1.0 / k)) {
    throw ConfigError("vary-ratio: delta must lie in [0, 1/K)");
  }

  // Exact step representation: the formula only jumps at these candidates.
  std::vector<double> cand = {1.0 / k - delta, 1.0 / k};
  for (int j = 0; j <= 10; ++j) {
    cand.push_back(vary_ratio_edge(j, 0.0));
    cand.push_back(vary_ratio_edge(j, delta / (k - 1)));
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::erase_if(cand, [](double c) { return c <= 0.0 || c >= 1.0; });

  PiecewiseConstantSpec spec;
  double prev = 0.0;
  for (std::size_t i = 0; i <= cand.size(); ++i) {
    const double next = i < cand.size() ? cand[i] : 1.0;
    const double level = vary_ratio_eval(0.5 * (prev + next), k, delta);
    if (spec.levels.empty() || spec.levels.back() != level) {
      if (!spec.levels.empty()) spec.breakpoints.push_back(prev);
      spec.levels.push_back(level);
    }
    prev = next;
  }

  const Rectangle domain = Rectangle::interval(0.0, 1.0);
  spec.validate(domain);
  const double sup = *std::max_element(spec.levels.begin(), spec.levels.end());
  TargetDensity target("vary-ratio", domain,
                       [k, delta](std::span<const double> x) { return vary_ratio_eval(x[0], k, delta); },
                       sup);
  target.with_discontinuities(0, spec.breakpoints);
  target.with_pieces(std::move(spec));
  if (k != 10) {
    target.with_warning("vary-ratio: the fractional-part terms assume K = 10 cells; applied literally");
  }
  return target;
}

}  // namespace

void PiecewiseConstantSpec::validate(const Rectangle& domain) const {
  if (domain.dim() != 1) throw ConfigError("piecewise target: domain must be one-dimensional");
  if (levels.size() != breakpoints.size() + 1) {
    throw ConfigError("piecewise target: need exactly one more level than breakpoints");
  }
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    const double b = breakpoints[i];
    if (!(b > domain.lo(0) && b < domain.hi(0))) {
      throw ConfigError("piecewise target: breakpoint " + std::to_string(i) + " not strictly inside domain");
    }
    if (i > 0 && !(b > breakpoints[i - 1])) {
      throw ConfigError("piecewise target: breakpoints must be strictly increasing");
    }
  }
  for (double l : levels) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("piecewise target: levels must be finite and >= 0");
  }
}

double PiecewiseConstantSpec::level_at(double x) const {
  const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), x);
  return levels[static_cast<std::size_t>(it - breakpoints.begin())];
}

TargetDensity::TargetDensity(std::string family, Rectangle domain, Eval eval,
                             std::optional<double> sup_bound)
    : family_(std::move(family)),
      domain_(std::move(domain)),
      eval_(std::move(eval)),
      sup_bound_(sup_bound),
      discontinuities_(domain_.dim()) {
  if (!eval_) throw ConfigError("target: missing evaluation function");
  if (sup_bound_ && !(*sup_bound_ >= 0.0)) throw ConfigError("target: sup_bound must be >= 0");
}

std::span<const double> TargetDensity::discontinuities(std::size_t d) const {
  return discontinuities_.at(d);
}

TargetDensity& TargetDensity::with_pieces(PiecewiseConstantSpec pieces) {
  pieces_ = std::move(pieces);
  return *this;
}

TargetDensity& TargetDensity::with_discontinuities(std::size_t d, std::vector<double> points) {
  std::sort(points.begin(), points.end());
  discontinuities_.at(d) = std::move(points);
  return *this;
}

TargetDensity& TargetDensity::with_warning(std::string message) {
  warnings_.push_back(std::move(message));
  return *this;
}

std::span<const std::string_view> builtin_target_names() { return kBuiltinNames; }

TargetDensity builtin_target(std::string_view name, const nlohmann::json& params) {
  if (!params.is_object()) throw ConfigError("target params must be a JSON object");
  const Rectangle unit = Rectangle::interval(0.0, 1.0);

  if (name == "step-1d") {
    const double high = number_param(params, "high", 2.0);
    const double low = number_param(params, "low", 1.0);
    const double edge = number_param(params, "edge", 0.5);
    return step_target("step-1d", {{edge}, {high, low}}, unit);
  }
  if (name == "uniform") {
    const double level = number_param(params, "level", 1.0);
    const Rectangle domain =
        Rectangle::interval(number_param(params, "lo", 0.0), number_param(params, "hi", 1.0));
    return step_target("uniform", {{}, {level}}, domain);
  }
  if (name == "vary-tau") {
    const double delta = required_param(params, "delta", name);
    if (!(delta >= 0.0 && delta <= 10.0)) throw ConfigError("vary-tau: delta must lie in [0, 10]");
    TargetDensity t = step_target("vary-tau", {{0.05, 0.1}, {10.0 + delta, 10.0 - delta, 0.1}}, unit);
    if (delta < 0.001 || delta > 8.0) {
      t.with_warning("vary-tau: delta outside the studied range [0.001, 8]");
    }
    return t;
  }
  if (name == "vary-k") {
    const int k = integer_param(required_param(params, "K", name), "vary-k K");
    return step_target("vary-k", {{0.2}, {3.0 * k, 1.0 * k}}, unit);
  }
  if (name == "vary-ratio") return make_vary_ratio(params);
  if (name == "per-arm-tau") {
    return step_target("per-arm-tau", {{0.25, 0.5, 0.99}, {20.0, 3.0, 9.0, 1.0}}, unit);
  }
  if (name == "exp-flat") {
    TargetDensity t("exp-flat", Rectangle::interval(0.0, 1.0),
                    [](std::span<const double> x) {
                      return x[0] <= 0.25 ? 0.5 : std::exp(10.0 * (x[0] - 1.0));
                    },
                    1.0);
    t.with_discontinuities(0, {0.25});
    return t;
  }
  if (name == "banana") {
    const auto lo = vector_param(params, "lo", {-20.0, -10.0});
    const auto hi = vector_param(params, "hi", {20.0, 10.0});
    if (lo.size() != 2 || hi.size() != 2) throw ConfigError("banana: lo/hi must have two entries");
    return TargetDensity("banana", Rectangle(lo, hi),
                         [](std::span<const double> x) {
                           const double bend = x[1] + 0.03 * (x[0] * x[0] - 100.0);
                           return std::exp(-0.5 * (0.03 * x[0] * x[0] + bend * bend));
                         },
                         1.0);
  }
  throw ConfigError("unknown target family '" + std::string(name) + "'");
}

TargetDensity piecewise_target(const PiecewiseConstantSpec& spec, const Rectangle& domain) {
  return step_target("piecewise", spec, domain);
}

TargetDensity target_from_json(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("family") || !spec.at("family").is_string()) {
    throw ConfigError("target: expected an object with a string 'family'");
  }
  const auto family = spec.at("family").get<std::string>();
  if (family == "piecewise") {
    try {
      PiecewiseConstantSpec pc{spec.at("breakpoints").get<std::vector<double>>(),
                               spec.at("levels").get<std::vector<double>>()};
      const auto& dom = spec.at("domain");
      return piecewise_target(pc, Rectangle(dom.at("lo").get<std::vector<double>>(),
                                            dom.at("hi").get<std::vector<double>>()));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("target.piecewise: ") + e.what());
    }
  }
  return builtin_target(family, spec.value("params", nlohmann::json::object()));
}

}  // namespace ais
