#include "ais/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ais/alpha.hpp"
#include "ais/errors.hpp"
#include "ais/oracle.hpp"
#include "ais/targets.hpp"

namespace ais {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  return j.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>())) {
    field_error(path, "expected an integer");
  }
  if (j.is_number_integer() ? j.get<std::int64_t>() < 0 : j.get<double>() < 0.0) {
    field_error(path, "expected a nonnegative integer");
  }
  return j.is_number_unsigned() ? j.get<std::uint64_t>() : static_cast<std::uint64_t>(j.get<double>());
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) field_error(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) field_error(path, "expected a string");
  return j.get<std::string>();
}

template <typename F>
auto with_path(const std::string& path, F&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    field_error(path, e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& path) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      field_error(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

TauSpec tau_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != "auto") field_error("tau", "expected a number, an array, or \"auto\"");
    return TauAuto{};
  }
  if (j.is_number()) return TauShared{get_number(j, "tau")};
  if (j.is_array()) {
    TauPerArm per;
    for (std::size_t i = 0; i < j.size(); ++i) per.values.push_back(get_number(j[i], "tau[" + std::to_string(i) + "]"));
    return per;
  }
  field_error("tau", "expected a number, an array, or \"auto\"");
}

json tau_to_json(const TauSpec& tau) {
  if (const auto* s = std::get_if<TauShared>(&tau)) return s->value;
  if (const auto* p = std::get_if<TauPerArm>(&tau)) return p->values;
  return "auto";
}

bool same_tau(const TauSpec& a, const TauSpec& b) {
  if (a.index() != b.index()) return false;
  if (const auto* s = std::get_if<TauShared>(&a)) return s->value == std::get<TauShared>(b).value;
  if (const auto* p = std::get_if<TauPerArm>(&a)) return p->values == std::get<TauPerArm>(b).values;
  return true;
}

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::daisee: return "daisee";
    case RunMode::alpha: return "alpha";
    case RunMode::hidaisee: return "hidaisee";
    case RunMode::synthetic_arms: return "synthetic-arms";
  }
  return "daisee";
}

RunMode run_mode_from_string(std::string_view name) {
  if (name == "daisee") return RunMode::daisee;
  if (name == "alpha") return RunMode::alpha;
  if (name == "hidaisee") return RunMode::hidaisee;
  if (name == "synthetic-arms") return RunMode::synthetic_arms;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected daisee, alpha, hidaisee, synthetic-arms)");
}

bool RunConfig::operator==(const RunConfig& o) const {
  return name == o.name && mode == o.mode && target == o.target && k == o.k && same_tau(tau, o.tau) &&
         boost == o.boost && alpha == o.alpha && split == o.split && tau_rule == o.tau_rule &&
         lazy_masses == o.lazy_masses && synthetic_p == o.synthetic_p && iterations == o.iterations &&
         seeds == o.seeds && regret_tracking == o.regret_tracking && adapt == o.adapt &&
         write_traces == o.write_traces;
}

void RunConfig::validate() const {
  if (name.empty() || name.front() == '/' || name.find("..") != std::string::npos) {
    field_error("name", "must be a nonempty relative path without '..'");
  }
  with_path("boost", [&] { ais::validate(boost); return 0; });
  if (iterations == 0) field_error("T", "must be positive");
  if (seeds.empty()) field_error("seeds", "need at least one seed");
  if (fixed_partition()) {
    if (k == 0) field_error("K", "must be positive");
    if (iterations < k) field_error("T", "must be at least K (" + std::to_string(k) + ")");
    if (const auto* p = std::get_if<TauPerArm>(&tau); p && p->values.size() != k) {
      field_error("tau", "per-arm list has " + std::to_string(p->values.size()) + " entries for K = " +
                             std::to_string(k));
    }
  }
  if (const auto* s = std::get_if<TauShared>(&tau); s && !(s->value > 0.0)) field_error("tau", "must be positive");
  if (const auto* p = std::get_if<TauPerArm>(&tau)) {
    if (mode == RunMode::hidaisee) field_error("tau", "per-arm tau needs a fixed partition");
    for (double v : p->values) {
      if (!(v > 0.0)) field_error("tau", "every per-arm value must be positive");
    }
  }
  if (mode == RunMode::alpha) {
    if (!alpha) field_error("alpha", "required in alpha mode");
    if (std::holds_alternative<TauAuto>(tau)) field_error("tau", "alpha mode needs an explicit tau");
  }
  if (alpha) {
    if (mode != RunMode::alpha) field_error("alpha", "only used in alpha mode");
    with_path("alpha", [&] { validate_alpha(*alpha); return 0; });
  }
  if (mode == RunMode::synthetic_arms) {
    if (std::holds_alternative<TauAuto>(tau)) field_error("tau", "synthetic arms need an explicit tau");
    if (!(synthetic_p > 0.0 && synthetic_p <= 1.0)) field_error("synthetic.p", "must lie in (0, 1]");
  } else {
    with_path("target", [&] { target_from_json(target); return 0; });
  }
  if (mode == RunMode::hidaisee) {
    with_path("split", [&] { split.validate(); return 0; });
    if (!std::holds_alternative<TauAuto>(tau) && !tau_rule) {
      field_error("split.tau_rule", "explicit tau needs a rule (halve or constant)");
    }
  }
}

// Overlays the fields present in `b` on `base`.
BoostSpec boost_from_json(const json& b, const std::string& path, BoostSpec base) {
  if (!b.is_object()) field_error(path, "expected an object");
  reject_unknown(b, {"form", "scale", "exponent"}, path);
  if (b.contains("form")) {
    base.form = with_path(path + ".form", [&] { return boost_form_from_string(get_string(b["form"], path + ".form")); });
  }
  if (b.contains("scale")) base.scale = get_number(b["scale"], path + ".scale");
  if (b.contains("exponent")) base.exponent = get_number(b["exponent"], path + ".exponent");
  return base;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j,
                 {"name", "mode", "target", "K", "tau", "boost", "alpha", "split", "lazy_masses", "synthetic", "T",
                  "seeds", "regret_tracking", "adapt", "write_traces"},
                 "");
  RunConfig c;
  if (j.contains("name")) c.name = get_string(j["name"], "name");
  if (j.contains("mode")) c.mode = with_path("mode", [&] { return run_mode_from_string(get_string(j["mode"], "mode")); });
  if (j.contains("target")) {
    c.target = j["target"];
    if (!c.target.is_object()) field_error("target", "expected an object");
  }
  if (j.contains("K")) c.k = get_count(j["K"], "K");
  if (j.contains("tau")) c.tau = tau_from_json(j["tau"]);
  if (j.contains("boost")) {
    c.boost = boost_from_json(j["boost"], "boost", c.boost);
  }
  if (j.contains("alpha") && !j["alpha"].is_null()) c.alpha = get_number(j["alpha"], "alpha");
  if (j.contains("split")) {
    const auto& s = j["split"];
    if (!s.is_object()) field_error("split", "expected an object");
    reject_unknown(s, {"n_min", "ess_ratio", "tau_rule"}, "split");
    if (s.contains("n_min")) c.split.n_min = get_count(s["n_min"], "split.n_min");
    if (s.contains("ess_ratio")) c.split.ess_ratio = get_number(s["ess_ratio"], "split.ess_ratio");
    if (s.contains("tau_rule") && !s["tau_rule"].is_null()) {
      c.tau_rule = with_path("split.tau_rule",
                             [&] { return tau_rule_from_string(get_string(s["tau_rule"], "split.tau_rule")); });
    }
  }
  if (j.contains("lazy_masses")) c.lazy_masses = get_bool(j["lazy_masses"], "lazy_masses");
  if (j.contains("synthetic")) {
    const auto& s = j["synthetic"];
    if (!s.is_object()) field_error("synthetic", "expected an object");
    reject_unknown(s, {"p"}, "synthetic");
    if (s.contains("p")) c.synthetic_p = get_number(s["p"], "synthetic.p");
  }
  if (j.contains("T")) c.iterations = get_count(j["T"], "T");
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    if (!s.is_array()) field_error("seeds", "expected an array of integers");
    c.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) c.seeds.push_back(get_count(s[i], "seeds[" + std::to_string(i) + "]"));
  }
  if (j.contains("regret_tracking")) c.regret_tracking = get_bool(j["regret_tracking"], "regret_tracking");
  if (j.contains("adapt")) c.adapt = get_bool(j["adapt"], "adapt");
  if (j.contains("write_traces")) c.write_traces = get_bool(j["write_traces"], "write_traces");
  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  json split = {{"n_min", c.split.n_min}, {"ess_ratio", c.split.ess_ratio}};
  split["tau_rule"] = c.tau_rule ? json(std::string(to_string(*c.tau_rule))) : json(nullptr);
  return {{"name", c.name},
          {"mode", std::string(to_string(c.mode))},
          {"target", c.target},
          {"K", c.k},
          {"tau", tau_to_json(c.tau)},
          {"boost",
           {{"form", std::string(to_string(c.boost.form))}, {"scale", c.boost.scale}, {"exponent", c.boost.exponent}}},
          {"alpha", c.alpha ? json(*c.alpha) : json(nullptr)},
          {"split", split},
          {"lazy_masses", c.lazy_masses},
          {"synthetic", {{"p", c.synthetic_p}}},
          {"T", c.iterations},
          {"seeds", c.seeds},
          {"regret_tracking", c.regret_tracking},
          {"adapt", c.adapt},
          {"write_traces", c.write_traces}};
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::boost_form: return "boost_form";
    case SweepAxis::boost_exponent: return "boost_exponent";
    case SweepAxis::boost_scale: return "boost_scale";
    case SweepAxis::tau: return "tau";
    case SweepAxis::k: return "K";
    case SweepAxis::delta: return "delta";
    case SweepAxis::ratio: return "ratio";
    case SweepAxis::ess_ratio: return "ess_ratio";
  }
  return "tau";
}

SweepAxis sweep_axis_from_string(std::string_view name) {
  for (auto a : {SweepAxis::boost_form, SweepAxis::boost_exponent, SweepAxis::boost_scale, SweepAxis::tau,
                 SweepAxis::k, SweepAxis::delta, SweepAxis::ratio, SweepAxis::ess_ratio}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

void SweepConfig::validate() const {
  if (values.empty()) field_error("values", "need at least one value");
  const bool fixed = base.fixed_partition();
  switch (axis) {
    case SweepAxis::ess_ratio:
      if (fixed) field_error("axis", "ess_ratio needs mode hidaisee");
      break;
    case SweepAxis::k:
    case SweepAxis::tau:
      if (!fixed && axis == SweepAxis::k) field_error("axis", "K needs a fixed partition");
      break;
    case SweepAxis::ratio:
      if (base.target.value("family", "") != "vary-ratio") field_error("axis", "ratio needs a vary-ratio target");
      break;
    case SweepAxis::delta:
      if (base.mode == RunMode::synthetic_arms) field_error("axis", "delta needs a target with a delta parameter");
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    with_path("values[" + std::to_string(i) + "]", [&] { apply_axis(*this, values[i]).validate(); return 0; });
  }
}

SweepConfig sweep_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("sweep: expected a JSON object");
  reject_unknown(j, {"base", "axis", "values", "replicates"}, "");
  SweepConfig s;
  if (!j.contains("base")) field_error("base", "required");
  s.base = with_path("base", [&] { return run_config_from_json(j["base"]); });
  if (!j.contains("axis")) field_error("axis", "required");
  s.axis = with_path("axis", [&] { return sweep_axis_from_string(get_string(j["axis"], "axis")); });
  if (j.contains("values")) {
    if (!j["values"].is_array()) field_error("values", "expected an array");
    s.values.assign(j["values"].begin(), j["values"].end());
  } else if (s.axis == SweepAxis::boost_exponent) {
    for (int i = 1; i <= 10; ++i) s.values.emplace_back(i / 10.0);
  }
  if (j.contains("replicates")) s.replicates = get_count(j["replicates"], "replicates");
  s.validate();
  return s;
}

json to_json(const SweepConfig& s) {
  return {{"base", to_json(s.base)},
          {"axis", std::string(to_string(s.axis))},
          {"values", s.values},
          {"replicates", s.replicates}};
}

RunConfig apply_axis(const SweepConfig& sweep, const json& value) {
  RunConfig c = sweep.base;
  if (sweep.replicates > 0) {
    c.seeds.clear();
    for (std::size_t i = 1; i <= sweep.replicates; ++i) c.seeds.push_back(i);
  }
  std::string label;
  if (value.is_string()) {
    label = value.get<std::string>();
  } else if (value.is_array() && sweep.axis == SweepAxis::tau) {
    label = "per-arm";
  } else if (value.is_object() && sweep.axis == SweepAxis::boost_form) {
    label = value.contains("form") ? get_string(value["form"], "value.form") : "boost";
  } else {
    std::ostringstream os;
    os << get_number(value, "value");
    label = os.str();
  }
  auto number = [&] { return get_number(value, "value"); };
  auto& params = c.target["params"];
  if (params.is_null()) params = json::object();
  switch (sweep.axis) {
    case SweepAxis::boost_form:
      // Either a form name or a boost object such as {"form": ..., "scale": ...}.
      if (value.is_object()) {
        c.boost = boost_from_json(value, "value", c.boost);
      } else {
        c.boost.form = boost_form_from_string(get_string(value, "value"));
      }
      break;
    case SweepAxis::boost_exponent:
      c.boost.form = BoostForm::power;
      c.boost.exponent = number();
      break;
    case SweepAxis::boost_scale:
      c.boost.scale = number();
      break;
    case SweepAxis::tau:
      c.tau = with_path("value", [&] { return tau_from_json(value); });
      break;
    case SweepAxis::k: {
      const double v = number();
      if (!(v >= 1.0) || std::floor(v) != v) field_error("value", "K must be a positive integer");
      c.k = static_cast<std::size_t>(v);
      if (c.target.value("family", "") == "vary-k" || c.target.value("family", "") == "vary-ratio") params["K"] = c.k;
      break;
    }
    case SweepAxis::delta:
      params["delta"] = number();
      break;
    case SweepAxis::ratio: {
      const std::size_t k = params.contains("K") ? params["K"].get<std::size_t>() : c.k;
      params["delta"] = solve_ratio_delta(k, number());
      break;
    }
    case SweepAxis::ess_ratio:
      c.split.ess_ratio = number();
      break;
  }
  c.name = sweep.base.name + "/" + std::string(to_string(sweep.axis)) + "=" + label;
  return c;
}

double vary_ratio_mass_ratio(std::size_t k, double delta) {
  const auto target = builtin_target("vary-ratio", {{"K", k}, {"delta", delta}});
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& cell : equal_cells(target.domain(), k)) {
    const double z = integrate_cell(target, cell, default_tolerance(1));
    lo = std::min(lo, z);
    hi = std::max(hi, z);
  }
  return hi / lo;
}

double solve_ratio_delta(std::size_t k, double ratio) {
  if (k < 2) throw ConfigError("ratio: vary-ratio needs K >= 2");
  double a = 0.0, b = std::nextafter(1.0 / static_cast<double>(k), 0.0);
  double ra = vary_ratio_mass_ratio(k, a), rb = vary_ratio_mass_ratio(k, b);
  const double r_min = std::min(ra, rb), r_max = std::max(ra, rb);
  if (!(ratio >= r_min && ratio <= r_max)) {
    std::ostringstream os;
    os << "ratio " << ratio << " is outside the attainable range [" << r_min << ", " << r_max << "] for K = " << k;
    throw ConfigError(os.str());
  }
  const bool decreasing = ra > rb;
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    const double m = 0.5 * (a + b);
    const double rm = vary_ratio_mass_ratio(k, m);
    if ((rm > ratio) == decreasing) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace ais
