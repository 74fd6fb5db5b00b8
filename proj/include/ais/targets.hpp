#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ais/geometry.hpp"

namespace ais {

/// Step function on an interval. Piece i covers (breakpoints[i-1],
/// breakpoints[i]]; a point sitting exactly on a breakpoint takes the level
/// of the piece to its left.
struct PiecewiseConstantSpec {
  std::vector<double> breakpoints;
  std::vector<double> levels;

  /// Throws ConfigError unless breakpoints are strictly increasing and
  /// strictly inside `domain`, and levels are nonnegative with one more
  /// entry than breakpoints.
  void validate(const Rectangle& domain) const;

  double level_at(double x) const;

  bool operator==(const PiecewiseConstantSpec&) const = default;
};

/// Pointwise-evaluable unnormalized density on a rectangular domain.
/// Evaluation is pure and may be called concurrently.
class TargetDensity {
 public:
  using Eval = std::function<double(std::span<const double>)>;

  TargetDensity(std::string family, Rectangle domain, Eval eval,
                std::optional<double> sup_bound = std::nullopt);

  double operator()(std::span<const double> x) const { return eval_(x); }

  const std::string& family() const noexcept { return family_; }
  std::size_t dim() const noexcept { return domain_.dim(); }
  const Rectangle& domain() const noexcept { return domain_; }
  std::optional<double> sup_bound() const noexcept { return sup_bound_; }

  /// Exact step representation, present for 1D piecewise-constant targets.
  const std::optional<PiecewiseConstantSpec>& pieces() const noexcept { return pieces_; }
  /// Known jump locations along dimension d; quadrature splits there.
  std::span<const double> discontinuities(std::size_t d) const;

  /// Non-fatal notes raised while building the target (e.g. a parameter
  /// outside the range exercised in the experiments).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  TargetDensity& with_pieces(PiecewiseConstantSpec pieces);
  TargetDensity& with_discontinuities(std::size_t d, std::vector<double> points);
  TargetDensity& with_warning(std::string message);

 private:
  std::string family_;
  Rectangle domain_;
  Eval eval_;
  std::optional<double> sup_bound_;
  std::optional<PiecewiseConstantSpec> pieces_;
  std::vector<std::vector<double>> discontinuities_;
  std::vector<std::string> warnings_;
};

/// Names accepted by builtin_target.
std::span<const std::string_view> builtin_target_names();

/// Builds one of the experiment targets:
///   step-1d      {high=2, low=1, edge=0.5}
///   uniform      {level=1, lo=0, hi=1}
///   vary-tau     {delta}          (10+d) on (0,.05], (10-d) on (.05,.1], 0.1 after
///   vary-k       {K}              3K on (0,.2], K after
///   vary-ratio   {K, delta}       literal fractional-part formula, see targets.cpp
///   per-arm-tau  {}               20 / 3 / 9 / 1 steps
///   exp-flat     {}               exp(10(x-1)) on (.25,1), 0.5 on (0,.25]
///   banana       {lo=[-20,-10], hi=[20,10]}
TargetDensity builtin_target(std::string_view name, const nlohmann::json& params = nlohmann::json::object());

/// Step target from an explicit specification; sup_bound = max(levels).
TargetDensity piecewise_target(const PiecewiseConstantSpec& spec, const Rectangle& domain);

/// Target from its JSON form:
///   {"family": "...", "params": {...}}
///   {"family": "piecewise", "breakpoints": [...], "levels": [...],
///    "domain": {"lo": [...], "hi": [...]}}
TargetDensity target_from_json(const nlohmann::json& spec);

}  // namespace ais
