#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ais/geometry.hpp"
#include "ais/targets.hpp"

namespace ais {

/// Default relative tolerance: 1e-10 in 1D, 1e-8 in 2D.
double default_tolerance(std::size_t dim);

inline constexpr int kDefaultMaxDepth = 24;

using Integrand = std::function<double(std::span<const double>)>;

/// Adaptive Simpson quadrature of `fn` over `cell` (dimension 1 or 2, nested
/// tensor form in 2D). `breaks[d]` lists jump locations along dimension d;
/// the range is split there before refinement. Stops when successive dyadic
/// refinements agree to `tol` relative to the cell integral. Throws
/// OracleError (carrying the last estimate and error bound) if a panel is
/// still unresolved after `max_depth` halvings.
double integrate_adaptive(const Integrand& fn, const Rectangle& cell,
                          std::span<const std::vector<double>> breaks, double tol,
                          int max_depth = kDefaultMaxDepth);

/// Closed-form integral of a step function over [lo, hi].
double piecewise_integral(const PiecewiseConstantSpec& spec, double lo, double hi);

/// Integral of target^power over [lo, hi] for a step function.
double piecewise_power_integral(const PiecewiseConstantSpec& spec, double lo, double hi, double power);

/// Z_a = integral of f over `cell`. Step targets use the exact sum; everything
/// else goes through integrate_adaptive with the target's discontinuities.
double integrate_cell(const TargetDensity& target, const Rectangle& cell, double tol);

/// Same integral but always by adaptive quadrature (for cross-checks).
double integrate_cell_quadrature(const TargetDensity& target, const Rectangle& cell, double tol);

/// Integral of f(x)^power over `cell`.
double integrate_cell_power(const TargetDensity& target, const Rectangle& cell, double power, double tol);

/// Ground truth for a target and a fixed partition with uniform
/// subproposals.
struct OracleTable {
  std::vector<Rectangle> partition;
  std::vector<double> z_a;  ///< unnormalized cell masses
  double z = 0.0;           ///< sum of z_a
  std::vector<double> pi_a;  ///< z_a / z
  std::optional<double> alpha;
  /// pi_a^(alpha) = integral over cell of pi^alpha g_a^(1-alpha), with pi
  /// normalized; present when alpha was requested and differs from 1.
  std::optional<std::vector<double>> alpha_masses;
};

/// Throws PreconditionError unless the cells are pairwise disjoint, lie in
/// `domain`, and their volumes add up to the domain volume.
void validate_partition(const Rectangle& domain, std::span<const Rectangle> partition);

/// Assembles the table. Cells are integrated independently; the result is
/// bit-identical for identical inputs. tol <= 0 selects default_tolerance.
OracleTable oracle_table(const TargetDensity& target, std::vector<Rectangle> partition,
                         std::optional<double> alpha = std::nullopt, double tol = 0.0);

/// Table built from known cell masses (synthetic arms, tests).
OracleTable oracle_from_masses(std::vector<Rectangle> partition, std::vector<double> z_a);

nlohmann::json to_json(const OracleTable& table);

}  // namespace ais
