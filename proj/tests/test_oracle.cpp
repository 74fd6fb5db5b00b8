#include <cmath>

#include <gtest/gtest.h>

#include "ais/errors.hpp"
#include "ais/oracle.hpp"
#include "ais/partition.hpp"

namespace ais {
namespace {

// Closed-form integral of a step target over [lo, hi], written independently
// of the library's piecewise helpers.
double step_integral(const PiecewiseConstantSpec& s, double lo, double hi) {
  double total = 0.0;
  double left = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    const double right = i < s.breakpoints.size() ? s.breakpoints[i] : std::numeric_limits<double>::infinity();
    const double a = std::max(left, lo), b = std::min(right, hi);
    if (b > a) total += s.levels[i] * (b - a);
    left = right;
  }
  return total;
}

// Banana mass on [-20,20]x[-10,10]: the x2 integral is a Gaussian CDF
// difference, the x1 integral is composite Simpson on a fine grid.
double banana_reference() {
  auto inner = [](double x1) {
    const double m = 3.0 - 0.03 * x1 * x1;
    const double cdf = 0.5 * (std::erf((10.0 - m) / std::sqrt(2.0)) - std::erf((-10.0 - m) / std::sqrt(2.0)));
    return std::exp(-0.015 * x1 * x1) * std::sqrt(2.0 * M_PI) * cdf;
  };
  const int n = 200000;
  const double h = 40.0 / n;
  double s = inner(-20.0) + inner(20.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * inner(-20.0 + i * h);
  return s * h / 3.0;
}

TEST(Oracle, UniformCellIsItsLength) {
  const auto t = builtin_target("uniform");
  EXPECT_NEAR(integrate_cell(t, Rectangle::interval(0.2, 0.5), 1e-10), 0.3, 1e-15);
  EXPECT_NEAR(integrate_cell_quadrature(t, Rectangle::interval(0.2, 0.5), 1e-10), 0.3, 1e-12);
}

TEST(Oracle, ExpFlatCells) {
  const auto t = builtin_target("exp-flat");
  const double tail = -0.1 * std::expm1(-7.5);  // integral of exp(10(x-1)) over (0.25, 1)
  EXPECT_NEAR(tail, 0.09994469, 5e-9);
  EXPECT_NEAR(integrate_cell(t, Rectangle::interval(0.25, 1.0), 1e-10), tail, 1e-10 * tail);
  EXPECT_NEAR(integrate_cell(t, Rectangle::interval(0.0, 1.0), 1e-10), 0.125 + tail, 1e-10);
  EXPECT_NEAR(integrate_cell(t, Rectangle::interval(0.0, 0.25), 1e-10), 0.125, 1e-12);
}

TEST(Oracle, ExpFlatTable) {
  const auto t = builtin_target("exp-flat");
  const auto table = oracle_table(t, {Rectangle::interval(0.0, 0.25), Rectangle::interval(0.25, 1.0)});
  const double tail = -0.1 * std::expm1(-7.5);
  const double z = 0.125 + tail;
  EXPECT_NEAR(table.z, z, 1e-10);
  EXPECT_NEAR(table.pi_a[0], 0.125 / z, 1e-10);
  EXPECT_NEAR(table.pi_a[1], tail / z, 1e-10);
  EXPECT_NEAR(table.pi_a[0], 0.5557, 5e-5);
  EXPECT_NEAR(table.pi_a[0] + table.pi_a[1], 1.0, 1e-12);
  EXPECT_FALSE(table.alpha_masses.has_value());
}

TEST(Oracle, UniformTableIsSymmetric) {
  const auto t = builtin_target("uniform");
  const auto table = oracle_table(t, equal_cells(t.domain(), 4), 2.0);
  for (double p : table.pi_a) EXPECT_NEAR(p, 0.25, 1e-14);
  ASSERT_TRUE(table.alpha_masses.has_value());
  for (double m : *table.alpha_masses) EXPECT_NEAR(m, (*table.alpha_masses)[0], 1e-14);
}

TEST(Oracle, AlphaMassesOfAStepTarget) {
  // pi^(alpha)_a = Z^-alpha vol^(alpha-1) integral f^alpha.
  const auto t = builtin_target("step-1d");
  const auto table = oracle_table(t, equal_cells(t.domain(), 2), 2.0);
  const double z = 1.5;
  EXPECT_NEAR((*table.alpha_masses)[0], 4.0 * 0.5 * 0.5 / (z * z), 1e-12);
  EXPECT_NEAR((*table.alpha_masses)[1], 1.0 * 0.5 * 0.5 / (z * z), 1e-12);
}

TEST(Oracle, QuadratureMatchesClosedFormOnStepTargets) {
  const std::vector<std::pair<std::string, nlohmann::json>> targets = {
      {"step-1d", nlohmann::json::object()},
      {"vary-tau", {{"delta", 3.0}}},
      {"vary-k", {{"K", 20}}},
      {"vary-ratio", {{"K", 10}, {"delta", 0.037}}},
      {"per-arm-tau", nlohmann::json::object()}};
  for (const auto& [name, params] : targets) {
    const auto t = builtin_target(name, params);
    for (std::size_t k : {1u, 3u, 7u, 10u}) {
      for (const auto& cell : equal_cells(t.domain(), k)) {
        const double exact = step_integral(*t.pieces(), cell.lo(0), cell.hi(0));
        const double quad = integrate_cell_quadrature(t, cell, 1e-10);
        ASSERT_LT(std::abs(quad - exact), 1e-8 * exact) << name << " K=" << k;
        ASSERT_NEAR(integrate_cell(t, cell, 1e-10), exact, 1e-12 * std::max(1.0, exact));
      }
    }
  }
}

TEST(Oracle, Additivity) {
  const auto t = builtin_target("exp-flat");
  const double tol = 1e-10;
  const double z = integrate_cell(t, t.domain(), tol);
  for (auto [lo, hi] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {0.1, 0.4}, {0.25, 0.75}, {0.6, 0.95}}) {
    const auto cell = Rectangle::interval(lo, hi);
    auto [a, b] = cell.halve(0);
    const double whole = integrate_cell(t, cell, tol);
    EXPECT_NEAR(whole, integrate_cell(t, a, tol) + integrate_cell(t, b, tol), 2.0 * tol * z);
  }
}

TEST(Oracle, BananaAgainstSemiAnalyticReference) {
  const auto t = builtin_target("banana");
  const double z = integrate_cell(t, t.domain(), 1e-8);
  EXPECT_NEAR(z, banana_reference(), 1e-7 * z);
  auto [left, right] = t.domain().halve(0);
  EXPECT_NEAR(integrate_cell(t, left, 1e-8), 0.5 * z, 1e-7 * z);
}

TEST(Oracle, Deterministic) {
  const auto t = builtin_target("banana");
  const auto cells = equal_cells(t.domain(), 3);
  const auto a = oracle_table(t, cells);
  const auto b = oracle_table(t, cells);
  EXPECT_EQ(a.z_a, b.z_a);
  EXPECT_EQ(a.pi_a, b.pi_a);
}

TEST(Oracle, PartitionMustTileDomain) {
  const auto t = builtin_target("uniform");
  EXPECT_THROW(oracle_table(t, {Rectangle::interval(0.0, 0.5)}), PreconditionError);
  EXPECT_THROW(oracle_table(t, {Rectangle::interval(0.0, 0.6), Rectangle::interval(0.4, 1.0)}),
               PreconditionError);
  EXPECT_THROW(oracle_table(t, {Rectangle::interval(0.0, 0.5), Rectangle::interval(0.5, 1.5)}),
               PreconditionError);
}

TEST(Oracle, NonConvergenceCarriesEstimate) {
  const Integrand wild = [](std::span<const double> x) { return std::sin(1.0 / (x[0] + 1e-9)); };
  try {
    integrate_adaptive(wild, Rectangle::interval(0.0, 1.0), {}, 1e-12, 3);
    FAIL() << "expected OracleError";
  } catch (const OracleError& e) {
    EXPECT_TRUE(std::isfinite(e.estimate()));
    EXPECT_GT(e.error_bound(), 0.0);
  }
}

TEST(Oracle, JsonFields) {
  const auto t = builtin_target("uniform");
  const auto j = to_json(oracle_table(t, equal_cells(t.domain(), 2)));
  EXPECT_DOUBLE_EQ(j.at("Z").get<double>(), 1.0);
  EXPECT_EQ(j.at("Z_a").size(), 2u);
  EXPECT_EQ(j.at("pi_a").size(), 2u);
  EXPECT_TRUE(j.at("alpha_masses").is_null());
}

}  // namespace
}  // namespace ais
