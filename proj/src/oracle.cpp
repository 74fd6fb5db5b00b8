#include "ais/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ais/errors.hpp"

namespace ais {

namespace {

constexpr int kInitialPanels = 16;

using Fn1 = std::function<double(double)>;

struct Simpson1D {
  const Fn1& fn;
  int max_depth;
  double unresolved = 0.0;  // accumulated error bound of panels that hit max depth
  bool failed = false;

  static double rule(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }

  double refine(double a, double b, double fa, double fm, double fb, double whole, double eps,
                int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = fn(lm);
    const double frm = fn(rm);
    const double left = rule(a, m, fa, flm, fm);
    const double right = rule(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    if (depth >= max_depth) {
      failed = true;
      unresolved += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return refine(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
           refine(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
  }
};

std::vector<double> segment_edges(double lo, double hi, std::span<const double> breaks) {
  std::vector<double> edges{lo};
  for (double b : breaks) {
    if (b > lo && b < hi) edges.push_back(b);
  }
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Relative-tolerance adaptive Simpson on [lo, hi] with jumps at `breaks`.
double integrate_1d(const Fn1& fn, double lo, double hi, std::span<const double> breaks, double tol,
                    int max_depth) {
  const auto edges = segment_edges(lo, hi, breaks);

  // Coarse pass: fixed panels give the scale used to turn `tol` into an
  // absolute per-panel budget, and seed the recursion.
  struct Panel {
    double a, b, fa, fm, fb, whole;
  };
  std::vector<Panel> panels;
  double scale = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double a0 = edges[s];
    const double h = (edges[s + 1] - a0) / kInitialPanels;
    // Segment ends are evaluated one ulp inside so one-sided limits are used
    // at jumps, including jumps sitting exactly on the cell boundary.
    const double inside_lo = std::nextafter(a0, edges[s + 1]);
    const double inside_hi = std::nextafter(edges[s + 1], a0);
    double fa = fn(inside_lo);
    for (int p = 0; p < kInitialPanels; ++p) {
      const double a = a0 + p * h;
      const double b = p + 1 == kInitialPanels ? edges[s + 1] : a0 + (p + 1) * h;
      const double fm = fn(0.5 * (a + b));
      const double fb = p + 1 == kInitialPanels ? fn(inside_hi) : fn(b);
      const double whole = Simpson1D::rule(a, b, fa, fm, fb);
      panels.push_back({a, b, fa, fm, fb, whole});
      scale += std::abs(whole);
      fa = fb;
    }
  }
  const double abs_tol = tol * std::max(scale, std::numeric_limits<double>::min());

  Simpson1D simpson{fn, max_depth};
  double total = 0.0;
  const double width = hi - lo;
  for (const auto& p : panels) {
    const double eps = abs_tol * (p.b - p.a) / width;
    total += simpson.refine(p.a, p.b, p.fa, p.fm, p.fb, p.whole, eps, 0);
  }
  if (simpson.failed) {
    std::ostringstream msg;
    msg << "quadrature did not converge within " << max_depth << " refinement levels on [" << lo
        << ", " << hi << "]: estimate " << total << ", error bound " << simpson.unresolved;
    throw OracleError(msg.str(), total, simpson.unresolved);
  }
  return total;
}

double integrate_nd(const Integrand& fn, const Rectangle& cell,
                    std::span<const std::vector<double>> breaks, double tol, int max_depth,
                    std::size_t d, Point& x) {
  const std::span<const double> dim_breaks =
      d < breaks.size() ? std::span<const double>(breaks[d]) : std::span<const double>();
  if (d + 1 == cell.dim()) {
    const Fn1 inner = [&](double v) {
      x[d] = v;
      return fn(x);
    };
    return integrate_1d(inner, cell.lo(d), cell.hi(d), dim_breaks, tol, max_depth);
  }
  // Inner integrals are resolved an order of magnitude tighter so their
  // error does not masquerade as curvature in the outer rule.
  const Fn1 outer = [&](double v) {
    x[d] = v;
    return integrate_nd(fn, cell, breaks, 0.1 * tol, max_depth, d + 1, x);
  };
  return integrate_1d(outer, cell.lo(d), cell.hi(d), dim_breaks, tol, max_depth);
}

std::vector<std::vector<double>> target_breaks(const TargetDensity& target) {
  std::vector<std::vector<double>> breaks;
  for (std::size_t d = 0; d < target.dim(); ++d) {
    const auto b = target.discontinuities(d);
    breaks.emplace_back(b.begin(), b.end());
  }
  return breaks;
}

void check_cell(const TargetDensity& target, const Rectangle& cell, double tol) {
  if (cell.dim() != target.dim()) throw PreconditionError("oracle: cell dimension mismatch");
  if (cell.dim() > 2) throw PreconditionError("oracle: quadrature supports at most two dimensions");
  if (!target.domain().encloses(cell)) throw PreconditionError("oracle: cell outside target domain");
  if (!(tol > 0.0)) throw PreconditionError("oracle: tolerance must be positive");
}

}  // namespace

double default_tolerance(std::size_t dim) { return dim <= 1 ? 1e-10 : 1e-8; }

double integrate_adaptive(const Integrand& fn, const Rectangle& cell,
                          std::span<const std::vector<double>> breaks, double tol, int max_depth) {
  if (cell.dim() == 0 || cell.dim() > 2) {
    throw PreconditionError("oracle: quadrature supports one or two dimensions");
  }
  if (!(tol > 0.0)) throw PreconditionError("oracle: tolerance must be positive");
  Point x(cell.dim());
  return integrate_nd(fn, cell, breaks, tol, max_depth, 0, x);
}

double piecewise_integral(const PiecewiseConstantSpec& spec, double lo, double hi) {
  return piecewise_power_integral(spec, lo, hi, 1.0);
}

double piecewise_power_integral(const PiecewiseConstantSpec& spec, double lo, double hi, double power) {
  double total = 0.0;
  double left = lo;
  for (std::size_t i = 0; i < spec.levels.size() && left < hi; ++i) {
    const double right = i < spec.breakpoints.size() ? std::min(spec.breakpoints[i], hi) : hi;
    if (right > left) {
      const double level = spec.levels[i];
      const double value = power == 1.0 ? level : (level == 0.0 ? 0.0 : std::pow(level, power));
      total += value * (right - left);
      left = right;
    }
  }
  return total;
}

double integrate_cell(const TargetDensity& target, const Rectangle& cell, double tol) {
  check_cell(target, cell, tol);
  if (const auto& pieces = target.pieces()) {
    return piecewise_integral(*pieces, cell.lo(0), cell.hi(0));
  }
  return integrate_cell_quadrature(target, cell, tol);
}

double integrate_cell_quadrature(const TargetDensity& target, const Rectangle& cell, double tol) {
  check_cell(target, cell, tol);
  const auto breaks = target_breaks(target);
  return integrate_adaptive([&](std::span<const double> x) { return target(x); }, cell, breaks, tol);
}

double integrate_cell_power(const TargetDensity& target, const Rectangle& cell, double power, double tol) {
  check_cell(target, cell, tol);
  if (const auto& pieces = target.pieces()) {
    return piecewise_power_integral(*pieces, cell.lo(0), cell.hi(0), power);
  }
  const auto breaks = target_breaks(target);
  return integrate_adaptive(
      [&](std::span<const double> x) {
        const double f = target(x);
        return f == 0.0 ? 0.0 : std::pow(f, power);
      },
      cell, breaks, tol);
}

void validate_partition(const Rectangle& domain, std::span<const Rectangle> partition) {
  if (partition.empty()) throw PreconditionError("partition: no cells");
  double volume = 0.0;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (!domain.encloses(partition[i])) {
      throw PreconditionError("partition: cell " + std::to_string(i) + " lies outside the domain");
    }
    volume += partition[i].volume();
    for (std::size_t j = 0; j < i; ++j) {
      if (partition[i].overlap_volume(partition[j]) > 1e-12 * domain.volume()) {
        throw PreconditionError("partition: cells " + std::to_string(j) + " and " +
                                std::to_string(i) + " overlap");
      }
    }
  }
  if (std::abs(volume - domain.volume()) > 1e-9 * domain.volume()) {
    throw PreconditionError("partition: cells do not cover the domain");
  }
}

OracleTable oracle_from_masses(std::vector<Rectangle> partition, std::vector<double> z_a) {
  if (partition.size() != z_a.size()) throw PreconditionError("oracle: mass/partition size mismatch");
  OracleTable table;
  table.partition = std::move(partition);
  table.z_a = std::move(z_a);
  for (double z : table.z_a) {
    if (!(z >= 0.0)) throw PreconditionError("oracle: negative cell mass");
    table.z += z;
  }
  if (!(table.z > 0.0)) throw PreconditionError("oracle: target has zero total mass on the partition");
  table.pi_a.reserve(table.z_a.size());
  for (double z : table.z_a) table.pi_a.push_back(z / table.z);
  return table;
}

OracleTable oracle_table(const TargetDensity& target, std::vector<Rectangle> partition,
                         std::optional<double> alpha, double tol) {
  validate_partition(target.domain(), partition);
  if (tol <= 0.0) tol = default_tolerance(target.dim());
  std::vector<double> z_a;
  z_a.reserve(partition.size());
  for (const auto& cell : partition) z_a.push_back(integrate_cell(target, cell, tol));
  OracleTable table = oracle_from_masses(std::move(partition), std::move(z_a));
  if (alpha) {
    if (!(*alpha > 0.0 && *alpha <= 2.0)) throw PreconditionError("oracle: alpha must lie in (0, 2]");
    table.alpha = *alpha;
    if (*alpha != 1.0) {
      // pi^a g^(1-a) integrated over the cell = Z^-a vol^(a-1) * int f^a.
      std::vector<double> masses;
      masses.reserve(table.partition.size());
      const double z_scale = std::pow(table.z, -*alpha);
      for (const auto& cell : table.partition) {
        const double fa = integrate_cell_power(target, cell, *alpha, tol);
        masses.push_back(z_scale * std::pow(cell.volume(), *alpha - 1.0) * fa);
      }
      table.alpha_masses = std::move(masses);
    }
  }
  return table;
}

nlohmann::json to_json(const OracleTable& table) {
  nlohmann::json out;
  out["Z"] = table.z;
  out["Z_a"] = table.z_a;
  out["pi_a"] = table.pi_a;
  if (table.alpha) out["alpha"] = *table.alpha;
  out["alpha_masses"] = table.alpha_masses ? nlohmann::json(*table.alpha_masses) : nlohmann::json(nullptr);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : table.partition) cells.push_back({{"lo", c.lo()}, {"hi", c.hi()}});
  out["partition"] = std::move(cells);
  return out;
}

}  // namespace ais
