#include "ais/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ais {

double kl_regret(std::span<const double> pi, std::span<const double> q) {
  if (pi.size() != q.size()) throw PreconditionError("kl_regret: vectors differ in length");
  double total = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (pi[a] <= 0.0) continue;
    if (q[a] <= 0.0) return std::numeric_limits<double>::infinity();
    total += pi[a] * std::log(pi[a] / q[a]);
  }
  return total;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw PreconditionError("total_variation: vectors differ in length");
  double total = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) total += std::abs(p[a] - q[a]);
  return 0.5 * total;
}

double effective_sample_size(std::span<const double> weights) {
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    s += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

IsEstimates is_estimates(std::span<const ProposalDraw> draws, std::span<const TestFunction> functions) {
  if (draws.empty()) throw PreconditionError("is_estimates: no draws");
  std::vector<double> w(draws.size());
  double sum_w = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (!(draws[i].q_density > 0.0)) throw PreconditionError("is_estimates: proposal density must be positive");
    w[i] = draws[i].f_val / draws[i].q_density;
    if (!std::isfinite(w[i])) throw PreconditionError("is_estimates: non-finite weight");
    sum_w += w[i];
  }
  IsEstimates out;
  out.z_hat = sum_w / static_cast<double>(draws.size());
  if (!functions.empty() && !(sum_w > 0.0)) {
    throw EstimatorError("is_estimates: total weight is zero, self-normalized estimate undefined");
  }
  for (const auto& fn : functions) {
    double acc = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) acc += w[i] * fn.fn(draws[i].x);
    out.expect[fn.name] = acc / sum_w;
  }
  return out;
}

double within_cell_kl(const TargetDensity& target, const Rectangle& cell, double z, double tol) {
  if (!(z > 0.0)) throw PreconditionError("within_cell_kl: z must be positive");
  if (tol <= 0.0) tol = default_tolerance(target.dim());
  const double volume = cell.volume();
  if (const auto& pieces = target.pieces()) {
    // Exact: sum over the steps inside the cell.
    double total = 0.0;
    double left = cell.lo(0);
    const double hi = cell.hi(0);
    for (std::size_t i = 0; i < pieces->levels.size() && left < hi; ++i) {
      const double right = i < pieces->breakpoints.size() ? std::min(pieces->breakpoints[i], hi) : hi;
      if (right > left) {
        const double p = pieces->levels[i] / z;
        if (p > 0.0) total += p * std::log(p * volume) * (right - left);
        left = right;
      }
    }
    return total;
  }
  std::vector<std::vector<double>> breaks;
  for (std::size_t d = 0; d < target.dim(); ++d) {
    const auto b = target.discontinuities(d);
    breaks.emplace_back(b.begin(), b.end());
  }
  // The integrand changes sign; the quadrature tolerance is relative to the
  // integral of its absolute value.
  return integrate_adaptive(
      [&](std::span<const double> x) {
        const double p = target(x) / z;
        return p > 0.0 ? p * std::log(p * volume) : 0.0;
      },
      cell, breaks, tol);
}

double full_kl(const TargetDensity& target, std::span<const Rectangle> partition, std::span<const double> q,
               const OracleTable& oracle, double tol) {
  if (partition.size() != q.size() || oracle.pi_a.size() != q.size()) {
    throw PreconditionError("full_kl: partition, proposal, and oracle sizes differ");
  }
  double total = 0.0;
  for (std::size_t a = 0; a < partition.size(); ++a) {
    if (!(oracle.pi_a[a] > 0.0)) continue;
    if (!(q[a] > 0.0)) return std::numeric_limits<double>::infinity();
    total += within_cell_kl(target, partition[a], oracle.z, tol) - oracle.pi_a[a] * std::log(q[a]);
  }
  return total;
}

}  // namespace ais
