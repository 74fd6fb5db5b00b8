#include "ais/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ais/errors.hpp"

namespace ais {

namespace {

void neumaier_add(double& sum, double& comp, double v) {
  const double t = sum + v;
  if (std::abs(sum) >= std::abs(v)) {
    comp += (sum - t) + v;
  } else {
    comp += (v - t) + sum;
  }
  sum = t;
}

}  // namespace

Arm make_arm(Rectangle cell, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("arm: tau must be positive and finite");
  Arm arm;
  arm.g_density = 1.0 / cell.volume();
  arm.cell = std::move(cell);
  arm.tau = tau;
  return arm;
}

double ArmState::z_hat() const {
  if (n_ == 0) throw PreconditionError("arm state: z_hat requested before the first pull");
  return sum_y() / static_cast<double>(n_);
}

void ArmState::record(double y) {
  if (!std::isfinite(y) || y < 0.0) {
    throw SamplingError("arm state: localized weight must be finite and >= 0, got " + std::to_string(y));
  }
  ++n_;
  neumaier_add(sum_y_, comp_y_, y);
  neumaier_add(sum_y2_, comp_y2_, y * y);
}

ArmState record_pull(ArmState state, double y, std::size_t arm, std::uint64_t t) {
  try {
    state.record(y);
  } catch (const SamplingError& e) {
    if (arm == kNoArm) throw;
    throw SamplingError(std::string(e.what()) + " (arm " + std::to_string(arm) + ", iteration " +
                        std::to_string(t) + ")");
  }
  return state;
}

std::vector<Rectangle> equal_cells(const Rectangle& domain, std::size_t k) {
  if (k == 0) throw ConfigError("partition: k must be at least 1");
  std::vector<Rectangle> cells;
  cells.reserve(k);
  const double lo = domain.lo(0);
  const double width = domain.width(0);
  for (std::size_t a = 0; a < k; ++a) {
    auto cell_lo = domain.lo();
    auto cell_hi = domain.hi();
    cell_lo[0] = lo + width * static_cast<double>(a) / static_cast<double>(k);
    cell_hi[0] = a + 1 == k ? domain.hi(0) : lo + width * static_cast<double>(a + 1) / static_cast<double>(k);
    cells.emplace_back(std::move(cell_lo), std::move(cell_hi));
  }
  return cells;
}

std::size_t equal_cell_index(const Rectangle& domain, std::size_t k, std::span<const double> x) {
  const double lo = domain.lo(0);
  const double width = domain.width(0);
  const auto edge = [&](std::size_t a) { return lo + width * static_cast<double>(a) / static_cast<double>(k); };
  const double u = (x[0] - lo) / width * static_cast<double>(k);
  std::size_t idx = u > 0.0 ? static_cast<std::size_t>(std::min(std::floor(u), static_cast<double>(k - 1))) : 0;
  // Edges are computed exactly as in equal_cells; fix up rounding of u.
  while (idx > 0 && x[0] < edge(idx)) --idx;
  while (idx + 1 < k && x[0] >= edge(idx + 1)) ++idx;
  return idx;
}

std::vector<Arm> make_equal_partition(const Rectangle& domain, std::size_t k, const TauSpec& tau_spec,
                                      std::optional<double> sup_bound) {
  auto cells = equal_cells(domain, k);
  std::vector<Arm> arms;
  arms.reserve(k);
  for (std::size_t a = 0; a < k; ++a) {
    double tau = 0.0;
    if (const auto* shared = std::get_if<TauShared>(&tau_spec)) {
      tau = shared->value;
    } else if (const auto* per_arm = std::get_if<TauPerArm>(&tau_spec)) {
      if (per_arm->values.size() != k) {
        throw ConfigError("partition: per-arm tau needs " + std::to_string(k) + " values, got " +
                          std::to_string(per_arm->values.size()));
      }
      tau = per_arm->values[a];
    } else {
      if (!sup_bound) throw ConfigError("partition: automatic tau requires a target with a known sup_bound");
      tau = 0.5 * *sup_bound * cells[a].volume();
    }
    arms.push_back(make_arm(std::move(cells[a]), tau));
  }
  return arms;
}

}  // namespace ais
