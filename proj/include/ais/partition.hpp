#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "ais/geometry.hpp"
#include "ais/targets.hpp"

namespace ais {

/// One cell of a fixed partition with its uniform subproposal g_a and the
/// sub-Gaussian variance factor tau_a of its localized weights.
struct Arm {
  Rectangle cell;
  double g_density = 1.0;  ///< 1 / volume(cell)
  double tau = 1.0;
};

Arm make_arm(Rectangle cell, double tau);

/// Running statistics of one arm. Sums use Neumaier compensation.
class ArmState {
 public:
  std::uint64_t n() const noexcept { return n_; }
  double sum_y() const noexcept { return sum_y_ + comp_y_; }
  double sum_y2() const noexcept { return sum_y2_ + comp_y2_; }
  /// Mean localized weight. Requires n() >= 1.
  double z_hat() const;

  /// Adds one localized weight; throws SamplingError if y is negative or not
  /// finite.
  void record(double y);

 private:
  std::uint64_t n_ = 0;
  double sum_y_ = 0.0, comp_y_ = 0.0;
  double sum_y2_ = 0.0, comp_y2_ = 0.0;
};

inline constexpr std::size_t kNoArm = std::numeric_limits<std::size_t>::max();

/// Functional form of ArmState::record. When `arm` is given, errors name the
/// arm and iteration.
ArmState record_pull(ArmState state, double y, std::size_t arm = kNoArm, std::uint64_t t = 0);

/// A draw together with the stored density value, so weights can be
/// recomputed for a different subproposal without re-evaluating f.
struct WeightedSample {
  Point x;
  double f_val = 0.0;
  double y = 0.0;  ///< f_val / g_density of the owning cell
  std::size_t arm = 0;
  std::uint64_t t = 0;
};

/// How tau_a is assigned to the cells of a partition.
struct TauShared {
  double value;
};
struct TauPerArm {
  std::vector<double> values;
};
/// tau_a = (M / 2) * volume(cell), M = target.sup_bound.
struct TauAuto {};
using TauSpec = std::variant<TauShared, TauPerArm, TauAuto>;

/// k congruent cells obtained by cutting `domain` along dimension 0.
std::vector<Rectangle> equal_cells(const Rectangle& domain, std::size_t k);

/// Equal partition with tau assigned per `tau_spec`. `sup_bound` is required
/// by TauAuto (ConfigError otherwise).
std::vector<Arm> make_equal_partition(const Rectangle& domain, std::size_t k, const TauSpec& tau_spec,
                                      std::optional<double> sup_bound = std::nullopt);

/// Index of the cell of an equal partition containing x (half-open cells,
/// last cell closed).
std::size_t equal_cell_index(const Rectangle& domain, std::size_t k, std::span<const double> x);

}  // namespace ais
