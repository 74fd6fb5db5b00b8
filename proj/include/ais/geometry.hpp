#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ais {

using Point = std::vector<double>;

class Rng;

/// Axis-aligned box. Cells are treated as half-open [lo, hi) in every
/// dimension; the cell touching the upper domain boundary is closed there.
class Rectangle {
 public:
  Rectangle() = default;
  Rectangle(std::vector<double> lo, std::vector<double> hi);

  /// Convenience constructor for an interval.
  static Rectangle interval(double lo, double hi);

  std::size_t dim() const noexcept { return lo_.size(); }
  const std::vector<double>& lo() const noexcept { return lo_; }
  const std::vector<double>& hi() const noexcept { return hi_; }
  double lo(std::size_t d) const { return lo_[d]; }
  double hi(std::size_t d) const { return hi_[d]; }
  double width(std::size_t d) const { return hi_[d] - lo_[d]; }
  double volume() const noexcept;

  /// Closed-box membership, used for domain checks.
  bool contains_closed(std::span<const double> x) const;
  /// True if `inner` lies within this box (closed comparison).
  bool encloses(const Rectangle& inner) const;

  /// Equal-volume halves along dimension `d`: [lo, mid) and [mid, hi).
  std::pair<Rectangle, Rectangle> halve(std::size_t d) const;
  double midpoint(std::size_t d) const { return 0.5 * (lo_[d] + hi_[d]); }

  /// Volume of the intersection with another box (0 when disjoint).
  double overlap_volume(const Rectangle& other) const;

  /// Uniform draw; the result is strictly below `hi` in every dimension.
  Point sample_uniform(Rng& rng) const;

  bool operator==(const Rectangle&) const = default;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

}  // namespace ais
