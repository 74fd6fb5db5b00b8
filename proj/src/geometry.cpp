#include "ais/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ais/errors.hpp"
#include "ais/rng.hpp"

namespace ais {

Rectangle::Rectangle(std::vector<double> lo, std::vector<double> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty() || lo_.size() != hi_.size()) {
    throw ConfigError("rectangle: lo and hi must be nonempty and of equal length");
  }
  for (std::size_t d = 0; d < lo_.size(); ++d) {
    if (!std::isfinite(lo_[d]) || !std::isfinite(hi_[d]) || !(lo_[d] < hi_[d])) {
      throw ConfigError("rectangle: need finite lo < hi in dimension " + std::to_string(d));
    }
  }
}

Rectangle Rectangle::interval(double lo, double hi) { return Rectangle({lo}, {hi}); }

double Rectangle::volume() const noexcept {
  double v = 1.0;
  for (std::size_t d = 0; d < lo_.size(); ++d) v *= hi_[d] - lo_[d];
  return v;
}

bool Rectangle::contains_closed(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t d = 0; d < dim(); ++d) {
    if (x[d] < lo_[d] || x[d] > hi_[d]) return false;
  }
  return true;
}

bool Rectangle::encloses(const Rectangle& inner) const {
  if (inner.dim() != dim()) return false;
  for (std::size_t d = 0; d < dim(); ++d) {
    if (inner.lo_[d] < lo_[d] || inner.hi_[d] > hi_[d]) return false;
  }
  return true;
}

std::pair<Rectangle, Rectangle> Rectangle::halve(std::size_t d) const {
  if (d >= dim()) throw PreconditionError("rectangle: split dimension out of range");
  const double mid = midpoint(d);
  Rectangle left = *this;
  Rectangle right = *this;
  left.hi_[d] = mid;
  right.lo_[d] = mid;
  return {std::move(left), std::move(right)};
}

double Rectangle::overlap_volume(const Rectangle& other) const {
  if (other.dim() != dim()) return 0.0;
  double v = 1.0;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double w = std::min(hi_[d], other.hi_[d]) - std::max(lo_[d], other.lo_[d]);
    if (w <= 0.0) return 0.0;
    v *= w;
  }
  return v;
}

Point Rectangle::sample_uniform(Rng& rng) const {
  Point x(dim());
  for (std::size_t d = 0; d < dim(); ++d) {
    double v = lo_[d] + rng.uniform() * (hi_[d] - lo_[d]);
    if (v >= hi_[d]) v = std::nextafter(hi_[d], lo_[d]);
    x[d] = v;
  }
  return x;
}

}  // namespace ais
