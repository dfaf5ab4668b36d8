#include "flexmh/piecewise_linear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flexmh {

namespace {

void validate_samples(std::span<const PLPoint> pts) {
  if (pts.size() < 2) {
    throw std::invalid_argument("piecewise linear: need at least 2 points");
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y)) {
      throw std::invalid_argument("piecewise linear: non-finite coordinate");
    }
    if (i > 0 && !(pts[i].x > pts[i - 1].x)) {
      throw std::invalid_argument(
          "piecewise linear: x coordinates must be strictly increasing");
    }
  }
}

// Cross product of (a->b) x (a->c); positive when c lies above line a-b.
inline double cross(const PLPoint& a, const PLPoint& b, const PLPoint& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

}  // namespace

PiecewiseLinearFn::PiecewiseLinearFn(std::vector<PLPoint> breakpoints)
    : pts_(std::move(breakpoints)) {
  validate_samples(pts_);
  const double span = pts_.back().x - pts_.front().x;
  domain_slack_ = 1e-9 * std::max(1.0, std::abs(span));
}

double PiecewiseLinearFn::operator()(double x) const {
  if (x < pts_.front().x || x > pts_.back().x) {
    if (x >= pts_.front().x - domain_slack_ && x <= pts_.back().x + domain_slack_) {
      x = std::clamp(x, pts_.front().x, pts_.back().x);
    } else {
      throw std::domain_error("piecewise linear: evaluation outside domain");
    }
  }
  const std::size_t seg = segment_containing(x);
  const PLPoint& a = pts_[seg];
  const PLPoint& b = pts_[seg + 1];
  const double t = (x - a.x) / (b.x - a.x);
  return a.y + t * (b.y - a.y);
}

double PiecewiseLinearFn::y_min() const {
  double m = pts_.front().y;
  for (const auto& p : pts_) m = std::min(m, p.y);
  return m;
}

double PiecewiseLinearFn::y_max() const {
  double m = pts_.front().y;
  for (const auto& p : pts_) m = std::max(m, p.y);
  return m;
}

double PiecewiseLinearFn::segment_slope(std::size_t seg) const {
  if (seg + 1 >= pts_.size()) {
    throw std::out_of_range("piecewise linear: segment index");
  }
  return (pts_[seg + 1].y - pts_[seg].y) / (pts_[seg + 1].x - pts_[seg].x);
}

std::size_t PiecewiseLinearFn::segment_containing(double x) const {
  x = std::clamp(x, pts_.front().x, pts_.back().x);
  auto it = std::upper_bound(pts_.begin(), pts_.end(), x,
                             [](double v, const PLPoint& p) { return v < p.x; });
  std::size_t idx = static_cast<std::size_t>(it - pts_.begin());
  if (idx == 0) return 0;
  if (idx >= pts_.size()) return pts_.size() - 2;
  return idx - 1;
}

double PiecewiseLinearFn::slope_at(double x) const {
  if (x >= pts_.back().x) return segment_slope(pts_.size() - 2);
  return segment_slope(segment_containing(x));
}

bool PiecewiseLinearFn::strictly_increasing_values() const {
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    if (!(pts_[i].y > pts_[i - 1].y)) return false;
  }
  return true;
}

PiecewiseLinearFn PiecewiseLinearFn::inverse() const {
  if (!strictly_increasing_values()) {
    throw std::logic_error("piecewise linear: inverse needs strictly increasing values");
  }
  std::vector<PLPoint> inv(pts_.size());
  for (std::size_t i = 0; i < pts_.size(); ++i) inv[i] = {pts_[i].y, pts_[i].x};
  return PiecewiseLinearFn(std::move(inv));
}

PiecewiseLinearFn upper_concave_envelope(std::span<const PLPoint> samples) {
  validate_samples(samples);
  std::vector<PLPoint> hull;
  hull.reserve(samples.size());
  for (const PLPoint& p : samples) {
    // Pop the last hull vertex while it lies on or below the chord from its
    // predecessor to p; the surviving vertices make slopes strictly decrease.
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) >= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return PiecewiseLinearFn(std::move(hull));
}

PiecewiseLinearFn lower_convex_envelope(std::span<const PLPoint> samples) {
  std::vector<PLPoint> negated(samples.begin(), samples.end());
  for (auto& p : negated) p.y = -p.y;
  PiecewiseLinearFn upper = upper_concave_envelope(negated);
  std::vector<PLPoint> pts = upper.points();
  for (auto& p : pts) p.y = -p.y;
  return PiecewiseLinearFn(std::move(pts));
}

}  // namespace flexmh
