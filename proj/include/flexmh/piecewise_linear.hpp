#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flexmh {

struct PLPoint {
  double x = 0.0;
  double y = 0.0;
};

// Continuous piecewise-linear function on [x_front, x_back], stored as
// breakpoints with strictly increasing x. Evaluation between breakpoints is
// exact linear interpolation; evaluation outside the domain is an error.
class PiecewiseLinearFn {
 public:
  explicit PiecewiseLinearFn(std::vector<PLPoint> breakpoints);

  double operator()(double x) const;
  double x_min() const { return pts_.front().x; }
  double x_max() const { return pts_.back().x; }
  double y_min() const;
  double y_max() const;

  const std::vector<PLPoint>& points() const { return pts_; }
  std::size_t segment_count() const { return pts_.size() - 1; }
  double segment_slope(std::size_t seg) const;
  // Index of the segment whose closed interval contains x.
  std::size_t segment_containing(double x) const;
  // Right-hand slope at x (left-hand slope at the right endpoint).
  double slope_at(double x) const;

  bool strictly_increasing_values() const;
  // Inverse function; requires strictly increasing values.
  PiecewiseLinearFn inverse() const;

 private:
  std::vector<PLPoint> pts_;
  double domain_slack_ = 0.0;
};

// Smallest concave piecewise-linear function weakly above the samples.
// Input x must be strictly increasing; the result's breakpoints are a subset
// of the sample points (the upper hull).
PiecewiseLinearFn upper_concave_envelope(std::span<const PLPoint> samples);

// Largest convex piecewise-linear function weakly below the samples.
PiecewiseLinearFn lower_convex_envelope(std::span<const PLPoint> samples);

}  // namespace flexmh
