#pragma once

#include <functional>
#include <vector>

#include "flexmh/piecewise_linear.hpp"

namespace flexmh {

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section maximization of a unimodal function on [lo, hi].
ScalarMax golden_section_max(const std::function<double(double)>& f, double lo,
                             double hi, double tol_x);

// Grid scan followed by golden-section refinement inside the bracketing cell.
ScalarMax grid_golden_max(const std::function<double(double)>& f, double lo,
                          double hi, int grid_points, double tol_x);

// Root of a decreasing function on [lo, hi]; callers ensure g(lo) >= 0 >= g(hi).
double bisect_root_decreasing(const std::function<double(double)>& g, double lo,
                              double hi, double tol_x);

// Discrete single-peak diagnostic: largest rise after the peak or fall before
// it. Zero (up to noise) means the sequence increases to its maximum and then
// decreases.
double single_peak_violation(const std::vector<double>& values);

// Maximize envelope(alpha) + smooth(alpha) where d_smooth is the decreasing
// derivative of the smooth part. Solves the stationarity condition on each
// envelope segment and polishes with bisection, which stays accurate where
// value comparisons hit floating-point noise.
ScalarMax maximize_on_envelope(const PiecewiseLinearFn& envelope,
                               const std::function<double(double)>& smooth,
                               const std::function<double(double)>& d_smooth);

}  // namespace flexmh
