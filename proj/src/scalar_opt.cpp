#include "flexmh/scalar_opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flexmh {

ScalarMax golden_section_max(const std::function<double(double)>& f, double lo,
                             double hi, double tol_x) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int iter = 0; iter < 400 && (b - a) > tol_x; ++iter) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

ScalarMax grid_golden_max(const std::function<double(double)>& f, double lo,
                          double hi, int grid_points, double tol_x) {
  if (grid_points < 3) grid_points = 3;
  const double h = (hi - lo) / (grid_points - 1);
  int best = 0;
  double best_v = f(lo);
  for (int i = 1; i < grid_points; ++i) {
    const double v = f(lo + i * h);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double a = lo + std::max(0, best - 1) * h;
  const double b = lo + std::min(grid_points - 1, best + 1) * h;
  ScalarMax refined = golden_section_max(f, a, b, tol_x);
  if (best_v > refined.value) return {lo + best * h, best_v};
  return refined;
}

double bisect_root_decreasing(const std::function<double(double)>& g, double lo,
                              double hi, double tol_x) {
  double a = lo, b = hi;
  for (int iter = 0; iter < 200 && (b - a) > tol_x; ++iter) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    if (g(mid) >= 0.0) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

double single_peak_violation(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const std::size_t peak = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  double violation = 0.0;
  // Largest fall on the way up to the peak.
  double running_max = values.front();
  for (std::size_t i = 1; i <= peak; ++i) {
    violation = std::max(violation, running_max - values[i]);
    running_max = std::max(running_max, values[i]);
  }
  // Largest rise after the peak.
  double running_min = values[peak];
  for (std::size_t i = peak + 1; i < values.size(); ++i) {
    violation = std::max(violation, values[i] - running_min);
    running_min = std::min(running_min, values[i]);
  }
  return violation;
}

ScalarMax maximize_on_envelope(const PiecewiseLinearFn& envelope,
                               const std::function<double(double)>& smooth,
                               const std::function<double(double)>& d_smooth) {
  const auto objective = [&](double a) { return envelope(a) + smooth(a); };
  ScalarMax best{envelope.x_min(), objective(envelope.x_min())};
  const auto consider = [&](double a) {
    const double v = objective(a);
    if (v > best.value || (v == best.value && a < best.x)) best = {a, v};
  };
  for (std::size_t seg = 0; seg < envelope.segment_count(); ++seg) {
    const double a = envelope.points()[seg].x;
    const double b = envelope.points()[seg + 1].x;
    const double sigma = envelope.segment_slope(seg);
    const auto deriv = [&](double alpha) { return sigma + d_smooth(alpha); };
    const double da = deriv(a);
    const double db = deriv(b);
    if (da <= 0.0) {
      consider(a);
    } else if (db >= 0.0) {
      consider(b);
    } else {
      const double span = b - a;
      consider(bisect_root_decreasing(deriv, a, b, 1e-13 * std::max(1.0, span)));
    }
  }
  consider(envelope.x_max());
  return best;
}

}  // namespace flexmh
