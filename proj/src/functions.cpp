#include "flexmh/functions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flexmh {

namespace {

constexpr int kBisectionIterations = 200;

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + ": non-finite parameter");
  }
  return v;
}

}  // namespace

EffortFunction::EffortFunction(Family f, double a, double b, double x_lo, double x_hi,
                               std::optional<PiecewiseLinearFn> pwl)
    : family_(f), a_(a), b_(b), x_lo_(x_lo), x_hi_(x_hi), pwl_(std::move(pwl)) {}

EffortFunction EffortFunction::linear(double slope, double intercept, double x_lo,
                                      double x_hi) {
  require_finite(slope, "effort");
  require_finite(intercept, "effort");
  if (!(slope > 0.0)) throw std::invalid_argument("effort: linear slope must be > 0");
  if (!(x_hi > x_lo) || x_lo < 0.0) {
    throw std::invalid_argument("effort: need 0 <= x_lo < x_hi");
  }
  return EffortFunction(Family::Linear, slope, intercept, x_lo, x_hi, std::nullopt);
}

EffortFunction EffortFunction::power(double exponent, double scale, double x_lo,
                                     double x_hi) {
  require_finite(exponent, "effort");
  require_finite(scale, "effort");
  if (!(exponent > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("effort: power family needs exponent > 0, scale > 0");
  }
  if (!(x_hi > x_lo) || x_lo < 0.0) {
    throw std::invalid_argument("effort: need 0 <= x_lo < x_hi");
  }
  return EffortFunction(Family::Power, exponent, scale, x_lo, x_hi, std::nullopt);
}

EffortFunction EffortFunction::piecewise(PiecewiseLinearFn fn) {
  if (!fn.strictly_increasing_values()) {
    throw std::invalid_argument("effort: piecewise family must be strictly increasing");
  }
  if (fn.x_min() < 0.0) {
    throw std::invalid_argument("effort: domain must lie in R+");
  }
  const double x_lo = fn.x_min();
  const double x_hi = fn.x_max();
  return EffortFunction(Family::Piecewise, 0.0, 0.0, x_lo, x_hi, std::move(fn));
}

double EffortFunction::operator()(double x) const {
  switch (family_) {
    case Family::Linear:
      return a_ * x + b_;
    case Family::Power:
      return b_ * std::pow(x, a_);
    case Family::Piecewise:
      return (*pwl_)(x);
  }
  throw std::logic_error("effort: unknown family");
}

double EffortFunction::derivative(double x) const {
  switch (family_) {
    case Family::Linear:
      return a_;
    case Family::Power:
      return b_ * a_ * std::pow(x, a_ - 1.0);
    case Family::Piecewise:
      return pwl_->slope_at(x);
  }
  throw std::logic_error("effort: unknown family");
}

double EffortFunction::inverse(double effort) const {
  switch (family_) {
    case Family::Linear:
      return (effort - b_) / a_;
    case Family::Power:
      return std::pow(effort / b_, 1.0 / a_);
    case Family::Piecewise:
      return pwl_->inverse()(effort);
  }
  throw std::logic_error("effort: unknown family");
}

double EffortFunction::linear_slope() const {
  if (family_ != Family::Linear) {
    throw std::logic_error("effort: linear_slope only defined for the affine family");
  }
  return a_;
}

std::vector<double> EffortFunction::kink_points() const {
  std::vector<double> ks;
  if (family_ == Family::Piecewise) {
    const auto& pts = pwl_->points();
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) ks.push_back(pts[i].x);
  }
  return ks;
}

CostFunction CostFunction::power(double beta, double exponent, double a_lo, double a_hi) {
  require_finite(beta, "cost");
  require_finite(exponent, "cost");
  if (!(beta > 0.0)) throw std::invalid_argument("cost: beta must be > 0");
  if (!(exponent > 1.0)) throw std::invalid_argument("cost: exponent must be > 1");
  if (!(a_hi > a_lo) || a_lo < 0.0) {
    throw std::invalid_argument("cost: need 0 <= a_lo < a_hi");
  }
  CostFunction k;
  k.family_ = Family::Power;
  k.beta_ = beta;
  k.exponent_ = exponent;
  k.a_lo_ = a_lo;
  k.a_hi_ = a_hi;
  return k;
}

CostFunction CostFunction::scaled(double eta, CostFunction base) {
  if (!(eta > 0.0) || !(eta < 1.0)) {
    throw std::invalid_argument("cost: scale eta must be in (0, 1)");
  }
  CostFunction k;
  k.family_ = Family::Scaled;
  k.eta_ = eta;
  k.a_lo_ = base.a_lo_;
  k.a_hi_ = base.a_hi_;
  k.base_ = std::make_shared<const CostFunction>(std::move(base));
  return k;
}

CostFunction CostFunction::polynomial(std::vector<double> coeffs, double a_lo,
                                      double a_hi) {
  if (coeffs.empty()) throw std::invalid_argument("cost: empty polynomial");
  for (double c : coeffs) require_finite(c, "cost");
  if (!(a_hi > a_lo) || a_lo < 0.0) {
    throw std::invalid_argument("cost: need 0 <= a_lo < a_hi");
  }
  CostFunction k;
  k.family_ = Family::Polynomial;
  k.coeffs_ = std::move(coeffs);
  k.a_lo_ = a_lo;
  k.a_hi_ = a_hi;
  return k;
}

double CostFunction::operator()(double alpha) const {
  switch (family_) {
    case Family::Power:
      return beta_ * std::pow(alpha, exponent_);
    case Family::Scaled:
      return eta_ * (*base_)(alpha);
    case Family::Polynomial: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * alpha + *it;
      return acc;
    }
  }
  throw std::logic_error("cost: unknown family");
}

double CostFunction::derivative(double alpha) const {
  switch (family_) {
    case Family::Power:
      return beta_ * exponent_ * std::pow(alpha, exponent_ - 1.0);
    case Family::Scaled:
      return eta_ * base_->derivative(alpha);
    case Family::Polynomial: {
      double acc = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 1;) {
        acc = acc * alpha + static_cast<double>(i) * coeffs_[i];
      }
      return acc;
    }
  }
  throw std::logic_error("cost: unknown family");
}

double CostFunction::second_derivative(double alpha) const {
  switch (family_) {
    case Family::Power:
      return beta_ * exponent_ * (exponent_ - 1.0) * std::pow(alpha, exponent_ - 2.0);
    case Family::Scaled:
      return eta_ * base_->second_derivative(alpha);
    case Family::Polynomial: {
      double acc = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 2;) {
        acc = acc * alpha + static_cast<double>(i) * static_cast<double>(i - 1) * coeffs_[i];
      }
      return acc;
    }
  }
  throw std::logic_error("cost: unknown family");
}

double CostFunction::derivative_inverse(double kappa) const {
  switch (family_) {
    case Family::Power: {
      const double k_lo = derivative(a_lo_);
      const double k_hi = derivative(a_hi_);
      const double tol = 1e-11 * std::max(1.0, std::abs(kappa));
      if (kappa <= k_lo + tol) {
        if (kappa < k_lo - tol) {
          throw std::domain_error("cost: power level below derivative range");
        }
        return a_lo_;
      }
      if (kappa >= k_hi - tol) {
        if (kappa > k_hi + tol) {
          throw std::domain_error("cost: power level above derivative range");
        }
        return a_hi_;
      }
      return std::pow(kappa / (beta_ * exponent_), 1.0 / (exponent_ - 1.0));
    }
    case Family::Scaled:
      return base_->derivative_inverse(kappa / eta_);
    case Family::Polynomial:
      return inverse_monotone([this](double a) { return derivative(a); }, kappa, a_lo_,
                              a_hi_);
  }
  throw std::logic_error("cost: unknown family");
}

void CostFunction::validate_on_grid(int grid_points) const {
  if ((*this)(a_lo_) > 1e-9) {
    throw std::invalid_argument("cost: K(a_lo) must be 0");
  }
  const double h = (a_hi_ - a_lo_) / (grid_points - 1);
  double prev = derivative(a_lo_);
  if (prev < -1e-12) throw std::invalid_argument("cost: K' negative on grid");
  for (int i = 1; i < grid_points; ++i) {
    const double a = a_lo_ + i * h;
    const double d = derivative(a);
    if (d < -1e-12) throw std::invalid_argument("cost: K' negative on grid");
    if (!(d > prev)) {
      throw std::invalid_argument("cost: K' not strictly increasing on grid");
    }
    prev = d;
  }
}

double finite_difference_derivative(const std::function<double(double)>& f, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double inverse_monotone(const std::function<double(double)>& f, double target,
                        double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("inverse_monotone: empty bracket");
  double f_lo = f(lo);
  double f_hi = f(hi);
  const bool increasing = f_hi >= f_lo;
  const double tol = 1e-11 * std::max(1.0, std::abs(target));

  const double f_min = std::min(f_lo, f_hi);
  const double f_max = std::max(f_lo, f_hi);
  if (target < f_min || target > f_max) {
    if (target >= f_min - tol && target <= f_max + tol) {
      const bool at_low_value = std::abs(target - f_min) <= std::abs(target - f_max);
      return (at_low_value == increasing) ? lo : hi;
    }
    throw std::domain_error("inverse_monotone: target outside function range");
  }

  double a = lo, b = hi;
  for (int iter = 0; iter < kBisectionIterations; ++iter) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double fm = f(mid);
    if (std::abs(fm - target) <= tol) return mid;
    if ((fm < target) == increasing) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double mid = 0.5 * (a + b);
  return mid;
}

namespace {

// Adaptive Simpson on [a, b] with an absolute error budget.
double adaptive_simpson(const std::function<double(double)>& g, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = g(lm);
  const double frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integral_of_inverse_derivative(const CostFunction& cost, double kappa_lo,
                                      double kappa_hi) {
  const double k_min = cost.derivative(cost.a_lo());
  const double k_max = cost.derivative(cost.a_hi());
  const double slack = 1e-9 * std::max(1.0, std::abs(k_max));
  if (kappa_lo < k_min - slack || kappa_hi > k_max + slack || kappa_hi < kappa_lo) {
    throw std::domain_error(
        "integral_of_inverse_derivative: power levels outside derivative range");
  }
  kappa_lo = std::clamp(kappa_lo, k_min, k_max);
  kappa_hi = std::clamp(kappa_hi, k_min, k_max);
  if (kappa_hi == kappa_lo) return 0.0;

  const auto inv = [&cost](double k) { return cost.derivative_inverse(k); };
  const double fa = inv(kappa_lo);
  const double fb = inv(kappa_hi);
  const double fm = inv(0.5 * (kappa_lo + kappa_hi));
  const double whole = (kappa_hi - kappa_lo) / 6.0 * (fa + 4.0 * fm + fb);
  const double quad =
      adaptive_simpson(inv, kappa_lo, kappa_hi, fa, fm, fb, whole, 1e-10, 48);

  // Integration by parts: the same area as kappa*alpha minus the cost gap.
  const double a_lo = cost.derivative_inverse(kappa_lo);
  const double a_hi = cost.derivative_inverse(kappa_hi);
  const double closed = kappa_hi * a_hi - cost(a_hi) - kappa_lo * a_lo + cost(a_lo);
  if (std::abs(quad - closed) > 1e-8) {
    std::ostringstream msg;
    msg << "integral_of_inverse_derivative: quadrature and closed form disagree ("
        << quad << " vs " << closed << ")";
    throw std::logic_error(msg.str());
  }
  return quad;
}

}  // namespace flexmh
