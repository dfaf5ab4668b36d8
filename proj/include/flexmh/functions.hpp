#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "flexmh/piecewise_linear.hpp"

namespace flexmh {

// Strictly increasing effort function c on [x_lo, x_hi] in R+.
// The standardization c(x_lo) = 0 is enforced when an Environment is built.
class EffortFunction {
 public:
  enum class Family { Linear, Power, Piecewise };

  static EffortFunction linear(double slope, double intercept, double x_lo, double x_hi);
  static EffortFunction power(double exponent, double scale, double x_lo, double x_hi);
  static EffortFunction piecewise(PiecewiseLinearFn fn);

  double operator()(double x) const;
  // Right-hand slope at kinks of the piecewise family.
  double derivative(double x) const;
  // Exact inverse for the analytic families, linear interpolation for the
  // piecewise family.
  double inverse(double effort) const;

  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }
  Family family() const { return family_; }
  bool is_affine() const { return family_ == Family::Linear; }
  double linear_slope() const;
  // Interior kink locations (empty for the analytic families).
  std::vector<double> kink_points() const;

  double param_a() const { return a_; }
  double param_b() const { return b_; }
  const PiecewiseLinearFn* piecewise_fn() const { return pwl_ ? &*pwl_ : nullptr; }

 private:
  EffortFunction(Family f, double a, double b, double x_lo, double x_hi,
                 std::optional<PiecewiseLinearFn> pwl);

  Family family_;
  double a_ = 0.0;  // slope (linear) or exponent (power)
  double b_ = 0.0;  // intercept (linear) or scale (power)
  double x_lo_ = 0.0;
  double x_hi_ = 0.0;
  std::optional<PiecewiseLinearFn> pwl_;
};

// Strictly increasing, strictly convex cost-of-effort function K on
// [a_lo, a_hi] with K(a_lo) = 0 and analytic first and second derivatives.
class CostFunction {
 public:
  enum class Family { Power, Scaled, Polynomial };

  // beta * alpha^p with beta > 0, p > 1.
  static CostFunction power(double beta, double exponent, double a_lo, double a_hi);
  // eta * base with eta in (0, 1).
  static CostFunction scaled(double eta, CostFunction base);
  // sum_i coeffs[i] * alpha^i; convexity is verified numerically on a grid.
  static CostFunction polynomial(std::vector<double> coeffs, double a_lo, double a_hi);

  double operator()(double alpha) const;
  double derivative(double alpha) const;
  double second_derivative(double alpha) const;
  // (K')^{-1}(kappa) clamped to the domain; kappa outside the derivative's
  // range beyond tolerance is an error.
  double derivative_inverse(double kappa) const;

  double a_lo() const { return a_lo_; }
  double a_hi() const { return a_hi_; }
  Family family() const { return family_; }
  double scale_eta() const { return eta_; }
  double power_beta() const { return beta_; }
  double power_exponent() const { return exponent_; }
  const CostFunction* base() const { return base_.get(); }
  const std::vector<double>& coefficients() const { return coeffs_; }

  // Grid check of K(a_lo)=0, K' >= 0 and K' strictly increasing. Throws on
  // failure with a description of the violation.
  void validate_on_grid(int grid_points = 512) const;

 private:
  CostFunction() = default;

  Family family_ = Family::Power;
  double beta_ = 0.0;
  double exponent_ = 0.0;
  double eta_ = 1.0;
  std::vector<double> coeffs_;
  std::shared_ptr<const CostFunction> base_;
  double a_lo_ = 0.0;
  double a_hi_ = 0.0;
};

// Central finite difference with step 1e-6 * max(1, |x|); derivative
// fallback for user-supplied callables (the built-in families are analytic).
double finite_difference_derivative(const std::function<double(double)>& f, double x);

// Bisection inverse of a strictly monotone callable. Returns x in [lo, hi]
// with |f(x) - target| <= 1e-11 * max(1, |target|) where the bracket allows;
// targets outside f's range by at most that tolerance clamp to the endpoint.
double inverse_monotone(const std::function<double(double)>& f, double target,
                        double lo, double hi);

// Integral of (K')^{-1} over [kappa_lo, kappa_hi], computed by adaptive
// quadrature (absolute tolerance 1e-10) and cross-checked against the
// integration-by-parts closed form; the two routes must agree within 1e-8.
double integral_of_inverse_derivative(const CostFunction& cost, double kappa_lo,
                                      double kappa_hi);

}  // namespace flexmh
