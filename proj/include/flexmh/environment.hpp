#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flexmh/functions.hpp"
#include "flexmh/piecewise_linear.hpp"

namespace flexmh {

struct TypeSpec {
  double prob = 0.0;
  CostFunction cost;
  TypeSpec(double p, CostFunction k) : prob(p), cost(std::move(k)) {}
};

struct SolverConfig {
  int effort_grid = 2001;
  std::array<int, 2> convex_grid{400, 400};
  std::array<int, 4> general_grid{40, 40, 40, 40};
  int equal_power_grid = 2001;
  int ntype_grid = 201;
  double refine_tol = 1e-8;
  std::uint64_t seed = 20240801;
};

struct InstanceConfig {
  double x_lo = 0.0;
  double x_hi = 0.0;
  EffortFunction effort;
  std::vector<TypeSpec> types;
  SolverConfig solver;
  InstanceConfig(double lo, double hi, EffortFunction c, std::vector<TypeSpec> ts,
                 SolverConfig s = {})
      : x_lo(lo), x_hi(hi), effort(std::move(c)), types(std::move(ts)), solver(s) {}
};

// A set of outputs where a contract pays the maximal-incentive line.
struct OutputRange {
  enum class Kind { Full, Interval, Points };

  Kind kind = Kind::Full;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> points;

  static OutputRange full() { return OutputRange{}; }
  static OutputRange interval(double lo, double hi);
  static OutputRange point_set(std::vector<double> pts);
};

struct Atom {
  double x = 0.0;
  double weight = 0.0;
};

class Environment;

// Discrete output distribution with at most two atoms.
class OutputDistribution {
 public:
  explicit OutputDistribution(std::vector<Atom> atoms);
  static OutputDistribution point_mass(double x);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double mean_output() const;
  // Aggregate effort through the environment's grid representation of c.
  double mean_effort(const Environment& env) const;

 private:
  std::vector<Atom> atoms_;
};

struct AssumptionCheck {
  double violation = 0.0;
  double tolerance = 0.0;
  bool holds = true;       // always equal to (violation <= tolerance)
  bool applicable = true;
};

struct AssumptionReport {
  AssumptionCheck cost_order;        // K0' > K1' on (c_lo, c_hi]
  AssumptionCheck single_peak;       // Theta(a) - Kt'(a)*a single-peaked, all t
  AssumptionCheck mh_interiority;    // K1'(alpha1_mh) >= K0'(c_lo), binary only
  AssumptionCheck ntype_order;       // adjacent ordering + common K'(c_lo)
  AssumptionCheck ntype_single_peak; // same predicate as single_peak, N types
  AssumptionCheck interior_effort;   // Kt'(c_lo) < 1/c < Kt'(c_hi), affine effort
  // The assumptions the solvers rely on.
  bool required_hold(std::size_t n_types) const;
};

// Immutable problem instance: output interval, effort function, type list and
// the derived effort-space geometry. theta is the piecewise-linear record of
// c^-1 on the sampling grid and Theta its upper concave envelope; all
// effort/output conversions downstream go through this one grid so that menu
// arithmetic is exact relative to the sample set.
class Environment {
 public:
  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }
  double c_lo() const { return 0.0; }
  double c_hi() const { return c_hi_; }

  std::size_t n_types() const { return types_.size(); }
  double prob(std::size_t t) const { return types_[t].prob; }
  const CostFunction& cost(std::size_t t) const { return types_[t].cost; }
  const EffortFunction& effort() const { return effort_; }
  const SolverConfig& solver_config() const { return solver_; }

  const PiecewiseLinearFn& theta() const { return theta_; }
  const PiecewiseLinearFn& Theta() const { return Theta_; }

  double theta_value(double alpha) const { return theta_(alpha); }
  double Theta_value(double alpha) const { return Theta_(alpha); }
  // Effort of an output through the grid representation (inverse of theta).
  double effort_of(double x) const { return effort_grid_(x); }
  // Effort of an output through the exact family.
  double effort_exact(double x) const { return effort_(x); }

  // Effort interval [inf c(R), sup c(R)] of a range; validates the range.
  std::array<double, 2> range_effort_interval(const OutputRange& range) const;
  bool range_is_full(const OutputRange& range) const;
  bool range_contains(const OutputRange& range, double x) const;

  friend Environment build_environment(const InstanceConfig& config);

 private:
  Environment() = default;

  double x_lo_ = 0.0, x_hi_ = 0.0, c_hi_ = 0.0;
  EffortFunction effort_ = EffortFunction::linear(1.0, 0.0, 0.0, 1.0);
  std::vector<TypeSpec> types_;
  SolverConfig solver_;
  PiecewiseLinearFn theta_{std::vector<PLPoint>{{0, 0}, {1, 1}}};
  PiecewiseLinearFn Theta_{std::vector<PLPoint>{{0, 0}, {1, 1}}};
  PiecewiseLinearFn effort_grid_{std::vector<PLPoint>{{0, 0}, {1, 1}}};
};

Environment build_environment(const InstanceConfig& config);

// Upper concave envelope of theta restricted to c(range). Errors on ranges
// whose effort interval is a single point.
PiecewiseLinearFn theta_restricted(const Environment& env, const OutputRange& range);

// A distribution supported on at most two points of the range with mean
// effort alpha and mean output Theta_range(alpha).
OutputDistribution distribution_attaining(const Environment& env, double alpha,
                                          const OutputRange& range);

AssumptionReport check_assumptions(const Environment& env);

}  // namespace flexmh
