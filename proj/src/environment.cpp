#include "flexmh/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "flexmh/scalar_opt.hpp"

namespace flexmh {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kStandardizationTol = 1e-9;

double range_tol(const Environment& env) {
  return 1e-9 * std::max(1.0, env.x_hi() - env.x_lo());
}

}  // namespace

OutputRange OutputRange::interval(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw std::invalid_argument("range: interval endpoints out of order");
  }
  OutputRange r;
  r.kind = Kind::Interval;
  r.lo = lo;
  r.hi = hi;
  return r;
}

OutputRange OutputRange::point_set(std::vector<double> pts) {
  if (pts.empty()) throw std::invalid_argument("range: empty point set");
  std::sort(pts.begin(), pts.end());
  OutputRange r;
  r.kind = Kind::Points;
  r.points = std::move(pts);
  r.lo = r.points.front();
  r.hi = r.points.back();
  return r;
}

OutputDistribution::OutputDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty() || atoms_.size() > 2) {
    throw std::invalid_argument("distribution: needs one or two atoms");
  }
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.x) || !std::isfinite(a.weight) || a.weight < -kProbTol ||
        a.weight > 1.0 + kProbTol) {
      throw std::invalid_argument("distribution: atom weight outside [0, 1]");
    }
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kProbTol) {
    throw std::invalid_argument("distribution: weights must sum to 1");
  }
}

OutputDistribution OutputDistribution::point_mass(double x) {
  return OutputDistribution({Atom{x, 1.0}});
}

double OutputDistribution::mean_output() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight * a.x;
  return m;
}

double OutputDistribution::mean_effort(const Environment& env) const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight * env.effort_of(a.x);
  return m;
}

bool AssumptionReport::required_hold(std::size_t n_types) const {
  if (n_types > 2) return ntype_order.holds && ntype_single_peak.holds;
  return cost_order.holds && single_peak.holds;
}

std::array<double, 2> Environment::range_effort_interval(const OutputRange& range) const {
  const double tol = range_tol(*this);
  switch (range.kind) {
    case OutputRange::Kind::Full:
      return {c_lo(), c_hi()};
    case OutputRange::Kind::Interval: {
      if (range.lo < x_lo_ - tol || range.hi > x_hi_ + tol) {
        throw std::invalid_argument("range: interval outside the output interval");
      }
      const double lo = std::clamp(range.lo, x_lo_, x_hi_);
      const double hi = std::clamp(range.hi, x_lo_, x_hi_);
      return {effort_of(lo), effort_of(hi)};
    }
    case OutputRange::Kind::Points: {
      if (range.points.front() < x_lo_ - tol || range.points.back() > x_hi_ + tol) {
        throw std::invalid_argument("range: point outside the output interval");
      }
      return {effort_of(std::clamp(range.points.front(), x_lo_, x_hi_)),
              effort_of(std::clamp(range.points.back(), x_lo_, x_hi_))};
    }
  }
  throw std::logic_error("range: unknown kind");
}

bool Environment::range_is_full(const OutputRange& range) const {
  if (range.kind == OutputRange::Kind::Full) return true;
  if (range.kind == OutputRange::Kind::Interval) {
    const double tol = range_tol(*this);
    return range.lo <= x_lo_ + tol && range.hi >= x_hi_ - tol;
  }
  return false;
}

bool Environment::range_contains(const OutputRange& range, double x) const {
  const double tol = range_tol(*this);
  switch (range.kind) {
    case OutputRange::Kind::Full:
      return x >= x_lo_ - tol && x <= x_hi_ + tol;
    case OutputRange::Kind::Interval:
      return x >= range.lo - tol && x <= range.hi + tol;
    case OutputRange::Kind::Points:
      for (double p : range.points) {
        if (std::abs(p - x) <= tol) return true;
      }
      return false;
  }
  return false;
}

Environment build_environment(const InstanceConfig& config) {
  if (!(config.x_hi > config.x_lo) || config.x_lo < 0.0) {
    throw std::invalid_argument("environment: need 0 <= x_lo < x_hi");
  }
  if (config.types.size() < 2) {
    throw std::invalid_argument("environment: need at least two types");
  }
  if (config.solver.effort_grid < 3) {
    throw std::invalid_argument("environment: effort grid too small");
  }
  const EffortFunction& c = config.effort;
  if (std::abs(c.x_lo() - config.x_lo) > kStandardizationTol ||
      std::abs(c.x_hi() - config.x_hi) > kStandardizationTol) {
    throw std::invalid_argument("environment: effort domain must match the output interval");
  }
  if (std::abs(c(config.x_lo)) > kStandardizationTol) {
    throw std::invalid_argument("environment: standardization c(x_lo) = 0 violated");
  }

  double prob_sum = 0.0;
  for (const TypeSpec& t : config.types) {
    if (!(t.prob > 0.0) || !(t.prob < 1.0)) {
      throw std::invalid_argument("environment: type probabilities must lie in (0, 1)");
    }
    prob_sum += t.prob;
  }
  if (std::abs(prob_sum - 1.0) > kProbTol) {
    throw std::invalid_argument("environment: type probabilities must sum to 1");
  }

  Environment env;
  env.x_lo_ = config.x_lo;
  env.x_hi_ = config.x_hi;
  env.effort_ = config.effort;
  env.types_ = config.types;
  env.solver_ = config.solver;

  // Sampling grid: uniform in output plus any effort kinks, so piecewise
  // effort families are reproduced exactly.
  std::set<double> xs;
  const int n = config.solver.effort_grid;
  for (int i = 0; i < n; ++i) {
    xs.insert(config.x_lo + (config.x_hi - config.x_lo) * i / (n - 1));
  }
  for (double k : c.kink_points()) {
    if (k > config.x_lo && k < config.x_hi) xs.insert(k);
  }

  std::vector<PLPoint> theta_pts;
  std::vector<PLPoint> effort_pts;
  theta_pts.reserve(xs.size());
  effort_pts.reserve(xs.size());
  double prev_alpha = -1.0;
  for (double x : xs) {
    const double alpha = std::max(0.0, c(x));
    if (alpha <= prev_alpha) {
      throw std::invalid_argument("environment: effort function not strictly increasing on grid");
    }
    theta_pts.push_back({alpha, x});
    effort_pts.push_back({x, alpha});
    prev_alpha = alpha;
  }
  theta_pts.front().x = 0.0;  // c(x_lo) standardized to exactly 0
  effort_pts.front().y = 0.0;
  env.c_hi_ = theta_pts.back().x;

  for (const TypeSpec& t : config.types) {
    const double dom_tol = 1e-9 * std::max(1.0, env.c_hi_);
    if (std::abs(t.cost.a_lo() - 0.0) > dom_tol ||
        std::abs(t.cost.a_hi() - env.c_hi_) > dom_tol) {
      throw std::invalid_argument("environment: cost domain must equal [0, c_hi]");
    }
    t.cost.validate_on_grid();
  }

  env.theta_ = PiecewiseLinearFn(std::move(theta_pts));
  env.effort_grid_ = PiecewiseLinearFn(std::move(effort_pts));
  env.Theta_ = upper_concave_envelope(env.theta_.points());

  // Theta >= theta with equality at both ends.
  const double y_tol = 1e-9 * std::max(1.0, env.x_hi_);
  if (std::abs(env.Theta_(0.0) - env.x_lo_) > y_tol ||
      std::abs(env.Theta_(env.c_hi_) - env.x_hi_) > y_tol) {
    throw std::logic_error("environment: envelope endpoints drifted");
  }
  return env;
}

PiecewiseLinearFn theta_restricted(const Environment& env, const OutputRange& range) {
  const auto [a_lo, a_hi] = env.range_effort_interval(range);
  if (!(a_hi - a_lo > 1e-15 * std::max(1.0, env.c_hi()))) {
    throw std::invalid_argument("theta_restricted: degenerate effort interval");
  }
  std::vector<PLPoint> samples;
  if (range.kind == OutputRange::Kind::Points) {
    samples.reserve(range.points.size());
    double prev = -1.0;
    for (double p : range.points) {
      const double a = env.effort_of(std::clamp(p, env.x_lo(), env.x_hi()));
      if (a - prev <= 1e-15 * std::max(1.0, env.c_hi())) continue;
      samples.push_back({a, env.theta_value(a)});
      prev = a;
    }
  } else {
    const auto& pts = env.theta().points();
    samples.push_back({a_lo, env.theta_value(a_lo)});
    for (const PLPoint& p : pts) {
      if (p.x > a_lo && p.x < a_hi) samples.push_back({p.x, p.y});
    }
    if (samples.size() > 1 && samples[1].x - a_lo < 1e-15 * std::max(1.0, env.c_hi())) {
      samples.erase(samples.begin() + 1);
    }
    if (a_hi - samples.back().x < 1e-15 * std::max(1.0, env.c_hi())) {
      samples.pop_back();
    }
    samples.push_back({a_hi, env.theta_value(a_hi)});
  }
  return upper_concave_envelope(samples);
}

OutputDistribution distribution_attaining(const Environment& env, double alpha,
                                          const OutputRange& range) {
  const auto [a_lo, a_hi] = env.range_effort_interval(range);
  const double a_tol = 1e-9 * std::max(1.0, env.c_hi());
  if (alpha < a_lo - a_tol || alpha > a_hi + a_tol) {
    throw std::invalid_argument("distribution_attaining: effort outside the range");
  }
  alpha = std::clamp(alpha, a_lo, a_hi);

  if (a_hi - a_lo <= 1e-15 * std::max(1.0, env.c_hi())) {
    const double x = (range.kind == OutputRange::Kind::Points) ? range.points.front()
                                                               : env.theta_value(a_lo);
    return OutputDistribution::point_mass(x);
  }

  const PiecewiseLinearFn envelope = theta_restricted(env, range);
  const std::size_t seg = envelope.segment_containing(alpha);
  const PLPoint left = envelope.points()[seg];
  const PLPoint right = envelope.points()[seg + 1];
  const double snap = 1e-12 * std::max(1.0, env.c_hi());
  if (alpha - left.x <= snap) return OutputDistribution::point_mass(left.y);
  if (right.x - alpha <= snap) return OutputDistribution::point_mass(right.y);

  // Point-mass case: the envelope touches theta at alpha and the range is
  // connected there.
  if (range.kind != OutputRange::Kind::Points) {
    const double theta_here = env.theta_value(alpha);
    if (std::abs(envelope(alpha) - theta_here) <= 1e-12 * std::max(1.0, env.x_hi())) {
      return OutputDistribution::point_mass(theta_here);
    }
  }

  const double q = (alpha - left.x) / (right.x - left.x);
  return OutputDistribution({Atom{left.y, 1.0 - q}, Atom{right.y, q}});
}

namespace {

AssumptionCheck strict_positive_gap(double min_gap) {
  AssumptionCheck chk;
  chk.violation = -min_gap;
  chk.tolerance = -1e-15;
  chk.holds = chk.violation <= chk.tolerance;
  return chk;
}

}  // namespace

AssumptionReport check_assumptions(const Environment& env) {
  AssumptionReport rep;
  const auto& grid = env.theta().points();
  const std::size_t n_types = env.n_types();

  // Pairwise adjacent ordering of marginal costs on (c_lo, c_hi].
  double min_gap_binary = std::numeric_limits<double>::infinity();
  double min_gap_all = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid[i].x;
    for (std::size_t t = 0; t + 1 < n_types; ++t) {
      const double gap = env.cost(t).derivative(a) - env.cost(t + 1).derivative(a);
      min_gap_all = std::min(min_gap_all, gap);
      if (t == 0) min_gap_binary = std::min(min_gap_binary, gap);
    }
  }
  rep.cost_order = strict_positive_gap(min_gap_binary);
  rep.cost_order.applicable = true;

  // Common marginal cost at zero effort (NT-as1) plus the ordering.
  double base_mismatch = 0.0;
  for (std::size_t t = 1; t < n_types; ++t) {
    base_mismatch = std::max(base_mismatch, std::abs(env.cost(t).derivative(0.0) -
                                                     env.cost(0).derivative(0.0)));
  }
  rep.ntype_order = strict_positive_gap(min_gap_all);
  if (base_mismatch > 1e-9) {
    rep.ntype_order.violation = std::max(rep.ntype_order.violation, base_mismatch);
    rep.ntype_order.holds = false;
  }

  // Single-peakedness of Theta(a) - Kt'(a) * a on the grid for every type.
  double worst_peak = 0.0;
  std::vector<double> values(grid.size());
  for (std::size_t t = 0; t < n_types; ++t) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double a = grid[i].x;
      values[i] = env.Theta_value(a) - env.cost(t).derivative(a) * a;
    }
    worst_peak = std::max(worst_peak, single_peak_violation(values));
  }
  rep.single_peak.violation = worst_peak;
  rep.single_peak.tolerance = 1e-10;
  rep.single_peak.holds = worst_peak <= rep.single_peak.tolerance;
  rep.ntype_single_peak = rep.single_peak;

  // K1'(alpha1_mh) >= K0'(c_lo) for the binary case.
  if (n_types == 2) {
    const CostFunction& k1 = env.cost(1);
    const ScalarMax mh = maximize_on_envelope(
        env.Theta(), [&](double a) { return -k1.derivative(a) * a; },
        [&](double a) { return -(k1.derivative(a) + k1.second_derivative(a) * a); });
    rep.mh_interiority.violation = env.cost(0).derivative(0.0) - k1.derivative(mh.x);
    rep.mh_interiority.tolerance = 1e-9;
    rep.mh_interiority.holds =
        rep.mh_interiority.violation <= rep.mh_interiority.tolerance;
  } else {
    rep.mh_interiority.applicable = false;
  }

  // Interior selling-the-firm efforts, checked only for affine effort.
  if (env.effort().is_affine()) {
    const double inv_slope = 1.0 / env.effort().linear_slope();
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n_types; ++t) {
      v = std::max(v, env.cost(t).derivative(0.0) - inv_slope);
      v = std::max(v, inv_slope - env.cost(t).derivative(env.c_hi()));
    }
    rep.interior_effort.violation = v;
    rep.interior_effort.tolerance = -1e-15;
    rep.interior_effort.holds = v <= rep.interior_effort.tolerance;
  } else {
    rep.interior_effort.applicable = false;
  }
  return rep;
}

}  // namespace flexmh
