#include "flexmh/contracts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexmh {

namespace {

struct Segment {
  double lo = 0.0, hi = 0.0;     // effort interval
  double slope = 0.0, icept = 0.0;
  double value(double a) const { return slope * a + icept; }
};

// Up to three segments of the concavified contract; degenerate pieces are
// dropped.
int contract_segments(double power, double constant, double r_lo, double r_hi,
                      double c_hi, std::array<Segment, 3>& out) {
  int n = 0;
  const double eps = 1e-15 * std::max(1.0, c_hi);
  if (r_lo > eps) {
    out[n++] = {0.0, r_lo, (power * r_lo + constant) / r_lo, 0.0};
  }
  if (r_hi - r_lo > eps) {
    out[n++] = {r_lo, r_hi, power, constant};
  }
  if (c_hi - r_hi > eps) {
    const double peak = power * r_hi + constant;
    const double slope = -peak / (c_hi - r_hi);
    out[n++] = {r_hi, c_hi, slope, -slope * c_hi};
  }
  if (n == 0) {
    // Full-interval degenerate range; the contract line itself.
    out[n++] = {0.0, c_hi, power, constant};
  }
  return n;
}

double clamped_derivative_inverse(const CostFunction& cost, double slope, double lo,
                                  double hi) {
  if (slope <= cost.derivative(lo)) return lo;
  if (slope >= cost.derivative(hi)) return hi;
  return std::clamp(cost.derivative_inverse(slope), lo, hi);
}

struct SegmentMax {
  double alpha = 0.0;
  double value = 0.0;
  Segment segment;
};

SegmentMax best_response_segments(const CostFunction& cost, double c_hi, double power,
                                  double constant, double r_lo, double r_hi) {
  std::array<Segment, 3> segs;
  const int n = contract_segments(power, constant, r_lo, r_hi, c_hi, segs);
  SegmentMax best;
  best.alpha = 0.0;
  best.value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Segment& s = segs[i];
    const double a = clamped_derivative_inverse(cost, s.slope, s.lo, s.hi);
    const double v = s.value(a) - cost(a);
    if (v > best.value) {
      best = {a, v, s};
    }
  }
  return best;
}

}  // namespace

DesignContract make_contract(const Environment& env, std::size_t type_index,
                             double target_effort, double constant, OutputRange range) {
  if (type_index >= env.n_types()) {
    throw std::invalid_argument("contract: unknown type index");
  }
  if (constant < -1e-12) {
    throw std::invalid_argument("contract: constant payment must be non-negative");
  }
  const auto [r_lo, r_hi] = env.range_effort_interval(range);
  const double tol = 1e-9 * std::max(1.0, env.c_hi());
  if (target_effort < r_lo - tol || target_effort > r_hi + tol) {
    throw std::invalid_argument(
        "contract: target effort not supported by the contract range");
  }
  DesignContract s;
  s.type_index = type_index;
  s.target_effort = std::clamp(target_effort, r_lo, r_hi);
  s.power = env.cost(type_index).derivative(s.target_effort);
  s.constant = std::max(0.0, constant);
  s.range = std::move(range);
  return s;
}

double contract_payment(const Environment& env, const DesignContract& s, double x) {
  const double tol = 1e-9 * std::max(1.0, env.x_hi() - env.x_lo());
  if (x < env.x_lo() - tol || x > env.x_hi() + tol) {
    throw std::invalid_argument("contract_payment: output outside the interval");
  }
  if (!env.range_contains(s.range, x)) return 0.0;
  return s.power * env.effort_exact(std::clamp(x, env.x_lo(), env.x_hi())) + s.constant;
}

PiecewiseLinearFn concavified_contract(const Environment& env, const DesignContract& s) {
  const auto [r_lo, r_hi] = env.range_effort_interval(s.range);
  std::array<Segment, 3> segs;
  const int n = contract_segments(s.power, s.constant, r_lo, r_hi, env.c_hi(), segs);
  std::vector<PLPoint> pts;
  pts.reserve(n + 1);
  pts.push_back({segs[0].lo, segs[0].value(segs[0].lo)});
  for (int i = 0; i < n; ++i) pts.push_back({segs[i].hi, segs[i].value(segs[i].hi)});
  return PiecewiseLinearFn(std::move(pts));
}

double best_response_value(const CostFunction& cost, double c_hi, double power,
                           double constant, double r_lo, double r_hi) {
  return best_response_segments(cost, c_hi, power, constant, r_lo, r_hi).value;
}

AgentResponse agent_best_response(const Environment& env, const DesignContract& s,
                                  std::size_t responder_type) {
  if (responder_type >= env.n_types()) {
    throw std::invalid_argument("best response: unknown type index");
  }
  const CostFunction& cost = env.cost(responder_type);
  const auto [r_lo, r_hi] = env.range_effort_interval(s.range);
  const SegmentMax best =
      best_response_segments(cost, env.c_hi(), s.power, s.constant, r_lo, r_hi);

  if (responder_type == s.type_index) {
    // The recommended effort is weakly optimal by construction; take it.
    const double truthful =
        s.power * s.target_effort + s.constant - cost(s.target_effort);
    if (truthful >= best.value - 1e-9 * std::max(1.0, std::abs(best.value))) {
      return AgentResponse{s.target_effort, truthful,
                           distribution_attaining(env, s.target_effort, s.range)};
    }
  }

  // Misreport (or a degenerate truthful case): a distribution supported on the
  // active segment's endpoints attains the concavified value.
  const Segment& seg = best.segment;
  OutputDistribution dist = OutputDistribution::point_mass(env.theta_value(best.alpha));
  const double snap = 1e-12 * std::max(1.0, env.c_hi());
  if (best.alpha - seg.lo > snap && seg.hi - best.alpha > snap) {
    const double q = (best.alpha - seg.lo) / (seg.hi - seg.lo);
    dist = OutputDistribution({Atom{env.theta_value(seg.lo), 1.0 - q},
                               Atom{env.theta_value(seg.hi), q}});
  }
  return AgentResponse{best.alpha, best.value, std::move(dist)};
}

double truthful_payoff(const Environment& env, const DesignContract& s) {
  return s.power * s.target_effort + s.constant -
         env.cost(s.type_index)(s.target_effort);
}

}  // namespace flexmh
