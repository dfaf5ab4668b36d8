#include <cmath>
#include <random>

#include <doctest.h>

#include "support/instances.hpp"

using namespace flexmh;
using namespace flexmh::testsupport;

TEST_CASE("example-1 environment: identity production geometry") {
  const Environment env = example1_env();
  CHECK(env.c_hi() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(env.Theta().points().size() == 2);  // identity line
  CHECK(env.theta_value(0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(env.Theta_value(0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(env.effort_of(0.2) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("linear and convex effort environments") {
  {
    EffortFunction effort = EffortFunction::linear(2.0, 0.0, 0.0, 1.0);
    std::vector<TypeSpec> types;
    types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 2.0));
    types.emplace_back(0.5, CostFunction::power(0.5, 2.0, 0.0, 2.0));
    const Environment env =
        build_environment(InstanceConfig(0.0, 1.0, std::move(effort), std::move(types)));
    CHECK(env.c_hi() == doctest::Approx(2.0));
    CHECK(env.theta_value(1.0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(env.Theta_value(1.0) == doctest::Approx(0.5).epsilon(1e-13));
  }
  {
    EffortFunction effort = EffortFunction::power(2.0, 1.0, 0.0, 1.0);
    std::vector<TypeSpec> types;
    types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 1.0));
    types.emplace_back(0.5, CostFunction::power(0.5, 2.0, 0.0, 1.0));
    const Environment env =
        build_environment(InstanceConfig(0.0, 1.0, std::move(effort), std::move(types)));
    // theta(a) = sqrt(a) is concave, so the envelope coincides with it.
    for (double a : {0.04, 0.25, 0.81}) {
      CHECK(env.Theta_value(a) == doctest::Approx(env.theta_value(a)).epsilon(1e-13));
      CHECK(env.theta_value(a) == doctest::Approx(std::sqrt(a)).epsilon(1e-6));
    }
  }
}

TEST_CASE("environment validation errors") {
  std::vector<TypeSpec> base_types;
  base_types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 0.5));
  base_types.emplace_back(0.5, CostFunction::power(0.5, 2.0, 0.0, 0.5));

  // Standardization c(x_lo) = 0.
  CHECK_THROWS_AS(build_environment(InstanceConfig(
                      0.0, 0.5, EffortFunction::linear(1.0, 0.1, 0.0, 0.5), base_types)),
                  std::invalid_argument);
  // Probabilities outside (0,1) / not summing to one.
  {
    std::vector<TypeSpec> bad;
    bad.emplace_back(0.7, CostFunction::power(1.0, 2.0, 0.0, 0.5));
    bad.emplace_back(0.7, CostFunction::power(0.5, 2.0, 0.0, 0.5));
    CHECK_THROWS_AS(build_environment(InstanceConfig(
                        0.0, 0.5, EffortFunction::linear(1.0, 0.0, 0.0, 0.5), bad)),
                    std::invalid_argument);
  }
  // K(0) != 0 and non-convex cost.
  {
    std::vector<TypeSpec> bad;
    bad.emplace_back(0.5, CostFunction::polynomial({0.1, 0.0, 1.0}, 0.0, 0.5));
    bad.emplace_back(0.5, CostFunction::power(0.5, 2.0, 0.0, 0.5));
    CHECK_THROWS_AS(build_environment(InstanceConfig(
                        0.0, 0.5, EffortFunction::linear(1.0, 0.0, 0.0, 0.5), bad)),
                    std::invalid_argument);
  }
  {
    std::vector<TypeSpec> bad;
    bad.emplace_back(0.5, CostFunction::polynomial({0.0, 1.0}, 0.0, 0.5));
    bad.emplace_back(0.5, CostFunction::power(0.5, 2.0, 0.0, 0.5));
    CHECK_THROWS_AS(build_environment(InstanceConfig(
                        0.0, 0.5, EffortFunction::linear(1.0, 0.0, 0.0, 0.5), bad)),
                    std::invalid_argument);
  }
}

TEST_CASE("restricted concavification") {
  const Environment env = example1_env();
  // Full range reproduces Theta with the same breakpoints.
  const PiecewiseLinearFn full = theta_restricted(env, OutputRange::full());
  REQUIRE(full.points().size() == env.Theta().points().size());
  for (std::size_t i = 0; i < full.points().size(); ++i) {
    CHECK(full.points()[i].x == env.Theta().points()[i].x);
    CHECK(full.points()[i].y == env.Theta().points()[i].y);
  }
  // Right truncation of a concave theta just restricts it.
  const PiecewiseLinearFn cut =
      theta_restricted(env, OutputRange::interval(0.0, 0.3));
  CHECK(cut.x_max() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(cut(0.2) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(theta_restricted(env, OutputRange::point_set({0.2})),
                  std::invalid_argument);
  CHECK_THROWS_AS(theta_restricted(env, OutputRange::interval(0.2, 0.9)),
                  std::invalid_argument);
}

TEST_CASE("restricted envelope slopes flatten under truncation") {
  // With an inflected effort function theta is non-concave, so truncation
  // genuinely changes the envelope: right truncation lowers slopes, left
  // truncation raises them.
  const Environment env = inflected_effort_env();
  const double c_hi = env.c_hi();
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double cut_hi = env.theta_value(c_hi * (0.2 + 0.75 * unit(rng)));
    const PiecewiseLinearFn right_cut =
        theta_restricted(env, OutputRange::interval(env.x_lo(), cut_hi));
    for (std::size_t s = 0; s < right_cut.segment_count(); ++s) {
      const double mid = 0.5 * (right_cut.points()[s].x + right_cut.points()[s + 1].x);
      CHECK(right_cut.segment_slope(s) <= env.Theta().slope_at(mid) + 1e-9);
    }
    const double cut_lo = env.theta_value(c_hi * (0.05 + 0.7 * unit(rng)));
    const PiecewiseLinearFn left_cut =
        theta_restricted(env, OutputRange::interval(cut_lo, env.x_hi()));
    for (std::size_t s = 0; s < left_cut.segment_count(); ++s) {
      const double mid = 0.5 * (left_cut.points()[s].x + left_cut.points()[s + 1].x);
      CHECK(left_cut.segment_slope(s) >= env.Theta().slope_at(mid) - 1e-9);
    }
  }
}

TEST_CASE("nested ranges order their envelopes") {
  const Environment env = inflected_effort_env();
  const PiecewiseLinearFn narrow =
      theta_restricted(env, OutputRange::interval(env.x_lo(), 0.6));
  const PiecewiseLinearFn wide =
      theta_restricted(env, OutputRange::interval(env.x_lo(), 0.9));
  for (int i = 0; i <= 50; ++i) {
    const double a = narrow.x_min() + (narrow.x_max() - narrow.x_min()) * i / 50.0;
    CHECK(narrow(a) <= wide(a) + 1e-12);
  }
}

TEST_CASE("distributions attaining the concavification value") {
  {
    // Convex effort: always a point mass.
    EffortFunction effort = EffortFunction::power(2.0, 1.0, 0.0, 1.0);
    std::vector<TypeSpec> types;
    types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 1.0));
    types.emplace_back(0.5, CostFunction::power(0.5, 2.0, 0.0, 1.0));
    const Environment env =
        build_environment(InstanceConfig(0.0, 1.0, std::move(effort), std::move(types)));
    const OutputDistribution d = distribution_attaining(env, 0.37, OutputRange::full());
    REQUIRE(d.atoms().size() == 1);
    CHECK(d.mean_effort(env) == doctest::Approx(0.37).epsilon(1e-13));
    CHECK(d.mean_output() == doctest::Approx(env.Theta_value(0.37)).epsilon(1e-13));
  }
  {
    // Boundary effort maps to the top output.
    const Environment env = example1_env();
    const OutputDistribution d =
        distribution_attaining(env, env.c_hi(), OutputRange::full());
    REQUIRE(d.atoms().size() == 1);
    CHECK(d.atoms()[0].x == doctest::Approx(env.x_hi()).epsilon(1e-13));
  }
  {
    // Convex theta (concave effort c = sqrt(x)): the envelope is the chord,
    // attained by mixing the endpoints.
    const Environment env = example2_env();
    const OutputDistribution d = distribution_attaining(env, 0.5, OutputRange::full());
    REQUIRE(d.atoms().size() == 2);
    CHECK(d.atoms()[0].x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d.atoms()[1].x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.atoms()[0].weight == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.mean_output() == doctest::Approx(env.Theta_value(0.5)).epsilon(1e-12));
  }
}

TEST_CASE("random draws meet the distribution contracts") {
  const Environment env = inflected_effort_env();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    OutputRange range = OutputRange::full();
    const double mode = unit(rng);
    if (mode < 0.4) {
      double lo = unit(rng), hi = unit(rng);
      if (lo > hi) std::swap(lo, hi);
      if (hi - lo < 1e-3) continue;
      range = OutputRange::interval(lo, hi);
    } else if (mode < 0.6) {
      double a = unit(rng), b = unit(rng), c = unit(rng);
      range = OutputRange::point_set({a, b, c});
    }
    const auto [a_lo, a_hi] = env.range_effort_interval(range);
    if (a_hi - a_lo < 1e-6) continue;
    const double alpha = a_lo + (a_hi - a_lo) * unit(rng);
    const OutputDistribution d = distribution_attaining(env, alpha, range);
    ++checked;
    CHECK(d.atoms().size() <= 2);
    CHECK(std::abs(d.mean_effort(env) - alpha) <= 1e-10);
    const PiecewiseLinearFn envl = theta_restricted(env, range);
    CHECK(std::abs(d.mean_output() - envl(alpha)) <= 1e-9);
    for (const Atom& a : d.atoms()) CHECK(env.range_contains(range, a.x));
  }
  CHECK(checked > 800);
}

TEST_CASE("assumption checks") {
  {
    const Environment env = example1_env();
    const AssumptionReport rep = check_assumptions(env);
    CHECK(rep.cost_order.holds);
    CHECK(rep.single_peak.holds);
    CHECK(rep.mh_interiority.holds);
    CHECK(rep.interior_effort.applicable);
    CHECK(rep.required_hold(2));
  }
  {
    // Identical costs: the strict ordering fails with zero violation.
    std::vector<TypeSpec> types;
    types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 0.5));
    types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 0.5));
    const Environment env = build_environment(
        InstanceConfig(0.0, 0.5, EffortFunction::linear(1.0, 0.0, 0.0, 0.5), types));
    const AssumptionReport rep = check_assumptions(env);
    CHECK_FALSE(rep.cost_order.holds);
    CHECK(rep.cost_order.violation == doctest::Approx(0.0));
  }
  {
    // Scaled quadratic: ordering strict, marginal costs meet at zero.
    std::vector<TypeSpec> types;
    types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 0.5));
    types.emplace_back(0.5, CostFunction::power(0.5, 2.0, 0.0, 0.5));
    const Environment env = build_environment(
        InstanceConfig(0.0, 0.5, EffortFunction::linear(1.0, 0.0, 0.0, 0.5), types));
    const AssumptionReport rep = check_assumptions(env);
    CHECK(rep.cost_order.holds);
    CHECK(rep.mh_interiority.holds);
    CHECK(rep.ntype_order.holds);
  }
}

TEST_CASE("assumption flags reproduce from their violation scalars") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Environment env = random_instance(rng);
    const AssumptionReport rep = check_assumptions(env);
    for (const AssumptionCheck* c :
         {&rep.cost_order, &rep.single_peak, &rep.mh_interiority, &rep.ntype_order,
          &rep.ntype_single_peak, &rep.interior_effort}) {
      if (c->applicable) CHECK(c->holds == (c->violation <= c->tolerance));
    }
  }
}
