#include <cmath>
#include <random>

#include <doctest.h>

#include "flexmh/functions.hpp"
#include "flexmh/piecewise_linear.hpp"

using namespace flexmh;

namespace {

// O(n^3) oracle: the upper concave envelope at a sample x equals the best
// chord value between any two samples straddling it.
double chord_max_oracle(const std::vector<PLPoint>& pts, double x) {
  double best = -1e300;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].x <= x) {
      for (std::size_t j = i; j < pts.size(); ++j) {
        if (pts[j].x >= x) {
          double v;
          if (j == i) {
            v = pts[i].y;
          } else {
            const double t = (x - pts[i].x) / (pts[j].x - pts[i].x);
            v = pts[i].y + t * (pts[j].y - pts[i].y);
          }
          best = std::max(best, v);
        }
      }
    }
  }
  return best;
}

std::vector<PLPoint> random_samples(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PLPoint> pts(n);
  double x = 0.0;
  for (int i = 0; i < n; ++i) {
    x += 0.01 + unit(rng);
    pts[i] = {x, 2.0 * unit(rng) - 1.0};
  }
  return pts;
}

}  // namespace

TEST_CASE("piecewise linear basics") {
  PiecewiseLinearFn f({{0.0, 0.0}, {1.0, 2.0}, {3.0, 1.0}});
  CHECK(f(0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f(2.0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(f.segment_slope(0) == doctest::Approx(2.0));
  CHECK(f.segment_slope(1) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(f(-0.5), std::domain_error);
  CHECK_THROWS_AS(f(3.5), std::domain_error);
  CHECK_THROWS_AS(PiecewiseLinearFn({{0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseLinearFn({{0.0, 0.0}, {0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseLinearFn({{0.0, 0.0}, {1.0, std::nan("")}}),
                  std::invalid_argument);
}

TEST_CASE("piecewise linear inverse is exact on the node set") {
  PiecewiseLinearFn f({{0.0, 0.0}, {0.3, 0.2}, {1.0, 1.5}});
  PiecewiseLinearFn inv = f.inverse();
  for (double x : {0.0, 0.1, 0.25, 0.3, 0.77, 1.0}) {
    CHECK(inv(f(x)) == doctest::Approx(x).epsilon(1e-13));
  }
}

TEST_CASE("envelope of a linear function is the function itself") {
  std::vector<PLPoint> pts;
  for (int i = 0; i <= 100; ++i) {
    const double a = 0.5 * i / 100.0;
    pts.push_back({a, a});
  }
  const PiecewiseLinearFn env = upper_concave_envelope(pts);
  CHECK(env.points().size() == 2);
  CHECK(env(0.25) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("envelope of a convex function is its chord") {
  std::vector<PLPoint> pts;
  for (int i = 0; i <= 200; ++i) {
    const double a = i / 200.0;
    pts.push_back({a, a * a});
  }
  const PiecewiseLinearFn env = upper_concave_envelope(pts);
  CHECK(env.points().size() == 2);
  CHECK(env(0.5) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("envelope matches the chord-max oracle on random samples") {
  std::mt19937_64 rng(20240811);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<PLPoint> pts = random_samples(rng, 50);
    const PiecewiseLinearFn env = upper_concave_envelope(pts);
    for (const PLPoint& p : pts) {
      CHECK(std::abs(env(p.x) - chord_max_oracle(pts, p.x)) <= 1e-12);
    }
  }
}

TEST_CASE("envelope properties: idempotence, dominance, concavity") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<PLPoint> pts = random_samples(rng, 40);
    const PiecewiseLinearFn env = upper_concave_envelope(pts);

    // Dominance with equality at breakpoints.
    for (const PLPoint& p : pts) CHECK(env(p.x) >= p.y - 1e-12);
    for (const PLPoint& b : env.points()) {
      bool is_sample = false;
      for (const PLPoint& p : pts) {
        if (p.x == b.x && p.y == b.y) is_sample = true;
      }
      CHECK(is_sample);
    }

    // Slopes non-increasing.
    for (std::size_t s = 1; s < env.segment_count(); ++s) {
      CHECK(env.segment_slope(s) <= env.segment_slope(s - 1) + 1e-12);
    }

    // Idempotence, exactly.
    const PiecewiseLinearFn env2 = upper_concave_envelope(env.points());
    REQUIRE(env2.points().size() == env.points().size());
    for (std::size_t i = 0; i < env.points().size(); ++i) {
      CHECK(env2.points()[i].x == env.points()[i].x);
      CHECK(env2.points()[i].y == env.points()[i].y);
    }
  }
}

TEST_CASE("lower convex envelope mirrors the upper one") {
  std::mt19937_64 rng(99);
  const std::vector<PLPoint> pts = random_samples(rng, 30);
  const PiecewiseLinearFn lower = lower_convex_envelope(pts);
  std::vector<PLPoint> neg = pts;
  for (auto& p : neg) p.y = -p.y;
  const PiecewiseLinearFn upper = upper_concave_envelope(neg);
  for (const PLPoint& p : pts) {
    CHECK(lower(p.x) == doctest::Approx(-upper(p.x)).epsilon(1e-14));
    CHECK(lower(p.x) <= p.y + 1e-12);
  }

  // A convex input is its own lower envelope; a concave increasing one maps
  // to its chord.
  std::vector<PLPoint> convex, concave;
  for (int i = 0; i <= 100; ++i) {
    const double a = i / 100.0;
    convex.push_back({a, a * a});
    concave.push_back({a, std::sqrt(a)});
  }
  CHECK(lower_convex_envelope(convex)(0.37) ==
        doctest::Approx(0.37 * 0.37).epsilon(1e-10));
  CHECK(lower_convex_envelope(concave).points().size() == 2);
}

TEST_CASE("inverse_monotone examples") {
  const CostFunction sq = CostFunction::power(1.0, 2.0, 0.0, 0.5);
  CHECK(inverse_monotone([&](double a) { return sq.derivative(a); }, 0.5, 0.0, 0.5) ==
        doctest::Approx(0.25).epsilon(1e-10));

  const CostFunction cube = CostFunction::power(2.0 / 3.0, 3.0, 0.0, 0.5);
  CHECK(inverse_monotone([&](double a) { return cube.derivative(a); }, 1.0 / 3.0, 0.0,
                         0.5) == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-9));

  CHECK(inverse_monotone([](double x) { return x * x; }, 0.09, 0.0, 1.0) ==
        doctest::Approx(0.3).epsilon(1e-10));

  // Decreasing function and clamping behaviour.
  CHECK(inverse_monotone([](double x) { return -x; }, -0.4, 0.0, 1.0) ==
        doctest::Approx(0.4).epsilon(1e-10));
  CHECK(inverse_monotone([](double x) { return x; }, 1.0 + 1e-12, 0.0, 1.0) == 1.0);
  CHECK_THROWS_AS(inverse_monotone([](double x) { return x; }, 2.0, 0.0, 1.0),
                  std::domain_error);
}

TEST_CASE("inverse_monotone composed with f is the identity") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double beta = 0.5 + 1.5 * unit(rng);
    const double p = 2.0 + 2.0 * unit(rng);
    const CostFunction k = CostFunction::power(beta, p, 0.0, 1.0);
    const auto f = [&](double a) { return k.derivative(a); };
    const double a = 0.05 + 0.9 * unit(rng);
    const double x = inverse_monotone(f, f(a), 0.0, 1.0);
    CHECK(std::abs(x - a) <= 1e-10);
  }
}

TEST_CASE("integral of the inverse marginal cost") {
  const CostFunction sq = CostFunction::power(1.0, 2.0, 0.0, 0.5);
  CHECK(integral_of_inverse_derivative(sq, 0.3, 0.3) == 0.0);
  CHECK(integral_of_inverse_derivative(sq, 0.0, 0.5) ==
        doctest::Approx(0.0625).epsilon(1e-10));

  // Dense trapezoid oracle, frozen: int_{1/3}^{1/2} sqrt(k/2) dk.
  const CostFunction cube = CostFunction::power(2.0 / 3.0, 3.0, 0.0, 0.5);
  CHECK(std::abs(integral_of_inverse_derivative(cube, 1.0 / 3.0, 0.5) -
                 0.07594482434136436) <= 1e-8);

  CHECK_THROWS_AS(integral_of_inverse_derivative(sq, -0.5, 0.5), std::domain_error);
  CHECK_THROWS_AS(integral_of_inverse_derivative(sq, 0.0, 1.5), std::domain_error);
}

TEST_CASE("integral routes agree on random instances") {
  // The op itself cross-checks quadrature against the closed form and throws
  // on disagreement; this drives the check across the family.
  std::mt19937_64 rng(4321);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double beta = 0.5 + 1.5 * unit(rng);
    const double p = 2.0 + 2.0 * unit(rng);
    CostFunction k = CostFunction::power(beta, p, 0.0, 1.0);
    if (trial % 3 == 0) k = CostFunction::scaled(0.3 + 0.6 * unit(rng), std::move(k));
    const double k_max = k.derivative(1.0);
    double lo = k_max * unit(rng);
    double hi = k_max * unit(rng);
    if (lo > hi) std::swap(lo, hi);
    CHECK_NOTHROW(integral_of_inverse_derivative(k, lo, hi));
  }
}

TEST_CASE("cost function families and validation") {
  const CostFunction k = CostFunction::power(2.0, 3.0, 0.0, 1.0);
  CHECK(k(0.5) == doctest::Approx(0.25));
  CHECK(k.derivative(0.5) == doctest::Approx(1.5));
  CHECK(k.second_derivative(0.5) == doctest::Approx(6.0));
  CHECK(k.derivative_inverse(1.5) == doctest::Approx(0.5).epsilon(1e-12));

  const CostFunction scaled = CostFunction::scaled(0.5, k);
  CHECK(scaled(0.5) == doctest::Approx(0.125));
  CHECK(scaled.derivative_inverse(0.75) == doctest::Approx(0.5).epsilon(1e-12));

  const CostFunction poly = CostFunction::polynomial({0.0, 0.0, 1.0, 0.5}, 0.0, 1.0);
  CHECK(poly(1.0) == doctest::Approx(1.5));
  CHECK(poly.derivative(1.0) == doctest::Approx(3.5));
  CHECK(poly.derivative_inverse(3.5) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_NOTHROW(poly.validate_on_grid());

  // A linear "cost" has a constant derivative: rejected by the grid check.
  CHECK_THROWS_AS(CostFunction::polynomial({0.0, 1.0}, 0.0, 1.0).validate_on_grid(),
                  std::invalid_argument);
  CHECK_THROWS_AS(CostFunction::power(-1.0, 2.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CostFunction::power(1.0, 1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CostFunction::scaled(1.5, k), std::invalid_argument);
}

TEST_CASE("effort function families") {
  const EffortFunction lin = EffortFunction::linear(2.0, 0.0, 0.0, 1.0);
  CHECK(lin(0.3) == doctest::Approx(0.6));
  CHECK(lin.inverse(0.6) == doctest::Approx(0.3));
  CHECK(lin.derivative(0.7) == doctest::Approx(2.0));

  const EffortFunction pow = EffortFunction::power(2.0, 1.0, 0.0, 1.0);
  CHECK(pow(0.3) == doctest::Approx(0.09));
  CHECK(pow.inverse(0.09) == doctest::Approx(0.3).epsilon(1e-12));

  // Kinked effort: the derivative at a kink is the right-hand slope.
  const EffortFunction pwl = EffortFunction::piecewise(
      PiecewiseLinearFn({{0.0, 0.0}, {0.5, 0.2}, {1.0, 1.0}}));
  CHECK(pwl.derivative(0.25) == doctest::Approx(0.4));
  CHECK(pwl.derivative(0.5) == doctest::Approx(1.6));
  CHECK(pwl.kink_points().size() == 1);
  CHECK_THROWS_AS(EffortFunction::linear(-1.0, 0.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(EffortFunction::piecewise(
                      PiecewiseLinearFn({{0.0, 0.5}, {1.0, 0.2}})),
                  std::invalid_argument);
}

TEST_CASE("finite-difference fallback tracks the analytic derivative") {
  const CostFunction k = CostFunction::power(1.3, 2.7, 0.0, 2.0);
  for (double a : {0.1, 0.5, 1.0, 1.9}) {
    const double fd =
        finite_difference_derivative([&](double x) { return k(x); }, a);
    CHECK(std::abs(fd - k.derivative(a)) <= 1e-7 * std::max(1.0, k.derivative(a)));
  }
}
