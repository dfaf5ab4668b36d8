#include "flexmh/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "flexmh/parallel.hpp"
#include "flexmh/scalar_opt.hpp"

namespace flexmh {

namespace {

constexpr double kTieTolerance = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  v.back() = hi;
  return v;
}

std::vector<Benchmark> benchmarks_for(const Environment& env) {
  std::vector<Benchmark> b(env.n_types());
  for (std::size_t t = 0; t < env.n_types(); ++t) {
    const PureMhSolution mh = solve_pure_mh(env, t);
    const FirstBestSolution fb = solve_first_best(env, t);
    b[t] = {mh.alpha, mh.profit, fb.alpha, fb.surplus, mh.single_peak_warning};
  }
  return b;
}

std::vector<std::string> binding_flags(const Environment& env, const Menu& menu) {
  std::vector<std::string> flags;
  const FeasibilityReport rep = check_feasibility(env, menu);
  for (std::size_t t = 0; t < menu.size(); ++t) {
    if (menu.entries[t].contract.constant <= 1e-12) {
      flags.push_back("LL" + std::to_string(t));
    }
    for (std::size_t u = 0; u < menu.size(); ++u) {
      if (u != t && std::abs(rep.ic_slack[t][u]) <= kBindingTolerance) {
        flags.push_back("IC" + std::to_string(t) + "->" + std::to_string(u));
      }
    }
  }
  return flags;
}

// Upper concave hull maintained left to right; the state after feeding the
// first i samples is the restricted envelope over those samples.
class IncrementalUpperHull {
 public:
  void push(PLPoint p) {
    while (pts_.size() >= 2 && turn(pts_[pts_.size() - 2], pts_.back(), p) >= 0.0) {
      pts_.pop_back();
    }
    pts_.push_back(p);
  }
  double value(double x) const {
    auto it = std::upper_bound(pts_.begin(), pts_.end(), x,
                               [](double v, const PLPoint& p) { return v < p.x; });
    std::size_t hi = static_cast<std::size_t>(it - pts_.begin());
    if (hi == 0) return pts_.front().y;
    if (hi >= pts_.size()) hi = pts_.size() - 1;
    const PLPoint& a = pts_[hi - 1];
    const PLPoint& b = pts_[hi];
    const double t = (x - a.x) / (b.x - a.x);
    return a.y + t * (b.y - a.y);
  }

 private:
  static double turn(const PLPoint& a, const PLPoint& b, const PLPoint& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  }
  std::vector<PLPoint> pts_;
};

// Restricted concavification value cache for the refinement stage, keyed by
// the effort hull of the range.
class EnvelopeCache {
 public:
  explicit EnvelopeCache(const Environment& env) : env_(env) {}

  // Envelope of theta over [0, r_hi] evaluated at alpha.
  double left_value(double r_hi, double alpha) {
    if (r_hi <= 1e-14 * std::max(1.0, env_.c_hi())) return env_.x_lo();
    const PiecewiseLinearFn& e = fetch(left_, 0.0, r_hi);
    return e(std::min(alpha, r_hi));
  }
  // Envelope of theta over [r_lo, c_hi] evaluated at alpha.
  double right_value(double r_lo, double alpha) {
    if (env_.c_hi() - r_lo <= 1e-14 * std::max(1.0, env_.c_hi())) return env_.x_hi();
    const PiecewiseLinearFn& e = fetch(right_, r_lo, env_.c_hi());
    return e(std::max(alpha, r_lo));
  }

 private:
  const PiecewiseLinearFn& fetch(std::map<double, PiecewiseLinearFn>& cache, double lo,
                                 double hi) {
    const double key = (&cache == &left_) ? hi : lo;
    auto it = cache.find(key);
    if (it == cache.end()) {
      if (cache.size() > 4096) cache.clear();
      OutputRange r = OutputRange::interval(env_.theta_value(lo), env_.theta_value(hi));
      it = cache.emplace(key, theta_restricted(env_, r)).first;
    }
    return it->second;
  }

  const Environment& env_;
  std::map<double, PiecewiseLinearFn> left_;
  std::map<double, PiecewiseLinearFn> right_;
};

struct Candidate {
  double objective = kNegInf;
  std::array<double, 4> key{};  // (alpha0, alpha1, r0_hi, -r1_lo)

  bool better_than(const Candidate& other) const {
    if (objective != other.objective) return objective > other.objective;
    return key < other.key;
  }
};

int pattern_search(const std::function<double(std::array<double, 4>&)>& eval,
                   std::array<double, 4>& point, double& value, int dims,
                   double initial_step, double final_step) {
  double step = initial_step;
  int iterations = 0;
  while (step >= final_step) {
    bool improved = false;
    for (int d = 0; d < dims; ++d) {
      for (double dir : {+1.0, -1.0}) {
        std::array<double, 4> trial = point;
        trial[d] += dir * step;
        const double v = eval(trial);
        if (v > value) {
          point = trial;
          value = v;
          improved = true;
        }
      }
    }
    ++iterations;
    if (!improved) step *= 0.5;
  }
  return iterations;
}

}  // namespace

double recompute_objective(const Environment& env, const Menu& menu) {
  double obj = 0.0;
  for (std::size_t t = 0; t < menu.size(); ++t) {
    const MenuEntry& e = menu.entries[t];
    obj += env.prob(t) * (e.recommended.mean_output() -
                          e.contract.power * e.contract.target_effort -
                          e.contract.constant);
  }
  return obj;
}

PureMhSolution solve_pure_mh(const Environment& env, std::size_t t) {
  const CostFunction& cost = env.cost(t);
  const auto profile = [&](double a) {
    return env.Theta_value(a) - cost.derivative(a) * a;
  };

  // Grid scan; the assumption check reuses the same samples.
  const auto& grid = env.theta().points();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = profile(grid[i].x);
  const double peak_violation = single_peak_violation(values);

  PureMhSolution sol;
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  if (peak_violation > 1e-10) {
    sol.single_peak_warning = true;
    sol.alpha = grid[best].x;
    sol.profit = values[best];
  } else {
    const double lo = grid[best == 0 ? 0 : best - 1].x;
    const double hi = grid[std::min(best + 1, grid.size() - 1)].x;
    ScalarMax refined = golden_section_max(profile, lo, hi, 1e-11);
    // Stationary-point polish; value comparisons alone bottom out in
    // floating-point noise before 1e-9 in alpha.
    const ScalarMax polished = maximize_on_envelope(
        env.Theta(), [&](double a) { return -cost.derivative(a) * a; },
        [&](double a) { return -(cost.derivative(a) + cost.second_derivative(a) * a); });
    sol.alpha = polished.value >= refined.value ? polished.x : refined.x;
    sol.profit = std::max(polished.value, refined.value);
  }
  sol.contract = make_contract(env, t, sol.alpha, 0.0, OutputRange::full());
  sol.distribution = distribution_attaining(env, sol.alpha, OutputRange::full());
  return sol;
}

FirstBestSolution solve_first_best(const Environment& env, std::size_t t) {
  const CostFunction& cost = env.cost(t);
  const auto surplus = [&](double a) { return env.Theta_value(a) - cost(a); };
  const ScalarMax scanned =
      grid_golden_max(surplus, env.c_lo(), env.c_hi(),
                      env.solver_config().effort_grid, 1e-11);
  const ScalarMax polished =
      maximize_on_envelope(env.Theta(), [&](double a) { return -cost(a); },
                           [&](double a) { return -cost.derivative(a); });
  if (polished.value >= scanned.value) return {polished.x, polished.value};
  return {scanned.x, scanned.value};
}

namespace {

// Common-power search shared by the binary equal-power solver and the N-type
// initialization.
ScalarMax equal_power_common(const Environment& env) {
  double k_lo = 0.0, k_hi = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < env.n_types(); ++t) {
    k_lo = std::max(k_lo, env.cost(t).derivative(env.c_lo()));
    k_hi = std::min(k_hi, env.cost(t).derivative(env.c_hi()));
  }
  if (!(k_hi > k_lo)) {
    throw std::invalid_argument("equal power: empty common power interval");
  }
  const auto welfare = [&](double kappa) {
    double w = 0.0;
    for (std::size_t t = 0; t < env.n_types(); ++t) {
      const double a = env.cost(t).derivative_inverse(kappa);
      w += env.prob(t) * (env.Theta_value(a) - kappa * a);
    }
    return w;
  };
  return grid_golden_max(welfare, k_lo, k_hi, env.solver_config().equal_power_grid,
                         1e-10 * std::max(1.0, k_hi - k_lo));
}

SolveReport equal_power_report(const Environment& env, double kappa,
                               std::vector<Benchmark> benchmarks) {
  std::vector<double> efforts(env.n_types());
  std::vector<double> payments(env.n_types(), 0.0);
  std::vector<OutputRange> ranges(env.n_types(), OutputRange::full());
  for (std::size_t t = 0; t < env.n_types(); ++t) {
    efforts[t] = env.cost(t).derivative_inverse(kappa);
  }
  SolveReport rep;
  rep.menu = make_menu(env, efforts, payments, ranges);
  rep.objective = recompute_objective(env, rep.menu);
  rep.benchmarks = std::move(benchmarks);
  rep.regime = Regime::EqualPower;
  rep.binding_constraints = binding_flags(env, rep.menu);
  rep.trace.method = "equal-power";
  rep.trace.grid_sizes = {env.solver_config().equal_power_grid};
  return rep;
}

}  // namespace

SolveReport solve_menu_equal_power(const Environment& env) {
  const ScalarMax best = equal_power_common(env);
  return equal_power_report(env, best.x, benchmarks_for(env));
}

SolveReport solve_menu_convex_effort(const Environment& env) {
  if (env.n_types() != 2) {
    throw std::invalid_argument("convex-effort solver: needs binary types");
  }
  const double y_tol = 1e-9 * std::max(1.0, env.x_hi());
  for (const PLPoint& p : env.theta().points()) {
    if (std::abs(env.Theta_value(p.x) - p.y) > y_tol) {
      throw std::invalid_argument("convex-effort solver: effort function is not convex");
    }
  }
  const AssumptionReport assumptions = check_assumptions(env);
  if (!assumptions.cost_order.holds) {
    throw std::invalid_argument("convex-effort solver: cost ordering assumption fails");
  }

  const CostFunction& k0 = env.cost(0);
  const CostFunction& k1 = env.cost(1);
  const double c_hi = env.c_hi();
  const double p0 = env.prob(0), p1 = env.prob(1);

  const auto m1_of = [&](double a0, double a1) {
    return std::max(0.0, (k0.derivative(a0) * a0 - k1(a0)) -
                             (k1.derivative(a1) * a1 - k1(a1)));
  };
  const auto feasible = [&](double a0, double a1) {
    return a0 <= a1 + 1e-15 && k0.derivative(a0) >= k1.derivative(a1) - 1e-12;
  };
  const auto value = [&](double a0, double a1) {
    if (!feasible(a0, a1)) return kNegInf;
    return p0 * (env.Theta_value(a0) - k0.derivative(a0) * a0) +
           p1 * (env.Theta_value(a1) - k1.derivative(a1) * a1 - m1_of(a0, a1));
  };

  const auto& cfg = env.solver_config();
  const std::vector<double> g0 = linspace(0.0, c_hi, cfg.convex_grid[0]);
  const std::vector<double> g1 = linspace(0.0, c_hi, cfg.convex_grid[1]);
  double best_v = kNegInf;
  std::array<double, 2> best_pt{0.0, 0.0};
  for (double a0 : g0) {
    for (double a1 : g1) {
      const double v = value(a0, a1);
      if (v > best_v) {
        best_v = v;
        best_pt = {a0, a1};
      }
    }
  }

  // Local pattern search from the best cell.
  std::array<double, 4> pt{best_pt[0], best_pt[1], 0.0, 0.0};
  const auto eval2 = [&](std::array<double, 4>& q) {
    q[0] = std::clamp(q[0], 0.0, c_hi);
    q[1] = std::clamp(q[1], 0.0, c_hi);
    return value(q[0], q[1]);
  };
  int iters = pattern_search(eval2, pt, best_v, 2, c_hi / cfg.convex_grid[0], 1e-8);

  // Refinement along the payment kink, where the binding constraint switches
  // between the liability bound and the upward incentive constraint.
  const auto boundary_alpha1 = [&](double a0) -> double {
    const double target = k0.derivative(a0) * a0 - k1(a0);
    const auto g = [&](double a1) { return k1.derivative(a1) * a1 - k1(a1); };
    if (g(c_hi) < target) return -1.0;
    if (g(a0) >= target) return a0;
    return inverse_monotone(g, target, a0, c_hi);
  };
  const auto boundary_value = [&](double a0) {
    const double a1 = boundary_alpha1(a0);
    if (a1 < 0.0) return kNegInf;
    return value(a0, a1);
  };
  ScalarMax on_boundary =
      grid_golden_max(boundary_value, 0.0, c_hi, cfg.equal_power_grid, 1e-13);
  {
    // Derivative polish along the kink: value comparisons flatten out in
    // floating-point noise well before the target accuracy.
    const auto path_derivative = [&](double a0) {
      const double a1 = boundary_alpha1(a0);
      if (a1 < 0.0 || a1 <= a0) return kNegInf;
      const double da1 = (k0.second_derivative(a0) * a0 + k0.derivative(a0) -
                          k1.derivative(a0)) /
                         (k1.second_derivative(a1) * a1);
      const double f0p = env.Theta().slope_at(a0) - k0.derivative(a0) -
                         k0.second_derivative(a0) * a0;
      const double f1p = env.Theta().slope_at(a1) - k1.derivative(a1) -
                         k1.second_derivative(a1) * a1;
      return p0 * f0p + p1 * f1p * da1;
    };
    const double w = 2.0 * c_hi / cfg.equal_power_grid;
    const double lo = std::max(1e-12, on_boundary.x - w);
    const double hi = std::min(c_hi, on_boundary.x + w);
    if (path_derivative(lo) > 0.0 && path_derivative(hi) < 0.0) {
      const double a0 = bisect_root_decreasing(path_derivative, lo, hi, 1e-14);
      const double v = boundary_value(a0);
      if (v >= on_boundary.value - 1e-12) on_boundary = {a0, v};
    }
  }
  if (on_boundary.value > best_v) {
    best_v = on_boundary.value;
    pt = {on_boundary.x, boundary_alpha1(on_boundary.x), 0.0, 0.0};
  }

  // Stationary candidates of the two smooth regimes. With the payment at
  // zero the objective is the pair of pure moral-hazard profiles; with a
  // positive payment it is separable as well, so each candidate comes from
  // one-dimensional maximizations.
  {
    const auto consider = [&](double a0, double a1) {
      const double v = value(std::clamp(a0, 0.0, c_hi), std::clamp(a1, 0.0, c_hi));
      if (v > best_v) {
        best_v = v;
        pt = {std::clamp(a0, 0.0, c_hi), std::clamp(a1, 0.0, c_hi), 0.0, 0.0};
      }
    };
    const ScalarMax mh0 = maximize_on_envelope(
        env.Theta(), [&](double a) { return -k0.derivative(a) * a; },
        [&](double a) { return -(k0.derivative(a) + k0.second_derivative(a) * a); });
    const ScalarMax mh1 = maximize_on_envelope(
        env.Theta(), [&](double a) { return -k1.derivative(a) * a; },
        [&](double a) { return -(k1.derivative(a) + k1.second_derivative(a) * a); });
    consider(mh0.x, mh1.x);
    const double weight = p1 / p0;
    const ScalarMax paid0 = maximize_on_envelope(
        env.Theta(),
        [&](double a) {
          return -k0.derivative(a) * a - weight * (k0.derivative(a) * a - k1(a));
        },
        [&](double a) {
          const double marginal = k0.derivative(a) + k0.second_derivative(a) * a;
          return -marginal - weight * (marginal - k1.derivative(a));
        });
    const ScalarMax paid1 =
        maximize_on_envelope(env.Theta(), [&](double a) { return -k1(a); },
                             [&](double a) { return -k1.derivative(a); });
    consider(paid0.x, paid1.x);
    consider(paid0.x, mh1.x);
    consider(mh0.x, paid1.x);
  }
  iters += pattern_search(eval2, pt, best_v, 2, 1e-6, 1e-10);

  std::vector<Benchmark> benchmarks = benchmarks_for(env);

  // A single full-range contract is preferred among ties.
  const ScalarMax pooled = equal_power_common(env);
  if (pooled.value >= best_v - kTieTolerance) {
    SolveReport rep = equal_power_report(env, pooled.x, std::move(benchmarks));
    rep.trace.method = "convex-effort reduction (pooled)";
    rep.trace.grid_sizes = {cfg.convex_grid[0], cfg.convex_grid[1]};
    rep.trace.refinement_iterations = iters;
    return rep;
  }

  const double a0 = pt[0], a1 = pt[1];
  std::vector<double> efforts{a0, a1};
  std::vector<double> payments{0.0, m1_of(a0, a1)};
  std::vector<OutputRange> ranges;
  ranges.push_back(OutputRange::point_set({env.theta_value(a0)}));
  ranges.push_back(OutputRange::point_set({env.theta_value(a1)}));

  SolveReport rep;
  rep.menu = make_menu(env, efforts, payments, ranges);
  rep.objective = recompute_objective(env, rep.menu);
  rep.benchmarks = std::move(benchmarks);
  rep.regime = Regime::Screening;
  rep.binding_constraints = binding_flags(env, rep.menu);
  rep.trace.method = "convex-effort reduction (screening)";
  rep.trace.grid_sizes = {cfg.convex_grid[0], cfg.convex_grid[1]};
  rep.trace.refinement_iterations = iters;
  return rep;
}

namespace {

struct GeneralEvaluator {
  const Environment& env;
  EnvelopeCache cache;
  double cap;

  explicit GeneralEvaluator(const Environment& e) : env(e), cache(e) {
    double min_prob = 1.0;
    for (std::size_t t = 0; t < e.n_types(); ++t) min_prob = std::min(min_prob, e.prob(t));
    cap = e.x_hi() / min_prob;
  }

  // point = (alpha0, alpha1, r0_hi, r1_lo) in effort space.
  double operator()(std::array<double, 4>& p) {
    const double c_hi = env.c_hi();
    p[0] = std::clamp(p[0], 0.0, c_hi);
    p[1] = std::clamp(p[1], 0.0, c_hi);
    if (p[0] > p[1]) return kNegInf;
    p[2] = std::clamp(p[2], p[0], c_hi);
    p[3] = std::clamp(p[3], 0.0, p[1]);
    const double kappa0 = env.cost(0).derivative(p[0]);
    const double kappa1 = env.cost(1).derivative(p[1]);
    if (kappa0 < kappa1 - 1e-12) return kNegInf;

    std::vector<ContractElements> elems(2);
    elems[0] = {kappa0, kappa0 * p[0] - env.cost(0)(p[0]), 0.0, p[2]};
    elems[1] = {kappa1, kappa1 * p[1] - env.cost(1)(p[1]), p[3], c_hi};
    const auto m = minimal_payments_elements(env, elems);
    if (!m) return kNegInf;
    const double e0 = cache.left_value(p[2], p[0]);
    const double e1 = cache.right_value(p[3], p[1]);
    return env.prob(0) * (e0 - kappa0 * p[0] - (*m)[0]) +
           env.prob(1) * (e1 - kappa1 * p[1] - (*m)[1]);
  }
};

}  // namespace

SolveReport solve_menu_general(const Environment& env) {
  if (env.n_types() != 2) {
    throw std::invalid_argument("general solver: needs binary types");
  }
  const AssumptionReport assumptions = check_assumptions(env);
  if (!assumptions.cost_order.holds || !assumptions.single_peak.holds) {
    throw std::invalid_argument("general solver: assumptions violated");
  }

  const auto& cfg = env.solver_config();
  const double c_hi = env.c_hi();
  const auto& samples = env.theta().points();
  const std::size_t n_samples = samples.size();

  const std::vector<double> g0 = linspace(0.0, c_hi, cfg.general_grid[0]);
  const std::vector<double> g1 = linspace(0.0, c_hi, cfg.general_grid[1]);

  // Range endpoints snap to sample indices so prefix/suffix hulls are exact.
  const auto index_grid = [&](int count) {
    std::vector<std::size_t> idx;
    for (int j = 0; j < count; ++j) {
      idx.push_back(static_cast<std::size_t>(
          std::llround(static_cast<double>(n_samples - 1) * j / (count - 1))));
    }
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
  };
  const std::vector<std::size_t> r0_idx = index_grid(cfg.general_grid[2]);
  const std::vector<std::size_t> r1_idx = index_grid(cfg.general_grid[3]);

  // Left-restricted envelope values at every (r0, alpha0) grid pair.
  std::vector<std::vector<double>> E0(r0_idx.size(),
                                      std::vector<double>(g0.size(), kNegInf));
  {
    IncrementalUpperHull hull;
    std::size_t fed = 0;
    for (std::size_t j = 0; j < r0_idx.size(); ++j) {
      while (fed <= r0_idx[j]) hull.push(samples[fed++]);
      const double r0 = samples[r0_idx[j]].x;
      for (std::size_t i = 0; i < g0.size(); ++i) {
        if (g0[i] <= r0) E0[j][i] = hull.value(g0[i]);
      }
    }
  }
  // Right-restricted envelopes via the mirrored hull.
  std::vector<std::vector<double>> E1(r1_idx.size(),
                                      std::vector<double>(g1.size(), kNegInf));
  {
    IncrementalUpperHull hull;
    std::size_t fed = 0;
    for (std::size_t j = 0; j < r1_idx.size(); ++j) {
      while (fed <= r1_idx[j]) {
        const PLPoint& s = samples[n_samples - 1 - fed];
        hull.push({-s.x, s.y});
        ++fed;
      }
      const double r1 = samples[n_samples - 1 - r1_idx[j]].x;
      for (std::size_t i = 0; i < g1.size(); ++i) {
        if (g1[i] >= r1) E1[j][i] = hull.value(-g1[i]);
      }
    }
  }

  // Coarse scan, parallel over alpha0 with a deterministic chunk reduction.
  const std::size_t n_types = env.n_types();
  std::vector<double> kappa0(g0.size()), base0(g0.size());
  std::vector<double> kappa1(g1.size()), base1(g1.size());
  for (std::size_t i = 0; i < g0.size(); ++i) {
    kappa0[i] = env.cost(0).derivative(g0[i]);
    base0[i] = kappa0[i] * g0[i] - env.cost(0)(g0[i]);
  }
  for (std::size_t i = 0; i < g1.size(); ++i) {
    kappa1[i] = env.cost(1).derivative(g1[i]);
    base1[i] = kappa1[i] * g1[i] - env.cost(1)(g1[i]);
  }
  const std::size_t chunk_count = 64;
  std::vector<Candidate> chunk_best(chunk_count);
  parallel_chunks(g0.size(), chunk_count, [&](std::size_t c, std::size_t b, std::size_t e) {
    Candidate local;
    std::vector<ContractElements> elems(n_types);
    for (std::size_t i0 = b; i0 < e; ++i0) {
      for (std::size_t i1 = 0; i1 < g1.size(); ++i1) {
        if (g0[i0] > g1[i1] || kappa0[i0] < kappa1[i1] - 1e-12) continue;
        for (std::size_t j0 = 0; j0 < r0_idx.size(); ++j0) {
          if (E0[j0][i0] == kNegInf) continue;
          const double r0 = samples[r0_idx[j0]].x;
          elems[0] = {kappa0[i0], base0[i0], 0.0, r0};
          for (std::size_t j1 = 0; j1 < r1_idx.size(); ++j1) {
            if (E1[j1][i1] == kNegInf) continue;
            const double r1 = samples[n_samples - 1 - r1_idx[j1]].x;
            elems[1] = {kappa1[i1], base1[i1], r1, c_hi};
            const auto m = minimal_payments_elements(env, elems);
            if (!m) continue;
            Candidate cand;
            cand.objective =
                env.prob(0) * (E0[j0][i0] - kappa0[i0] * g0[i0] - (*m)[0]) +
                env.prob(1) * (E1[j1][i1] - kappa1[i1] * g1[i1] - (*m)[1]);
            cand.key = {g0[i0], g1[i1], r0, -r1};
            if (cand.better_than(local)) local = cand;
          }
        }
      }
    }
    chunk_best[c] = local;
  });
  Candidate coarse;
  for (const Candidate& c : chunk_best) {
    if (c.better_than(coarse)) coarse = c;
  }
  if (coarse.objective == kNegInf) {
    throw std::logic_error("general solver: no feasible grid point");
  }

  // Multistart refinement: the coarse winner, the pooled solution, and (for a
  // convex effort function) the reduced-problem solution.
  GeneralEvaluator eval(env);
  std::vector<std::array<double, 4>> starts;
  starts.push_back({coarse.key[0], coarse.key[1], coarse.key[2], -coarse.key[3]});
  const ScalarMax pooled = equal_power_common(env);
  {
    const double a0 = env.cost(0).derivative_inverse(pooled.x);
    const double a1 = env.cost(1).derivative_inverse(pooled.x);
    starts.push_back({a0, a1, c_hi, 0.0});
  }
  bool convex_effort = true;
  for (const PLPoint& p : samples) {
    if (std::abs(env.Theta_value(p.x) - p.y) > 1e-9 * std::max(1.0, env.x_hi())) {
      convex_effort = false;
      break;
    }
  }
  std::optional<SolveReport> reduced;
  if (convex_effort) {
    reduced = solve_menu_convex_effort(env);
    const double a0 = reduced->menu.entries[0].contract.target_effort;
    const double a1 = reduced->menu.entries[1].contract.target_effort;
    starts.push_back({a0, a1, a0, a1});
  }

  std::array<double, 4> best_pt = starts.front();
  double best_v = kNegInf;
  int iter_total = 0;
  const double init_step = c_hi / cfg.general_grid[0];
  for (std::array<double, 4> s : starts) {
    double v = eval(s);
    iter_total += pattern_search([&](std::array<double, 4>& q) { return eval(q); }, s, v,
                                 4, init_step, cfg.refine_tol);
    if (v > best_v) {
      best_v = v;
      best_pt = s;
    }
  }

  std::vector<Benchmark> benchmarks = benchmarks_for(env);

  // Prefer the single full-range contract among ties.
  if (pooled.value >= best_v - kTieTolerance) {
    SolveReport rep = equal_power_report(env, pooled.x, std::move(benchmarks));
    rep.trace.method = "general (pooled)";
    rep.trace.grid_sizes.assign(cfg.general_grid.begin(), cfg.general_grid.end());
    rep.trace.refinement_iterations = iter_total;
    return rep;
  }

  const double a0 = best_pt[0], a1 = best_pt[1];
  const double r0 = std::clamp(best_pt[2], a0, c_hi);
  const double r1 = std::clamp(best_pt[3], 0.0, a1);
  std::vector<OutputRange> ranges;
  ranges.push_back(OutputRange::interval(env.x_lo(), env.theta_value(r0)));
  ranges.push_back(OutputRange::interval(env.theta_value(r1), env.x_hi()));
  const auto m = minimal_payments(env, {a0, a1}, ranges);
  if (!m) throw std::logic_error("general solver: refined point lost feasibility");

  SolveReport rep;
  rep.menu = make_menu(env, {a0, a1}, *m, ranges);
  rep.objective = recompute_objective(env, rep.menu);
  rep.benchmarks = std::move(benchmarks);
  rep.regime = Regime::Screening;
  rep.binding_constraints = binding_flags(env, rep.menu);
  rep.trace.method = "general (screening)";
  rep.trace.grid_sizes.assign(cfg.general_grid.begin(), cfg.general_grid.end());
  rep.trace.refinement_iterations = iter_total;
  return rep;
}

std::optional<SolveReport> solve_menu_via_convexification(const Environment& env) {
  if (env.n_types() != 2) {
    throw std::invalid_argument("convexified solver: needs binary types");
  }
  // Effort function of the relaxed problem: the inverse of Theta.
  std::vector<PLPoint> inv;
  inv.reserve(env.Theta().points().size());
  for (const PLPoint& p : env.Theta().points()) inv.push_back({p.y, p.x});
  std::vector<TypeSpec> types;
  for (std::size_t t = 0; t < env.n_types(); ++t) {
    types.emplace_back(env.prob(t), env.cost(t));
  }
  InstanceConfig cfg(env.x_lo(), env.x_hi(),
                     EffortFunction::piecewise(PiecewiseLinearFn(std::move(inv))),
                     std::move(types), env.solver_config());
  const Environment relaxed = build_environment(cfg);

  const SolveReport reduced = solve_menu_convex_effort(relaxed);
  if (reduced.regime != Regime::EqualPower) return std::nullopt;

  SolveReport rep = equal_power_report(env, reduced.menu.entries[0].contract.power,
                                       benchmarks_for(env));
  rep.trace.method = "convexified reduction";
  rep.trace.grid_sizes = reduced.trace.grid_sizes;
  rep.trace.refinement_iterations = reduced.trace.refinement_iterations;
  return rep;
}

SolveReport solve_ntypes_fullrange(const Environment& env) {
  const std::size_t n = env.n_types();
  const AssumptionReport assumptions = check_assumptions(env);
  if (!assumptions.ntype_order.holds || !assumptions.ntype_single_peak.holds) {
    throw std::invalid_argument("n-type solver: assumptions violated");
  }

  double kappa_base = 0.0;
  std::vector<double> caps(n);
  for (std::size_t t = 0; t < n; ++t) {
    kappa_base = std::max(kappa_base, env.cost(t).derivative(env.c_lo()));
    caps[t] = env.cost(t).derivative(env.c_hi());
  }

  // Payments pinned by the binding upward incentive constraints.
  const auto payments_for = [&](const std::vector<double>& kappas) {
    std::vector<double> m(n, 0.0);
    for (std::size_t t = n - 1; t-- > 0;) {
      // Ordered up to the search tolerance; collapse hairline inversions.
      const double lo = std::min(kappas[t], kappas[t + 1]);
      m[t] = m[t + 1] + integral_of_inverse_derivative(env.cost(t), lo, kappas[t + 1]);
    }
    return m;
  };
  const auto objective = [&](const std::vector<double>& kappas) {
    for (std::size_t t = 0; t < n; ++t) {
      if (kappas[t] < kappa_base - 1e-12 || kappas[t] > caps[t] + 1e-12) return kNegInf;
      if (t > 0 && kappas[t] < kappas[t - 1] - 1e-12) return kNegInf;
    }
    const std::vector<double> m = payments_for(kappas);
    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = env.cost(t).derivative_inverse(kappas[t]);
      obj += env.prob(t) * (env.Theta_value(a) - kappas[t] * a - m[t]);
    }
    return obj;
  };

  // Start from the best common power, then coordinate ascent with the
  // ordering projection, then a joint polish.
  const ScalarMax pooled = equal_power_common(env);
  double cap_min = caps[0];
  for (double c : caps) cap_min = std::min(cap_min, c);
  std::vector<double> kappas(n, std::clamp(pooled.x, kappa_base, cap_min));
  double best_v = objective(kappas);

  const auto& cfg = env.solver_config();
  int iterations = 0;
  for (int sweep = 0; sweep < 30; ++sweep) {
    double improvement = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double lo = (t == 0) ? kappa_base : kappas[t - 1];
      const double hi = (t + 1 == n) ? caps[t] : std::min(caps[t], kappas[t + 1]);
      if (!(hi > lo)) continue;
      const auto coord = [&](double k) {
        std::vector<double> trial = kappas;
        trial[t] = k;
        return objective(trial);
      };
      const ScalarMax m =
          grid_golden_max(coord, lo, hi, cfg.ntype_grid, 1e-11 * std::max(1.0, hi));
      if (m.value > best_v) {
        improvement = std::max(improvement, m.value - best_v);
        kappas[t] = m.x;
        best_v = m.value;
      }
    }
    ++iterations;
    if (improvement < 1e-13) break;
  }

  // Joint polish: per-coordinate moves plus a common shift.
  double step = (cap_min - kappa_base) / cfg.ntype_grid;
  while (step > 1e-10) {
    bool improved = false;
    for (std::size_t t = 0; t <= n; ++t) {
      for (double dir : {+1.0, -1.0}) {
        std::vector<double> trial = kappas;
        if (t < n) {
          trial[t] += dir * step;
        } else {
          for (double& k : trial) k += dir * step;
        }
        const double v = objective(trial);
        if (v > best_v) {
          kappas = trial;
          best_v = v;
          improved = true;
        }
      }
    }
    ++iterations;
    if (!improved) step *= 0.5;
  }

  std::vector<double> efforts(n);
  for (std::size_t t = 0; t < n; ++t) {
    efforts[t] = env.cost(t).derivative_inverse(kappas[t]);
  }
  std::vector<OutputRange> ranges(n, OutputRange::full());

  SolveReport rep;
  rep.menu = make_menu(env, efforts, payments_for(kappas), ranges);
  rep.objective = recompute_objective(env, rep.menu);
  rep.benchmarks = benchmarks_for(env);
  double spread = 0.0;
  for (std::size_t t = 0; t < n; ++t) spread = std::max(spread, kappas[t] - kappas[0]);
  rep.regime = spread <= kTieTolerance ? Regime::EqualPower : Regime::Screening;
  rep.binding_constraints = binding_flags(env, rep.menu);
  rep.trace.method = "n-type full-range";
  rep.trace.grid_sizes = {cfg.ntype_grid};
  rep.trace.refinement_iterations = iterations;

  const FeasibilityReport feas = check_feasibility(env, rep.menu);
  if (feas.min_ic_slack < -kIcTolerance) {
    throw std::logic_error("n-type solver: pinned payments failed the IC verification");
  }
  return rep;
}

SolveReport brute_force_oracle(const Environment& env, int grid_per_dim,
                               OracleMode mode) {
  if (env.n_types() != 2) {
    throw std::invalid_argument("oracle: needs binary types");
  }
  if (grid_per_dim < 2 || grid_per_dim > 20) {
    throw std::invalid_argument("oracle: refuses grids above 20 points per dimension");
  }
  const double c_hi = env.c_hi();
  const int g = grid_per_dim;

  Candidate best;
  std::array<double, 4> best_aux{};
  bool best_two_point = false;
  std::array<double, 2> best_q{};

  if (mode == OracleMode::DirectionalRanges) {
    EnvelopeCache cache(env);
    const std::vector<double> alphas = linspace(0.0, c_hi, g);
    std::vector<ContractElements> elems(2);
    for (double a0 : alphas) {
      const double kappa0 = env.cost(0).derivative(a0);
      for (double a1 : alphas) {
        if (a0 > a1) continue;
        const double kappa1 = env.cost(1).derivative(a1);
        for (double r0 : alphas) {
          if (r0 < a0) continue;
          elems[0] = {kappa0, kappa0 * a0 - env.cost(0)(a0), 0.0, r0};
          for (double r1 : alphas) {
            if (r1 > a1) continue;
            elems[1] = {kappa1, kappa1 * a1 - env.cost(1)(a1), r1, c_hi};
            const auto m = minimal_payments_elements(env, elems);
            if (!m) continue;
            Candidate cand;
            cand.objective =
                env.prob(0) * (cache.left_value(r0, a0) - kappa0 * a0 - (*m)[0]) +
                env.prob(1) * (cache.right_value(r1, a1) - kappa1 * a1 - (*m)[1]);
            cand.key = {a0, a1, r0, -r1};
            if (cand.better_than(best)) best = cand;
          }
        }
      }
    }
    if (best.objective == kNegInf) {
      throw std::logic_error("oracle: no feasible grid point");
    }
  } else {
    // Two-point-support parameterization: per type a support pair and the
    // weight of its upper point.
    const std::vector<double> xs = linspace(env.x_lo(), env.x_hi(), g);
    const std::vector<double> qs = linspace(0.0, 1.0, g);
    std::vector<ContractElements> elems(2);
    for (double xl0 : xs) {
      for (double xh0 : xs) {
        if (xh0 < xl0) continue;
        const double al0 = env.effort_of(xl0), ah0 = env.effort_of(xh0);
        for (double q0 : qs) {
          const double a0 = (1.0 - q0) * al0 + q0 * ah0;
          const double kappa0 = env.cost(0).derivative(a0);
          elems[0] = {kappa0, kappa0 * a0 - env.cost(0)(a0), al0, ah0};
          const double out0 = (1.0 - q0) * xl0 + q0 * xh0;
          for (double xl1 : xs) {
            for (double xh1 : xs) {
              if (xh1 < xl1) continue;
              const double al1 = env.effort_of(xl1), ah1 = env.effort_of(xh1);
              for (double q1 : qs) {
                const double a1 = (1.0 - q1) * al1 + q1 * ah1;
                if (a0 > a1) continue;
                const double kappa1 = env.cost(1).derivative(a1);
                elems[1] = {kappa1, kappa1 * a1 - env.cost(1)(a1), al1, ah1};
                const auto m = minimal_payments_elements(env, elems);
                if (!m) continue;
                const double out1 = (1.0 - q1) * xl1 + q1 * xh1;
                Candidate cand;
                cand.objective =
                    env.prob(0) * (out0 - kappa0 * a0 - (*m)[0]) +
                    env.prob(1) * (out1 - kappa1 * a1 - (*m)[1]);
                cand.key = {xl0, xh0, xl1, xh1};
                if (cand.better_than(best)) {
                  best = cand;
                  best_aux = {a0, a1, 0.0, 0.0};
                  best_q = {q0, q1};
                  best_two_point = true;
                }
              }
            }
          }
        }
      }
    }
    if (best.objective == kNegInf) {
      throw std::logic_error("oracle: no feasible grid point");
    }
  }

  SolveReport rep;
  if (!best_two_point) {
    const double a0 = best.key[0], a1 = best.key[1];
    const double r0 = best.key[2], r1 = -best.key[3];
    std::vector<OutputRange> ranges;
    ranges.push_back(OutputRange::interval(env.x_lo(), env.theta_value(r0)));
    ranges.push_back(OutputRange::interval(env.theta_value(r1), env.x_hi()));
    const auto m = minimal_payments(env, {a0, a1}, ranges);
    rep.menu = make_menu(env, {a0, a1}, *m, ranges);
  } else {
    std::vector<OutputRange> ranges;
    std::vector<double> efforts{best_aux[0], best_aux[1]};
    for (int t = 0; t < 2; ++t) {
      const double xl = best.key[2 * t], xh = best.key[2 * t + 1];
      ranges.push_back(xh - xl > 1e-12 ? OutputRange::point_set({xl, xh})
                                       : OutputRange::point_set({xl}));
    }
    const auto m = minimal_payments(env, efforts, ranges);
    Menu menu;
    for (int t = 0; t < 2; ++t) {
      DesignContract s = make_contract(env, t, efforts[t], (*m)[t], ranges[t]);
      const double xl = best.key[2 * t], xh = best.key[2 * t + 1];
      OutputDistribution mu = (xh - xl > 1e-12)
                                  ? OutputDistribution({Atom{xl, 1.0 - best_q[t]},
                                                        Atom{xh, best_q[t]}})
                                  : OutputDistribution::point_mass(xl);
      menu.entries.push_back(MenuEntry{std::move(s), std::move(mu)});
    }
    rep.menu = std::move(menu);
  }
  rep.objective = recompute_objective(env, rep.menu);
  rep.benchmarks = benchmarks_for(env);
  rep.regime = is_single_full_range(env, rep.menu) ? Regime::EqualPower : Regime::Screening;
  rep.binding_constraints = binding_flags(env, rep.menu);
  rep.trace.method = mode == OracleMode::DirectionalRanges ? "oracle (directional)"
                                                           : "oracle (two-point)";
  rep.trace.grid_sizes = {g};
  return rep;
}

}  // namespace flexmh
