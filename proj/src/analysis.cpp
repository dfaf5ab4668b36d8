#include "flexmh/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace flexmh {

namespace {

constexpr double kWeakTol = 1e-7;
constexpr double kEqualPowerTol = 1e-7;

bool theta_is_concave(const Environment& env) {
  const double y_tol = 1e-9 * std::max(1.0, env.x_hi());
  for (const PLPoint& p : env.theta().points()) {
    if (std::abs(env.Theta_value(p.x) - p.y) > y_tol) return false;
  }
  return true;
}

ClaimResult weak_leq(std::string id, double lhs, double rhs) {
  ClaimResult c;
  c.id = std::move(id);
  c.margin = rhs - lhs;
  c.holds = c.margin >= -kWeakTol;
  return c;
}

double pure_mh_agent_payoff(const Environment& env, std::size_t t, double alpha_mh) {
  return env.cost(t).derivative(alpha_mh) * alpha_mh - env.cost(t)(alpha_mh);
}

}  // namespace

RegimeCall classify_regime(const Environment& env) {
  if (env.n_types() != 2) {
    throw std::invalid_argument("classify_regime: needs binary types");
  }
  const PureMhSolution mh0 = solve_pure_mh(env, 0);
  const PureMhSolution mh1 = solve_pure_mh(env, 1);
  RegimeCall call;
  call.margin = env.cost(1).derivative(mh1.alpha) - env.cost(0).derivative(mh0.alpha);
  call.regime = (call.margin >= -1e-9) ? Regime::EqualPower : Regime::Screening;
  return call;
}

std::vector<ClaimResult> verify_structure(const Environment& env,
                                          const SolveReport& report) {
  std::vector<ClaimResult> claims;
  const Menu& menu = report.menu;
  const std::size_t n = menu.size();

  {
    ClaimResult c;
    c.id = "menu-feasible";
    const FeasibilityReport feas = check_feasibility(env, menu);
    c.holds = feas.feasible;
    c.margin = feas.min_ic_slack;
    claims.push_back(c);
  }

  if (n == 2) {
    const DesignContract& s0 = menu.entries[0].contract;
    const DesignContract& s1 = menu.entries[1].contract;
    claims.push_back(weak_leq("prop1-effort-order", s0.target_effort, s1.target_effort));
    claims.push_back(weak_leq("prop1-power-order", s1.power, s0.power));
    claims.push_back(weak_leq("prop1-payoff-order", truthful_payoff(env, s0),
                              truthful_payoff(env, s1)));
    {
      ClaimResult c;
      c.id = "prop1-payment-implication";
      const bool m0_positive = s0.constant > 1e-12;
      const bool m1_positive = s1.constant > 1e-12;
      c.holds = !m0_positive || m1_positive;
      c.margin = m0_positive ? s1.constant : 0.0;
      claims.push_back(c);
    }
  }

  // Full-range variant at the same efforts and payments is feasible exactly
  // when the contract powers agree.
  {
    ClaimResult c;
    c.id = (n == 2) ? "thm3-fullrange-iff" : "prop5-fullrange-iff";
    double power_spread = 0.0;
    std::vector<double> efforts(n), payments(n);
    std::vector<OutputRange> ranges(n, OutputRange::full());
    for (std::size_t t = 0; t < n; ++t) {
      efforts[t] = menu.entries[t].contract.target_effort;
      payments[t] = menu.entries[t].contract.constant;
      power_spread = std::max(power_spread, std::abs(menu.entries[t].contract.power -
                                                     menu.entries[0].contract.power));
    }
    const bool equal_powers = power_spread <= kEqualPowerTol;
    const FeasibilityReport feas =
        check_feasibility(env, make_menu(env, efforts, payments, ranges));
    c.holds = (feas.feasible == equal_powers);
    c.margin = equal_powers ? feas.min_ic_slack : -feas.min_ic_slack;
    claims.push_back(c);
  }

  // Support-range variant: every maximal range extends to full exactly when
  // the powers agree.
  {
    ClaimResult c;
    c.id = "maximal-range-fullness-iff";
    double power_spread = 0.0;
    std::vector<double> efforts(n), payments(n);
    std::vector<OutputRange> ranges;
    for (std::size_t t = 0; t < n; ++t) {
      const MenuEntry& e = menu.entries[t];
      efforts[t] = e.contract.target_effort;
      payments[t] = e.contract.constant;
      double lo = e.recommended.atoms().front().x, hi = lo;
      for (const Atom& a : e.recommended.atoms()) {
        lo = std::min(lo, a.x);
        hi = std::max(hi, a.x);
      }
      // The misreport envelope only sees the support hull, so the interval
      // stands in for the support set.
      ranges.push_back(hi - lo > 1e-12 ? OutputRange::interval(lo, hi)
                                       : OutputRange::point_set({lo}));
      power_spread = std::max(power_spread, std::abs(e.contract.power -
                                                     menu.entries[0].contract.power));
    }
    const bool equal_powers = power_spread <= kEqualPowerTol;
    const Menu support_menu = make_menu(env, efforts, payments, ranges);
    if (check_feasibility(env, support_menu).feasible) {
      bool all_full = true;
      for (std::size_t t = 0; t < n; ++t) {
        const OutputRange maximal = maximal_range(env, support_menu, t);
        all_full = all_full && env.range_is_full(maximal);
      }
      c.holds = (all_full == equal_powers);
      c.margin = power_spread;
    } else {
      c.applicable = false;
      c.holds = true;
    }
    claims.push_back(c);
  }
  return claims;
}

WelfareReport welfare_report(const Environment& env, const SolveReport& report) {
  WelfareReport rep;
  const std::size_t n = report.menu.size();
  std::vector<Benchmark> benchmarks = report.benchmarks;
  if (benchmarks.size() != n) {
    benchmarks.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const PureMhSolution mh = solve_pure_mh(env, t);
      const FirstBestSolution fb = solve_first_best(env, t);
      benchmarks[t] = {mh.alpha, mh.profit, fb.alpha, fb.surplus, mh.single_peak_warning};
    }
  }

  rep.per_type.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const MenuEntry& e = report.menu.entries[t];
    WelfareTypeRow& row = rep.per_type[t];
    row.alpha_mh = benchmarks[t].alpha_mh;
    row.alpha_fb = benchmarks[t].alpha_fb;
    row.alpha_star = e.contract.target_effort;
    row.surplus_star = env.Theta_value(row.alpha_star) - env.cost(t)(row.alpha_star);
    row.agent_payoff = truthful_payoff(env, e.contract);
    row.principal_profit =
        env.prob(t) * (e.recommended.mean_output() -
                       e.contract.power * e.contract.target_effort - e.contract.constant);
  }
  if (n != 2) return rep;

  const double a0 = rep.per_type[0].alpha_star;
  const double a1 = rep.per_type[1].alpha_star;
  const double a0_mh = benchmarks[0].alpha_mh, a1_mh = benchmarks[1].alpha_mh;
  const double a0_fb = benchmarks[0].alpha_fb, a1_fb = benchmarks[1].alpha_fb;
  const bool pooled_condition =
      env.cost(0).derivative(a0_mh) <= env.cost(1).derivative(a1_mh) + 1e-9;

  auto& claims = rep.orderings;
  if (theta_is_concave(env)) {
    // Convex effort function: the full sandwich comparisons apply.
    if (pooled_condition) {
      claims.push_back(weak_leq("prop3-1-a0-above-mh", a0_mh, a0));
      claims.push_back(weak_leq("prop3-1-a0-below-fb", a0, a0_fb));
      claims.push_back(weak_leq("prop3-1-a1-below-mh", a1, a1_mh));
      claims.push_back(weak_leq("prop3-1-a1-below-fb", a1_mh, a1_fb));
      claims.push_back(weak_leq("cor1-1-surplus0",
                                env.Theta_value(a0_mh) - env.cost(0)(a0_mh),
                                rep.per_type[0].surplus_star));
      claims.push_back(weak_leq("cor1-1-surplus1", rep.per_type[1].surplus_star,
                                env.Theta_value(a1_mh) - env.cost(1)(a1_mh)));
      claims.push_back(weak_leq("cor1-1-payoff0", pure_mh_agent_payoff(env, 0, a0_mh),
                                rep.per_type[0].agent_payoff));
      claims.push_back(weak_leq("cor1-1-payoff1", rep.per_type[1].agent_payoff,
                                pure_mh_agent_payoff(env, 1, a1_mh)));
    } else {
      claims.push_back(weak_leq("prop3-2-a0-below-mh", a0, a0_mh));
      claims.push_back(weak_leq("prop3-2-a0-below-fb", a0_mh, a0_fb));
      claims.push_back(weak_leq("prop3-2-a1-above-mh", a1_mh, a1));
      claims.push_back(weak_leq("prop3-2-a1-below-fb", a1, a1_fb));
      claims.push_back(weak_leq("cor1-2-surplus0", rep.per_type[0].surplus_star,
                                env.Theta_value(a0_mh) - env.cost(0)(a0_mh)));
      claims.push_back(weak_leq("cor1-2-surplus1",
                                env.Theta_value(a1_mh) - env.cost(1)(a1_mh),
                                rep.per_type[1].surplus_star));
      claims.push_back(weak_leq("cor1-2-payoff0", rep.per_type[0].agent_payoff,
                                pure_mh_agent_payoff(env, 0, a0_mh)));
      claims.push_back(weak_leq("cor1-2-payoff1", pure_mh_agent_payoff(env, 1, a1_mh),
                                rep.per_type[1].agent_payoff));
    }
  } else if (is_single_full_range(env, report.menu)) {
    if (pooled_condition) {
      claims.push_back(weak_leq("wa1-1-a0-above-mh", a0_mh, a0));
      claims.push_back(weak_leq("wa1-1-a0-below-fb", a0, a0_fb));
      claims.push_back(weak_leq("wa1-1-a1-below-mh", a1, a1_mh));
      claims.push_back(weak_leq("wa1-1-a1-below-fb", a1_mh, a1_fb));
    } else {
      claims.push_back(weak_leq("wa1-2-a0-below-mh", a0, a0_mh));
      claims.push_back(weak_leq("wa1-2-a1-above-mh", a1_mh, a1));
    }
  } else {
    claims.push_back(weak_leq("wa2-a0-below-fb", a0, a0_fb));
    claims.push_back(weak_leq("wa2-a1-above-mh", a1_mh, a1));
  }
  return rep;
}

PathTrace screening_path_trace(const Environment& env, int steps) {
  if (steps < 2) throw std::invalid_argument("path trace: need at least two steps");
  if (env.n_types() != 2) {
    throw std::invalid_argument("path trace: needs binary types");
  }
  if (!theta_is_concave(env)) {
    throw std::invalid_argument("path trace: needs a convex effort function");
  }
  if (classify_regime(env).regime != Regime::Screening) {
    throw std::invalid_argument("path trace: no screening path in the pooled regime");
  }

  const SolveReport pooled = solve_menu_equal_power(env);
  const SolveReport screened = solve_menu_convex_effort(env);
  if (screened.regime != Regime::Screening) {
    throw std::invalid_argument("path trace: solver returned a pooled menu");
  }
  const double a0_s = pooled.menu.entries[0].contract.target_effort;
  const double a1_s = pooled.menu.entries[1].contract.target_effort;
  const double a0_x = screened.menu.entries[0].contract.target_effort;
  const double a1_x = screened.menu.entries[1].contract.target_effort;

  const CostFunction& k0 = env.cost(0);
  const CostFunction& k1 = env.cost(1);
  PathTrace trace;
  trace.rows.resize(steps);
  for (int i = 0; i < steps; ++i) {
    const double lambda = static_cast<double>(i) / (steps - 1);
    PathRow& row = trace.rows[i];
    row.lambda = lambda;
    row.alpha0 = a0_s + lambda * (a0_x - a0_s);
    row.alpha1 = a1_s + lambda * (a1_x - a1_s);
    row.term0 = env.Theta_value(row.alpha0) - k0.derivative(row.alpha0) * row.alpha0;
    row.term1 = env.Theta_value(row.alpha1) - k1.derivative(row.alpha1) * row.alpha1;
    const double m1 =
        std::max(0.0, (k0.derivative(row.alpha0) * row.alpha0 - k1(row.alpha0)) -
                          (k1.derivative(row.alpha1) * row.alpha1 - k1(row.alpha1)));
    row.neg_m1 = -m1;
  }
  return trace;
}

std::string path_trace_csv(const PathTrace& trace) {
  std::string out = "lambda,alpha0,alpha1,term0,term1,neg_m1\n";
  char buf[200];
  for (const PathRow& r : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.lambda,
                  r.alpha0, r.alpha1, r.term0, r.term1, r.neg_m1);
    out += buf;
  }
  return out;
}

}  // namespace flexmh
