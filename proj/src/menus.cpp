#include "flexmh/menus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexmh {

namespace {

constexpr int kMaxPaymentRounds = 1000;
constexpr double kPaymentFixedPointTol = 1e-10;

double misreport_value(const Environment& env, std::size_t responder,
                       const DesignContract& other) {
  const auto [r_lo, r_hi] = env.range_effort_interval(other.range);
  return best_response_value(env.cost(responder), env.c_hi(), other.power,
                             other.constant, r_lo, r_hi);
}

}  // namespace

Menu make_menu(const Environment& env, const std::vector<double>& efforts,
               const std::vector<double>& payments,
               const std::vector<OutputRange>& ranges) {
  if (efforts.size() != env.n_types() || payments.size() != env.n_types() ||
      ranges.size() != env.n_types()) {
    throw std::invalid_argument("menu: need one contract per type");
  }
  Menu menu;
  menu.entries.reserve(env.n_types());
  for (std::size_t t = 0; t < env.n_types(); ++t) {
    DesignContract s = make_contract(env, t, efforts[t], payments[t], ranges[t]);
    OutputDistribution mu = distribution_attaining(env, s.target_effort, s.range);
    menu.entries.push_back(MenuEntry{std::move(s), std::move(mu)});
  }
  return menu;
}

FeasibilityReport check_feasibility(const Environment& env, const Menu& menu) {
  const std::size_t n = menu.size();
  if (n != env.n_types()) {
    throw std::invalid_argument("feasibility: menu size must match the type count");
  }
  FeasibilityReport rep;
  rep.mh_ok.resize(n);
  rep.ll_ok.resize(n);
  rep.ic_slack.assign(n, std::vector<double>(n, 0.0));

  const double effort_tol = 1e-9 * std::max(1.0, env.c_hi());
  for (std::size_t t = 0; t < n; ++t) {
    const MenuEntry& e = menu.entries[t];
    const auto [r_lo, r_hi] = env.range_effort_interval(e.contract.range);
    bool mh = e.contract.target_effort >= r_lo - effort_tol &&
              e.contract.target_effort <= r_hi + effort_tol;
    mh = mh && std::abs(e.recommended.mean_effort(env) - e.contract.target_effort) <=
                   1e-9 * std::max(1.0, env.c_hi());
    for (const Atom& a : e.recommended.atoms()) {
      mh = mh && env.range_contains(e.contract.range, a.x);
    }
    rep.mh_ok[t] = mh;
    rep.ll_ok[t] = e.contract.constant >= -1e-12;
  }

  rep.min_ic_slack = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double truthful = truthful_payoff(env, menu.entries[t].contract);
    for (std::size_t u = 0; u < n; ++u) {
      if (u == t) continue;
      const double slack = truthful - misreport_value(env, t, menu.entries[u].contract);
      rep.ic_slack[t][u] = slack;
      rep.min_ic_slack = std::min(rep.min_ic_slack, slack);
    }
  }
  if (n == 1) rep.min_ic_slack = 0.0;

  rep.feasible = rep.min_ic_slack >= -kIcTolerance;
  for (std::size_t t = 0; t < n; ++t) {
    rep.feasible = rep.feasible && rep.mh_ok[t] && rep.ll_ok[t];
  }
  return rep;
}

std::optional<std::vector<double>> minimal_payments_elements(
    const Environment& env, const std::vector<ContractElements>& elements) {
  const std::size_t n = elements.size();
  double min_prob = 1.0;
  for (std::size_t t = 0; t < n; ++t) min_prob = std::min(min_prob, env.prob(t));
  const double cap = env.x_hi() / min_prob;

  std::vector<double> m(n, 0.0);
  for (int round = 0; round < kMaxPaymentRounds; ++round) {
    double change = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      double required = 0.0;
      for (std::size_t u = 0; u < n; ++u) {
        if (u == t) continue;
        const double value =
            best_response_value(env.cost(t), env.c_hi(), elements[u].power, m[u],
                                elements[u].r_lo, elements[u].r_hi);
        required = std::max(required, value - elements[t].base_payoff);
      }
      change = std::max(change, std::abs(required - m[t]));
      m[t] = required;
      if (m[t] > cap) return std::nullopt;
    }
    if (change < kPaymentFixedPointTol) return m;
  }
  return std::nullopt;
}

std::optional<std::vector<double>> minimal_payments(
    const Environment& env, const std::vector<double>& efforts,
    const std::vector<OutputRange>& ranges) {
  const std::size_t n = env.n_types();
  if (efforts.size() != n || ranges.size() != n) {
    throw std::invalid_argument("minimal_payments: need one entry per type");
  }
  std::vector<ContractElements> elems(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto hull = env.range_effort_interval(ranges[t]);
    const double a = efforts[t];
    const double tol = 1e-9 * std::max(1.0, env.c_hi());
    if (a < hull[0] - tol || a > hull[1] + tol) {
      throw std::invalid_argument("minimal_payments: effort outside its range");
    }
    const double power = env.cost(t).derivative(a);
    elems[t] = {power, power * a - env.cost(t)(a), hull[0], hull[1]};
  }
  return minimal_payments_elements(env, elems);
}

OutputRange maximal_range(const Environment& env, const Menu& menu, std::size_t t) {
  if (t >= menu.size()) throw std::invalid_argument("maximal_range: type index");
  if (!check_feasibility(env, menu).feasible) {
    throw std::invalid_argument("maximal_range: menu must be feasible");
  }
  const DesignContract& s = menu.entries[t].contract;
  if (s.range.kind == OutputRange::Kind::Points && s.range.points.size() > 1) {
    throw std::invalid_argument(
        "maximal_range: ranges must be intervals or singletons");
  }

  // Misreport values only depend on the range through its effort hull, and
  // extending either endpoint weakly raises them.
  const auto ic_ok = [&](double lo, double hi) {
    const double r_lo = env.effort_of(lo);
    const double r_hi = env.effort_of(hi);
    for (std::size_t u = 0; u < menu.size(); ++u) {
      if (u == t) continue;
      const double value = best_response_value(env.cost(u), env.c_hi(), s.power,
                                               s.constant, r_lo, r_hi);
      if (value > truthful_payoff(env, menu.entries[u].contract) + 1e-9) return false;
    }
    return true;
  };

  double cur_lo = (s.range.kind == OutputRange::Kind::Full) ? env.x_lo() : s.range.lo;
  double cur_hi = (s.range.kind == OutputRange::Kind::Full) ? env.x_hi() : s.range.hi;
  cur_lo = std::clamp(cur_lo, env.x_lo(), env.x_hi());
  cur_hi = std::clamp(cur_hi, env.x_lo(), env.x_hi());

  const double tol = 1e-8;
  double best_lo = cur_lo;
  if (ic_ok(env.x_lo(), cur_hi)) {
    best_lo = env.x_lo();
  } else {
    double bad = env.x_lo(), good = cur_lo;
    while (good - bad > tol) {
      const double mid = 0.5 * (bad + good);
      (ic_ok(mid, cur_hi) ? good : bad) = mid;
    }
    best_lo = good;
  }
  double best_hi = cur_hi;
  if (ic_ok(best_lo, env.x_hi())) {
    best_hi = env.x_hi();
  } else {
    double good = cur_hi, bad = env.x_hi();
    while (bad - good > tol) {
      const double mid = 0.5 * (good + bad);
      (ic_ok(best_lo, mid) ? good : bad) = mid;
    }
    best_hi = good;
  }
  return OutputRange::interval(best_lo, best_hi);
}

Menu extend_directional(const Environment& env, const Menu& menu) {
  if (menu.size() < 2) throw std::invalid_argument("extend_directional: menu too small");
  if (!check_feasibility(env, menu).feasible) {
    throw std::invalid_argument("extend_directional: menu must be feasible");
  }
  Menu out = menu;
  const auto hull = [&](const DesignContract& s) -> std::array<double, 2> {
    if (s.range.kind == OutputRange::Kind::Full) return {env.x_lo(), env.x_hi()};
    return {s.range.lo, s.range.hi};
  };
  {
    DesignContract& low = out.entries.front().contract;
    const auto h = hull(low);
    low.range = OutputRange::interval(env.x_lo(), h[1]);
  }
  {
    DesignContract& high = out.entries.back().contract;
    const auto h = hull(high);
    high.range = OutputRange::interval(h[0], env.x_hi());
  }
  if (!check_feasibility(env, out).feasible) {
    throw std::logic_error(
        "extend_directional: directional extension broke feasibility");
  }
  return out;
}

bool is_single_full_range(const Environment& env, const Menu& menu) {
  const double power_tol = 1e-9;
  const DesignContract& first = menu.entries.front().contract;
  for (const MenuEntry& e : menu.entries) {
    if (!env.range_is_full(e.contract.range)) return false;
    if (std::abs(e.contract.power - first.power) > power_tol) return false;
    if (std::abs(e.contract.constant - first.constant) > power_tol) return false;
  }
  return true;
}

}  // namespace flexmh
