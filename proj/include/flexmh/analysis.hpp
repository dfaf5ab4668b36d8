#pragma once

#include <string>

#include "flexmh/solvers.hpp"

namespace flexmh {

struct RegimeCall {
  Regime regime = Regime::Screening;
  // K1'(alpha1_mh) - K0'(alpha0_mh); non-negative means pooling is optimal.
  double margin = 0.0;
};

// Regime from the pure moral-hazard benchmarks alone.
RegimeCall classify_regime(const Environment& env);

struct ClaimResult {
  std::string id;
  bool holds = false;
  double margin = 0.0;
  bool applicable = true;
};

// Structural properties of a solve report evaluated as executable checks:
// the ordering properties of the optimal menu, menu feasibility, and the
// full-range-variant equivalence with equal powers.
std::vector<ClaimResult> verify_structure(const Environment& env,
                                          const SolveReport& report);

struct WelfareTypeRow {
  double alpha_mh = 0.0;
  double alpha_fb = 0.0;
  double alpha_star = 0.0;
  double surplus_star = 0.0;   // Theta(alpha*) - Kt(alpha*)
  double agent_payoff = 0.0;
  double principal_profit = 0.0;
};

struct WelfareReport {
  std::vector<WelfareTypeRow> per_type;
  std::vector<ClaimResult> orderings;
};

WelfareReport welfare_report(const Environment& env, const SolveReport& report);

struct PathRow {
  double lambda = 0.0;
  double alpha0 = 0.0, alpha1 = 0.0;
  double term0 = 0.0, term1 = 0.0;
  double neg_m1 = 0.0;
};

struct PathTrace {
  std::vector<PathRow> rows;
};

// Linear path from the equal-power solution to the screening optimum with the
// per-type profit terms and the pinned payment along the way.
PathTrace screening_path_trace(const Environment& env, int steps);

std::string path_trace_csv(const PathTrace& trace);

}  // namespace flexmh
