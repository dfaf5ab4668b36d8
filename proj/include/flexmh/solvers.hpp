#pragma once

#include <optional>
#include <string>

#include "flexmh/menus.hpp"

namespace flexmh {

enum class Regime { EqualPower, Screening };

struct Benchmark {
  double alpha_mh = 0.0;
  double profit_mh = 0.0;
  double alpha_fb = 0.0;
  double surplus_fb = 0.0;
  bool single_peak_warning = false;
};

struct SolveTrace {
  std::vector<int> grid_sizes;
  int refinement_iterations = 0;
  std::string method;
};

struct SolveReport {
  Menu menu;
  double objective = 0.0;            // recomputed from the menu
  std::vector<Benchmark> benchmarks; // per type
  Regime regime = Regime::Screening;
  std::vector<std::string> binding_constraints;
  SolveTrace trace;
};

struct PureMhSolution {
  double alpha = 0.0;
  double profit = 0.0;
  DesignContract contract;
  OutputDistribution distribution = OutputDistribution::point_mass(0.0);
  bool single_peak_warning = false;
};

struct FirstBestSolution {
  double alpha = 0.0;
  double surplus = 0.0;
};

// Expected principal profit of a menu: sum_t p_t * (mean output - power *
// effort - constant).
double recompute_objective(const Environment& env, const Menu& menu);

// argmax of Theta(a) - Kt'(a) * a with a full-range contract at that power.
PureMhSolution solve_pure_mh(const Environment& env, std::size_t t);

// argmax of Theta(a) - Kt(a).
FirstBestSolution solve_first_best(const Environment& env, std::size_t t);

// Binary screening with a convex effort function via the reduced problem over
// (alpha0, alpha1) with the payment pinned by the binding constraint.
SolveReport solve_menu_convex_effort(const Environment& env);

// Best single full-range contract: one power for every type, zero constants.
SolveReport solve_menu_equal_power(const Environment& env);

// Binary search over efforts and directional range truncations.
SolveReport solve_menu_general(const Environment& env);

// Replace theta with its concavification, solve the convex-effort reduction
// and lift a single full-range optimum back; empty when the reduced optimum
// screens.
std::optional<SolveReport> solve_menu_via_convexification(const Environment& env);

// N ordered types, full-range contracts, payments pinned by the binding
// upward incentive constraints.
SolveReport solve_ntypes_fullrange(const Environment& env);

enum class OracleMode { DirectionalRanges, TwoPointSupport };

// Exhaustive search on coarse grids; refuses more than 20 points per
// dimension.
SolveReport brute_force_oracle(const Environment& env, int grid_per_dim,
                               OracleMode mode = OracleMode::DirectionalRanges);

}  // namespace flexmh
