#pragma once

#include <optional>
#include <vector>

#include "flexmh/contracts.hpp"

namespace flexmh {

struct MenuEntry {
  DesignContract contract;
  OutputDistribution recommended = OutputDistribution::point_mass(0.0);
};

struct Menu {
  std::vector<MenuEntry> entries;
  std::size_t size() const { return entries.size(); }
};

// Contracts at the given efforts/payments/ranges with recommended
// distributions attaining the restricted concavification values.
Menu make_menu(const Environment& env, const std::vector<double>& efforts,
               const std::vector<double>& payments,
               const std::vector<OutputRange>& ranges);

inline constexpr double kIcTolerance = 1e-8;
inline constexpr double kBindingTolerance = 1e-6;

struct FeasibilityReport {
  std::vector<bool> mh_ok;
  std::vector<bool> ll_ok;
  // ic_slack[t][u] = truthful payoff of t minus t's best-response value
  // against the type-u contract; the diagonal is zero.
  std::vector<std::vector<double>> ic_slack;
  double min_ic_slack = 0.0;
  bool feasible = false;
};

FeasibilityReport check_feasibility(const Environment& env, const Menu& menu);

// Smallest componentwise non-negative payments making the menu built from the
// efforts and ranges feasible, by monotone fixed-point iteration from zero.
// Empty when the iteration diverges past the payment cap.
std::optional<std::vector<double>> minimal_payments(
    const Environment& env, const std::vector<double>& efforts,
    const std::vector<OutputRange>& ranges);

// Contract reduced to the pieces the payment fixed point needs.
struct ContractElements {
  double power = 0.0;
  double base_payoff = 0.0;  // truthful payoff with zero constant
  double r_lo = 0.0, r_hi = 0.0;
};

// Payment fixed point on design elements; shared by minimal_payments and the
// solver search loops.
std::optional<std::vector<double>> minimal_payments_elements(
    const Environment& env, const std::vector<ContractElements>& elements);

// Largest interval extension of the type-t contract range, holding every
// effort and payment fixed, that keeps all other types' IC constraints
// satisfied. Endpoint tolerance 1e-8 in output units.
OutputRange maximal_range(const Environment& env, const Menu& menu, std::size_t t);

// Extend the lowest type's range to the left output endpoint and the highest
// type's to the right one; feasibility is preserved under the cost-ordering
// assumption and asserted.
Menu extend_directional(const Environment& env, const Menu& menu);

bool is_single_full_range(const Environment& env, const Menu& menu);

}  // namespace flexmh
