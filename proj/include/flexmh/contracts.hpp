#pragma once

#include "flexmh/environment.hpp"

namespace flexmh {

// Contract in design-element form: pays power * c(x) + m inside the range and
// zero outside. The power is pinned to K_t'(target_effort).
struct DesignContract {
  std::size_t type_index = 0;
  double target_effort = 0.0;
  double power = 0.0;
  double constant = 0.0;
  OutputRange range;
};

DesignContract make_contract(const Environment& env, std::size_t type_index,
                             double target_effort, double constant,
                             OutputRange range);

double contract_payment(const Environment& env, const DesignContract& s, double x);

// Concavification of s∘theta: at most three linear segments pinned down by
// the design elements.
PiecewiseLinearFn concavified_contract(const Environment& env, const DesignContract& s);

struct AgentResponse {
  double optimal_effort = 0.0;
  double value = 0.0;
  OutputDistribution distribution = OutputDistribution::point_mass(0.0);
};

// The type t_prime agent's best response to contract s: the unique optimal
// aggregate effort, its payoff and an attaining distribution. A truthful
// responder takes the recommended action whenever it is weakly optimal.
AgentResponse agent_best_response(const Environment& env, const DesignContract& s,
                                  std::size_t responder_type);

// Payoff of the designated type from taking the contract as recommended.
double truthful_payoff(const Environment& env, const DesignContract& s);

// Best-response value against the contract's design elements without building
// the piecewise function; shared by the feasibility and payment fixed-point
// paths.
double best_response_value(const CostFunction& cost, double c_hi, double power,
                           double constant, double r_lo, double r_hi);

}  // namespace flexmh
