#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "flexmh/analysis.hpp"
#include "flexmh/config.hpp"

namespace flexmh {

// Exit codes: 0 success, 2 configuration or input errors (and failed required
// assumptions for `check`), 3 property violations.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Report builders shared by the CLI and the python bindings.
nlohmann::ordered_json assumption_report_json(const AssumptionReport& rep);
nlohmann::ordered_json solve_report_json(const Environment& env, const SolveReport& rep);
nlohmann::ordered_json menu_json(const Environment& env, const Menu& menu);

struct RunOutcome {
  nlohmann::ordered_json report;
  bool property_violation = false;
};

// Full pipeline for one instance: assumptions, solve, verification, welfare.
RunOutcome run_solve(const InstanceConfig& config, const std::string& mode);

// Golden-number reproductions; `which` is "ef-ex1" or "osc-ex1".
RunOutcome run_reproduce_example(const std::string& which);

}  // namespace flexmh
