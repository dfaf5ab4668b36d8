#include "flexmh/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

namespace flexmh {

namespace {

using nlohmann::ordered_json;

const char* regime_str(Regime r) {
  return r == Regime::EqualPower ? "equal-power" : "screening";
}

ordered_json check_json(const AssumptionCheck& c) {
  ordered_json j;
  j["holds"] = c.holds;
  j["violation"] = c.violation;
  j["tolerance"] = c.tolerance;
  j["applicable"] = c.applicable;
  return j;
}

ordered_json range_json(const Environment& env, const OutputRange& r) {
  ordered_json j;
  switch (r.kind) {
    case OutputRange::Kind::Full:
      j["kind"] = "full";
      j["lo"] = env.x_lo();
      j["hi"] = env.x_hi();
      break;
    case OutputRange::Kind::Interval:
      j["kind"] = "interval";
      j["lo"] = r.lo;
      j["hi"] = r.hi;
      break;
    case OutputRange::Kind::Points:
      j["kind"] = "points";
      j["points"] = r.points;
      break;
  }
  return j;
}

ordered_json distribution_json(const OutputDistribution& d) {
  ordered_json atoms = ordered_json::array();
  for (const Atom& a : d.atoms()) {
    ordered_json aj;
    aj["x"] = a.x;
    aj["weight"] = a.weight;
    atoms.push_back(std::move(aj));
  }
  return atoms;
}

ordered_json claims_json(const std::vector<ClaimResult>& claims) {
  ordered_json arr = ordered_json::array();
  for (const ClaimResult& c : claims) {
    ordered_json j;
    j["id"] = c.id;
    j["holds"] = c.holds;
    j["margin"] = c.margin;
    j["applicable"] = c.applicable;
    arr.push_back(std::move(j));
  }
  return arr;
}

OutputRange range_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "full") return OutputRange::full();
  if (kind == "interval") {
    return OutputRange::interval(j.at("lo").get<double>(), j.at("hi").get<double>());
  }
  if (kind == "points") {
    return OutputRange::point_set(j.at("points").get<std::vector<double>>());
  }
  throw ConfigError("menu file: unknown range kind '" + kind + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& text, const std::string& out_path,
                  std::ostream& fallback) {
  if (out_path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + out_path);
  out << text;
}

bool claims_violated(const std::vector<ClaimResult>& claims) {
  for (const ClaimResult& c : claims) {
    if (c.applicable && !c.holds) return true;
  }
  return false;
}

struct GoldenAssertion {
  std::string id;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

ordered_json assertions_json(const std::vector<GoldenAssertion>& as) {
  ordered_json arr = ordered_json::array();
  for (const GoldenAssertion& a : as) {
    ordered_json j;
    j["id"] = a.id;
    j["value"] = a.value;
    j["expected"] = a.expected;
    j["tolerance"] = a.tolerance;
    j["passed"] = a.passed;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

ordered_json assumption_report_json(const AssumptionReport& rep) {
  ordered_json j;
  j["cost_order"] = check_json(rep.cost_order);
  j["single_peak"] = check_json(rep.single_peak);
  j["mh_interiority"] = check_json(rep.mh_interiority);
  j["ntype_order"] = check_json(rep.ntype_order);
  j["ntype_single_peak"] = check_json(rep.ntype_single_peak);
  j["interior_effort"] = check_json(rep.interior_effort);
  return j;
}

ordered_json menu_json(const Environment& env, const Menu& menu) {
  ordered_json arr = ordered_json::array();
  for (std::size_t t = 0; t < menu.size(); ++t) {
    const MenuEntry& e = menu.entries[t];
    ordered_json j;
    j["type"] = t;
    j["target_effort"] = e.contract.target_effort;
    j["power"] = e.contract.power;
    j["constant"] = e.contract.constant;
    j["range"] = range_json(env, e.contract.range);
    j["recommended"] = distribution_json(e.recommended);
    arr.push_back(std::move(j));
  }
  return arr;
}

ordered_json solve_report_json(const Environment& env, const SolveReport& rep) {
  ordered_json j;
  j["regime"] = regime_str(rep.regime);
  j["objective"] = rep.objective;
  j["menu"] = menu_json(env, rep.menu);
  ordered_json bench = ordered_json::array();
  for (const Benchmark& b : rep.benchmarks) {
    ordered_json bj;
    bj["alpha_mh"] = b.alpha_mh;
    bj["profit_mh"] = b.profit_mh;
    bj["alpha_fb"] = b.alpha_fb;
    bj["surplus_fb"] = b.surplus_fb;
    bj["single_peak_warning"] = b.single_peak_warning;
    bench.push_back(std::move(bj));
  }
  j["benchmarks"] = std::move(bench);
  j["binding_constraints"] = rep.binding_constraints;
  ordered_json tj;
  tj["method"] = rep.trace.method;
  tj["grid_sizes"] = rep.trace.grid_sizes;
  tj["refinement_iterations"] = rep.trace.refinement_iterations;
  j["trace"] = std::move(tj);
  return j;
}

RunOutcome run_solve(const InstanceConfig& config, const std::string& mode) {
  const Environment env = build_environment(config);
  const AssumptionReport assumptions = check_assumptions(env);

  std::string effective = mode.empty() ? "auto" : mode;
  if (effective == "auto") {
    if (env.n_types() > 2) {
      effective = "ntype";
    } else {
      bool concave_theta = true;
      const double y_tol = 1e-9 * std::max(1.0, env.x_hi());
      for (const PLPoint& p : env.theta().points()) {
        if (std::abs(env.Theta_value(p.x) - p.y) > y_tol) {
          concave_theta = false;
          break;
        }
      }
      effective = concave_theta ? "convex" : "general";
    }
  }

  RunOutcome outcome;
  outcome.report["config"] = config_to_json(config);
  outcome.report["assumptions"] = assumption_report_json(assumptions);

  std::optional<SolveReport> solved;
  if (effective == "convex") {
    solved = solve_menu_convex_effort(env);
  } else if (effective == "general") {
    solved = solve_menu_general(env);
  } else if (effective == "equal-power") {
    solved = solve_menu_equal_power(env);
  } else if (effective == "convexified") {
    solved = solve_menu_via_convexification(env);
  } else if (effective == "ntype") {
    solved = solve_ntypes_fullrange(env);
  } else {
    throw ConfigError("unknown solve mode '" + effective + "'");
  }

  ordered_json sj;
  sj["mode"] = effective;
  if (!solved) {
    sj["not_applicable"] = true;
    outcome.report["solve"] = std::move(sj);
    return outcome;
  }
  sj["not_applicable"] = false;
  sj.update(solve_report_json(env, *solved));
  outcome.report["solve"] = std::move(sj);

  const std::vector<ClaimResult> checks = verify_structure(env, *solved);
  outcome.report["verification"] = claims_json(checks);

  const WelfareReport welfare = welfare_report(env, *solved);
  ordered_json wj;
  ordered_json rows = ordered_json::array();
  for (std::size_t t = 0; t < welfare.per_type.size(); ++t) {
    const WelfareTypeRow& r = welfare.per_type[t];
    ordered_json row;
    row["type"] = t;
    row["alpha_mh"] = r.alpha_mh;
    row["alpha_fb"] = r.alpha_fb;
    row["alpha_star"] = r.alpha_star;
    row["surplus_star"] = r.surplus_star;
    row["agent_payoff"] = r.agent_payoff;
    row["principal_profit"] = r.principal_profit;
    rows.push_back(std::move(row));
  }
  wj["types"] = std::move(rows);
  wj["orderings"] = claims_json(welfare.orderings);
  outcome.report["welfare"] = std::move(wj);

  ordered_json work;
  work["refinement_iterations"] = solved->trace.refinement_iterations;
  work["grid_sizes"] = solved->trace.grid_sizes;
  outcome.report["work"] = std::move(work);

  outcome.property_violation =
      claims_violated(checks) || claims_violated(welfare.orderings);
  return outcome;
}

namespace {

InstanceConfig example_config(const std::string& which) {
  if (which == "ef-ex1") {
    EffortFunction effort = EffortFunction::linear(1.0, 0.0, 0.0, 0.5);
    std::vector<TypeSpec> types;
    types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 0.5));
    types.emplace_back(0.5, CostFunction::power(2.0 / 3.0, 3.0, 0.0, 0.5));
    return InstanceConfig(0.0, 0.5, std::move(effort), std::move(types));
  }
  if (which == "osc-ex1") {
    EffortFunction effort = EffortFunction::power(0.5, 1.0, 0.0, 1.0);
    std::vector<TypeSpec> types;
    types.emplace_back(0.5, CostFunction::power(1.0, 2.0, 0.0, 1.0));
    types.emplace_back(0.5, CostFunction::power(0.5, 2.0, 0.0, 1.0));
    return InstanceConfig(0.0, 1.0, std::move(effort), std::move(types));
  }
  throw ConfigError("unknown example '" + which + "' (expected ef-ex1 or osc-ex1)");
}

}  // namespace

RunOutcome run_reproduce_example(const std::string& which) {
  const InstanceConfig config = example_config(which);
  const Environment env = build_environment(config);
  std::vector<GoldenAssertion> assertions;
  const auto assert_close = [&](std::string id, double value, double expected,
                                double tol) {
    GoldenAssertion a{std::move(id), value, expected, tol,
                      std::abs(value - expected) <= tol};
    assertions.push_back(a);
  };

  RunOutcome outcome;
  outcome.report["config"] = config_to_json(config);
  outcome.report["assumptions"] = assumption_report_json(check_assumptions(env));

  if (which == "ef-ex1") {
    const PureMhSolution mh0 = solve_pure_mh(env, 0);
    const PureMhSolution mh1 = solve_pure_mh(env, 1);
    assert_close("alpha0_mh", mh0.alpha, 0.25, 1e-9);
    assert_close("alpha1_mh", mh1.alpha, 0.40824829, 1e-7);

    const SolveReport screened = solve_menu_convex_effort(env);
    const double a0 = screened.menu.entries[0].contract.target_effort;
    const double a1 = screened.menu.entries[1].contract.target_effort;
    assert_close("alpha0_star", a0, 0.23198047, 1e-5);
    assert_close("alpha1_star", a1, 0.42074019, 1e-5);
    assert_close("m0_star", screened.menu.entries[0].contract.constant, 0.0, 1e-7);
    assert_close("m1_star", screened.menu.entries[1].contract.constant, 0.0, 1e-7);

    const SolveReport pooled = solve_menu_equal_power(env);
    assert_close("alpha0_s", pooled.menu.entries[0].contract.target_effort, 0.19749115,
                 1e-5);
    assert_close("alpha1_s", pooled.menu.entries[1].contract.target_effort, 0.44439977,
                 1e-5);

    // The optimum sits on the kink where the pinned payment meets zero.
    assert_close("binding_boundary",
                 2.0 * a0 * a0 - (2.0 / 3.0) * a0 * a0 * a0 -
                     (4.0 / 3.0) * a1 * a1 * a1,
                 0.0, 1e-5);

    const PathTrace trace = screening_path_trace(env, 101);
    double max_m1 = 0.0, worst_drop = 0.0;
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
      max_m1 = std::max(max_m1, -trace.rows[i].neg_m1);
      if (i > 0) {
        worst_drop = std::max(worst_drop,
                              trace.rows[i - 1].term0 - trace.rows[i].term0);
        worst_drop = std::max(worst_drop,
                              trace.rows[i - 1].term1 - trace.rows[i].term1);
      }
    }
    assert_close("path_max_m1", max_m1, 0.0, 1e-7);
    assert_close("path_terms_monotone", worst_drop, 0.0, 1e-10);

    outcome.report["solve"] = solve_report_json(env, screened);
    outcome.report["equal_power"] = solve_report_json(env, pooled);
  } else {
    const SolveReport general = solve_menu_general(env);
    GoldenAssertion single{"single_full_range",
                           is_single_full_range(env, general.menu) ? 1.0 : 0.0, 1.0,
                           0.0, is_single_full_range(env, general.menu)};
    assertions.push_back(single);

    const std::optional<SolveReport> lifted = solve_menu_via_convexification(env);
    GoldenAssertion applicable{"convexified_applicable", lifted ? 1.0 : 0.0, 1.0, 0.0,
                               lifted.has_value()};
    assertions.push_back(applicable);
    if (lifted) {
      assert_close("objective_match", general.objective, lifted->objective, 1e-7);
      assert_close("power_match", general.menu.entries[0].contract.power,
                   lifted->menu.entries[0].contract.power, 1e-6);
    }
    // Linear concavified production with quadratic costs pins the common
    // power at half the production slope.
    assert_close("common_power", general.menu.entries[0].contract.power, 0.5, 1e-6);

    outcome.report["solve"] = solve_report_json(env, general);
    if (lifted) outcome.report["convexified"] = solve_report_json(env, *lifted);
  }

  outcome.report["assertions"] = assertions_json(assertions);
  for (const GoldenAssertion& a : assertions) {
    if (!a.passed) outcome.property_violation = true;
  }
  return outcome;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flexible moral-hazard contract menus: solvers and verification"};
  app.require_subcommand(1);

  std::string config_path, out_path, mode = "auto", menu_path, which;
  int steps = 101;

  CLI::App* cmd_check = app.add_subcommand("check", "Validate assumptions");
  cmd_check->add_option("--config", config_path, "Instance config path")->required();

  CLI::App* cmd_solve = app.add_subcommand("solve", "Solve for the optimal menu");
  cmd_solve->add_option("--config", config_path, "Instance config path")->required();
  cmd_solve->add_option("--mode", mode,
                        "auto|convex|general|equal-power|convexified|ntype");
  cmd_solve->add_option("--out", out_path, "Write the report to a file");

  CLI::App* cmd_baseline = app.add_subcommand("baseline", "Benchmark solutions");
  cmd_baseline->add_option("--config", config_path, "Instance config path")->required();

  CLI::App* cmd_maximal = app.add_subcommand("maximal-range", "Maximal contract ranges");
  cmd_maximal->add_option("--config", config_path, "Instance config path")->required();
  cmd_maximal->add_option("--menu", menu_path, "Menu description path")->required();

  CLI::App* cmd_trace = app.add_subcommand("trace", "Screening path CSV");
  cmd_trace->add_option("--config", config_path, "Instance config path")->required();
  cmd_trace->add_option("--steps", steps, "Rows in the path");
  cmd_trace->add_option("--out", out_path, "Write the CSV to a file");

  CLI::App* cmd_repro =
      app.add_subcommand("reproduce-example", "Rebuild a worked example");
  cmd_repro->add_option("which", which, "ef-ex1 or osc-ex1")->required();

  std::vector<const char*> argv;
  argv.push_back("flexmh");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "argument error: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto started = std::chrono::steady_clock::now();
    int code = 0;
    if (cmd_check->parsed()) {
      const InstanceConfig config = parse_instance_config(read_file(config_path));
      const Environment env = build_environment(config);
      const AssumptionReport rep = check_assumptions(env);
      ordered_json j;
      j["config"] = config_to_json(config);
      j["assumptions"] = assumption_report_json(rep);
      j["required_hold"] = rep.required_hold(env.n_types());
      out << dump_canonical(j);
      code = rep.required_hold(env.n_types()) ? 0 : 2;
    } else if (cmd_solve->parsed()) {
      const InstanceConfig config = parse_instance_config(read_file(config_path));
      const RunOutcome outcome = run_solve(config, mode);
      write_output(dump_canonical(outcome.report), out_path, out);
      code = outcome.property_violation ? 3 : 0;
    } else if (cmd_baseline->parsed()) {
      const InstanceConfig config = parse_instance_config(read_file(config_path));
      const Environment env = build_environment(config);
      ordered_json rows = ordered_json::array();
      for (std::size_t t = 0; t < env.n_types(); ++t) {
        const PureMhSolution mh = solve_pure_mh(env, t);
        const FirstBestSolution fb = solve_first_best(env, t);
        ordered_json j;
        j["type"] = t;
        j["alpha_mh"] = mh.alpha;
        j["profit_mh"] = mh.profit;
        j["alpha_fb"] = fb.alpha;
        j["surplus_fb"] = fb.surplus;
        rows.push_back(std::move(j));
      }
      ordered_json j;
      j["config"] = config_to_json(config);
      j["baseline"] = std::move(rows);
      out << dump_canonical(j);
    } else if (cmd_maximal->parsed()) {
      const InstanceConfig config = parse_instance_config(read_file(config_path));
      const Environment env = build_environment(config);
      ordered_json menu_doc;
      try {
        menu_doc = ordered_json::parse(read_file(menu_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("menu file parse error: ") + e.what());
      }
      std::vector<double> efforts, payments;
      std::vector<OutputRange> ranges;
      for (const auto& cj : menu_doc.at("contracts")) {
        efforts.push_back(cj.at("effort").get<double>());
        payments.push_back(cj.value("payment", 0.0));
        ranges.push_back(range_from_json(cj.at("range")));
      }
      const Menu menu = make_menu(env, efforts, payments, ranges);
      ordered_json rows = ordered_json::array();
      for (std::size_t t = 0; t < menu.size(); ++t) {
        const OutputRange maximal = maximal_range(env, menu, t);
        ordered_json j;
        j["type"] = t;
        j["range"] = range_json(env, maximal);
        j["full"] = env.range_is_full(maximal);
        rows.push_back(std::move(j));
      }
      ordered_json j;
      j["maximal_ranges"] = std::move(rows);
      out << dump_canonical(j);
    } else if (cmd_trace->parsed()) {
      const InstanceConfig config = parse_instance_config(read_file(config_path));
      const Environment env = build_environment(config);
      const PathTrace trace = screening_path_trace(env, steps);
      write_output(path_trace_csv(trace), out_path, out);
    } else if (cmd_repro->parsed()) {
      const RunOutcome outcome = run_reproduce_example(which);
      write_output(dump_canonical(outcome.report), out_path, out);
      code = outcome.property_violation ? 3 : 0;
    }
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - started);
    err << "elapsed_seconds=" << elapsed.count() << "\n";
    return code;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    err << "property violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace flexmh
