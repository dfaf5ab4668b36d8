#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "flexmh/cli.hpp"

namespace py = pybind11;

namespace {

flexmh::Environment env_from_json(const std::string& config_json) {
  return flexmh::build_environment(flexmh::parse_instance_config(config_json));
}

std::vector<std::pair<double, double>> envelope_py(
    const std::vector<std::pair<double, double>>& samples, bool upper) {
  std::vector<flexmh::PLPoint> pts;
  pts.reserve(samples.size());
  for (const auto& [x, y] : samples) pts.push_back({x, y});
  const flexmh::PiecewiseLinearFn env =
      upper ? flexmh::upper_concave_envelope(pts) : flexmh::lower_convex_envelope(pts);
  std::vector<std::pair<double, double>> out;
  for (const flexmh::PLPoint& p : env.points()) out.emplace_back(p.x, p.y);
  return out;
}

std::string solve_py(const std::string& config_json, const std::string& mode) {
  const flexmh::InstanceConfig config = flexmh::parse_instance_config(config_json);
  return flexmh::dump_canonical(flexmh::run_solve(config, mode).report);
}

std::string check_py(const std::string& config_json) {
  const flexmh::Environment env = env_from_json(config_json);
  nlohmann::ordered_json j;
  const flexmh::AssumptionReport rep = flexmh::check_assumptions(env);
  j["assumptions"] = flexmh::assumption_report_json(rep);
  j["required_hold"] = rep.required_hold(env.n_types());
  return flexmh::dump_canonical(j);
}

std::string baseline_py(const std::string& config_json) {
  const flexmh::Environment env = env_from_json(config_json);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < env.n_types(); ++t) {
    const flexmh::PureMhSolution mh = flexmh::solve_pure_mh(env, t);
    const flexmh::FirstBestSolution fb = flexmh::solve_first_best(env, t);
    nlohmann::ordered_json j;
    j["type"] = t;
    j["alpha_mh"] = mh.alpha;
    j["profit_mh"] = mh.profit;
    j["alpha_fb"] = fb.alpha;
    j["surplus_fb"] = fb.surplus;
    rows.push_back(std::move(j));
  }
  nlohmann::ordered_json j;
  j["baseline"] = std::move(rows);
  return flexmh::dump_canonical(j);
}

std::string trace_py(const std::string& config_json, int steps) {
  const flexmh::Environment env = env_from_json(config_json);
  return flexmh::path_trace_csv(flexmh::screening_path_trace(env, steps));
}

std::string reproduce_py(const std::string& which) {
  return flexmh::dump_canonical(flexmh::run_reproduce_example(which).report);
}

std::string canonical_config_py(const std::string& config_json) {
  return flexmh::canonical_config_json(flexmh::parse_instance_config(config_json));
}

}  // namespace

PYBIND11_MODULE(_flexmh, m) {
  m.doc() = "Flexible moral-hazard contract menus: solvers and verification";

  m.def("upper_concave_envelope",
        [](const std::vector<std::pair<double, double>>& s) {
          return envelope_py(s, true);
        },
        py::arg("samples"),
        "Breakpoints of the smallest concave function above the samples.");
  m.def("lower_convex_envelope",
        [](const std::vector<std::pair<double, double>>& s) {
          return envelope_py(s, false);
        },
        py::arg("samples"),
        "Breakpoints of the largest convex function below the samples.");
  m.def("solve", &solve_py, py::arg("config_json"), py::arg("mode") = "auto",
        "Solve an instance; returns the run report as a JSON string.");
  m.def("check", &check_py, py::arg("config_json"),
        "Assumption report as a JSON string.");
  m.def("baseline", &baseline_py, py::arg("config_json"),
        "Pure moral-hazard and first-best benchmarks as a JSON string.");
  m.def("trace", &trace_py, py::arg("config_json"), py::arg("steps") = 101,
        "Screening path as CSV text.");
  m.def("reproduce_example", &reproduce_py, py::arg("which"),
        "Reproduce a worked example; returns the report as a JSON string.");
  m.def("canonical_config", &canonical_config_py, py::arg("config_json"),
        "Validate a config and return its canonical serialization.");
}
