#include "flexmh/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace flexmh {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + path + ": " + what);
}

void require_keys(const ordered_json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) fail(path + "." + item.key(), "unknown field");
  }
}

double get_number(const ordered_json& obj, const std::string& path,
                  const std::string& key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing field");
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double get_number_or(const ordered_json& obj, const std::string& path,
                     const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

EffortFunction parse_effort(const ordered_json& j, const std::string& path,
                            double x_lo, double x_hi) {
  if (!j.is_object() || !j.contains("family")) fail(path, "missing effort family");
  const std::string family = j.at("family").get<std::string>();
  if (family == "linear") {
    require_keys(j, path, {"family", "slope", "intercept"});
    return EffortFunction::linear(get_number(j, path, "slope"),
                                  get_number_or(j, path, "intercept", 0.0), x_lo, x_hi);
  }
  if (family == "power") {
    require_keys(j, path, {"family", "exponent", "scale"});
    return EffortFunction::power(get_number(j, path, "exponent"),
                                 get_number_or(j, path, "scale", 1.0), x_lo, x_hi);
  }
  if (family == "piecewise") {
    require_keys(j, path, {"family", "points"});
    if (!j.contains("points") || !j.at("points").is_array()) {
      fail(path + ".points", "expected an array of [x, y] pairs");
    }
    std::vector<PLPoint> pts;
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2) fail(path + ".points", "expected [x, y] pairs");
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    try {
      return EffortFunction::piecewise(PiecewiseLinearFn(std::move(pts)));
    } catch (const std::exception& e) {
      fail(path + ".points", e.what());
    }
  }
  fail(path + ".family", "unknown effort family '" + family + "'");
}

CostFunction parse_cost(const ordered_json& j, const std::string& path, double c_hi) {
  if (!j.is_object() || !j.contains("family")) fail(path, "missing cost family");
  const std::string family = j.at("family").get<std::string>();
  try {
    if (family == "power") {
      require_keys(j, path, {"family", "beta", "exponent"});
      return CostFunction::power(get_number(j, path, "beta"),
                                 get_number(j, path, "exponent"), 0.0, c_hi);
    }
    if (family == "scaled") {
      require_keys(j, path, {"family", "eta", "base"});
      if (!j.contains("base")) fail(path + ".base", "missing field");
      return CostFunction::scaled(get_number(j, path, "eta"),
                                  parse_cost(j.at("base"), path + ".base", c_hi));
    }
    if (family == "polynomial") {
      require_keys(j, path, {"family", "coefficients"});
      if (!j.contains("coefficients") || !j.at("coefficients").is_array()) {
        fail(path + ".coefficients", "expected an array");
      }
      std::vector<double> coeffs;
      for (const auto& c : j.at("coefficients")) coeffs.push_back(c.get<double>());
      return CostFunction::polynomial(std::move(coeffs), 0.0, c_hi);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  fail(path + ".family", "unknown cost family '" + family + "'");
}

ordered_json effort_to_json(const EffortFunction& effort) {
  ordered_json j;
  switch (effort.family()) {
    case EffortFunction::Family::Linear:
      j["family"] = "linear";
      j["slope"] = effort.param_a();
      j["intercept"] = effort.param_b();
      break;
    case EffortFunction::Family::Power:
      j["family"] = "power";
      j["exponent"] = effort.param_a();
      j["scale"] = effort.param_b();
      break;
    case EffortFunction::Family::Piecewise: {
      j["family"] = "piecewise";
      ordered_json pts = ordered_json::array();
      for (const PLPoint& p : effort.piecewise_fn()->points()) {
        pts.push_back(ordered_json::array({p.x, p.y}));
      }
      j["points"] = std::move(pts);
      break;
    }
  }
  return j;
}

ordered_json cost_to_json(const CostFunction& cost) {
  ordered_json j;
  switch (cost.family()) {
    case CostFunction::Family::Power:
      j["family"] = "power";
      j["beta"] = cost.power_beta();
      j["exponent"] = cost.power_exponent();
      break;
    case CostFunction::Family::Scaled:
      j["family"] = "scaled";
      j["eta"] = cost.scale_eta();
      j["base"] = cost_to_json(*cost.base());
      break;
    case CostFunction::Family::Polynomial:
      j["family"] = "polynomial";
      j["coefficients"] = cost.coefficients();
      break;
  }
  return j;
}

}  // namespace

InstanceConfig parse_instance_config(const std::string& json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  require_keys(root, "$", {"output_interval", "effort", "types", "solver"});

  if (!root.contains("output_interval") || !root.at("output_interval").is_array() ||
      root.at("output_interval").size() != 2) {
    fail("$.output_interval", "expected [x_lo, x_hi]");
  }
  const double x_lo = root.at("output_interval")[0].get<double>();
  const double x_hi = root.at("output_interval")[1].get<double>();
  if (!(x_hi > x_lo) || x_lo < 0.0) fail("$.output_interval", "need 0 <= x_lo < x_hi");

  if (!root.contains("effort")) fail("$.effort", "missing field");
  EffortFunction effort = parse_effort(root.at("effort"), "$.effort", x_lo, x_hi);
  const double c_hi = effort(x_hi);

  if (!root.contains("types") || !root.at("types").is_array() ||
      root.at("types").size() < 2) {
    fail("$.types", "expected an array of at least two types");
  }
  std::vector<TypeSpec> types;
  std::size_t index = 0;
  for (const auto& tj : root.at("types")) {
    const std::string path = "$.types[" + std::to_string(index++) + "]";
    require_keys(tj, path, {"prob", "cost"});
    const double prob = get_number(tj, path, "prob");
    if (!tj.contains("cost")) fail(path + ".cost", "missing field");
    types.emplace_back(prob, parse_cost(tj.at("cost"), path + ".cost", c_hi));
  }

  SolverConfig solver;
  if (root.contains("solver")) {
    const auto& sj = root.at("solver");
    require_keys(sj, "$.solver", {"effort_grid", "menu_grid", "refine_tol", "seed"});
    solver.effort_grid =
        static_cast<int>(get_number_or(sj, "$.solver", "effort_grid", 2001));
    solver.refine_tol = get_number_or(sj, "$.solver", "refine_tol", 1e-8);
    if (sj.contains("seed")) {
      solver.seed = sj.at("seed").get<std::uint64_t>();
    }
    if (sj.contains("menu_grid")) {
      if (!sj.at("menu_grid").is_array()) fail("$.solver.menu_grid", "expected an array");
      std::vector<int> grid;
      for (const auto& g : sj.at("menu_grid")) grid.push_back(g.get<int>());
      if (grid.size() > 8) fail("$.solver.menu_grid", "too many entries (max 8)");
      // Prefix order: convex (2), general (4), equal-power, n-type.
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 2) fail("$.solver.menu_grid", "entries must be at least 2");
        if (i < 2) {
          solver.convex_grid[i] = grid[i];
        } else if (i < 6) {
          solver.general_grid[i - 2] = grid[i];
        } else if (i == 6) {
          solver.equal_power_grid = grid[i];
        } else {
          solver.ntype_grid = grid[i];
        }
      }
    }
    if (solver.effort_grid < 3) fail("$.solver.effort_grid", "must be at least 3");
    if (!(solver.refine_tol > 0)) fail("$.solver.refine_tol", "must be positive");
  }

  return InstanceConfig(x_lo, x_hi, std::move(effort), std::move(types), solver);
}

nlohmann::ordered_json config_to_json(const InstanceConfig& config) {
  ordered_json j;
  j["output_interval"] = ordered_json::array({config.x_lo, config.x_hi});
  j["effort"] = effort_to_json(config.effort);
  ordered_json types = ordered_json::array();
  for (const TypeSpec& t : config.types) {
    ordered_json tj;
    tj["prob"] = t.prob;
    tj["cost"] = cost_to_json(t.cost);
    types.push_back(std::move(tj));
  }
  j["types"] = std::move(types);
  ordered_json sj;
  sj["effort_grid"] = config.solver.effort_grid;
  sj["menu_grid"] = ordered_json::array(
      {config.solver.convex_grid[0], config.solver.convex_grid[1],
       config.solver.general_grid[0], config.solver.general_grid[1],
       config.solver.general_grid[2], config.solver.general_grid[3],
       config.solver.equal_power_grid, config.solver.ntype_grid});
  sj["refine_tol"] = config.solver.refine_tol;
  sj["seed"] = config.solver.seed;
  j["solver"] = std::move(sj);
  return j;
}

std::string canonical_config_json(const InstanceConfig& config) {
  return dump_canonical(config_to_json(config));
}

namespace {

void dump_rec(const ordered_json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& item : j.items()) {
        out += pad_in + ordered_json(item.key()).dump() + ": ";
        dump_rec(item.value(), out, indent, depth + 1);
        if (++i < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad_in;
        dump_rec(j[i], out, indent, depth + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.12g", j.get<double>());
      out += buf;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_canonical(const ordered_json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  out += "\n";
  return out;
}

}  // namespace flexmh
