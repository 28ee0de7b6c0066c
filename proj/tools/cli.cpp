#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>

#include "lichnerowicz/analysis.hpp"
#include "lichnerowicz/errors.hpp"
#include "lichnerowicz/expression.hpp"
#include "lichnerowicz/field_io.hpp"
#include "lichnerowicz/nonexistence.hpp"

namespace lichnerowicz::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json grid_json(const Grid& g) {
  return {{"d", g.dim()},
          {"n", std::vector<int>(g.sizes().begin(), g.sizes().end())},
          {"L", std::vector<double>(g.periods().begin(), g.periods().end())}};
}

json condition_json(const ConditionCheck& c) {
  return {{"passed", c.passed},
          {"margin", num(c.margin)},
          {"offending_indices", c.offending},
          {"offending_count", c.offending_count}};
}

json bracket_json(const Bracket& b) {
  return {{"theta_low", num(b.theta_low)},
          {"theta_high", num(b.theta_high)},
          {"delta0", num(b.delta0)},
          {"theta_high_is_minimizer", b.theta_high_is_minimizer},
          {"subsolution_margin", num(b.sub_margin)},
          {"supersolution_margin", num(b.super_margin)}};
}

const char* kind_name(RMinimum::Kind k) {
  switch (k) {
    case RMinimum::Kind::attained: return "attained";
    case RMinimum::Kind::unbounded_below: return "unbounded_below";
    case RMinimum::Kind::infimum_at_infinity: return "infimum_at_infinity";
  }
  return "?";
}

json header(const std::string& command, const CoefficientSet& cs) {
  return {{"command", command},
          {"timestamp", timestamp()},
          {"grid", grid_json(cs.grid())},
          {"N", cs.N},
          {"mode", cs.origin},
          {"non_geometric_h", cs.non_geometric_h}};
}

json assumptions_json(const AssumptionReport& r) {
  std::vector<json> t_grid;
  for (double t : r.r.t_grid) t_grid.push_back(num(t));
  return {{"A1", condition_json(r.a1)},
          {"A2", condition_json(r.a2)},
          {"A3", condition_json(r.a3)},
          {"A4", condition_json(r.a4)},
          {"all_passed", r.all_passed()},
          {"failed", r.failed()},
          {"lambda1", num(r.lambda1)},
          {"discrete_essinf_h_minus_csq", num(r.q_inf)},
          {"discrete_essinf_h", num(r.h_inf)},
          {"kappa", num(r.kappa)},
          {"h_minus_csq_positive", r.q_positive},
          {"rmin", num(r.rmin)},
          {"rargmin", num(r.rargmin)},
          {"r_kind", kind_name(r.r.kind)},
          {"r_t_grid", t_grid}};
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_trace(const fs::path& path, const std::vector<TraceRow>& trace) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "iter,delta_inf,res_inf,res_l2,u_min,u_max\n";
  char line[256];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter, r.delta_inf, r.res_inf, r.res_l2,
                  r.u_min, r.u_max);
    out << line;
  }
}

struct Output {
  fs::path dir;
  bool emit_fields = true;
  bool emit_trace = true;
};

Output output_from_config(const json& config, const fs::path& base) {
  Output o;
  const json sec = config.value("output", json::object());
  o.dir = sec.value("directory", std::string("out"));
  if (o.dir.is_relative()) o.dir = base / o.dir;
  o.emit_fields = sec.value("emit_fields", true);
  o.emit_trace = sec.value("emit_trace", true);
  return o;
}

ScalarField field_from(const json& sec, const char* key, const Grid& grid, const fs::path& base,
                       std::optional<double> fallback) {
  if (!sec.contains(key)) {
    if (fallback) return ScalarField::constant(grid, *fallback);
    throw ConfigError(std::string("coefficients.") + key + " is required");
  }
  const json& v = sec.at(key);
  if (v.is_number()) return ScalarField::constant(grid, v.get<double>());
  if (v.is_string()) return Expression::parse(v.get<std::string>(), grid.dim()).sample(grid);
  if (v.is_object() && v.contains("file")) {
    fs::path stem = v.at("file").get<std::string>();
    if (stem.is_relative()) stem = base / stem;
    return read_field(stem, &grid);
  }
  throw ConfigError(std::string("coefficients.") + key + " must be a number, an expression, or {\"file\": ...}");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path out = p;
  return out.is_relative() ? base / out : out;
}

int check_command(const CoefficientSet& cs, const Output& o, std::ostream& out) {
  const AssumptionReport rep = check_assumptions(cs);
  json j = header("check", cs);
  j["assumptions"] = assumptions_json(rep);
  if (rep.all_passed()) j["bracket"] = bracket_json(compute_bracket(cs, rep));
  write_json(o.dir / "check_report.json", j);
  out << j.dump(2) << '\n';
  return rep.all_passed() ? kSuccess : kAssumptionFailure;
}

int solve_command(const CoefficientSet& cs, const SolverConfig& cfg, const Output& o, std::ostream& out,
                  std::ostream& err) {
  const AssumptionReport rep = check_assumptions(cs);
  json j = header("solve", cs);
  j["assumptions"] = assumptions_json(rep);
  if (!rep.all_passed()) {
    j["status"] = "assumption_failure";
    write_json(o.dir / "solve_report.json", j);
    err << "assumptions fail:";
    for (const auto& f : rep.failed()) err << ' ' << f;
    err << '\n';
    return kAssumptionFailure;
  }
  const Bracket br = compute_bracket(cs, rep);
  j["bracket"] = bracket_json(br);

  std::optional<SolveReport> result;
  try {
    result = outer_solve(TruncationContext(cs, br), cfg);
  } catch (const NonConvergence& e) {
    j["status"] = "inner_non_convergence";
    j["message"] = e.what();
    write_json(o.dir / "solve_report.json", j);
    err << e.what() << '\n';
    return kNonConvergence;
  }
  const SolveReport& s = *result;

  j["status"] = s.converged ? "converged" : "not_converged";
  j["message"] = s.message;
  j["converged"] = s.converged;
  j["outer_iters"] = s.outer_iters;
  j["monotone"] = s.monotone;
  j["bracket_ok"] = s.bracket_ok;
  j["max_monotonicity_violation"] = num(s.max_monotonicity_violation);
  j["max_bracket_violation"] = num(s.max_bracket_violation);
  j["final_residual_inf"] = num(s.final_residual_inf);
  j["final_residual_l2"] = num(s.final_residual_l2);
  j["truncation_gap"] = num(s.truncation_gap);
  j["u_min"] = num(field_min(s.u));
  j["u_max"] = num(field_max(s.u));
  j["inner"] = {{"method", cfg.inner_method == InnerMethod::newton ? "newton" : "contraction"},
                {"total_iterations", s.inner.iterations},
                {"final_shift", num(s.inner.shift)},
                {"max_contraction_factor", num(s.inner.contraction_factor)},
                {"contraction_bound", num(s.inner.contraction_bound)},
                {"max_residual", num(s.inner.residual)}};
  j["coercivity"] = {{"samples", s.coercivity.samples},
                     {"kappa", num(s.coercivity.kappa)},
                     {"worst_slack", num(s.coercivity.worst_slack)},
                     {"passed", s.coercivity.passed}};
  j["solver"] = {{"tol_outer", cfg.tol_outer},
                 {"tol_inner", cfg.tol_inner},
                 {"tol_residual", cfg.tol_residual},
                 {"max_outer", cfg.max_outer},
                 {"max_inner", cfg.max_inner},
                 {"monotonicity_tolerance", cfg.monotonicity_tolerance},
                 {"seed", cfg.seed}};

  if (o.emit_fields) write_field(o.dir / "u", s.u);
  if (o.emit_trace) write_trace(o.dir / "trace.csv", s.trace);
  write_json(o.dir / "solve_report.json", j);

  char line[256];
  std::snprintf(line, sizeof line, "%s after %d outer iterations, residual %.3e, u in [%.12g, %.12g]\n",
                s.converged ? "converged" : "NOT converged", s.outer_iters, s.final_residual_inf, field_min(s.u),
                field_max(s.u));
  out << line;
  return s.converged ? kSuccess : kNonConvergence;
}

int nonexist_command(const CoefficientSet& cs, const Output& o, std::ostream& out, std::ostream& err) {
  const NonexistenceReport rep = ne_conditions(cs);
  json j = header("nonexist", cs);
  j["certificate_kind"] = "grid certificate";
  j["hypotheses_hold"] = rep.hypotheses_hold;
  j["oracle"] = {{"certified", rep.oracle.certified},
                 {"worst_margin", num(rep.oracle.worst_margin)},
                 {"worst_point", rep.oracle.worst_point}};
  json conds = json::array();
  for (const auto& c : rep.conditions)
    conds.push_back({{"name", c.name},
                     {"applicable", c.applicable},
                     {"satisfied", c.satisfied},
                     {"lhs", num(c.lhs)},
                     {"rhs", num(c.rhs)},
                     {"worst_point", c.worst_point}});
  j["conditions"] = conds;
  j["consistency"] = rep.consistency;
  write_json(o.dir / "nonexist_report.json", j);
  out << j.dump(2) << '\n';
  if (!rep.hypotheses_hold) {
    err << "standing hypotheses a > 0, cd >= 0, dsq > 0 fail; no condition applies\n";
    return kAssumptionFailure;
  }
  if (!rep.consistency) {
    err << "a satisfied condition lacks an oracle certificate\n";
    return kInternal;
  }
  return kSuccess;
}

json validation_json(const CoefficientSet& cs) {
  json v = json::object();
  for (const auto& c : validate_coefficients(cs).checks) v[c.name] = condition_json(c);
  return v;
}

}  // namespace

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("empty component in override path " + path);
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ConfigError("override path " + path + " indexes an array with '" + key + "'");
      }
      if (idx >= node->size()) throw ConfigError("override path " + path + ": index out of range");
      node = &(*node)[idx];
    } else {
      if (!node->is_object()) *node = json::object();
      node = &(*node)[key];
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

json load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!config.is_object()) throw ConfigError(path.string() + ": top level must be an object");
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

Grid grid_from_config(const json& config) {
  if (!config.contains("grid")) throw ConfigError("config needs a grid section");
  const json& g = config.at("grid");
  const int d = g.at("d").get<int>();
  auto n = g.at("n");
  auto L = g.at("L");
  std::vector<int> ns = n.is_array() ? n.get<std::vector<int>>() : std::vector<int>(static_cast<std::size_t>(d), n.get<int>());
  std::vector<double> Ls;
  auto length = [](const json& v) {
    return v.is_string() ? Expression::parse(v.get<std::string>(), 0).evaluate({}) : v.get<double>();
  };
  if (L.is_array())
    for (const auto& v : L) Ls.push_back(length(v));
  else
    Ls.assign(static_cast<std::size_t>(d), length(L));
  return make_grid(d, ns, Ls);
}

CoefficientSet coefficients_from_config(const json& config, const Grid& grid, const fs::path& base) {
  if (!config.contains("coefficients")) throw ConfigError("config needs a coefficients section");
  const json& sec = config.at("coefficients");
  const std::string mode = sec.value("mode", std::string("direct"));

  if (mode == "direct") {
    if (sec.contains("directory")) {
      CoefficientSet cs = read_coefficients(resolve(base, sec.at("directory").get<std::string>()), &grid);
      return cs;
    }
    CoefficientSet cs(sec.value("N", 3), field_from(sec, "a", grid, base, std::nullopt),
                      field_from(sec, "b", grid, base, std::nullopt), field_from(sec, "csq", grid, base, 0.0),
                      field_from(sec, "dsq", grid, base, 0.0), field_from(sec, "cd", grid, base, 0.0),
                      field_from(sec, "h", grid, base, 0.0));
    cs.origin = "direct";
    return cs;
  }

  if (mode == "geometric") {
    const int N = sec.value("N", grid.dim());
    if (sec.contains("directory"))
      return assemble_geometric(read_geometric(resolve(base, sec.at("directory").get<std::string>()), &grid), N);
    const int d = grid.dim();
    std::vector<ScalarField> w;
    const json W = sec.value("W", json::array());
    if (!W.empty() && W.size() != static_cast<std::size_t>(d)) throw ConfigError("coefficients.W needs d components");
    for (int i = 0; i < d; ++i) {
      json holder = {{"W", W.empty() ? json(0.0) : W.at(static_cast<std::size_t>(i))}};
      w.push_back(field_from(holder, "W", grid, base, 0.0));
    }
    std::vector<ScalarField> s;
    const json S = sec.value("sigma", json::array());
    const auto ncomp = static_cast<std::size_t>(SymTensorField::component_count(d));
    if (!S.empty() && S.size() != ncomp) throw ConfigError("coefficients.sigma needs d(d+1)/2 components");
    for (std::size_t i = 0; i < ncomp; ++i) {
      json holder = {{"sigma", S.empty() ? json(0.0) : S.at(i)}};
      s.push_back(field_from(holder, "sigma", grid, base, 0.0));
    }
    std::optional<ScalarField> R;
    if (sec.contains("R")) R = field_from(sec, "R", grid, base, std::nullopt);
    GeometricData gd{field_from(sec, "tau", grid, base, std::nullopt), field_from(sec, "pi", grid, base, std::nullopt),
                     sec.value("nu", 0.0), VectorField(std::move(w)), SymTensorField(std::move(s)), std::move(R)};
    return assemble_geometric(gd, N);
  }

  if (mode == "manufactured") {
    return manufacture_h(field_from(sec, "u_star", grid, base, std::nullopt),
                         field_from(sec, "a", grid, base, std::nullopt), field_from(sec, "b", grid, base, std::nullopt),
                         field_from(sec, "csq", grid, base, 0.0), field_from(sec, "dsq", grid, base, 0.0),
                         field_from(sec, "cd", grid, base, 0.0), sec.value("N", 3));
  }
  throw ConfigError("coefficients.mode must be direct, geometric, or manufactured (got " + mode + ")");
}

SolverConfig solver_from_config(const json& config) {
  SolverConfig cfg;
  const json sec = config.value("solver", json::object());
  cfg.tol_outer = sec.value("tol_outer", cfg.tol_outer);
  cfg.tol_inner = sec.value("tol_inner", cfg.tol_inner);
  cfg.tol_residual = sec.value("tol_residual", cfg.tol_residual);
  cfg.max_outer = sec.value("max_outer", cfg.max_outer);
  cfg.max_inner = sec.value("max_inner", cfg.max_inner);
  cfg.monotonicity_tolerance = sec.value("monotonicity_tolerance", cfg.monotonicity_tolerance);
  cfg.coercivity_samples = sec.value("coercivity_samples", cfg.coercivity_samples);
  cfg.seed = sec.value("seed", cfg.seed);
  const std::string method = sec.value("inner_method", std::string("contraction"));
  if (method == "contraction")
    cfg.inner_method = InnerMethod::contraction;
  else if (method == "newton")
    cfg.inner_method = InnerMethod::newton;
  else
    throw ConfigError("solver.inner_method must be contraction or newton");
  cfg.validate();
  return cfg;
}

int run(const std::string& command, const fs::path& config_path, const std::vector<std::string>& overrides,
        std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  try {
    const json config = load_config(config_path, overrides);
    const fs::path base = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
    const Output o = output_from_config(config, base);
    const Grid grid = grid_from_config(config);

    if (command != "check" && command != "solve" && command != "nonexist" && command != "assemble" &&
        command != "manufacture")
      throw ConfigError("unknown command " + command);

    SolverConfig cfg = solver_from_config(config);
    if (seed) cfg.seed = *seed;
    const CoefficientSet cs = coefficients_from_config(config, grid, base);

    if (command == "check") return check_command(cs, o, out);
    if (command == "solve") return solve_command(cs, cfg, o, out, err);
    if (command == "nonexist") return nonexist_command(cs, o, out, err);

    if (command == "manufacture" && cs.origin != "manufactured")
      throw ConfigError("manufacture needs coefficients.mode = manufactured");
    write_coefficients(o.dir / "coefficients", cs);
    json j = header(command, cs);
    j["validation"] = validation_json(cs);
    if (command == "manufacture") {
      const json& sec = config.at("coefficients");
      const ScalarField u_star = field_from(sec, "u_star", grid, base, std::nullopt);
      write_field(o.dir / "u_star", u_star);
      const Residual r = residual(u_star, cs);
      j["u_star_residual_inf"] = num(r.norm_inf);
      j["u_star_residual_l2"] = num(r.norm_l2);
    }
    write_json(o.dir / (command + "_report.json"), j);
    out << "wrote " << (o.dir / "coefficients").string() << '\n';
    return kSuccess;
  } catch (const NoSupersolution& e) {
    err << "assumption failure: " << e.what() << '\n';
    return kAssumptionFailure;
  } catch (const PreconditionError& e) {
    err << "assumption failure: " << e.what() << '\n';
    return kAssumptionFailure;
  } catch (const NonConvergence& e) {
    err << "non-convergence: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace lichnerowicz::cli
