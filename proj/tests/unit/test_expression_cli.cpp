#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "lichnerowicz/errors.hpp"
#include "lichnerowicz/expression.hpp"
#include "lichnerowicz/field_io.hpp"
#include "support/support.hpp"

using namespace lichnerowicz;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lichnerowicz_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& cfg) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << cfg.dump(2);
  return p;
}

json benchmark_config(int n) {
  return json{{"grid", {{"d", 1}, {"n", n}, {"L", "2*pi"}}},
              {"coefficients", {{"mode", "direct"}, {"N", 3}, {"a", 1}, {"b", 2}, {"dsq", 1}}},
              {"solver", {{"coercivity_samples", 5}}}};
}

int run(const std::string& cmd, const fs::path& cfg, const std::vector<std::string>& overrides = {}) {
  std::ostringstream out, err;
  return cli::run(cmd, cfg, overrides, std::nullopt, out, err);
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_CASE("expression parser matches direct evaluation") {
  const Grid g = testsupport::torus(2, 8);
  const Expression e = Expression::parse("1.5 + 0.5*sin(x1) - cos(2*x2)^2 / exp(-x1) + -pi", 2);
  const ScalarField s = e.sample(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.point(p);
    const double direct = 1.5 + 0.5 * std::sin(x[0]) - std::pow(std::cos(2 * x[1]), 2) / std::exp(-x[0]) + -std::numbers::pi;
    CHECK(std::abs(s[p] - direct) <= 1e-15 * (1 + std::abs(direct)));
  }
  CHECK(Expression::parse("2^3^2", 1).evaluate({}) == 512.0);
  CHECK(Expression::parse("-2^2", 1).evaluate({}) == -4.0);
  CHECK(Expression::parse("1e-3*4", 1).evaluate({}) == doctest::Approx(4e-3));
  CHECK(Expression::parse("(1+2)*3", 1).evaluate({}) == 9.0);
}

TEST_CASE("expression parser errors") {
  for (const char* bad : {"", "1+", "sin(1", "foo(2)", "x4", "1 2", "(", "x1 +* 2"})
    CHECK_THROWS_AS(Expression::parse(bad, 3), ConfigError);
  CHECK_THROWS_AS(Expression::parse("x2", 1), ConfigError);
  CHECK_THROWS_AS(Expression::parse("1/x1", 1).sample(testsupport::torus(1, 4)), ConfigError);
}

TEST_CASE("config overrides") {
  json cfg = benchmark_config(16);
  cli::apply_override(cfg, "grid.n=32");
  cli::apply_override(cfg, "solver.inner_method=newton");
  cli::apply_override(cfg, "coefficients.h=0.5*sin(x1)");
  cli::apply_override(cfg, "output.directory=\"res\"");
  cli::apply_override(cfg, "grid.extra.deep=[1,2]");
  CHECK(cfg["grid"]["n"] == 32);
  CHECK(cfg["solver"]["inner_method"] == "newton");
  CHECK(cfg["coefficients"]["h"] == "0.5*sin(x1)");
  CHECK(cfg["output"]["directory"] == "res");
  CHECK(cfg["grid"]["extra"]["deep"][1] == 2);
  CHECK_THROWS_AS(cli::apply_override(cfg, "novalue"), ConfigError);
  CHECK(cli::grid_from_config(cfg).size() == 32);
  CHECK(cli::solver_from_config(cfg).inner_method == InnerMethod::newton);
}

TEST_CASE("grid and coefficient sections") {
  const fs::path dir = scratch("sections");
  json cfg = benchmark_config(8);
  cfg["grid"] = {{"d", 2}, {"n", {8, 4}}, {"L", {1.0, "pi"}}};
  const Grid g = cli::grid_from_config(cfg);
  CHECK(g.sizes()[1] == 4);
  CHECK(g.periods()[1] == doctest::Approx(std::numbers::pi));

  write_field(dir / "afield", ScalarField::constant(g, 0.25));
  cfg["coefficients"]["a"] = {{"file", "afield"}};
  cfg["coefficients"]["h"] = "x1 + x2";
  const CoefficientSet cs = cli::coefficients_from_config(cfg, g, dir);
  CHECK(cs.a[3] == 0.25);
  CHECK(cs.h[5] == doctest::Approx(g.point(5)[0] + g.point(5)[1]));
  CHECK(cs.csq[0] == 0.0);

  cfg["coefficients"]["mode"] = "bogus";
  CHECK_THROWS_AS(cli::coefficients_from_config(cfg, g, dir), ConfigError);
  cfg["coefficients"] = {{"mode", "direct"}, {"b", 1}};
  CHECK_THROWS_AS(cli::coefficients_from_config(cfg, g, dir), ConfigError);
}

TEST_CASE("run exit codes and reports") {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_config(dir, benchmark_config(32));

  CHECK(run("check", cfg) == cli::kSuccess);
  CHECK(read_json(dir / "out" / "check_report.json")["assumptions"]["all_passed"] == true);

  CHECK(run("solve", cfg) == cli::kSuccess);
  const json rep = read_json(dir / "out" / "solve_report.json");
  CHECK(rep["converged"] == true);
  CHECK(rep["final_residual_inf"].get<double>() < 1e-8);
  const ScalarField u = read_field(dir / "out" / "u");
  CHECK(std::abs(u[0] - 1.0) < 1e-8);
  CHECK(fs::exists(dir / "out" / "trace.csv"));

  CHECK(run("check", cfg, {"coefficients.a=0"}) == cli::kAssumptionFailure);
  CHECK(run("solve", cfg, {"coefficients.b=0", "coefficients.h=1"}) == cli::kAssumptionFailure);
  CHECK(run("solve", cfg, {"solver.max_outer=2"}) == cli::kNonConvergence);
  CHECK(run("solve", cfg, {"grid.n=5"}) == cli::kConfigError);
  CHECK(run("solve", cfg, {"coefficients.h=1/0"}) == cli::kConfigError);
  CHECK(run("frobnicate", cfg) == cli::kConfigError);
  CHECK(run("solve", dir / "missing.json") == cli::kConfigError);

  CHECK(run("nonexist", cfg, {"coefficients.b=0", "coefficients.h=1"}) == cli::kSuccess);
  const json ne = read_json(dir / "out" / "nonexist_report.json");
  CHECK(ne["oracle"]["certified"] == true);
  CHECK(ne["consistency"] == true);
}

TEST_CASE("manufacture and assemble commands") {
  const fs::path dir = scratch("make");
  json m = benchmark_config(32);
  m["coefficients"] = {{"mode", "manufactured"}, {"u_star", "1.5 + 0.5*sin(x1)"}, {"a", 0.01}, {"b", -1}, {"dsq", 0.01}};
  const fs::path cfg = write_config(dir, m);
  CHECK(run("manufacture", cfg) == cli::kSuccess);
  CHECK(read_json(dir / "out" / "manufacture_report.json")["u_star_residual_inf"].get<double>() < 1e-9);
  CHECK(run("solve", cfg) == cli::kSuccess);

  json geo = benchmark_config(8);
  geo["grid"] = {{"d", 3}, {"n", 8}, {"L", "2*pi"}};
  geo["coefficients"] = {{"mode", "geometric"}, {"tau", 1.0}, {"pi", "2 + 0.5*cos(x1)"}, {"W", {"sin(x2)", 0, 0}}};
  const fs::path gcfg = write_config(dir, geo);
  CHECK(run("assemble", gcfg) == cli::kSuccess);
  CHECK(fs::exists(dir / "out" / "assemble_report.json"));
}
