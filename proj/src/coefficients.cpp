#include "lichnerowicz/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "lichnerowicz/errors.hpp"
#include "lichnerowicz/field_io.hpp"

namespace lichnerowicz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxListedOffenders = 16;

void require_same_grid(const ScalarField& ref, const ScalarField& f, const char* name) {
  if (!(ref.grid() == f.grid())) throw ConfigError(std::string("coefficient ") + name + " lives on a different grid");
}

template <class Pred>
ConditionCheck pointwise_check(std::string name, std::size_t n, Pred&& slack) {
  ConditionCheck check;
  check.name = std::move(name);
  check.margin = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [value, ok] = slack(i);
    check.margin = std::min(check.margin, value);
    if (!ok) {
      check.passed = false;
      ++check.offending_count;
      if (check.offending.size() < kMaxListedOffenders) check.offending.push_back(i);
    }
  }
  return check;
}

}  // namespace

CoefficientSet::CoefficientSet(int n, ScalarField a_, ScalarField b_, ScalarField csq_, ScalarField dsq_,
                               ScalarField cd_, ScalarField h_)
    : N(n),
      a(std::move(a_)),
      b(std::move(b_)),
      csq(std::move(csq_)),
      dsq(std::move(dsq_)),
      cd(std::move(cd_)),
      h(std::move(h_)) {
  (void)Exponents(N);
  require_same_grid(a, b, "b");
  require_same_grid(a, csq, "csq");
  require_same_grid(a, dsq, "dsq");
  require_same_grid(a, cd, "cd");
  require_same_grid(a, h, "h");
}

ScalarField CoefficientSet::q() const {
  std::vector<double> v(h.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = h[i] - csq[i];
  return ScalarField(grid(), std::move(v));
}

// ---------------------------------------------------------------------------

SymTensorField conformal_killing(const VectorField& W) {
  const Grid& g = W.grid();
  const int d = g.dim();
  SpectralWorkspace ws(g);
  // dW[i][j] = d_i W_j
  std::vector<std::vector<std::vector<double>>> dW(d, std::vector<std::vector<double>>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      dW[i][j].resize(g.size());
      ws.derivative(W[j].values(), i, dW[i][j]);
    }
  std::vector<double> div(g.size(), 0.0);
  for (int i = 0; i < d; ++i)
    for (std::size_t p = 0; p < g.size(); ++p) div[p] += dW[i][i][p];

  std::vector<ScalarField> comps;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      std::vector<double> v(g.size());
      for (std::size_t p = 0; p < g.size(); ++p) {
        v[p] = dW[i][j][p] + dW[j][i][p];
        if (i == j) v[p] -= 2.0 / d * div[p];
      }
      comps.emplace_back(g, std::move(v));
    }
  return SymTensorField(std::move(comps));
}

SigmaDiagnostics sigma_diagnostics(const SymTensorField& sigma) {
  const Grid& g = sigma.grid();
  SigmaDiagnostics diag;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double tr = 0.0;
    for (int i = 0; i < sigma.dim(); ++i) tr += sigma(i, i)[p];
    diag.trace_max = std::max(diag.trace_max, std::abs(tr));
  }
  const VectorField div = divergence(sigma);
  for (int j = 0; j < div.dim(); ++j) diag.divergence_max = std::max(diag.divergence_max, norm_inf(div[j]));
  return diag;
}

CoefficientSet assemble_geometric(const GeometricData& gd, int N) {
  const Exponents ex(N);
  const Grid& g = gd.tau.grid();
  const int d = g.dim();
  if (d != N)
    throw ConfigError("geometric assembly needs grid dimension == N (got d=" + std::to_string(d) +
                      ", N=" + std::to_string(N) + ")");
  if (!(gd.pi.grid() == g) || !(gd.W.grid() == g) || !(gd.sigma.grid() == g) || (gd.R && !(gd.R->grid() == g)))
    throw ConfigError("geometric data fields live on different grids");
  for (std::size_t p = 0; p < g.size(); ++p)
    if (gd.pi[p] == 0.0) throw SingularDataError("pi vanishes at grid index " + std::to_string(p));

  const SigmaDiagnostics sdiag = sigma_diagnostics(gd.sigma);
  if (sdiag.trace_max > kSigmaTraceTolerance)
    throw DomainError("sigma is not trace-free: max |tr sigma| = " + std::to_string(sdiag.trace_max));

  const double kn = ex.kappa_n();
  const double sk = std::sqrt(kn);
  const SymTensorField DW = conformal_killing(gd.W);
  const VectorField divDW = divergence(DW);
  const VectorField grad_tau = gradient(gd.tau);

  const std::size_t n = g.size();
  std::vector<double> a(n), b(n), csq(n, 0.0), dsq(n, 0.0), cd(n, 0.0), h(n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    double frob = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double t = gd.sigma(i, j)[p] + DW(i, j)[p];
        frob += t * t;
      }
    const double pi = gd.pi[p];
    a[p] = kn * (frob + pi * pi);
    b[p] = kn * ((N - 1.0) / N * gd.tau[p] * gd.tau[p] - 4.0 * gd.nu);
    for (int i = 0; i < d; ++i) {
      const double Ci = -sk / pi * divDW[i][p];
      const double Di = sk / pi * (N - 1.0) / N * grad_tau[i][p];
      csq[p] += Ci * Ci;
      dsq[p] += Di * Di;
      cd[p] += Ci * Di;
    }
    if (gd.R) h[p] = kn * (*gd.R)[p];
  }
  CoefficientSet cs(N, ScalarField(g, std::move(a)), ScalarField(g, std::move(b)), ScalarField(g, std::move(csq)),
                    ScalarField(g, std::move(dsq)), ScalarField(g, std::move(cd)), ScalarField(g, std::move(h)));
  cs.origin = "geometric";
  cs.non_geometric_h = gd.R.has_value();
  return cs;
}

// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.passed; });
}

const ConditionCheck& ValidationReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw ConfigError("no validation check named " + name);
}

ValidationReport validate_coefficients(const CoefficientSet& cs) {
  const std::size_t n = cs.grid().size();
  ValidationReport report;
  // Field values are finite by construction; A1 reduces to sign sanity of the squared norms.
  report.checks.push_back(pointwise_check("A1", n, [&](std::size_t i) {
    const double m = std::min(cs.csq[i], cs.dsq[i]);
    return std::pair{m, m >= 0.0};
  }));
  report.checks.push_back(pointwise_check("A2.a", n, [&](std::size_t i) {
    return std::pair{cs.a[i], cs.a[i] > 0.0};
  }));
  report.checks.push_back(pointwise_check("A2.cd", n, [&](std::size_t i) {
    return std::pair{cs.cd[i], cs.cd[i] >= 0.0};
  }));
  report.checks.push_back(pointwise_check("cauchy_schwarz", n, [&](std::size_t i) {
    const double bound = cs.csq[i] * cs.dsq[i];
    const double slack = bound - cs.cd[i] * cs.cd[i];
    return std::pair{slack, slack >= -1e-12 * (bound + 1e-300)};
  }));
  return report;
}

// ---------------------------------------------------------------------------

CoefficientSet manufacture_h(const ScalarField& u_star, const ScalarField& a, const ScalarField& b,
                             const ScalarField& csq, const ScalarField& dsq, const ScalarField& cd, int N) {
  const Exponents ex(N);
  for (std::size_t p = 0; p < u_star.size(); ++p)
    if (!(u_star[p] > 0.0)) throw DomainError("manufacture_h: u* must be positive (index " + std::to_string(p) + ")");
  const ScalarField lap = laplacian(u_star);
  std::vector<double> h(u_star.size());
  for (std::size_t p = 0; p < h.size(); ++p) {
    const double u = u_star[p];
    const Powers pw = powers(u, ex);
    const double rhs = dsq[p] * pw.top + 2.0 * cd[p] * pw.mid - b[p] * pw.low + a[p] * pw.sing;
    h[p] = csq[p] + (lap[p] + rhs) / u;
  }
  CoefficientSet cs(N, a, b, csq, dsq, cd, ScalarField(u_star.grid(), std::move(h)));
  cs.origin = "manufactured";
  cs.non_geometric_h = true;
  return cs;
}

// ---------------------------------------------------------------------------

void write_coefficients(const fs::path& dir, const CoefficientSet& cs) {
  fs::create_directories(dir);
  write_field(dir / "a", cs.a);
  write_field(dir / "b", cs.b);
  write_field(dir / "csq", cs.csq);
  write_field(dir / "dsq", cs.dsq);
  write_field(dir / "cd", cs.cd);
  write_field(dir / "h", cs.h);
  json meta;
  meta["N"] = cs.N;
  meta["mode"] = cs.origin;
  meta["non_geometric_h"] = cs.non_geometric_h;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
}

CoefficientSet read_coefficients(const fs::path& dir, const Grid* expected) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw ConfigError("missing " + (dir / "meta.json").string());
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw ConfigError((dir / "meta.json").string() + ": " + e.what());
  }
  ScalarField a = read_field(dir / "a", expected);
  const Grid& g = a.grid();
  CoefficientSet cs(meta.value("N", 3), a, read_field(dir / "b", &g), read_field(dir / "csq", &g),
                    read_field(dir / "dsq", &g), read_field(dir / "cd", &g), read_field(dir / "h", &g));
  cs.origin = meta.value("mode", std::string("direct"));
  cs.non_geometric_h = meta.value("non_geometric_h", false);
  return cs;
}

void write_geometric(const fs::path& dir, const GeometricData& gd) {
  fs::create_directories(dir);
  write_field(dir / "tau", gd.tau);
  write_field(dir / "pi", gd.pi);
  const int d = gd.tau.grid().dim();
  for (int i = 0; i < d; ++i) write_field(dir / ("W_" + std::to_string(i)), gd.W[i]);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      write_field(dir / ("sigma_" + std::to_string(i) + std::to_string(j)), gd.sigma(i, j));
  if (gd.R) write_field(dir / "R", *gd.R);
  json meta;
  meta["nu"] = gd.nu;
  meta["R_override"] = gd.R.has_value();
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
}

GeometricData read_geometric(const fs::path& dir, const Grid* expected) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw ConfigError("missing " + (dir / "meta.json").string());
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw ConfigError((dir / "meta.json").string() + ": " + e.what());
  }
  ScalarField tau = read_field(dir / "tau", expected);
  const Grid& g = tau.grid();
  const int d = g.dim();
  std::vector<ScalarField> w, s;
  for (int i = 0; i < d; ++i) w.push_back(read_field(dir / ("W_" + std::to_string(i)), &g));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) s.push_back(read_field(dir / ("sigma_" + std::to_string(i) + std::to_string(j)), &g));
  std::optional<ScalarField> R;
  if (meta.value("R_override", false)) R = read_field(dir / "R", &g);
  return GeometricData{tau, read_field(dir / "pi", &g), meta.value("nu", 0.0), VectorField(std::move(w)),
                       SymTensorField(std::move(s)), std::move(R)};
}

}  // namespace lichnerowicz
