#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lichnerowicz/exponents.hpp"
#include "lichnerowicz/grid.hpp"

namespace lichnerowicz {

/// Coefficient fields of
///   -Lap u + (h - csq) u = dsq u^(2*2*+1) + 2 cd u^(2*+1) - b u^(2*-1) + a u^-(2*+1)
/// where csq = |C|^2, dsq = |D|^2, cd = <C, D>.
struct CoefficientSet {
  CoefficientSet(int N, ScalarField a, ScalarField b, ScalarField csq, ScalarField dsq, ScalarField cd,
                 ScalarField h);

  int N;
  ScalarField a, b, csq, dsq, cd, h;
  /// "direct", "geometric" or "manufactured".
  std::string origin = "direct";
  /// Set when h does not come from the scalar curvature of the flat metric.
  bool non_geometric_h = false;

  const Grid& grid() const { return a.grid(); }
  Exponents exponents() const { return Exponents(N); }
  double twostar() const { return exponents().twostar; }
  double kappa_n() const { return exponents().kappa_n(); }

  /// Linear potential q = h - csq.
  ScalarField q() const;
};

/// Constraint data on the flat torus. The metric is flat, so R defaults to 0.
struct GeometricData {
  ScalarField tau;
  ScalarField pi;
  double nu = 0.0;
  VectorField W;
  SymTensorField sigma;
  /// Scalar-curvature override; its presence tags the result "non-geometric h".
  std::optional<ScalarField> R;
};

/// (DW)_ij = d_i W_j + d_j W_i - (2/d) delta_ij div W on the flat torus.
SymTensorField conformal_killing(const VectorField& W);

struct SigmaDiagnostics {
  double trace_max = 0.0;       ///< max |tr sigma|
  double divergence_max = 0.0;  ///< max |div sigma| over components
};
SigmaDiagnostics sigma_diagnostics(const SymTensorField& sigma);

/// Tolerance on |tr sigma| accepted by assemble_geometric.
inline constexpr double kSigmaTraceTolerance = 1e-10;

/// Builds (a, b, csq, dsq, cd, h) from constraint data. Requires grid dimension == N.
CoefficientSet assemble_geometric(const GeometricData& gd, int N);

struct ConditionCheck {
  std::string name;
  bool passed = true;
  double margin = 0.0;  ///< signed slack; negative when violated
  std::vector<std::size_t> offending;  ///< first few offending grid indices
  std::size_t offending_count = 0;
};

struct ValidationReport {
  std::vector<ConditionCheck> checks;
  bool all_passed() const;
  const ConditionCheck& at(const std::string& name) const;
};

/// Pointwise checks: A1 (finite, csq/dsq >= 0), A2 (a > 0, cd >= 0), Cauchy-Schwarz cd^2 <= csq*dsq.
ValidationReport validate_coefficients(const CoefficientSet& cs);

/// Chooses h so that u_star solves the equation exactly in the discrete spectral sense:
///   h = csq + [Lap u* + dsq u*^(2*2*+1) + 2 cd u*^(2*+1) - b u*^(2*-1) + a u*^-(2*+1)] / u*.
CoefficientSet manufacture_h(const ScalarField& u_star, const ScalarField& a, const ScalarField& b,
                             const ScalarField& csq, const ScalarField& dsq, const ScalarField& cd, int N);

/// Directory of field pairs a, b, csq, dsq, cd, h plus meta.json.
void write_coefficients(const std::filesystem::path& dir, const CoefficientSet& cs);
CoefficientSet read_coefficients(const std::filesystem::path& dir, const Grid* expected = nullptr);

/// Directory of tau, pi, W_i, sigma_ij, optional R plus meta.json (nu).
void write_geometric(const std::filesystem::path& dir, const GeometricData& gd);
GeometricData read_geometric(const std::filesystem::path& dir, const Grid* expected = nullptr);

}  // namespace lichnerowicz
