#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lichnerowicz/coefficients.hpp"
#include "lichnerowicz/solver.hpp"

namespace lichnerowicz::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternal = 1,
  kAssumptionFailure = 2,
  kNonConvergence = 3,
  kConfigError = 4,
};

/// Reads a JSON config and applies `key.path=value` overrides in order.
nlohmann::json load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

/// Sets a dotted path; the value is parsed as JSON and falls back to a plain string.
void apply_override(nlohmann::json& config, const std::string& assignment);

Grid grid_from_config(const nlohmann::json& config);

/// Builds the coefficient set described by the "coefficients" section. Relative file
/// references resolve against `base`.
CoefficientSet coefficients_from_config(const nlohmann::json& config, const Grid& grid,
                                        const std::filesystem::path& base);

SolverConfig solver_from_config(const nlohmann::json& config);

/// Runs one of check, solve, nonexist, assemble, manufacture and returns the exit code.
int run(const std::string& command, const std::filesystem::path& config_path,
        const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed, std::ostream& out,
        std::ostream& err);

}  // namespace lichnerowicz::cli
