#pragma once

#include <filesystem>

#include "lichnerowicz/grid.hpp"

namespace lichnerowicz {

/// Writes the sidecar pair `<stem>.json` (grid metadata) and `<stem>.f64`
/// (raw little-endian doubles, row-major).
void write_field(const std::filesystem::path& stem, const ScalarField& field);

/// Reads a sidecar pair. When `expected` is given the stored grid must match it.
ScalarField read_field(const std::filesystem::path& stem, const Grid* expected = nullptr);

/// Grid stored in `<stem>.json`.
Grid read_field_grid(const std::filesystem::path& stem);

}  // namespace lichnerowicz
