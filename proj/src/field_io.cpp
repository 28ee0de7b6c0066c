#include "lichnerowicz/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "lichnerowicz/errors.hpp"

namespace lichnerowicz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path with_suffix(const fs::path& stem, const char* suffix) {
  fs::path p = stem;
  p += suffix;
  return p;
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

json read_meta(const fs::path& stem) {
  const fs::path meta_path = with_suffix(stem, ".json");
  std::ifstream in(meta_path);
  if (!in) throw ConfigError("cannot open field metadata " + meta_path.string());
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw ConfigError("bad field metadata " + meta_path.string() + ": " + e.what());
  }
  if (meta.value("dtype", "") != "f64" || meta.value("order", "") != "row-major" ||
      meta.value("endianness", "") != "little")
    throw ConfigError(meta_path.string() + ": expected dtype f64, order row-major, endianness little");
  return meta;
}

Grid grid_from_meta(const json& meta, const fs::path& stem) {
  try {
    return make_grid(meta.at("d").get<int>(), meta.at("n").get<std::vector<int>>(),
                     meta.at("L").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ConfigError(stem.string() + ".json: " + e.what());
  }
}

}  // namespace

void write_field(const fs::path& stem, const ScalarField& field) {
  const Grid& g = field.grid();
  json meta;
  meta["d"] = g.dim();
  meta["n"] = std::vector<int>(g.sizes().begin(), g.sizes().end());
  meta["L"] = std::vector<double>(g.periods().begin(), g.periods().end());
  meta["dtype"] = "f64";
  meta["order"] = "row-major";
  meta["endianness"] = "little";

  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  {
    std::ofstream out(with_suffix(stem, ".json"));
    if (!out) throw ConfigError("cannot write " + with_suffix(stem, ".json").string());
    out << meta.dump(2) << '\n';
  }
  std::ofstream out(with_suffix(stem, ".f64"), std::ios::binary);
  if (!out) throw ConfigError("cannot write " + with_suffix(stem, ".f64").string());
  for (double v : field.values()) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
}

Grid read_field_grid(const fs::path& stem) { return grid_from_meta(read_meta(stem), stem); }

ScalarField read_field(const fs::path& stem, const Grid* expected) {
  Grid g = grid_from_meta(read_meta(stem), stem);
  if (expected && !(g == *expected))
    throw ConfigError(stem.string() + ": stored grid does not match the configured grid");

  const fs::path data_path = with_suffix(stem, ".f64");
  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open field data " + data_path.string());
  const auto bytes = fs::file_size(data_path);
  if (bytes != g.size() * 8)
    throw ConfigError(data_path.string() + ": expected " + std::to_string(g.size() * 8) + " bytes, found " +
                      std::to_string(bytes));
  std::vector<double> values(g.size());
  for (auto& v : values) {
    char buf[8];
    in.read(buf, 8);
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    v = std::bit_cast<double>(to_little(bits));
  }
  return ScalarField(expected ? *expected : g, std::move(values));
}

}  // namespace lichnerowicz
