#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "scrabble_lab/core.hpp"

namespace scrabble_lab {

enum class Premium : std::uint8_t { None, DL, TL, DW, TW };

constexpr int letter_multiplier(Premium p) { return p == Premium::DL ? 2 : p == Premium::TL ? 3 : 1; }
constexpr int word_multiplier(Premium p) { return p == Premium::DW ? 2 : p == Premium::TW ? 3 : 1; }

constexpr std::string_view premium_name(Premium p) {
  switch (p) {
    case Premium::DL: return "DL";
    case Premium::TL: return "TL";
    case Premium::DW: return "DW";
    case Premium::TW: return "TW";
    case Premium::None: break;
  }
  return "";
}

struct TileDistribution {
  std::array<int, kTileKinds> count{};
  std::array<int, kTileKinds> value{};

  int total() const {
    int n = 0;
    for (int c : count) n += c;
    return n;
  }
};

using PremiumLayout = std::array<Premium, kCells>;

struct GameConfig {
  TileDistribution tiles;
  PremiumLayout premium{};

  Premium premium_at(int row, int col) const { return premium[static_cast<std::size_t>(cell_index(row, col))]; }
  int tile_value(int tile) const { return tiles.value[static_cast<std::size_t>(tile)]; }
};

inline constexpr std::array<int, kTileKinds> kStandardCounts = {9, 2, 2, 4, 12, 2, 3, 2, 9, 1, 1, 4, 2, 6,
                                                                 8, 2, 1, 6, 4,  6, 4, 2, 2, 1, 2, 1, 2};
inline constexpr std::array<int, kTileKinds> kStandardValues = {1, 3, 3, 2, 1, 4, 2, 4, 1, 8, 5, 1, 3, 1,
                                                                 1, 3, 10, 1, 1, 1, 1, 4, 4, 8, 4, 10, 0};

/// The official English layout and tile set; identical to data/standard.json.
inline GameConfig standard_config() {
  GameConfig cfg;
  cfg.tiles.count = kStandardCounts;
  cfg.tiles.value = kStandardValues;
  auto mark = [&](int r, int c, Premium p) {
    for (auto [a, b] : {std::pair{r, c}, std::pair{c, r}}) {
      for (int x : {a, kBoardSize - 1 - a})
        for (int y : {b, kBoardSize - 1 - b}) cfg.premium[static_cast<std::size_t>(cell_index(x, y))] = p;
    }
  };
  for (auto [r, c] : {std::pair{0, 0}, {0, 7}, {7, 0}}) mark(r, c, Premium::TW);
  for (int i = 1; i <= 4; ++i) mark(i, i, Premium::DW);
  mark(7, 7, Premium::DW);
  for (auto [r, c] : {std::pair{1, 5}, {5, 5}}) mark(r, c, Premium::TL);
  for (auto [r, c] : {std::pair{0, 3}, {2, 6}, {3, 7}, {6, 6}}) mark(r, c, Premium::DL);
  return cfg;
}

/// Parses {"tiles": {...}, "premium": [[...] x15]}. With strict set, the tile
/// counts must total 100. Errors carry a JSON-path prefix.
inline GameConfig config_from_json(const nlohmann::json& j, bool strict = true) {
  auto fail = [](const std::string& path, const std::string& what) -> ConfigError {
    return ConfigError(path + ": " + what);
  };
  if (!j.is_object()) throw fail("$", "expected an object");
  GameConfig cfg;
  if (!j.contains("tiles") || !j["tiles"].is_object()) throw fail("$.tiles", "missing or not an object");
  std::array<bool, kTileKinds> seen{};
  for (auto& [key, entry] : j["tiles"].items()) {
    const std::string path = "$.tiles." + key;
    int tile = key == "BLANK" ? kBlank : (key.size() == 1 && key[0] >= 'A' && key[0] <= 'Z') ? key[0] - 'A' : -1;
    if (tile < 0) throw fail(path, "unknown tile name");
    if (!entry.is_object()) throw fail(path, "expected an object");
    for (const char* field : {"count", "value"}) {
      if (!entry.contains(field) || !entry[field].is_number_integer())
        throw fail(path + "." + field, "missing or not an integer");
      if (entry[field].get<int>() < 0) throw fail(path + "." + field, "must be non-negative");
    }
    cfg.tiles.count[static_cast<std::size_t>(tile)] = entry["count"].get<int>();
    cfg.tiles.value[static_cast<std::size_t>(tile)] = entry["value"].get<int>();
    seen[static_cast<std::size_t>(tile)] = true;
  }
  for (int t = 0; t < kTileKinds; ++t) {
    if (!seen[static_cast<std::size_t>(t)])
      throw fail("$.tiles", std::string("missing tile ") + (t == kBlank ? "BLANK" : std::string(1, tile_char(t))));
  }
  if (cfg.tiles.value[kBlank] != 0) throw fail("$.tiles.BLANK.value", "blank value must be 0");
  if (strict && cfg.tiles.total() != 100)
    throw fail("$.tiles", "tile counts total " + std::to_string(cfg.tiles.total()) + ", expected 100");

  if (!j.contains("premium") || !j["premium"].is_array() || j["premium"].size() != kBoardSize)
    throw fail("$.premium", "expected 15 rows");
  for (int r = 0; r < kBoardSize; ++r) {
    const auto& row = j["premium"][static_cast<std::size_t>(r)];
    const std::string rpath = "$.premium[" + std::to_string(r) + "]";
    if (!row.is_array() || row.size() != kBoardSize) throw fail(rpath, "expected 15 cells");
    for (int c = 0; c < kBoardSize; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c)];
      const std::string cpath = rpath + "[" + std::to_string(c) + "]";
      if (!cell.is_string()) throw fail(cpath, "expected a string");
      const auto s = cell.get<std::string>();
      Premium p;
      if (s.empty()) p = Premium::None;
      else if (s == "DL") p = Premium::DL;
      else if (s == "TL") p = Premium::TL;
      else if (s == "DW") p = Premium::DW;
      else if (s == "TW") p = Premium::TW;
      else throw fail(cpath, "unknown premium '" + s + "'");
      cfg.premium[static_cast<std::size_t>(cell_index(r, c))] = p;
    }
  }
  return cfg;
}

inline nlohmann::json config_to_json(const GameConfig& cfg) {
  nlohmann::json tiles = nlohmann::json::object();
  for (int t = 0; t < kTileKinds; ++t) {
    tiles[t == kBlank ? std::string("BLANK") : std::string(1, tile_char(t))] = {
        {"count", cfg.tiles.count[static_cast<std::size_t>(t)]}, {"value", cfg.tiles.value[static_cast<std::size_t>(t)]}};
  }
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < kBoardSize; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < kBoardSize; ++c) row.push_back(std::string(premium_name(cfg.premium_at(r, c))));
    rows.push_back(row);
  }
  return {{"tiles", tiles}, {"premium", rows}};
}

inline GameConfig load_config(const std::filesystem::path& path, bool strict = true) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j, strict);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// $SCRABBLE_LAB_CONFIG if set, otherwise the built-in standard set.
inline GameConfig default_config() {
  if (const char* env = std::getenv("SCRABBLE_LAB_CONFIG"); env != nullptr && *env != '\0') return load_config(env);
  return standard_config();
}

}  // namespace scrabble_lab
