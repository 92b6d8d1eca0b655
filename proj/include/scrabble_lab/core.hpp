#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scrabble_lab {

/// Thrown for malformed inputs: word lists, config files, player specs.
/// The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kBoardSize = 15;
inline constexpr int kCells = kBoardSize * kBoardSize;
inline constexpr int kRackSize = 7;
inline constexpr int kLetters = 26;
inline constexpr int kBlank = 26;      // tile index of the blank
inline constexpr int kTileKinds = 27;  // A-Z plus blank
inline constexpr int kBingoBonus = 50;
inline constexpr int kCenter = 7;

using TileCounts = std::array<std::uint8_t, kTileKinds>;

constexpr int cell_index(int row, int col) { return row * kBoardSize + col; }

constexpr bool is_vowel(int letter) {
  return letter == 0 || letter == 4 || letter == 8 || letter == 14 || letter == 20;
}

/// Tile index -> display char: 'A'..'Z', '?' for blank.
constexpr char tile_char(int tile) {
  return tile == kBlank ? '?' : static_cast<char>('A' + tile);
}

/// '?' or '_' -> blank, letters (either case) -> 0..25, otherwise -1.
constexpr int tile_from_char(char c) {
  if (c == '?' || c == '_') return kBlank;
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a';
  return -1;
}

inline TileCounts counts_from_string(std::string_view tiles) {
  TileCounts counts{};
  for (char c : tiles) {
    int t = tile_from_char(c);
    if (t < 0) throw ConfigError("invalid tile character '" + std::string(1, c) + "'");
    ++counts[static_cast<std::size_t>(t)];
  }
  return counts;
}

/// Canonical multiset string: letters ascending, blanks last as '?'.
inline std::string counts_to_string(const TileCounts& counts) {
  std::string out;
  for (int t = 0; t < kTileKinds; ++t)
    out.append(counts[static_cast<std::size_t>(t)], tile_char(t));
  return out;
}

inline int count_total(const TileCounts& counts) {
  int n = 0;
  for (auto c : counts) n += c;
  return n;
}

}  // namespace scrabble_lab
