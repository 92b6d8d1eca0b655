#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "scrabble_lab/config.hpp"
#include "scrabble_lab/core.hpp"
#include "scrabble_lab/lexicon.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab {

// ---------------------------------------------------------------------------
// Board

class Board {
 public:
  static constexpr std::uint8_t kEmpty = 0;
  static constexpr std::uint8_t kBlankFlag = 0x40;

  static constexpr bool in_bounds(int row, int col) {
    return row >= 0 && row < kBoardSize && col >= 0 && col < kBoardSize;
  }

  bool empty(int row, int col) const { return at(row, col) == kEmpty; }
  /// Letter 0..25 of an occupied cell.
  int letter(int row, int col) const { return (at(row, col) & 0x3F) - 1; }
  bool is_blank(int row, int col) const { return (at(row, col) & kBlankFlag) != 0; }
  std::uint8_t raw(int row, int col) const { return at(row, col); }

  /// Occupied cells keep their letter; placing over one is a logic error.
  void place(int row, int col, int letter, bool blank) {
    if (!empty(row, col)) throw std::logic_error("cell already occupied");
    cells_[static_cast<std::size_t>(cell_index(row, col))] =
        static_cast<std::uint8_t>((letter + 1) | (blank ? kBlankFlag : 0));
  }

  int tile_count() const {
    return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), [](auto c) { return c != kEmpty; }));
  }
  bool is_clear() const { return tile_count() == 0; }

  bool has_neighbor(int row, int col) const {
    return (in_bounds(row - 1, col) && !empty(row - 1, col)) || (in_bounds(row + 1, col) && !empty(row + 1, col)) ||
           (in_bounds(row, col - 1) && !empty(row, col - 1)) || (in_bounds(row, col + 1) && !empty(row, col + 1));
  }

  Board transposed() const {
    Board t;
    for (int r = 0; r < kBoardSize; ++r)
      for (int c = 0; c < kBoardSize; ++c)
        t.cells_[static_cast<std::size_t>(cell_index(c, r))] = cells_[static_cast<std::size_t>(cell_index(r, c))];
    return t;
  }

  /// Rows as 15-char strings: '.' empty, 'A'-'Z', 'a'-'z' for designated blanks.
  std::array<std::string, kBoardSize> rows() const {
    std::array<std::string, kBoardSize> out;
    for (int r = 0; r < kBoardSize; ++r) {
      out[static_cast<std::size_t>(r)].resize(kBoardSize, '.');
      for (int c = 0; c < kBoardSize; ++c) {
        if (empty(r, c)) continue;
        char ch = static_cast<char>('A' + letter(r, c));
        if (is_blank(r, c)) ch = static_cast<char>(ch - 'A' + 'a');
        out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = ch;
      }
    }
    return out;
  }

  template <class Rows>
  static Board from_rows(const Rows& rows) {
    Board b;
    if (std::size(rows) != kBoardSize) throw ConfigError("board must have 15 rows");
    int r = 0;
    for (const auto& row : rows) {
      std::string_view s(row);
      if (s.size() != kBoardSize) throw ConfigError("board row " + std::to_string(r) + " must have 15 cells");
      for (int c = 0; c < kBoardSize; ++c) {
        char ch = s[static_cast<std::size_t>(c)];
        if (ch == '.') continue;
        if (ch >= 'A' && ch <= 'Z') b.place(r, c, ch - 'A', false);
        else if (ch >= 'a' && ch <= 'z') b.place(r, c, ch - 'a', true);
        else throw ConfigError("board row " + std::to_string(r) + ": invalid cell '" + std::string(1, ch) + "'");
      }
      ++r;
    }
    return b;
  }

  friend bool operator==(const Board&, const Board&) = default;

 private:
  std::uint8_t at(int row, int col) const { return cells_[static_cast<std::size_t>(cell_index(row, col))]; }
  std::array<std::uint8_t, kCells> cells_{};
};

// ---------------------------------------------------------------------------
// Moves

enum class Direction : std::uint8_t { Across, Down };

constexpr int step_row(Direction d) { return d == Direction::Down ? 1 : 0; }
constexpr int step_col(Direction d) { return d == Direction::Across ? 1 : 0; }
constexpr Direction other(Direction d) { return d == Direction::Across ? Direction::Down : Direction::Across; }

struct PlacedTile {
  std::uint8_t offset = 0;  // along the move direction from (row, col)
  std::uint8_t letter = 0;  // 0..25; for a blank, its designated letter
  bool blank = false;

  friend bool operator==(const PlacedTile&, const PlacedTile&) = default;
};

/// A tile placement. In canonical form (what the generator emits) (row, col)
/// is the first cell of the main word and `word` spells it, lowercase for
/// blank designations.
struct Place {
  int row = 0;
  int col = 0;
  Direction dir = Direction::Across;
  std::vector<PlacedTile> tiles;
  std::string word;

  int tile_row(const PlacedTile& t) const { return row + step_row(dir) * t.offset; }
  int tile_col(const PlacedTile& t) const { return col + step_col(dir) * t.offset; }

  friend bool operator==(const Place& a, const Place& b) {
    return a.row == b.row && a.col == b.col && a.dir == b.dir && a.tiles == b.tiles;
  }
};

struct Exchange {
  TileCounts tiles{};
  friend bool operator==(const Exchange&, const Exchange&) = default;
};

struct Pass {
  friend bool operator==(const Pass&, const Pass&) = default;
};

using Move = std::variant<Place, Exchange, Pass>;

inline bool is_place(const Move& m) { return std::holds_alternative<Place>(m); }

/// Canonical order: placements by (row, col, direction, word), then
/// exchanges by tile string, then pass.
inline bool canonical_less(const Move& a, const Move& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (const auto* pa = std::get_if<Place>(&a)) {
    const auto& pb = std::get<Place>(b);
    return std::tie(pa->row, pa->col, pa->dir, pa->word) < std::tie(pb.row, pb.col, pb.dir, pb.word);
  }
  if (const auto* ea = std::get_if<Exchange>(&a))
    return counts_to_string(ea->tiles) < counts_to_string(std::get<Exchange>(b).tiles);
  return false;
}

inline bool canonical_equal(const Move& a, const Move& b) { return !canonical_less(a, b) && !canonical_less(b, a); }

/// Tiles consumed from the rack (blanks counted as blanks).
inline TileCounts tiles_used(const Move& move) {
  TileCounts used{};
  if (const auto* p = std::get_if<Place>(&move)) {
    for (const auto& t : p->tiles) ++used[t.blank ? kBlank : t.letter];
  } else if (const auto* e = std::get_if<Exchange>(&move)) {
    used = e->tiles;
  }
  return used;
}

inline TileCounts leave_after(const TileCounts& rack, const Move& move) {
  TileCounts leave = rack;
  const TileCounts used = tiles_used(move);
  for (int t = 0; t < kTileKinds; ++t) leave[static_cast<std::size_t>(t)] -= used[static_cast<std::size_t>(t)];
  return leave;
}

// ---------------------------------------------------------------------------
// Words formed by a placement

struct FormedWord {
  std::string text;  // uppercase
  int score = 0;
};

namespace detail {

/// Maximal run through (row, col) along dir, treating `extra` cells as
/// occupied by the given tiles. Returns start and length.
inline std::pair<int, int> run_extent(const Board& board, const std::array<std::int8_t, kCells>& extra, int row,
                                      int col, Direction dir) {
  const int dr = step_row(dir), dc = step_col(dir);
  auto filled = [&](int r, int c) {
    return Board::in_bounds(r, c) && (!board.empty(r, c) || extra[static_cast<std::size_t>(cell_index(r, c))] >= 0);
  };
  int r = row, c = col;
  while (filled(r - dr, c - dc)) r -= dr, c -= dc;
  int start = dir == Direction::Across ? c : r;
  int len = 0;
  while (filled(r, c)) ++len, r += dr, c += dc;
  return {start, len};
}

}  // namespace detail

/// Every word of length >= 2 created by the placement (main word first),
/// with its score. Assumes tiles are in bounds on empty cells.
inline std::vector<FormedWord> formed_words(const Board& board, const Place& place, const GameConfig& cfg) {
  std::array<std::int8_t, kCells> extra;
  extra.fill(-1);
  std::array<bool, kCells> blank_new{};
  for (const auto& t : place.tiles) {
    auto idx = static_cast<std::size_t>(cell_index(place.tile_row(t), place.tile_col(t)));
    extra[idx] = static_cast<std::int8_t>(t.letter);
    blank_new[idx] = t.blank;
  }
  auto word_at = [&](int row, int col, Direction dir) -> std::optional<FormedWord> {
    auto [start, len] = detail::run_extent(board, extra, row, col, dir);
    if (len < 2) return std::nullopt;
    FormedWord w;
    int sum = 0, mult = 1;
    for (int k = 0; k < len; ++k) {
      int r = dir == Direction::Across ? row : start + k;
      int c = dir == Direction::Across ? start + k : col;
      auto idx = static_cast<std::size_t>(cell_index(r, c));
      if (extra[idx] >= 0) {
        int v = blank_new[idx] ? 0 : cfg.tile_value(extra[idx]);
        Premium p = cfg.premium[idx];
        sum += v * letter_multiplier(p);
        mult *= word_multiplier(p);
        w.text.push_back(static_cast<char>('A' + extra[idx]));
      } else {
        sum += board.is_blank(r, c) ? 0 : cfg.tile_value(board.letter(r, c));
        w.text.push_back(static_cast<char>('A' + board.letter(r, c)));
      }
    }
    w.score = sum * mult;
    return w;
  };

  std::vector<FormedWord> words;
  if (place.tiles.empty()) return words;
  const auto& first = place.tiles.front();
  if (auto w = word_at(place.tile_row(first), place.tile_col(first), place.dir)) words.push_back(std::move(*w));
  for (const auto& t : place.tiles) {
    if (auto w = word_at(place.tile_row(t), place.tile_col(t), other(place.dir))) words.push_back(std::move(*w));
  }
  return words;
}

/// Points for a legal placement: every formed word with premiums applied on
/// newly covered squares only, plus the bingo bonus for 7 tiles.
inline int score_move(const Board& board, const Move& move, const GameConfig& cfg) {
  const auto* place = std::get_if<Place>(&move);
  if (place == nullptr) return 0;
  int total = 0;
  for (const auto& w : formed_words(board, *place, cfg)) total += w.score;
  if (place->tiles.size() == static_cast<std::size_t>(kRackSize)) total += kBingoBonus;
  return total;
}

/// Rewrites a placement so (row, col) is the start of its main word and the
/// word text is filled in. A single tile is labeled Across when it forms an
/// across word of length >= 2, otherwise Down.
inline Place canonicalize(const Board& board, Place place) {
  if (place.tiles.empty()) return place;
  std::array<std::int8_t, kCells> extra;
  extra.fill(-1);
  for (const auto& t : place.tiles)
    extra[static_cast<std::size_t>(cell_index(place.tile_row(t), place.tile_col(t)))] = static_cast<std::int8_t>(t.letter);
  if (place.tiles.size() == 1) {
    const int r = place.tile_row(place.tiles[0]), c = place.tile_col(place.tiles[0]);
    auto [s, len] = detail::run_extent(board, extra, r, c, Direction::Across);
    place.dir = len >= 2 ? Direction::Across : Direction::Down;
    place.row = r;
    place.col = c;
    place.tiles[0].offset = 0;
  }
  const int r0 = place.tile_row(place.tiles[0]), c0 = place.tile_col(place.tiles[0]);
  auto [start, len] = detail::run_extent(board, extra, r0, c0, place.dir);
  const int new_row = place.dir == Direction::Across ? r0 : start;
  const int new_col = place.dir == Direction::Across ? start : c0;
  std::array<std::int8_t, kCells> blank_at;
  blank_at.fill(0);
  for (auto& t : place.tiles) {
    int r = place.tile_row(t), c = place.tile_col(t);
    blank_at[static_cast<std::size_t>(cell_index(r, c))] = t.blank ? 1 : 0;
    t.offset = static_cast<std::uint8_t>(place.dir == Direction::Across ? c - new_col : r - new_row);
  }
  std::sort(place.tiles.begin(), place.tiles.end(), [](auto& a, auto& b) { return a.offset < b.offset; });
  place.row = new_row;
  place.col = new_col;
  place.word.clear();
  for (int k = 0; k < len; ++k) {
    int r = new_row + step_row(place.dir) * k, c = new_col + step_col(place.dir) * k;
    auto idx = static_cast<std::size_t>(cell_index(r, c));
    int letter;
    bool blank;
    if (extra[idx] >= 0) {
      letter = extra[idx];
      blank = blank_at[idx] != 0;
    } else {
      letter = board.letter(r, c);
      blank = board.is_blank(r, c);
    }
    place.word.push_back(static_cast<char>((blank ? 'a' : 'A') + letter));
  }
  return place;
}

// ---------------------------------------------------------------------------
// Notation: "8D WORD" across, "D8 WORD" down; "-" pass; "-TILES" exchange.

inline std::string move_notation(const Move& move) {
  if (std::holds_alternative<Pass>(move)) return "-";
  if (const auto* e = std::get_if<Exchange>(&move)) return "-" + counts_to_string(e->tiles);
  const auto& p = std::get<Place>(move);
  const std::string row = std::to_string(p.row + 1);
  const std::string col(1, static_cast<char>('A' + p.col));
  return (p.dir == Direction::Across ? row + col : col + row) + " " + p.word;
}

/// Inverse of move_notation against the board the move is played on.
inline Move parse_move(std::string_view text, const Board& board) {
  auto bad = [&](const std::string& why) { return ConfigError("move '" + std::string(text) + "': " + why); };
  if (text == "-") return Pass{};
  if (!text.empty() && text[0] == '-') {
    Exchange e;
    try {
      e.tiles = counts_from_string(text.substr(1));
    } catch (const ConfigError&) {
      throw bad("invalid exchange tiles");
    }
    return e;
  }
  auto space = text.find(' ');
  if (space == std::string_view::npos) throw bad("expected '<square> <word>'");
  std::string_view square = text.substr(0, space), word = text.substr(space + 1);
  if (square.size() < 2 || word.empty()) throw bad("malformed");
  Place p;
  std::string_view digits;
  char col_char;
  if (square[0] >= 'A' && square[0] <= 'O') {
    p.dir = Direction::Down;
    col_char = square[0];
    digits = square.substr(1);
  } else {
    p.dir = Direction::Across;
    col_char = square.back();
    digits = square.substr(0, square.size() - 1);
  }
  if (col_char < 'A' || col_char > 'O') throw bad("column must be A-O");
  int row = 0;
  for (char d : digits) {
    if (d < '0' || d > '9') throw bad("row must be 1-15");
    row = row * 10 + (d - '0');
  }
  if (row < 1 || row > kBoardSize) throw bad("row must be 1-15");
  p.row = row - 1;
  p.col = col_char - 'A';
  for (std::size_t k = 0; k < word.size(); ++k) {
    int r = p.row + step_row(p.dir) * static_cast<int>(k), c = p.col + step_col(p.dir) * static_cast<int>(k);
    if (!Board::in_bounds(r, c)) throw bad("runs off the board");
    char ch = word[k];
    bool blank = ch >= 'a' && ch <= 'z';
    int letter = tile_from_char(ch);
    if (letter < 0 || letter == kBlank) throw bad("invalid letter");
    if (!board.empty(r, c)) {
      if (board.letter(r, c) != letter) throw bad("does not match the board");
      continue;
    }
    p.tiles.push_back({static_cast<std::uint8_t>(k), static_cast<std::uint8_t>(letter), blank});
  }
  if (p.tiles.empty()) throw bad("places no tiles");
  p.word = std::string(word);
  return p;
}

// ---------------------------------------------------------------------------
// Game state

struct LoggedMove {
  int player = 0;
  TileCounts rack_before{};
  Move move;
  int score = 0;
  std::string notation;
};

struct GameState {
  Board board;
  std::array<TileCounts, 2> racks{};
  std::array<int, 2> scores{};
  std::vector<std::uint8_t> bag;
  int turn = 0;
  int zero_score_turns = 0;
  bool finalized = false;
  std::vector<LoggedMove> log;
  Rng rng;

  int bag_size() const { return static_cast<int>(bag.size()); }
  const TileCounts& mover_rack() const { return racks[static_cast<std::size_t>(turn)]; }
};

inline constexpr int kZeroScoreTurnLimit = 6;

namespace detail {

inline void draw_tiles(GameState& s, TileCounts& rack) {
  while (count_total(rack) < kRackSize && !s.bag.empty()) {
    auto i = static_cast<std::size_t>(uniform_below(s.rng, s.bag.size()));
    std::swap(s.bag[i], s.bag.back());
    ++rack[s.bag.back()];
    s.bag.pop_back();
  }
}

}  // namespace detail

inline GameState new_game(const GameConfig& cfg, std::uint64_t seed, bool strict = true) {
  if (strict && cfg.tiles.total() != 100)
    throw ConfigError("tile distribution totals " + std::to_string(cfg.tiles.total()) + ", expected 100");
  if (cfg.tiles.total() < 2 * kRackSize) throw ConfigError("tile distribution too small for two racks");
  GameState s;
  s.rng.seed(seed_mix(seed, 0));
  for (int t = 0; t < kTileKinds; ++t) s.bag.insert(s.bag.end(), static_cast<std::size_t>(cfg.tiles.count[static_cast<std::size_t>(t)]), static_cast<std::uint8_t>(t));
  detail::draw_tiles(s, s.racks[0]);
  detail::draw_tiles(s, s.racks[1]);
  return s;
}

/// Tiles the viewer cannot see: the bag plus the opponent's rack.
inline TileCounts unseen_tiles(const GameState& s, int viewer) {
  TileCounts pool = s.racks[static_cast<std::size_t>(1 - viewer)];
  for (auto t : s.bag) ++pool[t];
  return pool;
}

// ---------------------------------------------------------------------------
// Legality

struct Violation {
  enum class Code { OffBoard, Occupied, Disconnected, NotInRack, InvalidWord, CenterNotCovered, ExchangeBagTooSmall, Malformed };
  Code code;
  std::string word;  // the offending word for InvalidWord

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string_view violation_name(Violation::Code c) {
  switch (c) {
    case Violation::Code::OffBoard: return "OffBoard";
    case Violation::Code::Occupied: return "Occupied";
    case Violation::Code::Disconnected: return "Disconnected";
    case Violation::Code::NotInRack: return "NotInRack";
    case Violation::Code::InvalidWord: return "InvalidWord";
    case Violation::Code::CenterNotCovered: return "CenterNotCovered";
    case Violation::Code::ExchangeBagTooSmall: return "ExchangeBagTooSmall";
    case Violation::Code::Malformed: return "Malformed";
  }
  return "?";
}

class IllegalMove : public std::runtime_error {
 public:
  explicit IllegalMove(Violation v)
      : std::runtime_error("illegal move: " + std::string(violation_name(v.code)) + (v.word.empty() ? "" : " " + v.word)),
        violation_(std::move(v)) {}
  const Violation& violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

namespace detail {

inline bool rack_holds(const TileCounts& rack, const TileCounts& need) {
  for (int t = 0; t < kTileKinds; ++t)
    if (need[static_cast<std::size_t>(t)] > rack[static_cast<std::size_t>(t)]) return false;
  return true;
}

inline std::optional<Violation> check_place(const GameState& s, const Place& p, const Lexicon& lex) {
  using Code = Violation::Code;
  if (p.tiles.empty() || p.tiles.size() > static_cast<std::size_t>(kRackSize)) return Violation{Code::Malformed, {}};
  std::vector<int> offsets;
  for (const auto& t : p.tiles) {
    if (t.letter >= kLetters) return Violation{Code::Malformed, {}};
    int r = p.tile_row(t), c = p.tile_col(t);
    if (!Board::in_bounds(r, c)) return Violation{Code::OffBoard, {}};
    if (!s.board.empty(r, c)) return Violation{Code::Occupied, {}};
    offsets.push_back(t.offset);
  }
  std::sort(offsets.begin(), offsets.end());
  if (std::adjacent_find(offsets.begin(), offsets.end()) != offsets.end()) return Violation{Code::Malformed, {}};
  if (!rack_holds(s.mover_rack(), tiles_used(p))) return Violation{Code::NotInRack, {}};

  for (int k = offsets.front(); k <= offsets.back(); ++k) {
    if (std::binary_search(offsets.begin(), offsets.end(), k)) continue;
    int r = p.row + step_row(p.dir) * k, c = p.col + step_col(p.dir) * k;
    if (s.board.empty(r, c)) return Violation{Code::Disconnected, {}};
  }
  if (s.board.is_clear()) {
    bool covers = std::any_of(p.tiles.begin(), p.tiles.end(),
                              [&](const auto& t) { return p.tile_row(t) == kCenter && p.tile_col(t) == kCenter; });
    if (!covers) return Violation{Code::CenterNotCovered, {}};
  } else {
    bool touches = std::any_of(p.tiles.begin(), p.tiles.end(),
                               [&](const auto& t) { return s.board.has_neighbor(p.tile_row(t), p.tile_col(t)); });
    if (!touches) return Violation{Code::Disconnected, {}};
  }
  // Scores are irrelevant here; the standard config only supplies the layout.
  static const GameConfig kLayoutOnly = standard_config();
  auto words = formed_words(s.board, p, kLayoutOnly);
  if (words.empty()) {
    std::string single(1, static_cast<char>('A' + p.tiles.front().letter));
    return Violation{Code::InvalidWord, single};
  }
  for (const auto& w : words)
    if (!lex.contains(w.text)) return Violation{Code::InvalidWord, w.text};
  return std::nullopt;
}

}  // namespace detail

/// nullopt when the move is legal for the player to move.
inline std::optional<Violation> check_legal(const GameState& s, const Move& move, const Lexicon& lex) {
  if (std::holds_alternative<Pass>(move)) return std::nullopt;
  if (const auto* e = std::get_if<Exchange>(&move)) {
    if (count_total(e->tiles) == 0) return Violation{Violation::Code::Malformed, {}};
    if (!detail::rack_holds(s.mover_rack(), e->tiles)) return Violation{Violation::Code::NotInRack, {}};
    if (s.bag_size() < kRackSize) return Violation{Violation::Code::ExchangeBagTooSmall, {}};
    return std::nullopt;
  }
  return detail::check_place(s, std::get<Place>(move), lex);
}

// ---------------------------------------------------------------------------
// Applying moves

inline bool is_over(const GameState& s) {
  if (s.zero_score_turns >= kZeroScoreTurnLimit) return true;
  return s.bag.empty() && (count_total(s.racks[0]) == 0 || count_total(s.racks[1]) == 0);
}

/// Applies a move without legality checks; `points` must be its score.
inline void apply_trusted(GameState& s, const Move& move, int points, bool record = true) {
  auto& rack = s.racks[static_cast<std::size_t>(s.turn)];
  if (record) s.log.push_back({s.turn, rack, move, points, move_notation(move)});
  if (const auto* p = std::get_if<Place>(&move)) {
    for (const auto& t : p->tiles) {
      s.board.place(p->tile_row(t), p->tile_col(t), t.letter, t.blank);
      --rack[t.blank ? kBlank : t.letter];
    }
    detail::draw_tiles(s, rack);
  } else if (const auto* e = std::get_if<Exchange>(&move)) {
    for (int t = 0; t < kTileKinds; ++t) rack[static_cast<std::size_t>(t)] -= e->tiles[static_cast<std::size_t>(t)];
    detail::draw_tiles(s, rack);
    for (int t = 0; t < kTileKinds; ++t)
      s.bag.insert(s.bag.end(), e->tiles[static_cast<std::size_t>(t)], static_cast<std::uint8_t>(t));
  }
  s.scores[static_cast<std::size_t>(s.turn)] += points;
  s.zero_score_turns = points > 0 ? 0 : s.zero_score_turns + 1;
  s.turn = 1 - s.turn;
}

/// Checked, value-returning form. Throws IllegalMove.
inline GameState apply_move(const GameState& s, const Move& move, const GameConfig& cfg, const Lexicon& lex) {
  if (s.finalized || is_over(s)) throw std::logic_error("apply_move on a finished game");
  if (auto v = check_legal(s, move, lex)) throw IllegalMove(*v);
  GameState next = s;
  Move stored = move;
  if (auto* p = std::get_if<Place>(&stored)) *p = canonicalize(s.board, *p);
  apply_trusted(next, stored, score_move(s.board, stored, cfg));
  return next;
}

inline int rack_value(const TileCounts& rack, const GameConfig& cfg) {
  int v = 0;
  for (int t = 0; t < kTileKinds; ++t) v += rack[static_cast<std::size_t>(t)] * cfg.tile_value(t);
  return v;
}

/// Applies end-of-game adjustments: each side loses its leftover tile value,
/// a player who went out also gains the opponent's leftover value.
inline GameState finalize(const GameState& s, const GameConfig& cfg) {
  if (s.finalized) throw std::logic_error("game already finalized");
  if (!is_over(s)) throw std::logic_error("finalize on a game that is not over");
  GameState out = s;
  const int left0 = rack_value(s.racks[0], cfg), left1 = rack_value(s.racks[1], cfg);
  out.scores[0] -= left0;
  out.scores[1] -= left1;
  if (s.bag.empty()) {
    if (count_total(s.racks[0]) == 0) out.scores[0] += left1;
    else if (count_total(s.racks[1]) == 0) out.scores[1] += left0;
  }
  out.finalized = true;
  return out;
}

/// Board + racks + bag, per tile kind. Must equal the distribution counts.
inline TileCounts tile_census(const GameState& s) {
  TileCounts census{};
  for (int r = 0; r < kBoardSize; ++r)
    for (int c = 0; c < kBoardSize; ++c)
      if (!s.board.empty(r, c)) ++census[s.board.is_blank(r, c) ? kBlank : s.board.letter(r, c)];
  for (const auto& rack : s.racks)
    for (int t = 0; t < kTileKinds; ++t) census[static_cast<std::size_t>(t)] += rack[static_cast<std::size_t>(t)];
  for (auto t : s.bag) ++census[t];
  return census;
}

}  // namespace scrabble_lab
