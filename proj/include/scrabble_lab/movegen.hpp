#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <memory>
#include <vector>

#include "scrabble_lab/config.hpp"
#include "scrabble_lab/engine.hpp"
#include "scrabble_lab/lexicon.hpp"

namespace scrabble_lab {

inline constexpr std::uint32_t kAllLetters = (1u << kLetters) - 1;

/// Perpendicular constraints for placements running in one direction.
struct CrossCheckLine {
  std::array<std::uint32_t, kCells> allowed{};  // letter bitmask per cell
  std::array<std::int16_t, kCells> sum{};       // face value of the perpendicular tiles
  std::array<bool, kCells> has_word{};          // a perpendicular word would be formed
};

/// Indexed by the direction of the placement being generated: entry Across
/// constrains cells by the vertical word a tile would form, and vice versa.
struct CrossCheckTable {
  std::array<CrossCheckLine, 2> line;

  const CrossCheckLine& operator[](Direction d) const { return line[static_cast<std::size_t>(d)]; }
};

namespace detail {

// Cross checks for across placements on `b` (perpendicular = vertical).
inline CrossCheckLine vertical_cross_checks(const Board& b, const Lexicon& lex, const GameConfig& cfg) {
  CrossCheckLine out;
  std::array<std::uint8_t, kBoardSize> up{}, down{};
  for (int r = 0; r < kBoardSize; ++r) {
    for (int c = 0; c < kBoardSize; ++c) {
      const auto idx = static_cast<std::size_t>(cell_index(r, c));
      if (!b.empty(r, c)) continue;
      int nu = 0, nd = 0, sum = 0;
      int top = r;
      while (top > 0 && !b.empty(top - 1, c)) --top;
      for (int k = top; k < r; ++k) {
        up[static_cast<std::size_t>(nu++)] = static_cast<std::uint8_t>(b.letter(k, c));
        sum += b.is_blank(k, c) ? 0 : cfg.tile_value(b.letter(k, c));
      }
      for (int k = r + 1; k < kBoardSize && !b.empty(k, c); ++k) {
        down[static_cast<std::size_t>(nd++)] = static_cast<std::uint8_t>(b.letter(k, c));
        sum += b.is_blank(k, c) ? 0 : cfg.tile_value(b.letter(k, c));
      }
      if (nu == 0 && nd == 0) {
        out.allowed[idx] = kAllLetters;
        continue;
      }
      out.has_word[idx] = true;
      out.sum[idx] = static_cast<std::int16_t>(sum);
      Lexicon::State node = lex.walk(Lexicon::kRoot, std::span(up.data(), static_cast<std::size_t>(nu)));
      if (node == Lexicon::kNone) continue;
      std::uint32_t mask = lex.child_mask(node), allowed = 0;
      while (mask != 0) {
        int letter = std::countr_zero(mask);
        mask &= mask - 1;
        Lexicon::State s = lex.walk(lex.child(node, letter), std::span(down.data(), static_cast<std::size_t>(nd)));
        if (s != Lexicon::kNone && lex.is_terminal(s)) allowed |= 1u << letter;
      }
      out.allowed[idx] = allowed;
    }
  }
  return out;
}

inline CrossCheckLine transpose_line(const CrossCheckLine& in) {
  CrossCheckLine out;
  for (int r = 0; r < kBoardSize; ++r)
    for (int c = 0; c < kBoardSize; ++c) {
      auto a = static_cast<std::size_t>(cell_index(r, c)), b = static_cast<std::size_t>(cell_index(c, r));
      out.allowed[a] = in.allowed[b];
      out.sum[a] = in.sum[b];
      out.has_word[a] = in.has_word[b];
    }
  return out;
}

inline GameConfig transposed_layout(const GameConfig& cfg) {
  GameConfig t = cfg;
  for (int r = 0; r < kBoardSize; ++r)
    for (int c = 0; c < kBoardSize; ++c)
      t.premium[static_cast<std::size_t>(cell_index(r, c))] = cfg.premium[static_cast<std::size_t>(cell_index(c, r))];
  return t;
}

}  // namespace detail

inline CrossCheckTable compute_cross_checks(const Board& board, const Lexicon& lex, const GameConfig& cfg) {
  CrossCheckTable table;
  table.line[static_cast<std::size_t>(Direction::Across)] = detail::vertical_cross_checks(board, lex, cfg);
  table.line[static_cast<std::size_t>(Direction::Down)] =
      detail::transpose_line(detail::vertical_cross_checks(board.transposed(), lex, cfg));
  return table;
}

/// A placement as emitted by the generator, before materialization.
/// Coordinates are in the real board frame.
struct GeneratedPlace {
  int row = 0;
  int col = 0;
  Direction dir = Direction::Across;
  int length = 0;  // main word length
  int n_tiles = 0;
  std::array<PlacedTile, kRackSize> tiles{};  // offsets from (row, col), ascending
  int score = 0;
  TileCounts leave{};  // rack after the placement, before drawing
};

/// Builds the canonical Place for a generated placement.
inline Place materialize(const Board& board, const GeneratedPlace& g) {
  Place p;
  p.row = g.row;
  p.col = g.col;
  p.dir = g.dir;
  p.tiles.assign(g.tiles.begin(), g.tiles.begin() + g.n_tiles);
  p.word.reserve(static_cast<std::size_t>(g.length));
  std::size_t next = 0;
  for (int k = 0; k < g.length; ++k) {
    if (next < p.tiles.size() && p.tiles[next].offset == k) {
      const auto& t = p.tiles[next++];
      p.word.push_back(static_cast<char>((t.blank ? 'a' : 'A') + t.letter));
    } else {
      int r = g.row + step_row(g.dir) * k, c = g.col + step_col(g.dir) * k;
      p.word.push_back(static_cast<char>((board.is_blank(r, c) ? 'a' : 'A') + board.letter(r, c)));
    }
  }
  return p;
}

namespace detail {

// A lexicon prefix spelled with rack tiles, usable to the left of an anchor.
// Left parts depend only on the rack, so they are enumerated once per call.
// Tiles are drawn real-first; which tiles are blanks is decided when a
// placement is recorded.
struct LeftPart {
  Lexicon::State node = Lexicon::kRoot;
  std::uint32_t next = 0;  // letters that may follow, limited to what the rest of the rack can play
  int length = 0;
  std::array<std::uint8_t, kRackSize> letters{};
  TileCounts rest{};
  std::uint32_t rest_mask = 0;  // letters still held as real tiles
  int rest_size = 0;
};

inline std::uint32_t real_letters(const TileCounts& rack) {
  std::uint32_t mask = 0;
  for (int t = 0; t < kLetters; ++t)
    if (rack[static_cast<std::size_t>(t)] > 0) mask |= 1u << t;
  return mask;
}

// Grouped by length; only prefixes that can still be extended are kept.
inline void enumerate_left_parts(const Lexicon& lex, const TileCounts& rack, int max_length,
                                 std::array<std::vector<LeftPart>, kRackSize>& out) {
  for (auto& v : out) v.clear();
  LeftPart cur;
  cur.rest = rack;
  cur.rest_size = count_total(rack);
  cur.rest_mask = real_letters(rack);
  auto rec = [&](auto&& self) -> void {
    cur.next = lex.child_mask(cur.node) & (cur.rest[kBlank] > 0 ? kAllLetters : cur.rest_mask);
    if (cur.next == 0) return;
    out[static_cast<std::size_t>(cur.length)].push_back(cur);
    if (cur.length == max_length) return;
    const Lexicon::State node = cur.node;
    const std::uint32_t mask_before = cur.rest_mask;
    std::uint32_t mask = cur.next;
    while (mask != 0) {
      int letter = std::countr_zero(mask);
      mask &= mask - 1;
      const bool blank = cur.rest[static_cast<std::size_t>(letter)] == 0;
      auto& slot = cur.rest[blank ? kBlank : letter];
      if (--slot == 0 && !blank) cur.rest_mask &= ~(1u << letter);
      --cur.rest_size;
      cur.letters[static_cast<std::size_t>(cur.length++)] = static_cast<std::uint8_t>(letter);
      cur.node = lex.child(node, letter);
      self(self);
      cur.node = node;
      --cur.length;
      ++cur.rest_size;
      ++slot;
      cur.rest_mask = mask_before;
    }
  };
  rec(rec);
}

// Longest run of free non-anchor cells directly left of an anchor whose
// left neighbour is empty; left parts never need to be longer.
inline int max_left_room(const Board& b) {
  const bool clear = b.is_clear();
  auto anchor = [&](int r, int c) {
    if (!b.empty(r, c)) return false;
    return clear ? r == kCenter && c == kCenter : b.has_neighbor(r, c);
  };
  int best = 0;
  for (int r = 0; r < kBoardSize; ++r) {
    int run = 0;
    for (int c = 0; c < kBoardSize; ++c) {
      if (anchor(r, c)) {
        best = std::max(best, run);
        run = 0;
      } else {
        run = b.empty(r, c) ? run + 1 : 0;
      }
    }
  }
  return best;
}

// Anchor-based generation of across placements on a (possibly transposed)
// board: a left part over free non-anchor cells, then right extension
// through the anchor. Each word path is walked once with every tile scored
// as real; record() then emits one placement per valid blank assignment.
template <class Visitor>
class AcrossGenerator {
 public:
  AcrossGenerator(const Board& board, const Lexicon& lex, const GameConfig& layout, const CrossCheckLine& cross,
                  const TileCounts& rack, const std::array<std::vector<LeftPart>, kRackSize>& left_parts,
                  bool transposed, Visitor& visit)
      : b_(board), lex_(lex), cfg_(layout), cross_(cross), rack_(rack), left_parts_(left_parts),
        transposed_(transposed), visit_(visit) {}

  void run() {
    const int rack_size = count_total(rack_);
    if (rack_size == 0) return;
    const bool clear = b_.is_clear();
    for (row_ = 0; row_ < kBoardSize; ++row_) {
      int last_anchor = -1;
      for (int c = 0; c < kBoardSize; ++c) {
        if (!is_anchor(row_, c, clear)) continue;
        anchor_ = c;
        if (c > 0 && !b_.empty(row_, c - 1)) {
          int start = c - 1;
          while (start > 0 && !b_.empty(row_, start - 1)) --start;
          Lexicon::State node = Lexicon::kRoot;
          int sum = 0;
          for (int k = start; k < c && node != Lexicon::kNone; ++k) {
            node = lex_.child(node, b_.letter(row_, k));
            sum += b_.is_blank(row_, k) ? 0 : cfg_.tile_value(b_.letter(row_, k));
          }
          n_placed_ = 0;
          if (node != Lexicon::kNone) {
            cur_ = rack_;
            cur_size_ = count_total(rack_);
            cur_mask_ = real_letters(rack_);
            extend_right(node, c, start, sum, 1, 0);
          }
        } else {
          int limit = 0;
          for (int k = c - 1; k >= 0 && k > last_anchor && b_.empty(row_, k) && !is_anchor(row_, k, clear); --k) ++limit;
          limit = std::min(limit, rack_size - 1);
          from_left_parts(limit);
        }
        last_anchor = c;
      }
    }
  }

 private:
  // Per placed tile: its column, letter, and what it adds to the main-word
  // letter sum and to its cross word's score when real.
  struct Slot {
    std::uint8_t col;
    std::uint8_t letter;
    int main;
    int cross;
  };

  bool is_anchor(int r, int c, bool clear) const {
    if (!b_.empty(r, c)) return false;
    if (clear) return r == kCenter && c == kCenter;
    return b_.has_neighbor(r, c);
  }

  std::uint32_t available() const { return cur_[kBlank] > 0 ? kAllLetters : cur_mask_; }

  // Real tile when one is held, otherwise a blank. Returns whether a blank was used.
  bool take(int letter) {
    --cur_size_;
    if (cur_[static_cast<std::size_t>(letter)] == 0) {
      --cur_[kBlank];
      return true;
    }
    if (--cur_[static_cast<std::size_t>(letter)] == 0) cur_mask_ &= ~(1u << letter);
    return false;
  }

  void give(int letter, bool blank) {
    ++cur_size_;
    if (blank) {
      ++cur_[kBlank];
    } else if (cur_[static_cast<std::size_t>(letter)]++ == 0) {
      cur_mask_ |= 1u << letter;
    }
  }

  void from_left_parts(int limit) {
    const std::uint32_t at_anchor = cross_.allowed[static_cast<std::size_t>(cell_index(row_, anchor_))];
    for (int len = 0; len <= limit; ++len) {
      const int start = anchor_ - len;
      for (const LeftPart& lp : left_parts_[static_cast<std::size_t>(len)]) {
        if ((lp.next & at_anchor) == 0) continue;
        int sum = 0, mult = 1;
        for (int k = 0; k < len; ++k) {
          auto idx = static_cast<std::size_t>(cell_index(row_, start + k));
          const int letter = lp.letters[static_cast<std::size_t>(k)];
          const int main = cfg_.tile_value(letter) * letter_multiplier(cfg_.premium[idx]);
          sum += main;
          mult *= word_multiplier(cfg_.premium[idx]);
          // Left-part cells are not anchors, so they never form cross words.
          placed_[static_cast<std::size_t>(k)] = {static_cast<std::uint8_t>(start + k), static_cast<std::uint8_t>(letter), main, 0};
        }
        n_placed_ = len;
        cur_ = lp.rest;
        cur_size_ = lp.rest_size;
        cur_mask_ = lp.rest_mask;
        extend_right(lp.node, anchor_, start, sum, mult, 0);
      }
    }
  }

  void extend_right(Lexicon::State node, int col, int start, int sum, int mult, int cross_total) {
    if (col >= kBoardSize || b_.empty(row_, col)) {
      if (col > anchor_ && n_placed_ > 0 && lex_.is_terminal(node)) record(col, start, sum, mult, cross_total);
      if (col >= kBoardSize || cur_size_ == 0) return;
      const auto idx = static_cast<std::size_t>(cell_index(row_, col));
      std::uint32_t mask = lex_.child_mask(node) & cross_.allowed[idx] & available();
      const Premium prem = cfg_.premium[idx];
      const int lm = letter_multiplier(prem), wm = word_multiplier(prem);
      const bool cross_word = cross_.has_word[idx];
      while (mask != 0) {
        int letter = std::countr_zero(mask);
        mask &= mask - 1;
        const int main = cfg_.tile_value(letter) * lm;
        const int cross = cross_word ? (cross_.sum[idx] + main) * wm : 0;
        const bool blank = take(letter);
        placed_[static_cast<std::size_t>(n_placed_++)] = {static_cast<std::uint8_t>(col), static_cast<std::uint8_t>(letter), main,
                                                          cross_word ? main * wm : 0};
        extend_right(lex_.child(node, letter), col + 1, start, sum + main, mult * wm, cross_total + cross);
        --n_placed_;
        give(letter, blank);
      }
    } else {
      const int letter = b_.letter(row_, col);
      Lexicon::State next = lex_.child(node, letter);
      if (next == Lexicon::kNone) return;
      extend_right(next, col + 1, start, sum + (b_.is_blank(row_, col) ? 0 : cfg_.tile_value(letter)), mult, cross_total);
    }
  }

  // sum, mult and cross_total score every placed tile as real.
  void record(int end, int start, int sum, int mult, int cross_total) {
    if (transposed_ && n_placed_ == 1) {
      // Single tiles that also form an across word belong to the across pass.
      if (cross_.has_word[static_cast<std::size_t>(cell_index(row_, placed_[0].col))]) return;
    }
    GeneratedPlace g;
    g.dir = transposed_ ? Direction::Down : Direction::Across;
    g.row = transposed_ ? start : row_;
    g.col = transposed_ ? row_ : start;
    g.length = end - start;
    g.n_tiles = n_placed_;
    const int bonus = n_placed_ == kRackSize ? kBingoBonus : 0;
    for (int k = 0; k < n_placed_; ++k) {
      const auto& t = placed_[static_cast<std::size_t>(k)];
      g.tiles[static_cast<std::size_t>(k)] = {static_cast<std::uint8_t>(t.col - start), t.letter, false};
    }
    const int blanks = rack_[kBlank];
    if (blanks == 0) {
      g.score = sum * mult + cross_total + bonus;
      g.leave = cur_;
      visit_(g);
      return;
    }
    // Every subset of placed tiles that can be blanks while the rest come
    // from real rack tiles.
    const unsigned subsets = 1u << n_placed_;
    for (unsigned b = 0; b < subsets; ++b) {
      if (std::popcount(b) > blanks) continue;
      TileCounts leave = rack_;
      int main_cut = 0, cross_cut = 0;
      bool ok = true;
      for (int k = 0; k < n_placed_; ++k) {
        const auto& t = placed_[static_cast<std::size_t>(k)];
        const bool blank = (b >> k) & 1u;
        auto& slot = leave[blank ? kBlank : t.letter];
        if (slot == 0) {
          ok = false;
          break;
        }
        --slot;
        g.tiles[static_cast<std::size_t>(k)].blank = blank;
        if (blank) {
          main_cut += t.main;
          cross_cut += t.cross;
        }
      }
      if (!ok) continue;
      g.score = (sum - main_cut) * mult + cross_total - cross_cut + bonus;
      g.leave = leave;
      visit_(g);
    }
  }

  const Board& b_;
  const Lexicon& lex_;
  const GameConfig& cfg_;
  const CrossCheckLine& cross_;
  const TileCounts& rack_;
  const std::array<std::vector<LeftPart>, kRackSize>& left_parts_;
  bool transposed_;
  Visitor& visit_;
  int row_ = 0;
  int anchor_ = 0;
  TileCounts cur_{};  // rack during right extension
  std::uint32_t cur_mask_ = 0;  // letters held as real tiles
  int cur_size_ = 0;
  std::array<Slot, kRackSize> placed_{};
  int n_placed_ = 0;
};

}  // namespace detail

/// Calls visit(const GeneratedPlace&) once per legal placement for `rack`
/// on `board`. Order is generation order, not canonical.
template <class Visitor>
void for_each_placement(const Board& board, const TileCounts& rack, const Lexicon& lex, const GameConfig& cfg,
                        Visitor&& visit) {
  // Scratch buffers are per thread and per nesting level, so a visitor may
  // itself generate moves.
  thread_local std::vector<std::unique_ptr<std::array<std::vector<detail::LeftPart>, kRackSize>>> scratch;
  thread_local std::size_t depth = 0;
  if (scratch.size() <= depth) scratch.push_back(std::make_unique<std::array<std::vector<detail::LeftPart>, kRackSize>>());
  auto& left_parts = *scratch[depth];
  struct Nest {
    std::size_t& level;
    ~Nest() { --level; }
  } nest{++depth};
  const Board t = board.transposed();
  const int room = std::max(detail::max_left_room(board), detail::max_left_room(t));
  detail::enumerate_left_parts(lex, rack, std::min(room, std::max(0, count_total(rack) - 1)), left_parts);
  using V = std::remove_reference_t<Visitor>;
  auto across_cross = detail::vertical_cross_checks(board, lex, cfg);
  detail::AcrossGenerator<V>(board, lex, cfg, across_cross, rack, left_parts, false, visit).run();
  const GameConfig tcfg = detail::transposed_layout(cfg);
  auto down_cross = detail::vertical_cross_checks(t, lex, tcfg);
  detail::AcrossGenerator<V>(t, lex, tcfg, down_cross, rack, left_parts, true, visit).run();
}

/// Every distinct non-empty sub-multiset of the rack.
inline std::vector<Exchange> enumerate_exchanges(const TileCounts& rack) {
  std::vector<Exchange> out;
  TileCounts pick{};
  auto rec = [&](auto&& self, int t) -> void {
    if (t == kTileKinds) {
      if (count_total(pick) > 0) out.push_back(Exchange{pick});
      return;
    }
    for (int n = 0; n <= rack[static_cast<std::size_t>(t)]; ++n) {
      pick[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(n);
      self(self, t + 1);
    }
    pick[static_cast<std::size_t>(t)] = 0;
  };
  rec(rec, 0);
  return out;
}

struct ScoredMove {
  Move move;
  int score = 0;
};

/// All legal moves with their scores in canonical order: placements,
/// exchanges (bag >= 7), then pass.
inline std::vector<ScoredMove> generate_scored_moves(const GameState& s, const Lexicon& lex, const GameConfig& cfg) {
  std::vector<ScoredMove> out;
  for_each_placement(s.board, s.mover_rack(), lex, cfg,
                     [&](const GeneratedPlace& g) { out.push_back({materialize(s.board, g), g.score}); });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return canonical_less(a.move, b.move); });
  out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return canonical_equal(a.move, b.move); }),
            out.end());
  if (s.bag_size() >= kRackSize) {
    auto ex = enumerate_exchanges(s.mover_rack());
    std::sort(ex.begin(), ex.end(), [](const auto& a, const auto& b) { return canonical_less(a, b); });
    for (auto& e : ex) out.push_back({std::move(e), 0});
  }
  out.push_back({Pass{}, 0});
  return out;
}

inline std::vector<Move> generate_moves(const GameState& s, const Lexicon& lex, const GameConfig& cfg) {
  std::vector<Move> out;
  for (auto& m : generate_scored_moves(s, lex, cfg)) out.push_back(std::move(m.move));
  return out;
}

inline std::vector<Move> generate_moves(const GameState& s, const Lexicon& lex) {
  static const GameConfig kStandard = standard_config();
  return generate_moves(s, lex, kStandard);
}

}  // namespace scrabble_lab
