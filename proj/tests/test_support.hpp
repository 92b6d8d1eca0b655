#pragma once

// Independent oracles and fixtures shared by the unit and acceptance suites.
// Nothing here calls the anchor-based generator.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "scrabble_lab/engine.hpp"
#include "scrabble_lab/lexicon.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab::testing {

inline std::string data_path(const std::string& name) { return std::string(SCRABBLE_LAB_DATA_DIR) + "/" + name; }

/// Node count of the plain (unshared) trie over the words, root included.
inline std::size_t naive_trie_nodes(std::vector<std::string> words) {
  std::set<std::string> prefixes{""};
  for (const auto& w : words)
    for (std::size_t k = 1; k <= w.size(); ++k) prefixes.insert(w.substr(0, k));
  return prefixes.size();
}

/// Toy lexicon: random words over the first `alphabet` letters, always
/// including every two-letter combination of the first three letters so
/// boards stay connected.
inline std::vector<std::string> toy_words(std::uint64_t seed, int alphabet, std::size_t count) {
  Rng rng(seed);
  std::set<std::string> words;
  for (char a = 'A'; a < 'A' + 3; ++a)
    for (char b = 'A'; b < 'A' + 3; ++b)
      if (uniform01(rng) < 0.6) words.insert(std::string{a, b});
  while (words.size() < count) {
    const int len = 2 + static_cast<int>(uniform_below(rng, 4));
    std::string w;
    for (int k = 0; k < len; ++k) w.push_back(static_cast<char>('A' + uniform_below(rng, static_cast<std::uint64_t>(alphabet))));
    words.insert(w);
  }
  return {words.begin(), words.end()};
}

namespace detail_oracle {

inline void assign_tiles(const GameState& s, const Lexicon& lex, Place& base, const std::vector<int>& letters,
                         std::size_t k, TileCounts& rack, std::vector<Place>& out, const std::vector<int>& offsets) {
  if (k == letters.size()) {
    if (base.tiles.empty()) return;
    if (!check_legal(s, base, lex)) out.push_back(canonicalize(s.board, base));
    return;
  }
  const int letter = letters[k];
  for (bool blank : {false, true}) {
    auto& slot = rack[blank ? kBlank : letter];
    if (slot == 0) continue;
    --slot;
    base.tiles.push_back({static_cast<std::uint8_t>(offsets[k]), static_cast<std::uint8_t>(letter), blank});
    assign_tiles(s, lex, base, letters, k + 1, rack, out, offsets);
    base.tiles.pop_back();
    ++slot;
  }
}

}  // namespace detail_oracle

/// Brute force: every stored word at every square and orientation, every
/// real/blank tile assignment for its empty cells, filtered by check_legal.
inline std::vector<Place> brute_force_placements(const GameState& s, const Lexicon& lex) {
  std::vector<Place> found;
  const auto words = lex.words();
  for (const auto& w : words) {
    const int len = static_cast<int>(w.size());
    for (Direction dir : {Direction::Across, Direction::Down}) {
      for (int r = 0; r < kBoardSize; ++r) {
        for (int c = 0; c < kBoardSize; ++c) {
          const int er = r + step_row(dir) * (len - 1), ec = c + step_col(dir) * (len - 1);
          if (!Board::in_bounds(er, ec)) continue;
          std::vector<int> letters, offsets;
          bool fits = true;
          for (int k = 0; k < len && fits; ++k) {
            int rr = r + step_row(dir) * k, cc = c + step_col(dir) * k;
            int letter = w[static_cast<std::size_t>(k)] - 'A';
            if (s.board.empty(rr, cc)) {
              letters.push_back(letter);
              offsets.push_back(k);
            } else if (s.board.letter(rr, cc) != letter) {
              fits = false;
            }
          }
          if (!fits || letters.empty() || letters.size() > static_cast<std::size_t>(kRackSize)) continue;
          Place base;
          base.row = r;
          base.col = c;
          base.dir = dir;
          TileCounts rack = s.mover_rack();
          detail_oracle::assign_tiles(s, lex, base, letters, 0, rack, found, offsets);
        }
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const Place& a, const Place& b) {
    return canonical_less(Move{a}, Move{b});
  });
  found.erase(std::unique(found.begin(), found.end(), [](const Place& a, const Place& b) {
                return canonical_equal(Move{a}, Move{b});
              }),
              found.end());
  return found;
}

/// Literal permutation search: every start square, orientation and ordered
/// selection of rack tiles (blanks as every letter), filtered by check_legal.
/// Exponential; only for racks of a few tiles.
inline std::vector<Place> permutation_placements(const GameState& s, const Lexicon& lex) {
  std::vector<Place> found;
  TileCounts rack = s.mover_rack();
  for (Direction dir : {Direction::Across, Direction::Down}) {
    for (int r = 0; r < kBoardSize; ++r) {
      for (int c = 0; c < kBoardSize; ++c) {
        if (!s.board.empty(r, c)) continue;
        Place p;
        p.row = r;
        p.col = c;
        p.dir = dir;
        auto rec = [&](auto&& self, int offset) -> void {
          int rr = r + step_row(dir) * offset, cc = c + step_col(dir) * offset;
          while (Board::in_bounds(rr, cc) && !s.board.empty(rr, cc)) ++offset, rr += step_row(dir), cc += step_col(dir);
          if (!Board::in_bounds(rr, cc)) return;
          for (int t = 0; t < kTileKinds; ++t) {
            if (rack[static_cast<std::size_t>(t)] == 0) continue;
            --rack[static_cast<std::size_t>(t)];
            for (int letter = 0; letter < kLetters; ++letter) {
              if (t != kBlank && letter != t) continue;
              p.tiles.push_back({static_cast<std::uint8_t>(offset), static_cast<std::uint8_t>(letter), t == kBlank});
              if (!check_legal(s, p, lex)) found.push_back(canonicalize(s.board, p));
              self(self, offset + 1);
              p.tiles.pop_back();
            }
            ++rack[static_cast<std::size_t>(t)];
          }
        };
        rec(rec, 0);
      }
    }
  }
  std::sort(found.begin(), found.end(), [](const Place& a, const Place& b) { return canonical_less(Move{a}, Move{b}); });
  found.erase(std::unique(found.begin(), found.end(),
                          [](const Place& a, const Place& b) { return canonical_equal(Move{a}, Move{b}); }),
              found.end());
  return found;
}

/// A GameState with an empty bag, the given board and mover rack.
inline GameState position(const Board& board, const TileCounts& rack, int bag_tiles = 0) {
  GameState s;
  s.board = board;
  s.racks[0] = rack;
  s.racks[1][25] = 1;  // keeps the game from counting as over
  s.bag.assign(static_cast<std::size_t>(bag_tiles), 0);
  return s;
}

/// Random rack over the first `alphabet` letters plus occasional blanks.
inline TileCounts random_rack(Rng& rng, int alphabet, int size, double blank_prob) {
  TileCounts rack{};
  for (int k = 0; k < size; ++k) {
    if (uniform01(rng) < blank_prob) ++rack[kBlank];
    else ++rack[uniform_below(rng, static_cast<std::uint64_t>(alphabet))];
  }
  return rack;
}

}  // namespace scrabble_lab::testing
