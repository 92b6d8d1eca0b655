#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scrabble_lab/core.hpp"

namespace scrabble_lab {

/// Word list stored as a minimized prefix automaton (DAWG). Every state is
/// on a path to at least one stored word. Immutable once built.
class Lexicon {
 public:
  using State = std::uint32_t;
  static constexpr State kRoot = 0;
  static constexpr State kNone = 0xFFFFFFFFu;

  struct Step {
    State state;
    bool terminal;
  };

  Lexicon() : nodes_{Node{0, 0}} {}

  /// Builds from A-Z words of length 2..15; lowercase input is uppercased.
  /// Duplicates are merged. Throws ConfigError on any malformed word.
  static Lexicon build(std::vector<std::string> words) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      normalize_or_throw(words[i], [&] { return "word " + std::to_string(i); });
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    return build_sorted(words);
  }

  /// One word per line. Empty lines are skipped; any other invalid line
  /// aborts the load with its line number.
  static Lexicon parse(std::istream& in, const std::string& source = "<stream>") {
    std::vector<std::string> words;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      normalize_or_throw(line, [&] { return source + ":" + std::to_string(line_no); });
      words.push_back(std::move(line));
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    return build_sorted(words);
  }

  static Lexicon load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open word list '" + path.string() + "'");
    return parse(in, path.string());
  }

  bool contains(std::string_view word) const noexcept {
    State s = kRoot;
    for (char c : word) {
      int letter = c - 'A';
      if (letter < 0 || letter >= kLetters) return false;
      s = child(s, letter);
      if (s == kNone) return false;
    }
    return !word.empty() && is_terminal(s);
  }

  /// Checked transition. Throws std::out_of_range for an invalid state id.
  std::optional<Step> step(State node, int letter) const {
    if (node >= nodes_.size()) throw std::out_of_range("invalid lexicon state " + std::to_string(node));
    if (letter < 0 || letter >= kLetters) return std::nullopt;
    State next = child(node, letter);
    if (next == kNone) return std::nullopt;
    return Step{next, is_terminal(next)};
  }

  /// Unchecked transition for hot loops; kNone when the edge is missing.
  State child(State node, int letter) const noexcept {
    const Node& n = nodes_[node];
    const std::uint32_t bit = 1u << letter;
    if ((n.mask & bit) == 0) return kNone;
    return edges_[n.first_edge + static_cast<std::uint32_t>(std::popcount(n.mask & (bit - 1)))];
  }

  /// Follows a whole string of letters (0..25); kNone if it falls off.
  template <class Range>
  State walk(State node, const Range& letters) const noexcept {
    for (auto letter : letters) {
      if (node == kNone) return kNone;
      node = child(node, static_cast<int>(letter));
    }
    return node;
  }

  std::uint32_t child_mask(State node) const noexcept { return nodes_[node].mask & kLetterMask; }
  bool is_terminal(State node) const noexcept { return (nodes_[node].mask & kTerminalBit) != 0; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t word_count() const noexcept { return word_count_; }
  bool empty() const noexcept { return word_count_ == 0; }

  /// All stored words in lexicographic order.
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    out.reserve(word_count_);
    std::string prefix;
    collect(kRoot, prefix, out);
    return out;
  }

 private:
  static constexpr std::uint32_t kLetterMask = (1u << kLetters) - 1;
  static constexpr std::uint32_t kTerminalBit = 1u << kLetters;

  struct Node {
    std::uint32_t mask;  // bits 0..25 outgoing letters, bit 26 terminal
    std::uint32_t first_edge;
  };

  template <class Where>
  static void normalize_or_throw(std::string& word, Where where) {
    if (word.size() < 2 || word.size() > 15) {
      throw ConfigError(where() + ": word '" + word + "' must have 2..15 letters");
    }
    for (char& c : word) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      if (c < 'A' || c > 'Z') throw ConfigError(where() + ": word '" + word + "' has characters outside A-Z");
    }
  }

  void collect(State s, std::string& prefix, std::vector<std::string>& out) const {
    if (is_terminal(s) && !prefix.empty()) out.push_back(prefix);
    std::uint32_t mask = child_mask(s);
    while (mask != 0) {
      int letter = std::countr_zero(mask);
      mask &= mask - 1;
      prefix.push_back(static_cast<char>('A' + letter));
      collect(child(s, letter), prefix, out);
      prefix.pop_back();
    }
  }

  struct BuildNode {
    bool terminal = false;
    std::vector<std::pair<std::uint8_t, std::uint32_t>> edges;  // ascending letters
  };

  // Incremental minimization over sorted, unique input: once a word diverges
  // from its predecessor, the predecessor's tail is final and can be merged
  // with an equivalent registered node.
  static Lexicon build_sorted(const std::vector<std::string>& words) {
    std::vector<BuildNode> pool(1);
    std::unordered_map<std::string, std::uint32_t> registry;
    std::vector<std::uint32_t> path{0};
    std::string previous;

    auto signature = [&](const BuildNode& n) {
      std::string key;
      key.reserve(1 + n.edges.size() * 5);
      key.push_back(n.terminal ? '1' : '0');
      for (auto [letter, target] : n.edges) {
        key.push_back(static_cast<char>(letter));
        key.append(reinterpret_cast<const char*>(&target), sizeof target);
      }
      return key;
    };
    auto minimize_down_to = [&](std::size_t depth) {
      while (path.size() > depth + 1) {
        std::uint32_t node = path.back();
        path.pop_back();
        auto [it, inserted] = registry.try_emplace(signature(pool[node]), node);
        if (!inserted) {
          pool[path.back()].edges.back().second = it->second;
          pool[node] = BuildNode{};
        }
      }
    };

    for (const std::string& word : words) {
      std::size_t common = 0;
      while (common < word.size() && common < previous.size() && word[common] == previous[common]) ++common;
      minimize_down_to(common);
      for (std::size_t i = common; i < word.size(); ++i) {
        auto id = static_cast<std::uint32_t>(pool.size());
        pool.emplace_back();
        pool[path.back()].edges.emplace_back(static_cast<std::uint8_t>(word[i] - 'A'), id);
        path.push_back(id);
      }
      pool[path.back()].terminal = true;
      previous = word;
    }
    minimize_down_to(0);

    // Renumber reachable nodes breadth-first so the root is state 0.
    Lexicon lex;
    lex.nodes_.clear();
    std::vector<std::uint32_t> remap(pool.size(), kNone);
    std::vector<std::uint32_t> order{0};
    remap[0] = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (auto [letter, target] : pool[order[i]].edges) {
        if (remap[target] == kNone) {
          remap[target] = static_cast<std::uint32_t>(order.size());
          order.push_back(target);
        }
      }
    }
    lex.nodes_.reserve(order.size());
    for (std::uint32_t old : order) {
      const BuildNode& n = pool[old];
      Node out{n.terminal ? kTerminalBit : 0u, static_cast<std::uint32_t>(lex.edges_.size())};
      for (auto [letter, target] : n.edges) {
        out.mask |= 1u << letter;
        lex.edges_.push_back(remap[target]);
      }
      lex.nodes_.push_back(out);
    }
    lex.word_count_ = words.size();
    return lex;
  }

  std::vector<Node> nodes_;
  std::vector<State> edges_;
  std::size_t word_count_ = 0;
};

}  // namespace scrabble_lab
