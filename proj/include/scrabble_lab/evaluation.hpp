#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scrabble_lab/config.hpp"
#include "scrabble_lab/engine.hpp"
#include "scrabble_lab/lexicon.hpp"
#include "scrabble_lab/mlp.hpp"
#include "scrabble_lab/movegen.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab {

// ---------------------------------------------------------------------------
// Features

enum Feature : int {
  kMoveScore,
  kLeaveValue,
  kLeavePlayability,
  kCvDiff,
  kBlanksLeft,
  kOpenDL,
  kOpenTL,
  kOpenDW,
  kOpenTW,
  kLeaveLength,
  kBoardVcDiff,  // board extras, intended for MLP evaluators
  kBoardBlanks,
  kFeatureCount
};

inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "move_score", "leave_value", "leave_playability", "cv_diff", "blanks_left", "open_dl",
    "open_tl",    "open_dw",     "open_tw",           "leave_length", "board_vc_diff", "board_blanks"};

inline Feature feature_from_name(const std::string& name) {
  for (int f = 0; f < kFeatureCount; ++f)
    if (name == kFeatureNames[static_cast<std::size_t>(f)]) return static_cast<Feature>(f);
  throw ConfigError("unknown feature '" + name + "'");
}

using FeatureVector = std::array<double, kFeatureCount>;
using FeatureMask = std::uint32_t;

inline constexpr FeatureMask feature_bit(Feature f) { return 1u << f; }
inline constexpr FeatureMask kAllFeatures = (1u << kFeatureCount) - 1;
inline constexpr FeatureMask kLeaveFeatures = feature_bit(kLeaveValue) | feature_bit(kLeavePlayability) |
                                              feature_bit(kCvDiff) | feature_bit(kBlanksLeft) | feature_bit(kLeaveLength);

/// Features that depend only on the rack leave.
inline constexpr bool is_leave_feature(Feature f) { return (kLeaveFeatures & feature_bit(f)) != 0; }

/// Consonants minus vowels; blanks count as neither.
inline int consonant_vowel_diff(const TileCounts& tiles) {
  int d = 0;
  for (int t = 0; t < kLetters; ++t) d += (is_vowel(t) ? -1 : 1) * tiles[static_cast<std::size_t>(t)];
  return d;
}

// ---------------------------------------------------------------------------
// Leave values

/// Values of rack leaves keyed by canonical tile string ('?' for blanks).
/// Leaves without an entry fall back to the sum of per-tile values.
class LeaveValueTable {
 public:
  LeaveValueTable() = default;
  LeaveValueTable(std::array<double, kTileKinds> tile_values, std::string source)
      : tile_values_(tile_values), source_(std::move(source)) {}

  /// Built-in single-tile values in points; a hand-set table, not learned.
  static LeaveValueTable per_tile_default() {
    return LeaveValueTable({0.5, -2.0, 0.0, 0.0,  1.0, -2.0, -2.0, 0.5, -1.0, -2.5, -1.5, 0.0, 0.0, 0.5,
                            -1.5, -1.0, -7.0, 1.0, 8.0, 0.0,  -3.0, -5.5, -4.0, 3.0, -0.5, 3.0, 25.0},
                           "per-tile-default");
  }

  double value(const TileCounts& leave) const {
    if (count_total(leave) == 0) return 0.0;
    if (!entries_.empty()) {
      if (auto it = entries_.find(counts_to_string(leave)); it != entries_.end()) return it->second;
    }
    return fallback(leave);
  }

  double fallback(const TileCounts& leave) const {
    double v = 0.0;
    for (int t = 0; t < kTileKinds; ++t) v += tile_values_[static_cast<std::size_t>(t)] * leave[static_cast<std::size_t>(t)];
    return v;
  }

  void set(const TileCounts& leave, double v) { entries_[counts_to_string(leave)] = v; }
  std::optional<double> entry(const TileCounts& leave) const {
    auto it = entries_.find(counts_to_string(leave));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return entries_.size(); }
  const std::string& source() const { return source_; }
  const std::array<double, kTileKinds>& tile_values() const { return tile_values_; }

  nlohmann::json to_json() const {
    nlohmann::json tiles = nlohmann::json::object();
    for (int t = 0; t < kTileKinds; ++t) tiles[std::string(1, tile_char(t))] = tile_values_[static_cast<std::size_t>(t)];
    std::map<std::string, double> sorted(entries_.begin(), entries_.end());
    return {{"source", source_}, {"tile_values", tiles}, {"leaves", sorted}};
  }

  static LeaveValueTable from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("$: leave table must be an object");
    LeaveValueTable table = per_tile_default();
    table.source_ = j.value("source", std::string("file"));
    if (j.contains("tile_values")) {
      for (auto& [key, v] : j["tile_values"].items()) {
        if (key.size() != 1 || (tile_from_char(key[0]) < 0)) throw ConfigError("$.tile_values." + key + ": unknown tile");
        if (!v.is_number()) throw ConfigError("$.tile_values." + key + ": expected a number");
        table.tile_values_[static_cast<std::size_t>(tile_from_char(key[0]))] = v.get<double>();
      }
    }
    if (j.contains("leaves")) {
      if (!j["leaves"].is_object()) throw ConfigError("$.leaves: expected an object");
      for (auto& [key, v] : j["leaves"].items()) {
        if (!v.is_number()) throw ConfigError("$.leaves." + key + ": expected a number");
        TileCounts leave;
        try {
          leave = counts_from_string(key);
        } catch (const ConfigError& e) {
          throw ConfigError("$.leaves." + key + ": " + e.what());
        }
        if (count_total(leave) == 0 || count_total(leave) >= kRackSize)
          throw ConfigError("$.leaves." + key + ": leave must have 1..6 tiles");
        table.entries_[counts_to_string(leave)] = v.get<double>();
      }
    }
    return table;
  }

  static LeaveValueTable load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open leave table '" + path.string() + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }

 private:
  std::array<double, kTileKinds> tile_values_{};
  std::string source_ = "empty";
  std::unordered_map<std::string, double> entries_;
};

/// value(leave) = mean next-turn score of the holder after that leave minus
/// the global mean next-turn score, for leaves seen at least min_support times.
/// Tile values fall back to `base`.
inline LeaveValueTable build_leave_table(const std::vector<std::vector<LoggedMove>>& game_logs, int max_leave_size,
                                         int min_support, const LeaveValueTable& base = LeaveValueTable::per_tile_default()) {
  struct Acc {
    double sum = 0;
    long n = 0;
  };
  std::unordered_map<std::string, Acc> by_leave;
  double total = 0;
  long count = 0;
  for (const auto& log : game_logs) {
    for (std::size_t i = 0; i < log.size(); ++i) {
      const auto& m = log[i];
      const LoggedMove* next = nullptr;
      for (std::size_t j = i + 1; j < log.size(); ++j) {
        if (log[j].player == m.player) {
          next = &log[j];
          break;
        }
      }
      if (next == nullptr) continue;
      total += next->score;
      ++count;
      const TileCounts leave = leave_after(m.rack_before, m.move);
      const int size = count_total(leave);
      if (size == 0 || size > max_leave_size) continue;
      auto& acc = by_leave[counts_to_string(leave)];
      acc.sum += next->score;
      ++acc.n;
    }
  }
  if (count == 0) throw std::invalid_argument("build_leave_table: logs contain no scored follow-up turns");
  const double mean = total / static_cast<double>(count);
  LeaveValueTable table(base.tile_values(), "selfplay");
  for (const auto& [key, acc] : by_leave)
    if (acc.n >= min_support) table.set(counts_from_string(key), acc.sum / static_cast<double>(acc.n) - mean);
  return table;
}

/// Monte-Carlo mean, over `samples` completions of the leave to 7 tiles drawn
/// from `pool`, of the best opening score on an empty board.
inline double leave_playability(const TileCounts& leave, const TileCounts& pool, const Lexicon& lex,
                                const GameConfig& cfg, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("leave_playability needs at least one sample");
  std::vector<std::uint8_t> tiles;
  for (int t = 0; t < kTileKinds; ++t) tiles.insert(tiles.end(), pool[static_cast<std::size_t>(t)], static_cast<std::uint8_t>(t));
  const int need = std::min<int>(kRackSize - count_total(leave), static_cast<int>(tiles.size()));
  const Board empty;
  double sum = 0;
  for (int s = 0; s < samples; ++s) {
    Rng rng(seed_mix(seed, static_cast<std::uint64_t>(s)));
    TileCounts rack = leave;
    for (int k = 0; k < need; ++k) {
      auto i = static_cast<std::size_t>(k) + static_cast<std::size_t>(uniform_below(rng, tiles.size() - static_cast<std::size_t>(k)));
      std::swap(tiles[static_cast<std::size_t>(k)], tiles[i]);
      ++rack[tiles[static_cast<std::size_t>(k)]];
    }
    int best = 0;
    for_each_placement(empty, rack, lex, cfg, [&](const GeneratedPlace& g) { best = std::max(best, g.score); });
    sum += best;
  }
  return sum / samples;
}

// ---------------------------------------------------------------------------
// Openings

namespace detail {

// Letters that could be played alone at an empty cell, forming only valid
// words, with at least one neighbor.
inline std::uint32_t hook_letters(const Board& b, int r, int c, const Lexicon& lex) {
  std::uint32_t allowed = kAllLetters;
  bool any = false;
  for (Direction d : {Direction::Across, Direction::Down}) {
    const int dr = step_row(d), dc = step_col(d);
    std::array<std::uint8_t, kBoardSize> before{}, after{};
    int nb = 0, na = 0;
    int rr = r - dr, cc = c - dc;
    while (Board::in_bounds(rr, cc) && !b.empty(rr, cc)) rr -= dr, cc -= dc;
    for (rr += dr, cc += dc; rr != r || cc != c; rr += dr, cc += dc) before[static_cast<std::size_t>(nb++)] = static_cast<std::uint8_t>(b.letter(rr, cc));
    for (rr = r + dr, cc = c + dc; Board::in_bounds(rr, cc) && !b.empty(rr, cc); rr += dr, cc += dc)
      after[static_cast<std::size_t>(na++)] = static_cast<std::uint8_t>(b.letter(rr, cc));
    if (nb == 0 && na == 0) continue;
    any = true;
    Lexicon::State node = lex.walk(Lexicon::kRoot, std::span(before.data(), static_cast<std::size_t>(nb)));
    std::uint32_t ok = 0;
    if (node != Lexicon::kNone) {
      std::uint32_t mask = lex.child_mask(node);
      while (mask != 0) {
        const int letter = std::countr_zero(mask);
        mask &= mask - 1;
        Lexicon::State s = lex.walk(lex.child(node, letter), std::span(after.data(), static_cast<std::size_t>(na)));
        if (s != Lexicon::kNone && lex.is_terminal(s)) ok |= 1u << letter;
      }
    }
    allowed &= ok;
  }
  return any ? allowed : 0;
}

inline int premium_slot(Premium p) {
  switch (p) {
    case Premium::DL: return 0;
    case Premium::TL: return 1;
    case Premium::DW: return 2;
    case Premium::TW: return 3;
    case Premium::None: break;
  }
  return -1;
}

}  // namespace detail

/// Per premium kind (DL, TL, DW, TW): empty premium cells next to a newly
/// placed tile that accept a legal one-tile hook after the move but not before.
inline std::array<int, 4> opening_features(const Board& before, const Board& after, const Lexicon& lex,
                                           const GameConfig& cfg) {
  std::array<int, 4> out{};
  std::array<bool, kCells> seen{};
  for (int r = 0; r < kBoardSize; ++r) {
    for (int c = 0; c < kBoardSize; ++c) {
      if (after.empty(r, c) || !before.empty(r, c)) continue;
      for (auto [dr, dc] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        const int nr = r + dr, nc = c + dc;
        if (!Board::in_bounds(nr, nc) || !after.empty(nr, nc)) continue;
        auto idx = static_cast<std::size_t>(cell_index(nr, nc));
        if (seen[idx]) continue;
        seen[idx] = true;
        const int slot = detail::premium_slot(cfg.premium[idx]);
        if (slot < 0) continue;
        if (detail::hook_letters(after, nr, nc, lex) != 0 && detail::hook_letters(before, nr, nc, lex) == 0)
          ++out[static_cast<std::size_t>(slot)];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Models

struct EvalModel;

struct LinearEval {
  std::vector<Feature> features;
  std::vector<double> weights;
};

struct MlpEval {
  std::vector<Feature> features;
  Mlp net;
};

/// Dispatch on tiles in the bag: early >= 80, mid 20..79, end < 20.
struct PhaseSplitEval {
  static constexpr int kEarlyAt = 80;
  static constexpr int kEndBelow = 20;
  std::shared_ptr<const EvalModel> early, mid, end;
};

struct EvalModel {
  std::variant<LinearEval, MlpEval, PhaseSplitEval> kind;
};

inline EvalModel linear_model(std::vector<Feature> features, std::vector<double> weights) {
  if (features.size() != weights.size()) throw std::invalid_argument("linear model: one weight per feature");
  return EvalModel{LinearEval{std::move(features), std::move(weights)}};
}

/// Move score plus leave value, unit weights.
inline EvalModel e_quackle() { return linear_model({kMoveScore, kLeaveValue}, {1.0, 1.0}); }

inline EvalModel phase_split(EvalModel early, EvalModel mid, EvalModel end) {
  return EvalModel{PhaseSplitEval{std::make_shared<const EvalModel>(std::move(early)),
                                  std::make_shared<const EvalModel>(std::move(mid)),
                                  std::make_shared<const EvalModel>(std::move(end))}};
}

inline FeatureMask required_features(const EvalModel& model) {
  return std::visit(
      [](const auto& m) -> FeatureMask {
        using T = std::decay_t<decltype(m)>;
        FeatureMask mask = 0;
        if constexpr (std::is_same_v<T, PhaseSplitEval>) {
          mask = required_features(*m.early) | required_features(*m.mid) | required_features(*m.end);
        } else {
          for (Feature f : m.features) mask |= feature_bit(f);
        }
        return mask;
      },
      model.kind);
}

inline const EvalModel& phase_model(const PhaseSplitEval& p, int tiles_in_bag) {
  if (tiles_in_bag >= PhaseSplitEval::kEarlyAt) return *p.early;
  if (tiles_in_bag >= PhaseSplitEval::kEndBelow) return *p.mid;
  return *p.end;
}

inline double evaluate(const EvalModel& model, const FeatureVector& f, int tiles_in_bag) {
  if (const auto* lin = std::get_if<LinearEval>(&model.kind)) {
    if (lin->weights.size() != lin->features.size()) throw std::invalid_argument("linear model arity mismatch");
    // Leave terms are summed separately so a per-leave partial sum can be cached.
    double move = 0, leave = 0;
    for (std::size_t i = 0; i < lin->features.size(); ++i)
      (is_leave_feature(lin->features[i]) ? leave : move) += lin->weights[i] * f[static_cast<std::size_t>(lin->features[i])];
    return move + leave;
  }
  if (const auto* mlp = std::get_if<MlpEval>(&model.kind)) {
    if (static_cast<int>(mlp->features.size()) != mlp->net.input_dim()) throw std::invalid_argument("mlp model arity mismatch");
    Eigen::VectorXd x(static_cast<Eigen::Index>(mlp->features.size()));
    for (std::size_t i = 0; i < mlp->features.size(); ++i) x(static_cast<Eigen::Index>(i)) = f[static_cast<std::size_t>(mlp->features[i])];
    return mlp->net.forward(x);
  }
  return evaluate(phase_model(std::get<PhaseSplitEval>(model.kind), tiles_in_bag), f, tiles_in_bag);
}

inline nlohmann::json model_to_json(const EvalModel& model) {
  auto names = [](const std::vector<Feature>& fs) {
    std::vector<std::string> out;
    for (Feature f : fs) out.emplace_back(kFeatureNames[static_cast<std::size_t>(f)]);
    return out;
  };
  if (const auto* lin = std::get_if<LinearEval>(&model.kind))
    return {{"type", "linear"}, {"feature_names", names(lin->features)}, {"weights", lin->weights}};
  if (const auto* mlp = std::get_if<MlpEval>(&model.kind)) {
    nlohmann::json j = mlp_to_json(mlp->net);
    j["type"] = "mlp";
    j["feature_names"] = names(mlp->features);
    return j;
  }
  const auto& p = std::get<PhaseSplitEval>(model.kind);
  return {{"type", "phase_split"},
          {"early", model_to_json(*p.early)},
          {"mid", model_to_json(*p.mid)},
          {"end", model_to_json(*p.end)}};
}

inline EvalModel model_from_json(const nlohmann::json& j, const std::string& path = "$") {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) throw ConfigError(path + ".type: missing model type");
  const auto type = j["type"].get<std::string>();
  auto features = [&]() {
    if (!j.contains("feature_names") || !j["feature_names"].is_array())
      throw ConfigError(path + ".feature_names: expected an array");
    std::vector<Feature> fs;
    for (std::size_t i = 0; i < j["feature_names"].size(); ++i) {
      try {
        fs.push_back(feature_from_name(j["feature_names"][i].get<std::string>()));
      } catch (const std::exception& e) {
        throw ConfigError(path + ".feature_names[" + std::to_string(i) + "]: " + e.what());
      }
    }
    return fs;
  };
  if (type == "linear") {
    auto fs = features();
    if (!j.contains("weights") || !j["weights"].is_array()) throw ConfigError(path + ".weights: expected an array");
    std::vector<double> w;
    for (const auto& x : j["weights"]) {
      if (!x.is_number()) throw ConfigError(path + ".weights: expected numbers");
      w.push_back(x.get<double>());
    }
    if (w.size() != fs.size())
      throw ConfigError(path + ".weights: " + std::to_string(w.size()) + " weights for " + std::to_string(fs.size()) + " features");
    return linear_model(std::move(fs), std::move(w));
  }
  if (type == "mlp") {
    auto fs = features();
    Mlp net = mlp_from_json(j, path);
    if (net.input_dim() != static_cast<int>(fs.size()))
      throw ConfigError(path + ".layers[0]: input width " + std::to_string(net.input_dim()) + " does not match " +
                        std::to_string(fs.size()) + " features");
    return EvalModel{MlpEval{std::move(fs), std::move(net)}};
  }
  if (type == "phase_split") {
    for (const char* k : {"early", "mid", "end"})
      if (!j.contains(k)) throw ConfigError(path + "." + k + ": missing sub-model");
    return phase_split(model_from_json(j["early"], path + ".early"), model_from_json(j["mid"], path + ".mid"),
                       model_from_json(j["end"], path + ".end"));
  }
  throw ConfigError(path + ".type: unknown model type '" + type + "'");
}

inline EvalModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model '" + path.string() + "'");
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Feature extraction and ranking

/// Shared, immutable inputs to static evaluation.
struct EvalContext {
  const Lexicon& lex;
  const GameConfig& cfg;
  const LeaveValueTable& leaves;
  int playability_samples = 4;
};

struct RankedMove {
  Move move;
  int score = 0;
  double value = 0;
  FeatureVector features{};
};

/// Feature extraction for one position. Leave-dependent features are cached
/// per leave, so scoring every move of a rack stays cheap.
class PositionEvaluator {
 public:
  PositionEvaluator(const EvalContext& ctx, const GameState& s, std::uint64_t seed, FeatureMask needed = kAllFeatures)
      : ctx_(ctx), s_(s), seed_(seed), needed_(needed), rack_(s.mover_rack()) {
    std::size_t stride = 1;
    for (int t = 0; t < kTileKinds; ++t) {
      stride_[static_cast<std::size_t>(t)] = stride;
      rack_key_ += rack_[static_cast<std::size_t>(t)] * stride;
      stride *= rack_[static_cast<std::size_t>(t)] + 1u;
    }
    cache_.resize(stride);
    pool_ = unseen_tiles(s, s.turn);
    for (int r = 0; r < kBoardSize; ++r) {
      for (int c = 0; c < kBoardSize; ++c) {
        if (s.board.empty(r, c)) continue;
        if (s.board.is_blank(r, c)) ++board_blanks_;
        else board_vc_ += is_vowel(s.board.letter(r, c)) ? 1 : -1;
      }
    }
  }

  std::size_t leave_key(const GeneratedPlace& g) const {
    std::size_t key = rack_key_;
    for (int k = 0; k < g.n_tiles; ++k) {
      const auto& t = g.tiles[static_cast<std::size_t>(k)];
      key -= stride_[t.blank ? kBlank : t.letter];
    }
    return key;
  }
  std::size_t leave_key_space() const { return cache_.size(); }

  FeatureVector features(const GeneratedPlace& g) {
    FeatureVector f = leave_features(g.leave, leave_key(g));
    f[kMoveScore] = g.score;
    int vc = board_vc_, blanks = board_blanks_;
    for (int k = 0; k < g.n_tiles; ++k) {
      const auto& t = g.tiles[static_cast<std::size_t>(k)];
      if (t.blank) ++blanks;
      else vc += is_vowel(t.letter) ? 1 : -1;
    }
    f[kBoardVcDiff] = vc;
    f[kBoardBlanks] = blanks;
    if (needed_ & (feature_bit(kOpenDL) | feature_bit(kOpenTL) | feature_bit(kOpenDW) | feature_bit(kOpenTW))) {
      Board after = s_.board;
      for (int k = 0; k < g.n_tiles; ++k) {
        const auto& t = g.tiles[static_cast<std::size_t>(k)];
        after.place(g.row + step_row(g.dir) * t.offset, g.col + step_col(g.dir) * t.offset, t.letter, t.blank);
      }
      auto open = opening_features(s_.board, after, ctx_.lex, ctx_.cfg);
      for (int i = 0; i < 4; ++i) f[static_cast<std::size_t>(kOpenDL + i)] = open[static_cast<std::size_t>(i)];
    }
    return f;
  }

  FeatureVector features(const Move& move, int score) {
    if (const auto* p = std::get_if<Place>(&move)) {
      GeneratedPlace g;
      g.row = p->row;
      g.col = p->col;
      g.dir = p->dir;
      g.n_tiles = static_cast<int>(p->tiles.size());
      std::copy(p->tiles.begin(), p->tiles.end(), g.tiles.begin());
      g.score = score;
      g.leave = leave_after(rack_, move);
      return features(g);
    }
    FeatureVector f = leave_features(leave_after(rack_, move));
    f[kMoveScore] = 0;
    f[kBoardVcDiff] = board_vc_;
    f[kBoardBlanks] = board_blanks_;
    return f;
  }

  const GameState& state() const { return s_; }

  FeatureVector leave_features(const TileCounts& leave) {
    std::size_t key = 0;
    for (int t = 0; t < kTileKinds; ++t) key += leave[static_cast<std::size_t>(t)] * stride_[static_cast<std::size_t>(t)];
    return leave_features(leave, key);
  }

  // `key` is the mixed-radix index of `leave` over the rack's tile counts.
  FeatureVector leave_features(const TileCounts& leave, std::size_t key) {
    auto& slot = cache_[key];
    if (!slot) {
      FeatureVector f{};
      f[kLeaveValue] = ctx_.leaves.value(leave);
      f[kCvDiff] = consonant_vowel_diff(leave);
      f[kBlanksLeft] = leave[kBlank];
      f[kLeaveLength] = count_total(leave);
      if (needed_ & feature_bit(kLeavePlayability))
        f[kLeavePlayability] = leave_playability(leave, pool_, ctx_.lex, ctx_.cfg, ctx_.playability_samples,
                                                 seed_mix(seed_, key));
      slot = f;
    }
    return *slot;
  }

 private:

  const EvalContext& ctx_;
  const GameState& s_;
  std::uint64_t seed_;
  FeatureMask needed_;
  TileCounts rack_;
  TileCounts pool_{};
  std::array<std::size_t, kTileKinds> stride_{};
  std::size_t rack_key_ = 0;
  std::vector<std::optional<FeatureVector>> cache_;
  int board_vc_ = 0;
  int board_blanks_ = 0;
};

/// Features of one legal move. Pass and exchange have move score 0.
inline FeatureVector extract_features(const GameState& s, const Move& move, const EvalContext& ctx, std::uint64_t seed) {
  PositionEvaluator pe(ctx, s, seed);
  return pe.features(move, score_move(s.board, move, ctx.cfg));
}

namespace detail {

// Values placements of one position. Linear models whose only
// move-dependent input is the move score are computed as a score term plus
// a cached per-leave term, with the same rounding as evaluate().
class PlacementValuer {
 public:
  PlacementValuer(const EvalModel& model, PositionEvaluator& pe, int bag) : model_(model), pe_(pe), bag_(bag) {
    const EvalModel* m = &model;
    while (const auto* p = std::get_if<PhaseSplitEval>(&m->kind)) m = &phase_model(*p, bag);
    lin_ = std::get_if<LinearEval>(&m->kind);
    if (lin_ && lin_->features.size() == lin_->weights.size()) {
      for (Feature f : lin_->features)
        if (f != kMoveScore && !is_leave_feature(f)) lin_ = nullptr;
    } else {
      lin_ = nullptr;
    }
    if (lin_) leave_part_.assign(pe.leave_key_space(), std::numeric_limits<double>::quiet_NaN());
  }

  double operator()(const GeneratedPlace& g) {
    if (!lin_) return evaluate(model_, pe_.features(g), bag_);
    double& leave = leave_part_[pe_.leave_key(g)];
    if (std::isnan(leave)) {
      const FeatureVector f = pe_.leave_features(g.leave);
      leave = 0;
      for (std::size_t i = 0; i < lin_->features.size(); ++i)
        if (lin_->features[i] != kMoveScore) leave += lin_->weights[i] * f[static_cast<std::size_t>(lin_->features[i])];
    }
    double move = 0;
    for (std::size_t i = 0; i < lin_->features.size(); ++i)
      if (lin_->features[i] == kMoveScore) move += lin_->weights[i] * g.score;
    return move + leave;
  }

 private:
  const EvalModel& model_;
  PositionEvaluator& pe_;
  int bag_;
  const LinearEval* lin_ = nullptr;
  std::vector<double> leave_part_;
};

inline bool ranked_before(const RankedMove& a, const RankedMove& b) {
  if (a.value != b.value) return a.value > b.value;
  return canonical_less(a.move, b.move);
}

}  // namespace detail

/// Top min(k, |moves|) moves, descending by value, ties in canonical order.
inline std::vector<RankedMove> rank_moves(const EvalModel& model, const GameState& s, const std::vector<Move>& moves,
                                          std::size_t k, const EvalContext& ctx, std::uint64_t seed) {
  PositionEvaluator pe(ctx, s, seed, required_features(model));
  std::vector<RankedMove> out;
  out.reserve(moves.size());
  for (const auto& m : moves) {
    RankedMove r{m, score_move(s.board, m, ctx.cfg), 0, {}};
    r.features = pe.features(m, r.score);
    r.value = evaluate(model, r.features, s.bag_size());
    out.push_back(std::move(r));
  }
  const std::size_t n = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), detail::ranked_before);
  out.resize(n);
  return out;
}

/// Generates and ranks every legal move; same result as generate_moves
/// followed by rank_moves, without materializing the whole move list.
inline std::vector<RankedMove> top_moves(const EvalModel& model, const GameState& s, std::size_t k,
                                         const EvalContext& ctx, std::uint64_t seed) {
  if (k == 0) return {};
  PositionEvaluator pe(ctx, s, seed, required_features(model));
  const int bag = s.bag_size();
  struct Scored {
    double value;
    GeneratedPlace g;
  };
  std::vector<Scored> places;
  detail::PlacementValuer value(model, pe, bag);
  for_each_placement(s.board, s.mover_rack(), ctx.lex, ctx.cfg,
                     [&](const GeneratedPlace& g) { places.push_back({value(g), g}); });
  std::vector<RankedMove> out;
  auto threshold = -std::numeric_limits<double>::infinity();
  if (places.size() > k) {
    std::vector<double> values;
    values.reserve(places.size());
    for (const auto& p : places) values.push_back(p.value);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end(), std::greater<>());
    threshold = values[k - 1];
  }
  for (const auto& p : places) {
    if (p.value < threshold) continue;
    RankedMove r{materialize(s.board, p.g), p.g.score, p.value, {}};
    r.features = pe.features(p.g);
    out.push_back(std::move(r));
  }
  std::vector<Move> others;
  if (bag >= kRackSize)
    for (auto& e : enumerate_exchanges(s.mover_rack())) others.emplace_back(std::move(e));
  others.emplace_back(Pass{});
  for (auto& m : others) {
    RankedMove r{std::move(m), 0, 0, {}};
    r.features = pe.features(r.move, 0);
    r.value = evaluate(model, r.features, bag);
    out.push_back(std::move(r));
  }
  const std::size_t n = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), detail::ranked_before);
  out.resize(n);
  return out;
}

/// The single best move by static evaluation (ties in canonical order).
inline RankedMove best_move(const EvalModel& model, const GameState& s, const EvalContext& ctx, std::uint64_t seed) {
  PositionEvaluator pe(ctx, s, seed, required_features(model));
  const int bag = s.bag_size();
  std::optional<GeneratedPlace> best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::optional<Place> best_place;
  detail::PlacementValuer value(model, pe, bag);
  for_each_placement(s.board, s.mover_rack(), ctx.lex, ctx.cfg, [&](const GeneratedPlace& g) {
    const double v = value(g);
    if (v < best_value) return;
    if (v == best_value) {
      if (!best_place) best_place = materialize(s.board, *best);
      Place p = materialize(s.board, g);
      if (!canonical_less(Move{p}, Move{*best_place})) return;
      best_place = std::move(p);
    } else {
      best_place.reset();
    }
    best_value = v;
    best = g;
  });
  RankedMove out;
  if (best) {
    out.move = best_place ? *best_place : materialize(s.board, *best);
    out.score = best->score;
    out.value = best_value;
    out.features = pe.features(*best);
  }
  bool have = best.has_value();
  auto consider = [&](Move m) {
    FeatureVector f = pe.features(m, 0);
    RankedMove r{std::move(m), 0, evaluate(model, f, bag), f};
    if (!have || detail::ranked_before(r, out)) out = std::move(r);
    have = true;
  };
  if (bag >= kRackSize)
    for (auto& e : enumerate_exchanges(s.mover_rack())) consider(std::move(e));
  consider(Pass{});
  return out;
}

}  // namespace scrabble_lab
