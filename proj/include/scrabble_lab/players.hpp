#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scrabble_lab/engine.hpp"
#include "scrabble_lab/evaluation.hpp"
#include "scrabble_lab/movegen.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab {

/// Static argmax of the evaluation model.
struct SpeedySpec {
  EvalModel model = e_quackle();
};

/// Static top-`candidates`, each re-scored by the mean of rollout values.
struct ChampionshipSpec {
  EvalModel model = e_quackle();
  int candidates = 10;
  int plies = 2;
  int rollouts = 50;
  std::optional<int> time_budget_ms;  // replaces the rollout count when set
  double leave_weight = 1.0;
};

/// Uniform over legal moves; with placements_only, over placements when any exist.
struct RandomSpec {
  bool placements_only = false;
};

/// Always passes. A baseline and test stub.
struct PassSpec {};

using PlayerSpec = std::variant<SpeedySpec, ChampionshipSpec, RandomSpec, PassSpec>;

struct Chosen {
  Move move;
  int score = 0;
};

inline std::string player_name(const PlayerSpec& spec) {
  switch (spec.index()) {
    case 0: return "speedy";
    case 1: return "championship";
    case 2: return "random";
    default: return "pass";
  }
}

// ---------------------------------------------------------------------------
// Rollouts

namespace detail {

// Copy of the game without its move log.
inline GameState fork_state(const GameState& s) {
  GameState f;
  f.board = s.board;
  f.racks = s.racks;
  f.scores = s.scores;
  f.bag = s.bag;
  f.turn = s.turn;
  f.zero_score_turns = s.zero_score_turns;
  f.finalized = s.finalized;
  f.rng = s.rng;
  return f;
}

// Pools the bag with the opponent's rack and redeals the opponent from it,
// so a simulation never sees the real opponent tiles.
inline void resample_opponent(GameState& s, int viewer, Rng& rng) {
  auto& opp = s.racks[static_cast<std::size_t>(1 - viewer)];
  const int n = count_total(opp);
  for (int t = 0; t < kTileKinds; ++t) s.bag.insert(s.bag.end(), opp[static_cast<std::size_t>(t)], static_cast<std::uint8_t>(t));
  std::sort(s.bag.begin(), s.bag.end());
  opp = TileCounts{};
  for (int k = 0; k < n; ++k) {
    auto i = static_cast<std::size_t>(uniform_below(rng, s.bag.size()));
    ++opp[s.bag[i]];
    s.bag[i] = s.bag.back();
    s.bag.pop_back();
  }
}

}  // namespace detail

/// Plays `candidate`, redeals the opponent from the unseen tiles, then lets
/// both sides play the static best move for `plies` more turns. Returns the
/// mover's spread plus leave_weight times the value of the mover's last leave
/// (finalized spread, without the leave term, if the game ends).
inline double rollout_value(const GameState& s, const Move& candidate, int candidate_score, int plies,
                            const EvalModel& model, const EvalContext& ctx, Rng& rng, double leave_weight = 1.0) {
  const int mover = s.turn;
  GameState g = detail::fork_state(s);
  detail::resample_opponent(g, mover, rng);
  g.rng.seed(rng());
  TileCounts leave = leave_after(g.racks[static_cast<std::size_t>(mover)], candidate);
  apply_trusted(g, candidate, candidate_score, false);
  for (int p = 0; p < plies && !is_over(g); ++p) {
    const bool mine = g.turn == mover;
    RankedMove m = best_move(model, g, ctx, rng());
    if (mine) leave = leave_after(g.mover_rack(), m.move);
    apply_trusted(g, m.move, m.score, false);
  }
  if (is_over(g)) {
    g = finalize(g, ctx.cfg);
    return g.scores[static_cast<std::size_t>(mover)] - g.scores[static_cast<std::size_t>(1 - mover)];
  }
  return g.scores[static_cast<std::size_t>(mover)] - g.scores[static_cast<std::size_t>(1 - mover)] +
         leave_weight * ctx.leaves.value(leave);
}

// ---------------------------------------------------------------------------
// Decisions

struct SimulatedMove {
  RankedMove ranked;  // static evaluation
  double mean = 0.0;  // mean rollout value; the static value when not simulated
  int rollouts = 0;
};

/// The static top candidates reordered by mean rollout value. Equal means
/// keep the static order.
inline std::vector<SimulatedMove> championship_ranking(const ChampionshipSpec& spec, const GameState& s,
                                                       const EvalContext& ctx, Rng& rng) {
  if (spec.candidates < 1 || spec.plies < 0) throw std::invalid_argument("championship needs candidates >= 1, plies >= 0");
  const std::uint64_t seed = rng();
  auto top = top_moves(spec.model, s, static_cast<std::size_t>(spec.candidates), ctx, seed_mix(seed, 0));
  std::vector<SimulatedMove> out;
  out.reserve(top.size());
  for (auto& m : top) out.push_back({std::move(m), 0.0, 0});
  const bool simulate = spec.time_budget_ms ? *spec.time_budget_ms > 0 : spec.rollouts > 0;
  if (out.size() == 1 || !simulate) {
    for (auto& m : out) m.mean = m.ranked.value;
    return out;
  }

  // Rollout r uses the same random stream for every candidate, so candidates
  // are compared on identical opponent racks and draws where possible.
  std::vector<double> sum(out.size(), 0.0);
  int rounds = 0;
  const auto start = std::chrono::steady_clock::now();
  for (;; ++rounds) {
    if (spec.time_budget_ms) {
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
      if (rounds > 0 && elapsed.count() >= *spec.time_budget_ms) break;
    } else if (rounds >= spec.rollouts) {
      break;
    }
    for (std::size_t j = 0; j < out.size(); ++j) {
      Rng stream(seed_mix(seed, 1 + static_cast<std::uint64_t>(rounds)));
      sum[j] += rollout_value(s, out[j].ranked.move, out[j].ranked.score, spec.plies, spec.model, ctx, stream,
                              spec.leave_weight);
    }
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j].mean = sum[j] / rounds;
    out[j].rollouts = rounds;
  }
  std::stable_sort(out.begin(), out.end(), [](const SimulatedMove& a, const SimulatedMove& b) { return a.mean > b.mean; });
  return out;
}

inline Chosen choose_championship(const ChampionshipSpec& spec, const GameState& s, const EvalContext& ctx, Rng& rng) {
  auto ranking = championship_ranking(spec, s, ctx, rng);
  return {ranking.front().ranked.move, ranking.front().ranked.score};
}

inline Chosen choose_move(const PlayerSpec& spec, const GameState& s, const EvalContext& ctx, Rng& rng) {
  if (const auto* p = std::get_if<SpeedySpec>(&spec)) {
    RankedMove m = best_move(p->model, s, ctx, rng());
    return {std::move(m.move), m.score};
  }
  if (const auto* p = std::get_if<ChampionshipSpec>(&spec)) return choose_championship(*p, s, ctx, rng);
  if (const auto* p = std::get_if<RandomSpec>(&spec)) {
    auto moves = generate_scored_moves(s, ctx.lex, ctx.cfg);
    std::size_t n = moves.size();
    if (p->placements_only) {
      const auto places = static_cast<std::size_t>(
          std::count_if(moves.begin(), moves.end(), [](const ScoredMove& m) { return is_place(m.move); }));
      if (places > 0) n = places;
    }
    auto& m = moves[static_cast<std::size_t>(uniform_below(rng, n))];
    return {std::move(m.move), m.score};
  }
  return {Pass{}, 0};
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json player_to_json(const PlayerSpec& spec) {
  if (const auto* p = std::get_if<SpeedySpec>(&spec)) return {{"type", "speedy"}, {"model", model_to_json(p->model)}};
  if (const auto* p = std::get_if<ChampionshipSpec>(&spec)) {
    nlohmann::json j = {{"type", "championship"}, {"candidates", p->candidates}, {"plies", p->plies},
                        {"rollouts", p->rollouts},  {"leave_weight", p->leave_weight}, {"model", model_to_json(p->model)}};
    if (p->time_budget_ms) j["time_budget_ms"] = *p->time_budget_ms;
    return j;
  }
  if (const auto* p = std::get_if<RandomSpec>(&spec)) return {{"type", "random"}, {"placements_only", p->placements_only}};
  return {{"type", "pass"}};
}

/// `model` may be an object, the string "e_quackle", or absent (e_quackle).
inline PlayerSpec player_from_json(const nlohmann::json& j, const std::string& path = "$") {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) throw ConfigError(path + ".type: missing player type");
  const auto type = j["type"].get<std::string>();
  auto model = [&]() -> EvalModel {
    if (!j.contains("model")) return e_quackle();
    const auto& m = j["model"];
    if (m.is_string()) {
      if (m.get<std::string>() == "e_quackle") return e_quackle();
      throw ConfigError(path + ".model: unknown built-in model '" + m.get<std::string>() + "'");
    }
    return model_from_json(m, path + ".model");
  };
  auto integer = [&](const char* key, int fallback, int min) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
    const int v = j[key].get<int>();
    if (v < min) throw ConfigError(path + "." + key + ": must be >= " + std::to_string(min));
    return v;
  };
  if (type == "speedy") return SpeedySpec{model()};
  if (type == "championship") {
    ChampionshipSpec c;
    c.model = model();
    c.candidates = integer("candidates", c.candidates, 1);
    c.plies = integer("plies", c.plies, 0);
    c.rollouts = integer("rollouts", c.rollouts, 0);
    if (j.contains("time_budget_ms") && !j["time_budget_ms"].is_null()) c.time_budget_ms = integer("time_budget_ms", 0, 1);
    if (j.contains("leave_weight")) {
      if (!j["leave_weight"].is_number()) throw ConfigError(path + ".leave_weight: expected a number");
      c.leave_weight = j["leave_weight"].get<double>();
    }
    return c;
  }
  if (type == "random") {
    RandomSpec r;
    if (j.contains("placements_only")) {
      if (!j["placements_only"].is_boolean()) throw ConfigError(path + ".placements_only: expected a boolean");
      r.placements_only = j["placements_only"].get<bool>();
    }
    return r;
  }
  if (type == "pass") return PassSpec{};
  throw ConfigError(path + ".type: unknown player type '" + type + "'");
}

inline PlayerSpec load_player(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open player spec '" + path.string() + "'");
  try {
    return player_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace scrabble_lab
