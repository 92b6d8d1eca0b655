#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scrabble_lab/engine.hpp"
#include "scrabble_lab/evaluation.hpp"
#include "scrabble_lab/parallel.hpp"
#include "scrabble_lab/players.hpp"
#include "scrabble_lab/rng.hpp"

namespace scrabble_lab {

// ---------------------------------------------------------------------------
// Confidence bounds

inline double hoeffding_half_width(double delta, long long n) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
  if (n < 1) throw std::domain_error("n must be at least 1");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

/// KL(Bernoulli(p) || Bernoulli(q)) in nats, with 0 log 0 = 0.
inline double bernoulli_kl(double p, double q) {
  auto term = [](double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return a * std::log(a / b);
  };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// hi = max{q in [p, 1] : n KL(p, q) <= ln(1/delta)}, lo the mirror on [0, p].
/// Bisection runs until the bracket stops shrinking in double precision.
inline Interval kl_confidence_interval(double p_hat, double delta, long long n) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw std::domain_error("p_hat must lie in [0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
  if (n < 1) throw std::domain_error("n must be at least 1");
  const double radius = std::log(1.0 / delta);
  const double nd = static_cast<double>(n);
  auto inside = [&](double q) { return nd * bernoulli_kl(p_hat, q) <= radius; };
  // Invariant: `in` satisfies the constraint, `out` does not.
  auto solve = [&](double in, double out) {
    if (inside(out)) return out;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (in + out);
      if (mid == in || mid == out) break;
      (inside(mid) ? in : out) = mid;
    }
    return in;
  };
  return {solve(p_hat, 0.0), solve(p_hat, 1.0)};
}

// ---------------------------------------------------------------------------
// Games

struct GameResult {
  std::uint64_t seed = 0;
  int winner = -1;  // seat index, -1 for a draw
  std::array<int, 2> scores{};
  std::vector<LoggedMove> log;
};

/// Plays one game to completion; seat 0 moves first. Each seat draws its
/// decisions from its own stream, so a seat's behaviour does not depend on
/// what the other seat consumes.
inline GameResult play_game(const PlayerSpec& first, const PlayerSpec& second, const EvalContext& ctx,
                            std::uint64_t seed) {
  GameState s = new_game(ctx.cfg, seed);
  std::array<Rng, 2> rngs{Rng(seed_mix(seed, 1)), Rng(seed_mix(seed, 2))};
  const std::array<const PlayerSpec*, 2> seats{&first, &second};
  while (!is_over(s)) {
    const auto seat = static_cast<std::size_t>(s.turn);
    Chosen c = choose_move(*seats[seat], s, ctx, rngs[seat]);
    apply_trusted(s, c.move, c.score);
  }
  s = finalize(s, ctx.cfg);
  GameResult r;
  r.seed = seed;
  r.scores = s.scores;
  r.winner = s.scores[0] > s.scores[1] ? 0 : s.scores[1] > s.scores[0] ? 1 : -1;
  r.log = std::move(s.log);
  return r;
}

inline nlohmann::json game_to_json(const GameResult& g, std::size_t index, int seat_of_a) {
  nlohmann::json moves = nlohmann::json::array();
  for (const auto& m : g.log)
    moves.push_back({{"player", m.player}, {"rack", counts_to_string(m.rack_before)}, {"move", m.notation}, {"score", m.score}});
  return {{"game", index}, {"seed", g.seed}, {"a_seat", seat_of_a}, {"winner", g.winner}, {"scores", g.scores}, {"moves", moves}};
}

// ---------------------------------------------------------------------------
// Matches

enum class Seating {
  Fixed,      // A always moves first
  Alternate,  // A moves first in even-numbered games
  Paired,     // games 2k and 2k+1 share a deal with seats swapped
};

struct MatchOptions {
  Seating seating = Seating::Alternate;
  bool keep_games = false;
};

struct MatchStats {
  long long n_games = 0;
  std::array<long long, 2> wins{};  // by spec: [A, B]
  long long draws = 0;
  long long spread_sum = 0;         // A's points minus B's, over all games
  double win_rate = 0.0;            // A's, draws as half
  double hoeffding_half_width = 0.0;
  Interval kl_interval;
  double delta = 0.05;
  std::uint64_t master_seed = 0;
  std::vector<GameResult> games;  // when keep_games
  std::vector<int> a_seats;

  double mean_spread() const { return n_games ? static_cast<double>(spread_sum) / static_cast<double>(n_games) : 0.0; }
};

inline std::string seating_name(Seating s) {
  switch (s) {
    case Seating::Fixed: return "fixed";
    case Seating::Alternate: return "alternate";
    default: return "paired";
  }
}

inline Seating seating_from_name(const std::string& name) {
  if (name == "fixed") return Seating::Fixed;
  if (name == "alternate") return Seating::Alternate;
  if (name == "paired") return Seating::Paired;
  throw ConfigError("unknown seating '" + name + "' (fixed, alternate, paired)");
}

/// Seat of spec A and the deal seed for game i.
inline std::pair<int, std::uint64_t> match_schedule(Seating seating, std::uint64_t master_seed, std::size_t i) {
  switch (seating) {
    case Seating::Fixed: return {0, seed_mix(master_seed, i)};
    case Seating::Alternate: return {static_cast<int>(i % 2), seed_mix(master_seed, i)};
    default: return {static_cast<int>(i % 2), seed_mix(master_seed, i / 2)};
  }
}

inline MatchStats run_match(const PlayerSpec& a, const PlayerSpec& b, long long n, double delta,
                            std::uint64_t master_seed, int workers, const EvalContext& ctx,
                            const MatchOptions& options = {}) {
  if (n < 1) throw std::invalid_argument("a match needs at least one game");
  const auto count = static_cast<std::size_t>(n);
  std::vector<GameResult> games(count);
  std::vector<int> seats(count);
  parallel_for(count, workers, [&](std::size_t i) {
    const auto [seat, seed] = match_schedule(options.seating, master_seed, i);
    seats[i] = seat;
    games[i] = seat == 0 ? play_game(a, b, ctx, seed) : play_game(b, a, ctx, seed);
  });
  MatchStats st;
  st.n_games = n;
  st.delta = delta;
  st.master_seed = master_seed;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& g = games[i];
    const int sa = seats[i];
    st.spread_sum += g.scores[static_cast<std::size_t>(sa)] - g.scores[static_cast<std::size_t>(1 - sa)];
    if (g.winner < 0) ++st.draws;
    else ++st.wins[g.winner == sa ? 0 : 1];
  }
  st.win_rate = (static_cast<double>(st.wins[0]) + 0.5 * static_cast<double>(st.draws)) / static_cast<double>(n);
  st.hoeffding_half_width = hoeffding_half_width(delta, n);
  st.kl_interval = kl_confidence_interval(st.win_rate, delta, n);
  if (options.keep_games) {
    st.games = std::move(games);
    st.a_seats = std::move(seats);
  }
  return st;
}

inline nlohmann::json match_to_json(const MatchStats& st) {
  return {{"n_games", st.n_games},
          {"wins", st.wins},
          {"draws", st.draws},
          {"win_rate", st.win_rate},
          {"spread_sum", st.spread_sum},
          {"mean_spread", st.mean_spread()},
          {"delta", st.delta},
          {"hoeffding_half_width", st.hoeffding_half_width},
          {"kl_interval", {st.kl_interval.lo, st.kl_interval.hi}},
          {"master_seed", st.master_seed}};
}

}  // namespace scrabble_lab
